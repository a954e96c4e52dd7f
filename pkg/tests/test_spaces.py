import numpy as np
import pytest

from boident.spaces import (
    GRID_ENUM_CAP,
    DimensionMismatchError,
    ParameterSpace,
    ground_truth_box,
)


def make_space(lower, upper, grid_res=100):
    names = [f"p{i}" for i in range(len(lower))]
    return ParameterSpace(names, lower, upper, grid_res)


class TestConstruction:
    def test_rejects_equal_bounds(self):
        with pytest.raises(ValueError):
            make_space([0.0, 1.0], [1.0, 1.0])

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            make_space([2.0], [1.0])

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            ParameterSpace(["a", "a"], [0.0, 0.0], [1.0, 1.0])

    def test_rejects_small_grid_res(self):
        with pytest.raises(ValueError):
            make_space([0.0], [1.0], grid_res=1)

    def test_dim_and_width(self):
        sp = make_space([0.0, 1.0], [2.0, 5.0])
        assert sp.dim == 2
        assert np.allclose(sp.width, [2.0, 4.0])


class TestNormalize:
    def test_midpoint(self):
        sp = make_space([0.0], [2.0])
        assert sp.normalize(np.array([1.0])) == pytest.approx([0.5])

    def test_lower_maps_to_zero(self):
        sp = make_space([3.0, -1.0], [4.0, 1.0])
        assert np.allclose(sp.normalize(sp.lower), 0.0)

    def test_affine_example(self):
        # independent arithmetic: (2-1)/(3-1)=0.5, (5-2)/(6-2)=0.75
        sp = make_space([1.0, 2.0], [3.0, 6.0])
        assert np.allclose(sp.normalize(np.array([2.0, 5.0])), [0.5, 0.75])

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        sp = make_space([0.5, 10.0, -3.0], [1.5, 400.0, -1.0])
        for _ in range(200):
            theta = sp.lower + rng.random(3) * sp.width
            back = sp.denormalize(sp.normalize(theta))
            assert np.allclose(back, theta, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        sp = make_space([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(DimensionMismatchError):
            sp.normalize(np.array([0.5]))
        with pytest.raises(DimensionMismatchError):
            sp.denormalize(np.array([0.5, 0.5, 0.5]))

    def test_batch_normalize(self):
        sp = make_space([0.0, 0.0], [2.0, 4.0])
        batch = np.array([[1.0, 1.0], [2.0, 4.0]])
        assert np.allclose(sp.normalize(batch), [[0.5, 0.25], [1.0, 1.0]])


class TestGroundTruthBox:
    def test_ten_percent(self):
        sp = make_space([0.0], [100.0])
        box = ground_truth_box(sp, np.array([10.0]), 0.1)
        assert np.allclose(box.lower, [9.0])
        assert np.allclose(box.upper, [11.0])

    def test_quarter(self):
        sp = make_space([0.0, 0.0], [10.0, 10.0])
        box = ground_truth_box(sp, np.array([2.0, 4.0]), 0.25)
        assert np.allclose(box.lower, [1.5, 3.0])
        assert np.allclose(box.upper, [2.5, 5.0])

    def test_zero_frac_rejected(self):
        sp = make_space([0.0], [100.0])
        with pytest.raises(ValueError):
            ground_truth_box(sp, np.array([10.0]), 0.0)

    def test_nonpositive_truth_rejected(self):
        sp = make_space([-5.0], [5.0])
        with pytest.raises(ValueError):
            ground_truth_box(sp, np.array([0.0]), 0.1)
        with pytest.raises(ValueError):
            ground_truth_box(sp, np.array([-1.0]), 0.1)

    def test_preserves_names_and_grid(self):
        sp = ParameterSpace(["mass"], [0.0], [100.0], grid_res=37)
        box = ground_truth_box(sp, np.array([10.0]), 0.1)
        assert box.names == ("mass",)
        assert box.grid_res == 37


class TestSampling:
    def test_mean_near_half(self):
        sp = make_space([0.0, 0.0], [1.0, 1.0])
        samples = sp.sample_uniform(0, 1000)
        assert np.all(np.abs(samples.mean(axis=0) - 0.5) < 0.05)

    def test_determinism(self):
        sp = make_space([0.5], [1.5])
        assert np.array_equal(sp.sample_uniform(3, 50), sp.sample_uniform(3, 50))

    def test_containment(self):
        sp = make_space([2.0, -1.0], [3.0, 4.0])
        samples = sp.sample_uniform(1, 500)
        assert np.all(samples >= sp.lower) and np.all(samples <= sp.upper)

    def test_rejects_nonpositive_n(self):
        sp = make_space([0.0], [1.0])
        with pytest.raises(ValueError):
            sp.sample_uniform(0, 0)


class TestGrid:
    def test_counts_small_dims(self):
        for dim in (1, 2, 3):
            sp = make_space([0.0] * dim, [1.0] * dim, grid_res=7)
            assert sp.grid().shape == (7**dim, dim)

    def test_cap_rejected(self):
        sp = make_space([0.0] * 4, [1.0] * 4, grid_res=100)
        assert 100**4 > GRID_ENUM_CAP
        with pytest.raises(ValueError):
            sp.grid()

    def test_grid_endpoints(self):
        sp = make_space([1.0], [3.0], grid_res=5)
        g = sp.grid().ravel()
        assert g[0] == 1.0 and g[-1] == 3.0


class TestContainsClip:
    def test_contains(self):
        sp = make_space([0.0], [1.0])
        assert sp.contains(np.array([0.5]))
        assert not sp.contains(np.array([1.5]))

    def test_clip(self):
        sp = make_space([0.0, 0.0], [1.0, 1.0])
        assert np.allclose(sp.clip(np.array([-1.0, 2.0])), [0.0, 1.0])


class TestConfigIo:
    def test_round_trip(self, tmp_path):
        sp = ParameterSpace(["mass", "friction"], [0.5, 0.1], [1.5, 0.9], grid_res=50)
        path = tmp_path / "space.yaml"
        sp.to_config(path)
        loaded = ParameterSpace.from_config(path)
        assert loaded.names == sp.names
        assert np.array_equal(loaded.lower, sp.lower)
        assert np.array_equal(loaded.upper, sp.upper)
        assert loaded.grid_res == 50
