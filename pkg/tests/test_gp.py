import numpy as np
import pytest

from boident import gp as gp_mod
from boident.gp import GpFitError, KernelParams, fit, kernel_matrix, optimize_hyperparams


def random_dataset(rng, n, dim):
    x = rng.random((n, dim))
    y = rng.normal(0.0, 2.0, size=n)
    return list(zip(x, y))


def separated_dataset(rng, n, dim):
    """Random points with a minimum pairwise separation in 1-D.

    Exact noise-free interpolation is only numerically meaningful while
    the kernel matrix stays invertible in double precision; nearly
    coincident 1-D inputs push its condition number past 1e16. Points are
    drawn in distinct cells of a coarse grid, which bounds the condition
    number (~1e6 here) without making the data regular.
    """
    if dim == 1:
        cells = rng.choice(10, size=n, replace=False)
        x = (cells[:, None] + rng.random((n, 1)) * 0.5) / 10.0
    else:
        x = rng.random((n, dim))
    y = rng.normal(0.0, 2.0, size=n)
    return list(zip(x, y))


class TestKernelParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            KernelParams(signal_var=0.0, length_scales=[0.3])
        with pytest.raises(ValueError):
            KernelParams(signal_var=1.0, length_scales=[0.0])
        with pytest.raises(ValueError):
            KernelParams(signal_var=1.0, length_scales=[0.3], noise_var=-1.0)

    def test_kernel_symmetry(self):
        rng = np.random.default_rng(0)
        x = rng.random((30, 3))
        k = kernel_matrix(KernelParams(1.5, [0.2, 0.4, 0.3]), x, x)
        assert np.max(np.abs(k - k.T)) < 1e-14

    def test_kernel_diagonal_is_signal_var(self):
        rng = np.random.default_rng(1)
        x = rng.random((10, 2))
        k = kernel_matrix(KernelParams(2.5, [0.3, 0.3]), x, x)
        assert np.allclose(np.diag(k), 2.5)


class TestFitPredict:
    def test_single_point_interpolation(self):
        kernel = KernelParams(1.0, [0.3], noise_var=0.0)
        surrogate = fit([(np.array([0.4]), 2.0)], kernel)
        mean, var = surrogate.predict(np.array([0.4]))
        assert abs(mean - 2.0) < 1e-6
        assert var < 1e-7

    def test_one_point_closed_form(self):
        # zero prior mean: mean(r) = y*exp(-r^2/(2 l^2)),
        # var(r) = s*(1 - exp(-r^2/l^2))
        s, ell, y = 2.0, 0.25, 1.7
        kernel = KernelParams(s, [ell], noise_var=0.0)
        surrogate = fit([(np.array([0.3]), y)], kernel, prior_mean=0.0)
        for r in (0.0, 0.05, 0.2, 0.6):
            mean, var = surrogate.predict(np.array([0.3 + r]))
            assert abs(mean - y * np.exp(-(r**2) / (2 * ell**2))) < 1e-10
            assert abs(var - s * (1.0 - np.exp(-(r**2) / ell**2))) < 1e-10

    def test_prior_recovery_far_from_data(self):
        kernel = KernelParams(3.0, [0.05], noise_var=0.0)
        pts = [(np.array([0.1]), 5.0), (np.array([0.2]), 7.0)]
        surrogate = fit(pts, kernel)
        mean, var = surrogate.predict(np.array([50.0]))
        assert abs(mean - 6.0) < 1e-9  # prior mean = mean of targets
        assert abs(var - 3.0) < 1e-9

    def test_interpolation_many_random_datasets(self):
        rng = np.random.default_rng(0)
        for trial in range(50):
            dim = 1 if trial % 2 == 0 else 5
            n = int(rng.integers(3, 11 if dim == 1 else 12))
            pts = separated_dataset(rng, n, dim)
            ell = 0.2 if dim == 1 else 0.3
            kernel = KernelParams(1.0, np.full(dim, ell), noise_var=0.0)
            surrogate = fit(pts, kernel)
            for x, y in zip(surrogate.inputs, surrogate.targets):
                mean, var = surrogate.predict(x)
                assert abs(mean - y) < 1e-6
                assert var < 1e-7

    def test_duplicate_inputs_merged(self):
        kernel = KernelParams(1.0, [0.3], noise_var=0.0)
        x = np.array([0.5])
        surrogate = fit([(x, 1.0), (x.copy(), 3.0)], kernel)
        assert len(surrogate.targets) == 1
        mean, _ = surrogate.predict(x)
        assert abs(mean - 2.0) < 1e-6

    def test_predict_deterministic_and_pure(self):
        rng = np.random.default_rng(2)
        pts = random_dataset(rng, 8, 2)
        surrogate = fit(pts, KernelParams(1.0, [0.3, 0.3]))
        q = np.array([0.3, 0.7])
        first = surrogate.predict(q)
        second = surrogate.predict(q)
        assert first == second

    def test_predict_dimension_mismatch(self):
        surrogate = fit([(np.array([0.1, 0.2]), 1.0)], KernelParams(1.0, [0.3, 0.3]))
        with pytest.raises(ValueError):
            surrogate.predict(np.array([0.1]))

    def test_rejects_nonfinite_targets(self):
        with pytest.raises(ValueError):
            fit([(np.array([0.1]), np.inf)], KernelParams(1.0, [0.3]))

    def test_fit_error_on_hopeless_matrix(self):
        # thousands of nearly identical points (just above the merge
        # tolerance) with a huge signal variance: jitter cannot rescue
        # the Cholesky within its cap.
        base = np.array([0.5])
        pts = [(base + i * 1e-9, float(i)) for i in range(60)]
        kernel = KernelParams(1e12, [0.3], noise_var=0.0)
        with pytest.raises(GpFitError):
            fit(pts, kernel)

    def test_variance_clamped_nonnegative(self):
        rng = np.random.default_rng(3)
        pts = random_dataset(rng, 20, 1)
        surrogate = fit(pts, KernelParams(1.0, [0.3]))
        _, var = surrogate.predict_batch(rng.random((200, 1)))
        assert np.all(var >= 0.0)


class TestHyperparams:
    def test_lml_never_regresses(self):
        rng = np.random.default_rng(4)
        pts = random_dataset(rng, 12, 2)
        init = KernelParams.default(2)
        before = gp_mod.log_marginal_likelihood(pts, init)
        tuned = optimize_hyperparams(pts, init, rng_seed=0)
        after = gp_mod.log_marginal_likelihood(pts, tuned)
        assert after >= before - 1e-9

    def test_constant_targets_no_regression(self):
        x = np.linspace(0.0, 1.0, 10).reshape(-1, 1)
        pts = [(xi, 3.0) for xi in x]
        init = KernelParams.default(1)
        tuned = optimize_hyperparams(pts, init, rng_seed=1)
        assert gp_mod.log_marginal_likelihood(pts, tuned) >= gp_mod.log_marginal_likelihood(
            pts, init
        )

    def test_recovers_length_scale_within_factor_two(self):
        # draw from a known SE kernel with l = 0.2 and refit
        rng = np.random.default_rng(5)
        x = rng.random((50, 1))
        true = KernelParams(1.0, [0.2], noise_var=1e-6)
        k = kernel_matrix(true, x, x) + 1e-6 * np.eye(50)
        y = np.linalg.cholesky(k) @ rng.standard_normal(50)
        pts = list(zip(x, y))
        tuned = optimize_hyperparams(pts, KernelParams(1.0, [0.5], noise_var=1e-6), rng_seed=2)
        ell = float(tuned.length_scales[0])
        assert 0.1 <= ell <= 0.4

    def test_fewer_than_three_points_returns_init(self):
        init = KernelParams.default(1)
        pts = [(np.array([0.2]), 1.0), (np.array([0.8]), 2.0)]
        assert optimize_hyperparams(pts, init) is init
