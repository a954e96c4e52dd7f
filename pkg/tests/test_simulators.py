import numpy as np
import pytest

from boident.core import SimulationDiverged, Trajectory
from boident.simulators import (
    DEFAULT_TRUTH,
    PushSimulator,
    StructureSimulator,
    com_height,
    default_push_space,
    default_structure_space,
    generate_trajectories,
    load_trajectories,
    make_push_dataset,
    push_displacement,
    save_trajectories,
    scripted_controls,
)
from boident.simulators.structure import (
    INERT_PARAM_NAMES,
    STRUCTURE_PARAM_NAMES,
    StructureParams,
)

GRAVITY = 9.81


def divergent_theta():
    bad = DEFAULT_TRUTH.copy()
    bad[4] = 1e9   # cable_stiffness
    bad[9] = 1e12  # max_tension: clamp no longer rescues the stiff cables
    return bad


class TestPushDisplacement:
    def test_printed_values(self):
        assert push_displacement(1.0, 0.32, 1.0) == pytest.approx(1.5625, abs=1e-12)
        assert push_displacement(0.8, 0.5, 1.0) == pytest.approx(1.5625, abs=1e-12)

    def test_zero_impulse(self):
        assert push_displacement(1.0, 0.5, 0.0) == 0.0

    def test_kinematic_oracle(self):
        # independent forward integration: v0 = ft/m decelerating at rate mu
        # (gravity absorbed) until stop
        m, mu, ft = 2.0, 0.5, 2.0
        v, s, dt = ft / m, 0.0, 1e-6
        while v > 0.0:
            s += v * dt
            v -= mu * dt
        assert push_displacement(m, mu, ft) == pytest.approx(1.0, abs=1e-12)
        assert push_displacement(m, mu, ft) == pytest.approx(s, abs=1e-4)

    def test_degeneracy_bit_equal(self):
        # equal m^2 mu and equal ft give bit-identical displacement; the
        # pairs are built by power-of-two rescaling (m -> 2^k m,
        # mu -> mu / 4^k), which keeps m^2 mu exactly equal in floats
        rng = np.random.default_rng(0)
        for _ in range(1000):
            m1 = rng.uniform(0.5, 1.5)
            mu1 = rng.uniform(0.1, 0.9)
            k = int(rng.integers(-3, 4))
            m2 = m1 * 2.0**k
            mu2 = mu1 / 4.0**k
            ft = rng.uniform(0.0, 2.0)
            assert push_displacement(m1, mu1, ft) == push_displacement(m2, mu2, ft)

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            push_displacement(0.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            push_displacement(1.0, -0.5, 1.0)
        with pytest.raises(ValueError):
            push_displacement(1.0, 0.5, -1.0)


class TestPushSimulator:
    def test_rollout_accumulates(self):
        sim = PushSimulator()
        traj = sim.rollout(np.array([1.0, 0.32]), [1.0, 1.0])
        assert traj.states[1, 0] == pytest.approx(1.5625)
        assert traj.states[2, 0] == pytest.approx(3.125)

    def test_determinism(self):
        sim = PushSimulator()
        x = np.array([0.3])
        u = np.array([0.7])
        theta = np.array([1.1, 0.4])
        assert np.array_equal(sim.step(x, u, theta), sim.step(x, u, theta))


class TestPushDataset:
    def test_sizes_and_identity(self):
        train, test = make_push_dataset(2000, 200, rng_seed=0)
        assert train.shape == (2000, 4) and test.shape == (200, 4)
        for rec in np.vstack([train, test]):
            m, mu, ft, s = rec
            assert abs(s * 2.0 * m * m * mu - ft * ft) < 1e-9

    def test_train_test_disjoint(self):
        train, test = make_push_dataset(2000, 200, rng_seed=0)
        train_keys = {tuple(r) for r in train}
        assert not any(tuple(r) in train_keys for r in test)

    def test_determinism(self):
        a, _ = make_push_dataset(100, 10, rng_seed=3)
        b, _ = make_push_dataset(100, 10, rng_seed=3)
        assert np.array_equal(a, b)

    def test_default_sizes(self):
        train, test = make_push_dataset()
        assert len(train) == 20000 and len(test) == 2000


class TestStructureParams:
    def test_from_vector_round_trip(self):
        p = StructureParams.from_vector(DEFAULT_TRUTH)
        for name, value in zip(STRUCTURE_PARAM_NAMES, DEFAULT_TRUTH):
            assert getattr(p, name) == value

    def test_rejects_nonpositive(self):
        bad = DEFAULT_TRUTH.copy()
        bad[0] = 0.0
        with pytest.raises(ValueError):
            StructureParams.from_vector(bad)

    def test_rejects_pretension_above_max_tension(self):
        bad = DEFAULT_TRUTH.copy()
        bad[8] = bad[9] + 1.0
        with pytest.raises(ValueError):
            StructureParams.from_vector(bad)

    def test_space_contains_truth(self):
        space = default_structure_space()
        assert space.contains(DEFAULT_TRUTH)


class TestStructureSimulator:
    def test_state_layout(self):
        sim = StructureSimulator()
        x = sim.initial_state(DEFAULT_TRUTH)
        assert x.shape == (30,)
        pos, vel, off = sim.unpack(x)
        assert pos.shape == (6, 2) and vel.shape == (6, 2) and off.shape == (6,)
        assert np.array_equal(sim.pack(pos, vel, off), x)

    def test_determinism_bit_identical(self):
        sim = StructureSimulator()
        x = sim.initial_state(DEFAULT_TRUTH)
        u = np.full(6, 0.05)
        assert np.array_equal(sim.step(x, u, DEFAULT_TRUTH), sim.step(x, u, DEFAULT_TRUTH))

    def test_neutral_cables_exert_no_force(self):
        # offsets that cancel the pretension put every cable exactly at its
        # rest length; with gravity and contact off the built pose is a
        # fixed point of the dynamics
        sim = StructureSimulator(gravity=0.0, contact=False)
        p = StructureParams.from_vector(DEFAULT_TRUTH)
        pos, vel, _ = sim.unpack(sim.initial_state(DEFAULT_TRUTH))
        offsets = np.full(6, p.pretension / p.cable_stiffness)
        x0 = sim.pack(pos, vel, offsets)
        x1 = sim.step(x0, np.zeros(6), DEFAULT_TRUTH)
        assert np.array_equal(x1, x0)
        assert np.allclose(sim.cable_tensions(x0, DEFAULT_TRUTH), 0.0, atol=1e-12)

    def test_tension_clamped_to_bounds(self):
        sim = StructureSimulator()
        rng = np.random.default_rng(1)
        p = StructureParams.from_vector(DEFAULT_TRUTH)
        for _ in range(100):
            pos = rng.uniform(-2.0, 2.0, size=(6, 2))
            vel = rng.uniform(-5.0, 5.0, size=(6, 2))
            off = rng.uniform(-0.5, 0.5, size=6)
            t = sim.cable_tensions(sim.pack(pos, vel, off), DEFAULT_TRUTH)
            assert np.all(t >= 0.0) and np.all(t <= p.max_tension)

    def test_control_rate_limited_by_target_velocity(self):
        sim = StructureSimulator()
        x = sim.initial_state(DEFAULT_TRUTH)
        u = np.full(6, 100.0)  # far beyond target_velocity
        x1 = sim.step(x, u, DEFAULT_TRUTH)
        _, _, off = sim.unpack(x1)
        step_time = sim.dt * sim.substeps
        target_velocity = DEFAULT_TRUTH[10]
        assert np.allclose(off, target_velocity * step_time)

    def test_inert_parameters_do_not_change_dynamics(self):
        sim = StructureSimulator()
        controls = scripted_controls(6, 10, 1, rng_seed=0)[0]
        base = DEFAULT_TRUTH.copy()
        tweaked = DEFAULT_TRUTH.copy()
        for name in INERT_PARAM_NAMES:
            tweaked[STRUCTURE_PARAM_NAMES.index(name)] *= 1.37
        xa = sim.initial_state(base)
        xb = sim.initial_state(tweaked)
        for u in controls:
            xa = sim.step(xa, u, base)
            xb = sim.step(xb, u, tweaked)
        assert np.array_equal(xa, xb)

    def test_divergence_raises(self):
        sim = StructureSimulator()
        bad = divergent_theta()
        x = sim.initial_state(bad)
        with pytest.raises(SimulationDiverged):
            for _ in range(50):
                x = sim.step(x, np.zeros(6), bad)

    def test_wrong_control_shape(self):
        sim = StructureSimulator()
        with pytest.raises(ValueError):
            sim.step(sim.initial_state(DEFAULT_TRUTH), np.zeros(3), DEFAULT_TRUTH)


class TestStructurePhysics:
    def test_ballistic_free_fall(self):
        # closed-form check; initial velocity gets the classic half-kick so
        # the symplectic update telescopes to the exact parabola
        sim = StructureSimulator(contact=False, cables_active=False, rod_damping=0.0)
        x = sim.initial_state(DEFAULT_TRUTH)
        pos, vel, off = sim.unpack(x)
        pos = pos + np.array([0.0, 5.0])
        vel = vel.copy()
        vel[:, 1] += GRAVITY * sim.dt / 2.0
        x = sim.pack(pos, vel, off)
        h0 = com_height(x)
        steps = int(1.0 / (sim.dt * sim.substeps))
        for _ in range(steps):
            x = sim.step(x, np.zeros(6), DEFAULT_TRUTH)
        expected = h0 - 0.5 * GRAVITY * 1.0**2
        assert abs(com_height(x) - expected) < 1e-3

    def test_undamped_energy_drift(self):
        # conservative variant: no gravity, contact, or damping; secular
        # drift measured between windowed energy averages (the pointwise
        # energy of a symplectic integrator oscillates but does not drift)
        theta = DEFAULT_TRUTH.copy()
        theta[5] = 1e-12  # cable damping ~ 0
        sim = StructureSimulator(contact=False, gravity=0.0, rod_damping=0.0, substeps=1)
        x = sim.initial_state(theta)
        pos, vel, off = sim.unpack(x)
        vel = np.random.default_rng(0).normal(0.0, 0.05, size=vel.shape)
        x = sim.pack(pos, vel, off)
        energies = [sim.energy(x, theta)]
        for _ in range(10**4):
            x = sim.step(x, np.zeros(6), theta)
            energies.append(sim.energy(x, theta))
        energies = np.array(energies)
        head = energies[:500].mean()
        tail = energies[-500:].mean()
        assert abs(tail - head) / abs(head) < 0.01

    def test_settles_on_ground(self):
        sim = StructureSimulator()
        x = sim.initial_state(DEFAULT_TRUTH)
        h0 = com_height(x)
        steps = int(5.0 / (sim.dt * sim.substeps))
        for _ in range(steps):
            x = sim.step(x, np.zeros(6), DEFAULT_TRUTH)
        mass = StructureParams.from_vector(DEFAULT_TRUTH).node_mass()
        released = 6.0 * mass * GRAVITY * (h0 - com_height(x))
        assert released > 0.0
        assert sim.kinetic_energy(x, DEFAULT_TRUTH) < 1e-6 * released


class TestTrajectoryGeneration:
    def test_zero_horizon(self):
        sim = PushSimulator()
        out = generate_trajectories(sim, np.array([1.0, 0.32]), None, 0, 1)
        traj, diverged = out[0]
        assert len(traj.states) == 1 and not diverged

    def test_count_and_horizon(self):
        sim = PushSimulator()
        script = np.abs(scripted_controls(1, 7, 4, rng_seed=1))  # impulses >= 0
        out = generate_trajectories(sim, np.array([1.0, 0.32]), script, 7, 4)
        assert len(out) == 4
        for traj, diverged in out:
            assert traj.horizon == 7 and not diverged

    def test_determinism(self):
        sim = StructureSimulator()
        a = generate_trajectories(sim, DEFAULT_TRUTH, None, 5, 2, rng_seed=2)
        b = generate_trajectories(sim, DEFAULT_TRUTH, None, 5, 2, rng_seed=2)
        for (ta, _), (tb, _) in zip(a, b):
            assert np.array_equal(ta.states, tb.states)
            assert np.array_equal(ta.controls, tb.controls)

    def test_divergence_truncates_and_flags(self):
        sim = StructureSimulator()
        out = generate_trajectories(sim, divergent_theta(), None, 10, 1, rng_seed=0)
        traj, diverged = out[0]
        assert diverged
        assert traj.horizon < 10

    def test_scripted_controls_shape_and_determinism(self):
        a = scripted_controls(6, 20, 3, rng_seed=4)
        b = scripted_controls(6, 20, 3, rng_seed=4)
        assert a.shape == (3, 20, 6)
        assert np.array_equal(a, b)
        assert np.max(np.abs(a)) <= 0.2


class TestTrajectoryIo:
    def test_bit_exact_round_trip(self, tmp_path):
        sim = StructureSimulator()
        records = []
        for k, (traj, diverged) in enumerate(
            generate_trajectories(sim, DEFAULT_TRUTH, None, 4, 3, rng_seed=5)
        ):
            records.append((DEFAULT_TRUTH, traj, diverged))
        header = {"simulator": "structure", "seed": 5, "dt": sim.dt, "horizon": 4}
        path = tmp_path / "trajectories.jsonl"
        save_trajectories(path, header, records)
        loaded_header, loaded = load_trajectories(path)
        assert loaded_header["simulator"] == "structure"
        assert len(loaded) == 3
        for (theta, traj, diverged), (ltheta, ltraj, ldiverged) in zip(records, loaded):
            assert np.array_equal(theta, ltheta)
            assert np.array_equal(traj.states, ltraj.states)
            assert np.array_equal(traj.controls, ltraj.controls)
            assert diverged == ldiverged

    def test_zero_horizon_round_trip(self, tmp_path):
        traj = Trajectory(np.zeros((1, 2)), np.zeros((0, 0)))
        path = tmp_path / "empty.jsonl"
        save_trajectories(path, {"simulator": "test"}, [(np.array([1.0]), traj, False)])
        _, loaded = load_trajectories(path)
        assert loaded[0][1].horizon == 0
