import numpy as np
import pytest

from hrcbot.dmp import (
    DmpConfig,
    DmpModel,
    IntegrationDivergenceError,
    Trajectory,
    basis_activation,
    basis_layout,
    fit_dmp,
    forcing_term,
    load_model,
    model_to_document,
    phase_at,
    rollout,
    save_model,
)


def min_jerk(times, duration, y0, g):
    s = np.clip(np.asarray(times) / duration, 0.0, 1.0)
    return y0 + (g - y0) * (10 * s**3 - 15 * s**4 + 6 * s**5)


def min_jerk_demo(duration=1.0, y0=0.0, g=1.0, dt=0.002):
    t = np.arange(0.0, duration + 1e-12, dt)
    return Trajectory(times=t, positions=min_jerk(t, duration, y0, g))


def make_model(weights, config=None):
    config = config or DmpConfig()
    centers, widths = basis_layout(config.n_basis, config.alpha_x)
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    return DmpModel(
        config=config,
        weights=weights,
        y0_demo=np.zeros(weights.shape[0]),
        g_demo=np.ones(weights.shape[0]),
        basis_centers=centers,
        basis_widths=widths,
    )


class TestTrajectory:
    def test_rejects_two_samples(self):
        with pytest.raises(ValueError):
            Trajectory(times=[0.0, 0.1], positions=[[0.0], [1.0]])

    def test_rejects_nonmonotone_times(self):
        with pytest.raises(ValueError):
            Trajectory(times=[0.0, 0.2, 0.1], positions=[[0.0], [0.5], [1.0]])

    def test_rejects_eight_dims(self):
        with pytest.raises(ValueError):
            Trajectory(times=[0, 1, 2], positions=np.zeros((3, 8)))

    def test_promotes_1d_positions(self):
        traj = Trajectory(times=[0, 1, 2], positions=[0.0, 0.5, 1.0])
        assert traj.dims == 1
        assert traj.duration == 2.0


class TestBasisActivation:
    def test_unity_at_own_center(self):
        model = make_model(np.zeros(15))
        for i in (0, 3, 14):
            acts = basis_activation(float(model.basis_centers[i]), model)
            assert acts[i] == pytest.approx(1.0, abs=0.0)

    def test_matches_scalar_evaluation(self):
        # independent oracle: evaluate each Gaussian one by one
        model = make_model(np.zeros(15))
        x = 1.0
        expected = np.array([
            np.exp(-h * (x - c) ** 2)
            for c, h in zip(model.basis_centers, model.basis_widths)
        ])
        np.testing.assert_allclose(basis_activation(x, model), expected, rtol=1e-15)
        # mathematically in (0, 1]; the narrowest Gaussians underflow to 0.0
        assert np.all(expected >= 0) and np.all(expected <= 1)
        assert expected[0] == 1.0

    def test_symmetric_centers_equal_activation(self):
        # centers chosen exactly representable so (x - c) is bit-symmetric
        centers = np.array([0.75, 0.25])
        widths = np.array([5.0, 5.0])
        model = DmpModel(
            config=DmpConfig(n_basis=2),
            weights=np.zeros((1, 2)),
            y0_demo=[0.0], g_demo=[1.0],
            basis_centers=centers, basis_widths=widths,
        )
        acts = basis_activation(0.5, model)
        assert acts[0] == pytest.approx(acts[1], rel=0, abs=0)

    def test_rejects_phase_outside_unit_interval(self):
        model = make_model(np.zeros(15))
        with pytest.raises(ValueError):
            basis_activation(0.0, model)
        with pytest.raises(ValueError):
            basis_activation(1.5, model)


class TestForcingTerm:
    def test_zero_weights_give_zero(self):
        model = make_model(np.zeros(15))
        assert forcing_term(0.37, model, 0) == 0.0

    def test_constant_weights_cancel_normalization(self):
        model = make_model(np.full(15, 3.25))
        for x in (1.0, 0.5, 0.11, 0.013):
            assert forcing_term(x, model, 0) == pytest.approx(3.25 * x, abs=1e-12)

    def test_matches_bruteforce_loop(self):
        demo = min_jerk_demo()
        model = fit_dmp(demo)
        x = 0.5
        num = 0.0
        den = 0.0
        for c, h, w in zip(model.basis_centers, model.basis_widths, model.weights[0]):
            psi = np.exp(-h * (x - c) ** 2)
            num += psi * w * x
            den += psi
        assert forcing_term(x, model, 0) == pytest.approx(num / den, rel=1e-12)

    def test_vanishing_activation_mass_returns_zero(self):
        model = make_model(np.full(15, 100.0))
        # far below the smallest center every Gaussian is effectively dead
        assert forcing_term(1e-4, model, 0) == 0.0


class TestFit:
    def test_stationary_demo_all_degenerate(self):
        t = np.linspace(0, 1, 100)
        demo = Trajectory(times=t, positions=np.full((100, 2), 0.3))
        model = fit_dmp(demo)
        assert model.degenerate_dims == (0, 1)
        assert np.all(model.weights == 0.0)

    def test_min_jerk_reproduction(self):
        demo = min_jerk_demo()
        model = fit_dmp(demo)
        replay = rollout(model, model.y0_demo, model.g_demo, demo.duration, dt=0.001)
        expected = min_jerk(replay.times, demo.duration, 0.0, 1.0)
        rmse = np.sqrt(np.mean((replay.positions[:, 0] - expected) ** 2))
        assert rmse <= 0.02

    def test_dense_basis_oracle_agrees(self):
        # refit with 10x basis functions as the independent regression oracle
        demo = min_jerk_demo()
        coarse = fit_dmp(demo, DmpConfig(n_basis=15))
        dense = fit_dmp(demo, DmpConfig(n_basis=150))
        r_coarse = rollout(coarse, coarse.y0_demo, coarse.g_demo, demo.duration, dt=0.001)
        r_dense = rollout(dense, dense.y0_demo, dense.g_demo, demo.duration, dt=0.001)
        gap = np.sqrt(np.mean((r_coarse.positions - r_dense.positions) ** 2))
        assert gap <= 0.01

    def test_default_basis_count_is_15(self):
        assert DmpConfig().n_basis == 15

    def test_tau_taken_from_demo(self):
        demo = min_jerk_demo(duration=2.5)
        model = fit_dmp(demo, DmpConfig(tau=1.0))
        assert model.config.tau == pytest.approx(2.5)

    def test_multidim_shares_phase_and_flags_flat_dim(self):
        t = np.arange(0.0, 1.0 + 1e-12, 0.002)
        ys = np.stack([min_jerk(t, 1.0, 0.0, 0.4), np.full(len(t), 0.2)], axis=1)
        model = fit_dmp(Trajectory(times=t, positions=ys))
        assert model.degenerate_dims == (1,)
        assert np.any(model.weights[0] != 0)
        assert np.all(model.weights[1] == 0)


class TestRollout:
    def test_zero_weights_converge(self):
        # reference: the same ODE integrated at dt=1e-5 is indistinguishable
        # from the analytic critically damped response; endpoint within 1% here
        model = make_model(np.zeros(15), DmpConfig(alpha=25.0, beta=6.25))
        traj = rollout(model, [0.0], [1.0], duration=1.5, dt=0.001)
        assert abs(traj.positions[-1, 0] - 1.0) < 0.01
        fine = rollout(model, [0.0], [1.0], duration=1.5, dt=1e-5)
        assert abs(traj.positions[-1, 0] - fine.positions[-1, 0]) < 1e-3

    def test_start_at_goal_never_moves(self):
        demo = min_jerk_demo()
        model = fit_dmp(demo)
        traj = rollout(model, [0.4], [0.4], duration=1.0, dt=0.001)
        assert np.max(np.abs(traj.positions - 0.4)) <= 1e-9

    def test_goal_shift_preserves_weights_and_converges(self):
        demo = min_jerk_demo()
        model = fit_dmp(demo)
        stored = model.weights.copy()
        traj = rollout(model, [0.0], [1.2], duration=1.0, dt=0.001)
        assert np.array_equal(model.weights, stored)
        assert abs(traj.positions[-1, 0] - 1.2) <= max(1e-2 * 1.2, 1e-3)

    def test_goal_convergence_random_models(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            dims = int(rng.integers(1, 4))
            weights = rng.uniform(-100, 100, size=(dims, 15))
            model = make_model(weights)
            y0 = rng.uniform(-1, 1, dims)
            g = rng.uniform(-1, 1, dims)
            duration = float(rng.uniform(0.8, 2.5))
            traj = rollout(model, y0, g, duration, dt=0.001)
            tol = np.maximum(1e-2 * np.abs(g - y0), 1e-3)
            assert np.all(np.abs(traj.positions[-1] - g) <= tol)

    def test_divergence_reports_step(self):
        # absurd stiffness makes the fixed-step integrator blow up
        model = make_model(np.full(15, 1e12))
        with pytest.raises(IntegrationDivergenceError) as err:
            rollout(model, [0.0], [1.0], duration=1.0, dt=0.01)
        assert err.value.step > 0

    def test_deterministic_bit_identical(self):
        demo = min_jerk_demo()
        m1 = fit_dmp(demo)
        m2 = fit_dmp(demo)
        assert np.array_equal(m1.weights, m2.weights)
        r1 = rollout(m1, [0.1], [0.9], 1.2, 0.001)
        r2 = rollout(m2, [0.1], [0.9], 1.2, 0.001)
        assert np.array_equal(r1.positions, r2.positions)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        demo = min_jerk_demo()
        model = fit_dmp(demo)
        path = save_model("open_oven_handle", model, tmp_path)
        assert path.name == "open_oven_handle.dmp.json"
        name, loaded = load_model(path)
        assert name == "open_oven_handle"
        np.testing.assert_array_equal(loaded.weights, model.weights)
        assert loaded.config == model.config

    def test_document_schema_keys(self):
        model = fit_dmp(min_jerk_demo())
        doc = model_to_document("open_oven_handle", model)
        assert set(doc) == {
            "name", "created_at", "config", "dims", "weights", "y0_demo",
            "g_demo", "basis_centers", "basis_widths", "degenerate_dims",
        }
        assert set(doc["config"]) == {"alpha", "beta", "alpha_x", "n_basis", "tau"}
        assert doc["dims"] == 1


def test_phase_decays_to_one_percent():
    assert phase_at(1.0, 1.0, 4.6) == pytest.approx(0.01, abs=0.0005)
