import json
import math

import numpy as np
import pytest

from noisyvqe.analysis import (
    bias_report,
    elite_candidates,
    empirical_min_bias,
    hessian_diagnostics,
    high_shot_reevaluate,
    is_significant,
    landscape_scan,
    LandscapeScan,
    predicted_winner_bias,
    tracking_errors,
)
from noisyvqe.ansatz import build_tvha, build_twolocal
from noisyvqe.estimator import Estimator, rng_stream
from noisyvqe.exceptions import ConfigurationError, DiagnosticError
from noisyvqe.models import build_ising
from noisyvqe.optimizers import ObjectiveHandle, OptimizerTrace, make_optimizer


@pytest.fixture(scope="module")
def h2_optimum(h2):
    a = build_tvha(h2, 1.0, 2)
    est = Estimator(a, h2)
    res = make_optimizer("cma_es", budget=4000, seed=0).minimize(est.exact_energy, np.full(a.n_params, 0.1))
    return a, est, res.x


def quadratic(theta, rng=None):
    theta = np.asarray(theta)
    return 0.5 * (theta[0] ** 2 + 4 * theta[1] ** 2)


def noisy_run(h, a, n_shots, seed, budget=600):
    est = Estimator(a, h, "sampled", n_shots)
    obj = ObjectiveHandle.from_estimator(est, seed=seed, budget=budget)
    x0 = rng_stream(seed, 0, 0x1A17).random(a.n_params)
    return make_optimizer("cma_es", budget=budget, seed=seed).minimize(obj, x0)


class TestWinnerBias:
    def test_single_draw_has_no_bias(self):
        assert predicted_winner_bias(0.3, 1) == 0.0

    def test_closed_form(self):
        assert math.sqrt(2 * math.log(1e4)) == pytest.approx(4.292, abs=1e-3)
        assert predicted_winner_bias(0.01, 10_000) == pytest.approx(-0.0429, abs=1e-4)
        assert predicted_winner_bias(0.019, 10_000) == pytest.approx(-0.0816, abs=1e-4)

    def test_rejects_bad_input(self):
        with pytest.raises(ConfigurationError):
            predicted_winner_bias(0.1, 0)
        with pytest.raises(ConfigurationError):
            predicted_winner_bias(-0.1, 10)

    def test_extreme_value_band(self):
        sigma, K = 0.02, 10_000
        observed = empirical_min_bias(sigma, K, 100, np.random.default_rng(8))
        assert observed == pytest.approx(predicted_winner_bias(sigma, K), rel=0.2)

    def test_significance_rule(self):
        assert is_significant(0.05, 0.01)
        assert not is_significant(0.04, 0.01)

    def test_report_on_noisy_run(self, h2):
        a = build_tvha(h2, 1.0, 2)
        res = noisy_run(h2, a, 64, seed=0, budget=300)
        rep = bias_report(res.trace)
        assert rep.K == 300
        assert rep.predicted_bias < 0
        assert rep.significance_threshold == pytest.approx(4 * rep.sigma_noise)
        # the best noisy value sits below the exact energy at the same point
        assert rep.observed_min_gap < 0


class TestTrackingErrors:
    def test_noiseless_mean_equals_best_at_convergence(self):
        h, a = build_ising(3), build_twolocal(3, 1)
        obj = ObjectiveHandle.from_estimator(Estimator(a, h))
        res = make_optimizer("cma_es", budget=3000, seed=1).minimize(obj, np.full(a.n_params, 0.4))
        err = tracking_errors(res.trace, -2.0, window=0.05)
        assert err.mean_error == pytest.approx(err.best_error, abs=1e-9)
        assert err.sigma_noise is None

    def test_single_evaluation_iterations(self):
        res = make_optimizer("nelder_mead", budget=200).minimize(quadratic, np.ones(2))
        err = tracking_errors(res.trace, 0.0)
        assert err.mean_error is None
        assert err.best_error >= 0

    def test_window_validation(self):
        res = make_optimizer("pso", budget=50).minimize(quadratic, np.ones(2))
        with pytest.raises(ConfigurationError):
            tracking_errors(res.trace, 0.0, window=0.0)

    def test_noise_floor_survives_serialization(self, h2):
        res = noisy_run(h2, build_tvha(h2, 1.0, 2), 64, seed=4, budget=200)
        back = OptimizerTrace.from_dict(json.loads(json.dumps(res.trace.to_dict())))
        assert back.sigma_noise() == res.trace.sigma_noise()


class TestReevaluation:
    def test_exact_values_respect_variational_bound(self, h2, h2_e0, rng):
        a = build_tvha(h2, 1.0, 2)
        cands = [rng.normal(size=a.n_params) for _ in range(8)]
        for _, value in high_shot_reevaluate(cands, a, h2, mode="exact"):
            assert value >= h2_e0 - 1e-12

    def test_duplicates_agree(self, h2):
        a = build_tvha(h2, 1.0, 2)
        theta = np.linspace(0, 1, a.n_params)
        (_, v1), (_, v2) = high_shot_reevaluate([theta, theta.copy()], a, h2, None)
        assert v1 == v2

    def test_elite_ranking_changes(self, h2):
        a = build_tvha(h2, 1.0, 2)
        changed = 0
        for seed in range(10):
            trace = noisy_run(h2, a, 64, seed, budget=400).trace
            elites = elite_candidates(trace, 10)
            corrected = [v for _, v in high_shot_reevaluate(elites, a, h2, mode="exact")]
            # elites arrive sorted by noisy value; any inversion means a changed ranking
            changed += list(np.argsort(corrected, kind="stable")) != list(range(10))
        assert changed >= 1


class TestHessian:
    def test_quadratic_diagnostics(self):
        diag = hessian_diagnostics(quadratic, np.array([0.3, -0.2]))
        assert diag.lambda_max == pytest.approx(4.0, abs=1e-6)
        assert diag.lambda_min == pytest.approx(1.0, abs=1e-6)
        assert diag.condition_number == pytest.approx(4.0, abs=1e-5)
        assert diag.eta_max == pytest.approx(0.5, abs=1e-7)
        np.testing.assert_array_equal(diag.hessian, diag.hessian.T)

    def test_step_below_bound_converges(self):
        obj = ObjectiveHandle(quadratic, 2, divergence_threshold=1e3)
        res = make_optimizer("gd", eta=0.45, budget=3000).minimize(obj, np.ones(2))
        assert res.status == "budget"
        assert quadratic(res.x_last) < 1e-12

    def test_step_above_bound_diverges(self):
        obj = ObjectiveHandle(quadratic, 2, divergence_threshold=1e3)
        res = make_optimizer("gd", eta=0.55, budget=3000).minimize(obj, np.ones(2))
        assert res.status == "diverged"

    def test_h2_optimum_is_positive_semidefinite(self, h2_optimum, h2_e0):
        _, est, theta = h2_optimum
        assert est.exact_energy(theta) == pytest.approx(h2_e0, abs=1e-8)
        diag = hessian_diagnostics(est, theta)
        assert np.linalg.eigvalsh(diag.hessian).min() >= -1e-6

    def test_noise_dominates_near_optimum(self, h2_optimum):
        a, exact, theta = h2_optimum
        noisy = Estimator(a, exact.hamiltonian, "gaussian", 64)
        assert hessian_diagnostics(noisy, theta + 0.01, theta_star=theta).noise_dominated
        assert not hessian_diagnostics(exact, theta + 0.01, theta_star=theta).noise_dominated

    def test_non_finite_raises(self):
        with pytest.raises(DiagnosticError):
            hessian_diagnostics(lambda th, rng: math.inf, np.zeros(2))


@pytest.fixture(scope="module")
def ising_est():
    return Estimator(build_twolocal(3, 1), build_ising(3))


class TestLandscape:
    def test_twolocal_periodicity(self, ising_est):
        # span 2pi with an even grid puts +-2pi at the two ends of each axis
        center = np.linspace(0.1, 0.6, 6)
        scan = landscape_scan(ising_est, 0, 4, center, span=2 * math.pi, grid_n=9)
        np.testing.assert_allclose(scan.values[0], scan.values[-1], atol=1e-12)
        np.testing.assert_allclose(scan.values[:, 0], scan.values[:, -1], atol=1e-12)
        np.testing.assert_allclose(scan.values[:4], scan.values[4:8], atol=1e-12)

    def test_exact_grid_respects_bound(self, ising_est):
        scan = landscape_scan(ising_est, 1, 2, np.zeros(6), grid_n=21)
        assert scan.values.min() >= -2.0 - 1e-9

    def test_text_round_trip(self, ising_est):
        scan = landscape_scan(ising_est, 0, 3, np.zeros(6), grid_n=5)
        back = LandscapeScan.from_text(scan.to_text(), 0, 3)
        np.testing.assert_allclose(back.values, scan.values, rtol=1e-12)
        np.testing.assert_allclose(back.x, scan.x, rtol=1e-12)

    def test_threads_do_not_change_result(self, h2):
        est = Estimator(build_tvha(h2, 1.0, 2), h2, "sampled", 64)
        one = landscape_scan(est, 0, 1, np.zeros(10), grid_n=7, seed=3)
        many = landscape_scan(est, 0, 1, np.zeros(10), grid_n=7, seed=3, threads=3)
        np.testing.assert_array_equal(one.values, many.values)

    def test_grid_limits(self, ising_est):
        with pytest.raises(ConfigurationError):
            landscape_scan(ising_est, 0, 1, np.zeros(6), grid_n=513)
        with pytest.raises(ConfigurationError):
            landscape_scan(ising_est, 2, 2, np.zeros(6))

    def test_dips_below_e0_shrink_with_shots(self, h2_optimum, h2, h2_e0):
        a, _, theta = h2_optimum
        counts = []
        for shots in (64, 6144):
            scan = landscape_scan(Estimator(a, h2, "sampled", shots), 0, 1, theta, grid_n=31, seed=0)
            counts.append(scan.count_below(h2_e0))
        assert counts[0] > counts[1] > 0
