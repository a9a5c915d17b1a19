import numpy as np
import pytest

from datsim.graph import build_graph, family_graph, laplacian, symmetric_eigenvalues
from datsim.metrics import (
    decay_fit,
    increase_violation_fraction,
    lyapunov_v1,
    lyapunov_v2,
    sum_residuals,
    tracking_errors,
    trailing_median,
)

from _oracles import dense_v1, dense_v2


class TestTrackingErrors:
    def test_exact_average_zero_error(self):
        r = np.array([[0.0, 1.0], [2.0, 3.0]])
        avg = r.mean(axis=0)
        x = np.vstack([avg, avg])
        e_x, e_v = tracking_errors(x, np.zeros((2, 2)), r, np.zeros((2, 2)))
        assert (e_x == 0.0).all()

    def test_scalar_example(self):
        # n = 2, p = 1, r = (0, 2), x_1 = 0 -> e_x_1 = 1
        r = np.array([[0.0], [2.0]])
        x = np.array([[0.0], [5.0]])
        e_x, _ = tracking_errors(x, np.zeros((2, 1)), r, np.zeros((2, 1)))
        assert e_x[0] == pytest.approx(1.0)
        assert e_x[1] == pytest.approx(4.0)

    def test_matches_stacked_computation(self):
        rng = np.random.default_rng(8)
        x, v, r, vr = rng.normal(size=(4, 5, 3))
        e_x, e_v = tracking_errors(x, v, r, vr)
        ones = np.ones((5, 1))
        x_err = x - ones @ r.mean(axis=0, keepdims=True)
        v_err = v - ones @ vr.mean(axis=0, keepdims=True)
        assert e_x == pytest.approx(np.sqrt((x_err ** 2).sum(axis=1)))
        assert e_v == pytest.approx(np.sqrt((v_err ** 2).sum(axis=1)))


class TestLyapunovV1:
    def test_consensus_is_zero(self):
        lap = laplacian(family_graph("ring", 4))
        p = np.tile([1.5, -2.0], (4, 1))
        q = np.tile([0.3, 0.9], (4, 1))
        assert lyapunov_v1(p, q, lap, 2.0) == 0.0

    def test_two_agent_frozen_value(self):
        # path n=2, p=1, kappa=2, p=(1,-1), q=0 -> 1/2 * 2k * p'Lp = 8
        lap = laplacian(build_graph(2, [(1, 2)]))
        value = lyapunov_v1(np.array([[1.0], [-1.0]]), np.zeros((2, 1)), lap, 2.0)
        assert value == pytest.approx(8.0)

    def test_matches_dense_kronecker_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            p = int(rng.integers(1, 4))
            g = family_graph("complete", n)
            lap = laplacian(g)
            P, Q = rng.normal(size=(2, n, p))
            kappa = float(rng.uniform(1.0, 4.0))
            assert lyapunov_v1(P, Q, lap, kappa) == pytest.approx(
                dense_v1(P, Q, lap, kappa), abs=1e-10)

    def test_lower_bound_via_spectrum(self):
        """V1 >= (lambda_2 / 2) rho_min (||pt||^2 + ||qt||^2) on random states."""
        rng = np.random.default_rng(13)
        kappa = 2.0
        b = np.array([[2 * kappa, 1.0], [1.0, 1.0]])
        rho_min = symmetric_eigenvalues(b)[0]
        for g in (family_graph("ring", 4), family_graph("path", 3)):
            lap = laplacian(g)
            lam2 = symmetric_eigenvalues(lap)[1]
            for _ in range(50):
                P, Q = rng.normal(size=(2, g.n, 2))
                pt = P - P.mean(axis=0)
                qt = Q - Q.mean(axis=0)
                bound = 0.5 * lam2 * rho_min * ((pt ** 2).sum() + (qt ** 2).sum())
                assert lyapunov_v1(P, Q, lap, kappa) >= bound - 1e-9

    def test_nonnegative(self):
        rng = np.random.default_rng(14)
        lap = laplacian(family_graph("star", 5))
        for _ in range(100):
            P, Q = rng.normal(size=(2, 5, 2))
            assert lyapunov_v1(P, Q, lap, 1.5) >= 0.0


class TestLyapunovV2:
    def test_zero_error_is_zero(self):
        x = np.array([[1.0, 2.0]])
        v = np.array([[3.0, -1.0]])
        assert lyapunov_v2(x, v, x, v, 1.5) == 0.0

    def test_scalar_frozen_value(self):
        # single agent, xt = 1, vt = 0, eta = 1.5 -> eta = 1.5
        value = lyapunov_v2(np.array([[1.0]]), np.zeros((1, 1)),
                            np.zeros((1, 1)), np.zeros((1, 1)), 1.5)
        assert value == pytest.approx(1.5)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            n = int(rng.integers(1, 6))
            p = int(rng.integers(1, 4))
            X, V, P, Q = rng.normal(size=(4, n, p))
            eta = float(rng.uniform(1.0, 3.0))
            assert lyapunov_v2(X, V, P, Q, eta) == pytest.approx(
                dense_v2(X, V, P, Q, eta), abs=1e-10)

    def test_nonnegative_above_half(self):
        rng = np.random.default_rng(16)
        for _ in range(100):
            X, V, P, Q = rng.normal(size=(4, 3, 2))
            assert lyapunov_v2(X, V, P, Q, 0.51) >= 0.0


class TestSumResiduals:
    def test_zero_at_match(self):
        r = np.arange(6.0).reshape(3, 2)
        vr = -r
        s1, s2 = sum_residuals(r, vr, r, vr)
        assert (s1 == 0.0).all() and (s2 == 0.0).all()

    def test_matches_stacked_sum(self):
        rng = np.random.default_rng(17)
        p, q, r, vr = rng.normal(size=(4, 5, 3))
        s1, s2 = sum_residuals(p, q, r, vr)
        assert s1 == pytest.approx((p - r).sum(axis=0))
        assert s2 == pytest.approx((q - vr).sum(axis=0))


class TestDecayFit:
    def test_pure_exponential(self):
        t = np.linspace(0.0, 5.0, 200)
        fit = decay_fit(t, np.exp(-2.0 * t), (0.5, 4.5))
        assert fit.slope == pytest.approx(-2.0, abs=1e-6)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-9)

    def test_constant_error(self):
        t = np.linspace(0.0, 5.0, 100)
        fit = decay_fit(t, np.full(100, 0.37), (1.0, 4.0))
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_window_truncated_at_floor(self):
        t = np.linspace(0.0, 10.0, 101)
        e = np.exp(-2.0 * t)
        e[t > 6.0] = 1e-16
        fit = decay_fit(t, e, (1.0, 9.0))
        assert fit.window[1] <= 6.0
        assert fit.slope == pytest.approx(-2.0, abs=1e-6)

    def test_window_outside_range(self):
        t = np.linspace(0.0, 5.0, 10)
        with pytest.raises(ValueError, match="window"):
            decay_fit(t, np.ones(10), (1.0, 7.0))


class TestMonitors:
    def test_trailing_median_flattens_spikes(self):
        values = np.ones(100)
        values[50] = 100.0
        smoothed = trailing_median(values, window=5)
        assert smoothed[50] == 1.0
        assert smoothed[-1] == 1.0

    def test_trailing_median_startup(self):
        out = trailing_median(np.array([3.0, 1.0, 2.0]), window=50)
        assert out[0] == 3.0
        assert out[1] == 2.0
        assert out[2] == 2.0

    def test_violation_fraction_monotone_series(self):
        t = np.linspace(0.0, 10.0, 100)
        assert increase_violation_fraction(t, np.exp(-t), 2.0) == 0.0

    def test_violation_fraction_oscillating(self):
        t = np.linspace(0.0, 10.0, 100)
        v = 1.0 + 0.5 * (-1.0) ** np.arange(100)
        frac = increase_violation_fraction(t, v, 0.0)
        assert 0.4 < frac < 0.6
