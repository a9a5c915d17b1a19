import numpy as np
import pytest

from datsim.dynamics import (
    SamplingBox,
    check_bounded,
    estimate_lipschitz,
    eval_f,
    make_dynamics,
    origin_deviation,
)


class TestEval:
    def test_zero_family(self):
        spec = make_dynamics("zero", 3)
        assert (eval_f(spec, np.ones(3), -np.ones(3), 9.0) == 0.0).all()

    def test_pendulum_at_origin(self):
        spec = make_dynamics("pendulum", 1, {"a": 1.0, "b": 0.5})
        assert (eval_f(spec, np.zeros(1), np.zeros(1), 7.0) == 0.0).all()

    def test_linear_damped_direct(self):
        spec = make_dynamics("linear_damped", 2, {"a": 2.0, "b": 1.0})
        out = eval_f(spec, np.array([1.0, -1.0]), np.array([0.5, 0.0]), 0.0)
        assert out == pytest.approx([-2.5, 2.0])

    def test_dimension_mismatch(self):
        spec = make_dynamics("zero", 2)
        with pytest.raises(ValueError, match="shape"):
            eval_f(spec, np.zeros(3), np.zeros(2), 0.0)

    def test_deterministic_bit_identical(self):
        spec = make_dynamics("bounded_wave", 2, {"c": 1.0, "d": 0.5, "omega": 2.0})
        x = np.array([0.3, -0.7])
        v = np.array([1.1, 0.2])
        first = eval_f(spec, x, v, 1.234)
        second = eval_f(spec, x, v, 1.234)
        assert (first == second).all()

    def test_bounded_wave_value(self):
        spec = make_dynamics("bounded_wave", 1, {"c": 1.0, "d": 0.5, "omega": 2.0})
        out = eval_f(spec, np.array([np.pi / 2]), np.zeros(1), 0.0)
        assert out == pytest.approx([1.0 + 0.5])


class TestDeclarations:
    def test_family_constants_derived(self):
        spec = make_dynamics("pendulum", 2, {"a": 1.0, "b": 0.5})
        assert spec.rho1 == 1.0 and spec.rho2 == 0.5 and spec.fbar is None

    def test_bounded_wave_bound_derived(self):
        spec = make_dynamics("bounded_wave", 3, {"c": 1.0, "d": 0.5, "omega": 2.0})
        assert spec.fbar == 3 * 1.5

    def test_zero_declares_both(self):
        spec = make_dynamics("zero", 1)
        assert spec.rho1 == 0.0 and spec.rho2 == 0.0 and spec.fbar == 0.0

    def test_must_declare_something(self):
        from datsim.dynamics import DynamicsSpec
        with pytest.raises(ValueError, match="declare"):
            DynamicsSpec(kind="pendulum", dim=1, params={"a": 1.0, "b": 0.5})

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown dynamics family"):
            make_dynamics("chaos", 1)

    def test_wrong_params(self):
        with pytest.raises(ValueError, match="takes params"):
            make_dynamics("pendulum", 1, {"a": 1.0})

    def test_negative_param(self):
        with pytest.raises(ValueError, match="nonnegative"):
            make_dynamics("pendulum", 1, {"a": -1.0, "b": 0.5})


class TestLipschitzEstimate:
    def test_zero_family(self):
        spec = make_dynamics("zero", 2)
        assert estimate_lipschitz(spec, SamplingBox(), 1000, 1) == (0.0, 0.0)

    def test_linear_damped_tight(self):
        spec = make_dynamics("linear_damped", 2, {"a": 2.0, "b": 1.0})
        rho1_hat, rho2_hat = estimate_lipschitz(spec, SamplingBox(), 10_000, 5)
        # the difference quotient is exactly a (resp. b) up to roundoff
        assert 1.9 <= rho1_hat <= 2.0 * (1 + 1e-6)
        assert rho2_hat <= 1.0 * (1 + 1e-6)

    def test_pendulum_sine_bound(self):
        spec = make_dynamics("pendulum", 1, {"a": 1.0, "b": 0.5})
        rho1_hat, rho2_hat = estimate_lipschitz(spec, SamplingBox(), 10_000, 5)
        assert rho1_hat <= 1.0 * (1 + 1e-6)
        assert rho2_hat <= 0.5 * (1 + 1e-6)

    def test_requires_enough_samples(self):
        spec = make_dynamics("zero", 1)
        with pytest.raises(ValueError, match="1000"):
            estimate_lipschitz(spec, SamplingBox(), 10, 0)

    def test_requires_declared_constants(self):
        spec = make_dynamics("bounded_wave", 1, {"c": 1.0, "d": 0.0, "omega": 1.0})
        with pytest.raises(ValueError, match="Lipschitz"):
            estimate_lipschitz(spec, SamplingBox(), 1000, 0)

    def test_inequality_property(self):
        """Declared constants dominate the sampled difference quotients in 1-norm."""
        rng = np.random.default_rng(17)
        for spec in (make_dynamics("linear_damped", 3, {"a": 2.0, "b": 1.0}),
                     make_dynamics("pendulum", 3, {"a": 1.0, "b": 0.5})):
            for _ in range(10_000 // 100):
                x, y, v, z = rng.uniform(-5, 5, (4, 3))
                t = rng.uniform(0, 10)
                lhs = np.abs(eval_f(spec, x, v, t) - eval_f(spec, y, z, t)).sum()
                rhs = (spec.rho1 * np.abs(x - y).sum()
                       + spec.rho2 * np.abs(v - z).sum())
                assert lhs <= rhs * (1 + 1e-12) + 1e-12

    def test_origin_fixed_for_lipschitz_families(self):
        ts = np.linspace(0.0, 50.0, 100)
        for spec in (make_dynamics("zero", 2),
                     make_dynamics("linear_damped", 2, {"a": 2.0, "b": 1.0}),
                     make_dynamics("pendulum", 2, {"a": 1.0, "b": 0.5})):
            assert origin_deviation(spec, ts) == 0.0

    def test_bounded_wave_origin_not_fixed(self):
        spec = make_dynamics("bounded_wave", 1, {"c": 1.0, "d": 0.5, "omega": 2.0})
        assert origin_deviation(spec, np.linspace(0, 10, 100)) > 0.0


class TestBoundCheck:
    def test_zero_family(self):
        assert check_bounded(make_dynamics("zero", 2), SamplingBox(), 1000, 3) == 0.0

    def test_bounded_wave_within_declared(self):
        spec = make_dynamics("bounded_wave", 1, {"c": 1.0, "d": 0.5, "omega": 2.0})
        fmax = check_bounded(spec, SamplingBox(), 5000, 3)
        assert fmax <= 1.5 * (1 + 1e-6)

    def test_linear_family_grows_with_box(self):
        """An unbounded family must not declare fbar: the sampled max scales with the box."""
        spec = make_dynamics("linear_damped", 1, {"a": 1.0, "b": 1.0}, fbar=1e9)
        small = check_bounded(spec, SamplingBox(x=(-5, 5), v=(-5, 5)), 5000, 3)
        large = check_bounded(spec, SamplingBox(x=(-10, 10), v=(-10, 10)), 5000, 3)
        corner = abs(-1.0 * 10 - 1.0 * 10)
        assert large > small
        assert small <= corner and large <= corner
        assert large > corner / 2
