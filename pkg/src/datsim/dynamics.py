"""Nonlinear drift terms shared by agents and reference generators.

Each family is a closed-form f(x, v, t) with analytically known Lipschitz
constants or 1-norm bound. Empirical validators sample the declared box to
catch mis-declared constants before a simulation trusts them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DynamicsSpec",
    "SamplingBox",
    "make_dynamics",
    "eval_f",
    "estimate_lipschitz",
    "check_bounded",
    "origin_deviation",
    "FAMILY_PARAMS",
]

FAMILY_PARAMS = {
    "zero": (),
    "linear_damped": ("a", "b"),
    "pendulum": ("a", "b"),
    "bounded_wave": ("c", "d", "omega"),
}

# Pairs closer than this in 1-norm are resampled instead of divided through.
DEGENERATE_PAIR_TOL = 1e-12


@dataclass(frozen=True)
class DynamicsSpec:
    """A drift family with its declared constants.

    rho1/rho2 bound position/velocity sensitivity in 1-norm; fbar bounds
    the 1-norm of f itself. At least one of the two declarations must be
    present, matching the protocol variant that consumes the spec.
    """

    kind: str
    dim: int
    params: dict = field(default_factory=dict)
    rho1: float | None = None
    rho2: float | None = None
    fbar: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_PARAMS:
            raise ValueError(f"unknown dynamics family '{self.kind}'")
        if self.dim < 1:
            raise ValueError(f"state dimension must be >= 1, got {self.dim}")
        expected = set(FAMILY_PARAMS[self.kind])
        got = set(self.params)
        if got != expected:
            raise ValueError(
                f"family '{self.kind}' takes params {sorted(expected)}, got {sorted(got)}"
            )
        for name, value in self.params.items():
            if value < 0:
                raise ValueError(f"param '{name}' must be nonnegative, got {value}")
        has_lip = self.rho1 is not None and self.rho2 is not None
        if not has_lip and self.fbar is None:
            raise ValueError("declare (rho1, rho2) or fbar (or both)")

    @property
    def has_lipschitz(self) -> bool:
        return self.rho1 is not None and self.rho2 is not None

    @property
    def has_bound(self) -> bool:
        return self.fbar is not None


def make_dynamics(kind: str, dim: int, params: dict | None = None,
                  rho1: float | None = None, rho2: float | None = None,
                  fbar: float | None = None) -> DynamicsSpec:
    """Build a DynamicsSpec, deriving undeclared constants from the closed form."""
    params = dict(params or {})
    if kind == "zero":
        rho1 = 0.0 if rho1 is None else rho1
        rho2 = 0.0 if rho2 is None else rho2
        fbar = 0.0 if fbar is None else fbar
    elif kind in ("linear_damped", "pendulum"):
        rho1 = params.get("a") if rho1 is None else rho1
        rho2 = params.get("b") if rho2 is None else rho2
    elif kind == "bounded_wave":
        if fbar is None and "c" in params and "d" in params:
            fbar = dim * (params["c"] + params["d"])
    return DynamicsSpec(kind=kind, dim=dim, params=params, rho1=rho1, rho2=rho2, fbar=fbar)


def _eval_batch(spec: DynamicsSpec, x: np.ndarray, v: np.ndarray, t) -> np.ndarray:
    """Vectorized family evaluation; x, v are (..., dim), t scalar or (...)."""
    p = spec.params
    if spec.kind == "zero":
        return np.zeros_like(x)
    if spec.kind == "linear_damped":
        return -p["a"] * x - p["b"] * v
    if spec.kind == "pendulum":
        return -p["a"] * np.sin(x) - p["b"] * v
    if spec.kind == "bounded_wave":
        wave = p["d"] * np.cos(p["omega"] * np.asarray(t, dtype=float))
        if np.ndim(wave):
            wave = wave[:, None]
        return p["c"] * np.sin(x) + wave
    raise ValueError(f"unknown dynamics family '{spec.kind}'")


def eval_f(spec: DynamicsSpec, x, v, t: float) -> np.ndarray:
    """Evaluate f(x, v, t) for a single state of dimension spec.dim."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (spec.dim,) or v.shape != (spec.dim,):
        raise ValueError(
            f"expected x, v of shape ({spec.dim},), got {x.shape} and {v.shape}"
        )
    return _eval_batch(spec, x, v, float(t))


@dataclass(frozen=True)
class SamplingBox:
    """Uniform sampling ranges for the empirical validators."""

    x: tuple[float, float] = (-5.0, 5.0)
    v: tuple[float, float] = (-5.0, 5.0)
    t: tuple[float, float] = (0.0, 10.0)


def _draw(rng, lo_hi, shape):
    return rng.uniform(lo_hi[0], lo_hi[1], shape)


def estimate_lipschitz(spec: DynamicsSpec, box: SamplingBox, samples: int,
                       seed: int) -> tuple[float, float]:
    """Empirical maxima of the position and velocity difference quotients.

    Position quotient: ||f(x,v,t) - f(y,v,t)||_1 / ||x - y||_1 over random
    pairs with shared v, t; the velocity quotient is the analogue with
    shared x, t. Degenerate pairs are resampled, never divided through.
    """
    if not spec.has_lipschitz:
        raise ValueError("spec declares no Lipschitz constants")
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    rng = np.random.default_rng(seed)
    d = spec.dim

    def quotients(vary_position: bool) -> np.ndarray:
        t = _draw(rng, box.t, samples)
        if vary_position:
            base = _draw(rng, box.v, (samples, d))
            first = _draw(rng, box.x, (samples, d))
            second = _draw(rng, box.x, (samples, d))
        else:
            base = _draw(rng, box.x, (samples, d))
            first = _draw(rng, box.v, (samples, d))
            second = _draw(rng, box.v, (samples, d))
        for _ in range(100):
            dist = np.abs(first - second).sum(axis=1)
            bad = dist < DEGENERATE_PAIR_TOL
            if not bad.any():
                break
            n_bad = int(bad.sum())
            redraw = box.x if vary_position else box.v
            first[bad] = _draw(rng, redraw, (n_bad, d))
            second[bad] = _draw(rng, redraw, (n_bad, d))
        else:
            raise RuntimeError("could not draw non-degenerate sample pairs")
        if vary_position:
            fa = _eval_batch(spec, first, base, t)
            fb = _eval_batch(spec, second, base, t)
        else:
            fa = _eval_batch(spec, base, first, t)
            fb = _eval_batch(spec, base, second, t)
        return np.abs(fa - fb).sum(axis=1) / dist

    rho1_hat = float(quotients(vary_position=True).max())
    rho2_hat = float(quotients(vary_position=False).max())
    return rho1_hat, rho2_hat


def check_bounded(spec: DynamicsSpec, box: SamplingBox, samples: int, seed: int) -> float:
    """Maximum sampled 1-norm of f over the box."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    x = _draw(rng, box.x, (samples, spec.dim))
    v = _draw(rng, box.v, (samples, spec.dim))
    t = _draw(rng, box.t, samples)
    values = _eval_batch(spec, x, v, t)
    return float(np.abs(values).sum(axis=1).max())


def origin_deviation(spec: DynamicsSpec, t_samples) -> float:
    """Largest ||f(0, 0, t)||_1 over the given times (zero for conforming families)."""
    zero = np.zeros(spec.dim)
    worst = 0.0
    for t in np.asarray(t_samples, dtype=float):
        worst = max(worst, float(np.abs(_eval_batch(spec, zero, zero, float(t))).sum()))
    return worst
