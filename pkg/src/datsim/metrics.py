"""Run diagnostics: tracking errors, Lyapunov values, sum residuals, decay fits.

All quadratic forms are evaluated block-wise from (n, p) state matrices;
the Kronecker-structured matrices of the stability analysis are never
materialized here (tests cross-check against dense Kronecker oracles).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MetricsRecord",
    "DecayFit",
    "tracking_errors",
    "lyapunov_v1",
    "lyapunov_v2",
    "sum_residuals",
    "decay_fit",
    "make_record",
    "trailing_median",
    "total_error",
    "increase_violation_fraction",
]

# Error samples below this are treated as exact zeros by the decay fit.
DECAY_FLOOR = 1e-14


@dataclass(frozen=True)
class MetricsRecord:
    """Diagnostics at one sample time.

    e_x/e_v are per-agent 2-norm distances of position/velocity to the
    instantaneous reference averages; e_p/e_q are the same for the filter
    outputs. s1/s2 are the filter-vs-reference sum residuals and sum_z the
    raw auxiliary-variable sum (the bounded variant conserves it).
    """

    t: float
    e_x: np.ndarray
    e_v: np.ndarray
    e_p: np.ndarray
    e_q: np.ndarray
    v1: float
    v2: float
    s1: np.ndarray
    s2: np.ndarray
    sum_z: np.ndarray


@dataclass(frozen=True)
class DecayFit:
    """Least-squares slope of log total error over a time window."""

    window: tuple[float, float]
    slope: float
    r_squared: float


def _center(a: np.ndarray) -> np.ndarray:
    """Consensus-orthogonal projection: subtract the across-agent mean."""
    return a - a.mean(axis=0)


def tracking_errors(x: np.ndarray, v: np.ndarray, r: np.ndarray,
                    vr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent 2-norm distances to the instantaneous reference averages."""
    r_avg = r.mean(axis=0)
    vr_avg = vr.mean(axis=0)
    e_x = np.linalg.norm(x - r_avg, axis=1)
    e_v = np.linalg.norm(v - vr_avg, axis=1)
    return e_x, e_v


def lyapunov_v1(p: np.ndarray, q: np.ndarray, lap: np.ndarray, kappa: float) -> float:
    """Disagreement energy of the filter outputs.

    0.5 [pt; qt]^T (L kron [[2k,1],[1,1]] kron I) [pt; qt] with pt, qt the
    consensus-orthogonal parts of p and q; positive definite on the
    disagreement subspace for kappa > 1/2, zero exactly at consensus.
    """
    pt = _center(np.asarray(p, dtype=float))
    qt = _center(np.asarray(q, dtype=float))
    lp = lap @ pt
    lq = lap @ qt
    return 0.5 * float(2.0 * kappa * (pt * lp).sum()
                       + (pt * lq).sum() + (qt * lp).sum()
                       + (qt * lq).sum())


def lyapunov_v2(x: np.ndarray, v: np.ndarray, p: np.ndarray, q: np.ndarray,
                eta: float) -> float:
    """Tracking energy 0.5 [xt; vt]^T [[2e I, I], [I, I]] [xt; vt].

    xt = x - p, vt = v - q; positive definite for eta > 1/2 and zero
    exactly when the physical states match the filter outputs.
    """
    xt = np.asarray(x, dtype=float) - np.asarray(p, dtype=float)
    vt = np.asarray(v, dtype=float) - np.asarray(q, dtype=float)
    return float(eta * (xt * xt).sum() + (xt * vt).sum() + 0.5 * (vt * vt).sum())


def sum_residuals(p: np.ndarray, q: np.ndarray, r: np.ndarray,
                  vr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """S1 = sum_i (p_i - r_i), S2 = sum_i (q_i - vr_i), each in R^p."""
    s1 = (np.asarray(p) - np.asarray(r)).sum(axis=0)
    s2 = (np.asarray(q) - np.asarray(vr)).sum(axis=0)
    return s1, s2


def total_error(record: MetricsRecord) -> float:
    """Sum over agents of (e_x + e_v), the quantity whose decay is fitted."""
    return float(record.e_x.sum() + record.e_v.sum())


def decay_fit(times, errors, window: tuple[float, float]) -> DecayFit:
    """Least-squares slope of log(error) over the window.

    The window is truncated at the first sample whose error drops below
    the floor (1e-14); at least two usable samples are required.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    t0, t1 = window
    if t0 < times[0] or t1 > times[-1] or t1 <= t0:
        raise ValueError(f"window {window} not within the log range "
                         f"[{times[0]:g}, {times[-1]:g}]")
    mask = (times >= t0) & (times <= t1)
    ts = times[mask]
    es = errors[mask]
    below = np.nonzero(es < DECAY_FLOOR)[0]
    if below.size:
        ts = ts[: below[0]]
        es = es[: below[0]]
    if ts.size < 2:
        raise ValueError("fewer than two usable samples in the decay window")
    log_e = np.log(es)
    slope, intercept = np.polyfit(ts, log_e, 1)
    fitted = slope * ts + intercept
    ss_res = float(((log_e - fitted) ** 2).sum())
    ss_tot = float(((log_e - log_e.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(window=(float(ts[0]), float(ts[-1])), slope=float(slope),
                    r_squared=r2)


def make_record(t: float, x, v, p, q, r, vr, z, lap, v1_kappa: float,
                v2_eta: float) -> MetricsRecord:
    """Assemble the full diagnostics row for one sampled state."""
    e_x, e_v = tracking_errors(x, v, r, vr)
    e_p, e_q = tracking_errors(p, q, r, vr)
    s1, s2 = sum_residuals(p, q, r, vr)
    return MetricsRecord(
        t=float(t),
        e_x=e_x,
        e_v=e_v,
        e_p=e_p,
        e_q=e_q,
        v1=lyapunov_v1(p, q, lap, v1_kappa),
        v2=lyapunov_v2(x, v, p, q, v2_eta),
        s1=np.asarray(s1, dtype=float),
        s2=np.asarray(s2, dtype=float),
        sum_z=np.asarray(z, dtype=float).sum(axis=0),
    )


def trailing_median(values, window: int = 50) -> np.ndarray:
    """Trailing-window median; entry k is the median of the last `window` samples."""
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    for k in range(values.size):
        out[k] = np.median(values[max(0, k - window + 1): k + 1])
    return out


def increase_violation_fraction(times, values, t_start: float,
                                rel_tol: float = 1e-6) -> float:
    """Fraction of post-t_start samples where the series rises by more than rel_tol*(1+value).

    Discretization and boundary-layer smoothing allow small Lyapunov
    increases; this counts only the meaningful ones.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = times >= t_start
    vs = values[mask]
    if vs.size < 2:
        return 0.0
    deltas = np.diff(vs)
    threshold = rel_tol * (1.0 + vs[:-1])
    return float((deltas > threshold).sum() / deltas.size)
