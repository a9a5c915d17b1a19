"""Filter accelerations, control inputs, and gain validation.

Two protocol variants are implemented. The Lipschitz variant uses
state-dependent gains to dominate an unbounded drift term:

    zdd_i = -kappa (p_i - r_i) - kappa (q_i - vr_i)
            - alpha psi_i sgn[ sum_j a_ij {(p_i + q_i) - (p_j + q_j)} ]
    u_i   = -eta xt_i - eta vt_i
            - eta (||x_i - r_i||_1 + ||v_i - vr_i||_1 + gamma) sgn(xt_i + vt_i)
            + zdd_i

with psi_i = ||r_i||_1 + ||vr_i||_1 + gamma, xt_i = x_i - p_i, vt_i = v_i - q_i.
The bounded variant drops the servo terms and uses constant gains, with the
signum inside the neighbor sum (which is what makes sum_i zdd_i vanish):

    zdd_i = -alpha sum_j a_ij sgn[(p_i + q_i) - (p_j + q_j)]
    u_i   = -eta sgn(xt_i + vt_i) + zdd_i
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SignumPolicy",
    "GainSetLipschitz",
    "GainSetBounded",
    "signum",
    "psi_gain",
    "filter_accel_lipschitz",
    "control_lipschitz",
    "filter_accel_bounded",
    "control_bounded",
    "GainCondition",
    "GainReport",
    "validate_gains_lipschitz",
    "BoundedGainAdvisory",
    "validate_gains_bounded",
]


@dataclass(frozen=True)
class SignumPolicy:
    """Component-wise sign map: exact -1/0/+1, or the boundary-layer form y/(|y|+eps)."""

    mode: str = "exact"
    epsilon: float = 1e-2

    def __post_init__(self):
        if self.mode not in ("exact", "smoothed"):
            raise ValueError(f"signum mode must be 'exact' or 'smoothed', got '{self.mode}'")
        if self.mode == "smoothed" and self.epsilon <= 0:
            raise ValueError(f"boundary-layer width must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class GainSetLipschitz:
    """Gains for the state-dependent-gain variant; theorem conditions live in the validator."""

    kappa: float
    alpha: float
    gamma: float
    eta: float

    def __post_init__(self):
        for name in ("kappa", "alpha", "gamma", "eta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"gain {name} must be positive")


@dataclass(frozen=True)
class GainSetBounded:
    """Constant gains for the bounded-drift variant.

    acknowledged records that the user has reviewed the advisory bound
    report (the full theorem bound is not computable, see
    validate_gains_bounded) and accepts the gains.
    """

    alpha: float
    eta: float
    acknowledged: bool = False

    def __post_init__(self):
        if self.alpha <= 0 or self.eta <= 0:
            raise ValueError("gains alpha and eta must be positive")


def signum(y, policy: SignumPolicy) -> np.ndarray:
    """Apply the policy's sign map component-wise; exact mode sends 0 (and -0) to 0."""
    y = np.asarray(y, dtype=float)
    if policy.mode == "exact":
        return np.sign(y) + 0.0
    return y / (np.abs(y) + policy.epsilon)


def psi_gain(r_i, vr_i, gamma: float) -> float:
    """State-dependent filter gain ||r_i||_1 + ||vr_i||_1 + gamma (>= gamma > 0)."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return float(np.abs(np.asarray(r_i)).sum() + np.abs(np.asarray(vr_i)).sum() + gamma)


def _neighbor_arrays(neighbor_p, neighbor_q, dim: int) -> tuple[np.ndarray, np.ndarray]:
    np_arr = np.asarray(neighbor_p, dtype=float).reshape(-1, dim)
    nq_arr = np.asarray(neighbor_q, dtype=float).reshape(-1, dim)
    if np_arr.shape != nq_arr.shape:
        raise ValueError("neighbor p and q states must pair up one-to-one")
    return np_arr, nq_arr


def filter_accel_lipschitz(p_i, q_i, neighbor_p, neighbor_q, r_i, vr_i,
                           gains: GainSetLipschitz, policy: SignumPolicy) -> np.ndarray:
    """Filter acceleration zdd_i of the Lipschitz variant.

    The signum wraps the whole neighbor sum, scaled by the state-dependent
    gain psi_i; two servo terms pull the filter output toward the agent's
    own reference.
    """
    p_i = np.asarray(p_i, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    nbr_p, nbr_q = _neighbor_arrays(neighbor_p, neighbor_q, p_i.shape[0])
    disagreement = ((p_i + q_i) - (nbr_p + nbr_q)).sum(axis=0)
    psi = psi_gain(r_i, vr_i, gains.gamma)
    return (-gains.kappa * (p_i - np.asarray(r_i, dtype=float))
            - gains.kappa * (q_i - np.asarray(vr_i, dtype=float))
            - gains.alpha * psi * signum(disagreement, policy))


def control_lipschitz(x_i, v_i, p_i, q_i, r_i, vr_i, zddot_i,
                      gains: GainSetLipschitz, policy: SignumPolicy) -> np.ndarray:
    """Control input u_i of the Lipschitz variant (tracks the filter outputs)."""
    x_i = np.asarray(x_i, dtype=float)
    v_i = np.asarray(v_i, dtype=float)
    xt = x_i - np.asarray(p_i, dtype=float)
    vt = v_i - np.asarray(q_i, dtype=float)
    magnitude = (np.abs(x_i - np.asarray(r_i, dtype=float)).sum()
                 + np.abs(v_i - np.asarray(vr_i, dtype=float)).sum() + gains.gamma)
    return (-gains.eta * xt - gains.eta * vt
            - gains.eta * magnitude * signum(xt + vt, policy)
            + np.asarray(zddot_i, dtype=float))


def filter_accel_bounded(p_i, q_i, neighbor_p, neighbor_q, alpha: float,
                         policy: SignumPolicy) -> np.ndarray:
    """Filter acceleration of the bounded variant; signum sits inside the sum.

    The per-edge signs are summed before the single multiplication by
    alpha, so opposite edge contributions cancel exactly across the graph.
    """
    p_i = np.asarray(p_i, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    nbr_p, nbr_q = _neighbor_arrays(neighbor_p, neighbor_q, p_i.shape[0])
    signs = signum((p_i + q_i) - (nbr_p + nbr_q), policy)
    return -alpha * signs.sum(axis=0)


def control_bounded(x_i, v_i, p_i, q_i, zddot_i, eta: float,
                    policy: SignumPolicy) -> np.ndarray:
    """Constant-gain control input u_i = -eta sgn(xt_i + vt_i) + zdd_i."""
    xt = np.asarray(x_i, dtype=float) - np.asarray(p_i, dtype=float)
    vt = np.asarray(v_i, dtype=float) - np.asarray(q_i, dtype=float)
    return -eta * signum(xt + vt, policy) + np.asarray(zddot_i, dtype=float)


@dataclass(frozen=True)
class GainCondition:
    """One validity condition with its margin (value minus bound; > 0 passes)."""

    name: str
    value: float
    bound: float

    @property
    def margin(self) -> float:
        return self.value - self.bound

    @property
    def passed(self) -> bool:
        return self.margin > 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value {self.value:g} vs bound {self.bound:g} (margin {self.margin:g})"


@dataclass(frozen=True)
class GainReport:
    conditions: tuple[GainCondition, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def lines(self) -> list[str]:
        return [c.line() for c in self.conditions]

    def failures(self) -> list[GainCondition]:
        return [c for c in self.conditions if not c.passed]


def validate_gains_lipschitz(gains: GainSetLipschitz, rho1: float, rho2: float) -> GainReport:
    """Check the strict gain inequalities of the Lipschitz variant.

    kappa > 1, alpha > max(rho1, rho2) + kappa, eta > max(1, rho1, rho2);
    equality fails.
    """
    return GainReport(conditions=(
        GainCondition("kappa > 1", gains.kappa, 1.0),
        GainCondition("alpha > max(rho1, rho2) + kappa",
                      gains.alpha, max(rho1, rho2) + gains.kappa),
        GainCondition("eta > max(1, rho1, rho2)", gains.eta, max(1.0, rho1, rho2)),
    ))


@dataclass(frozen=True)
class BoundedGainAdvisory:
    """Partial lower bounds for the bounded-variant gains.

    The full theorem bounds involve initial values of internal proof
    variables (s, s-tilde) that are never defined in the source analysis,
    so only the computable pieces are reported. The caller must
    acknowledge this report explicitly before running.
    """

    alpha: float
    eta: float
    lambda2: float
    initial_spread: float  # ||(D^T kron I_p) x(0)||_1
    n_fbar: float
    alpha_partial_bound: float
    eta_partial_bound: float
    omitted: tuple[str, ...]

    @property
    def alpha_meets_partial(self) -> bool:
        return self.alpha > self.alpha_partial_bound

    @property
    def eta_meets_partial(self) -> bool:
        return self.eta > self.eta_partial_bound

    def lines(self) -> list[str]:
        out = [
            "bounded-variant gain advisory (partial bounds only):",
            f"  lambda_2 = {self.lambda2:g}, n*fbar = {self.n_fbar:g}, "
            f"||(D^T kron I)x(0)||_1 = {self.initial_spread:g}",
            f"  alpha = {self.alpha:g} vs partial bound "
            f"(n*fbar + ||(D^T kron I)x(0)||_1)/lambda_2 = {self.alpha_partial_bound:g} "
            f"[{'OK' if self.alpha_meets_partial else 'BELOW'}]",
            f"  eta = {self.eta:g} vs partial bound 2*fbar = {self.eta_partial_bound:g} "
            f"[{'OK' if self.eta_meets_partial else 'BELOW'}]",
        ]
        out += [f"  omitted (not computable): {term}" for term in self.omitted]
        out.append("  advisory only: acknowledge to proceed")
        return out


def validate_gains_bounded(alpha: float, eta: float, lambda2: float, fbar: float,
                           n: int, x0, d_matrix: np.ndarray) -> BoundedGainAdvisory:
    """Report the computable pieces of the bounded-variant gain bounds.

    x0 is the stacked initial position state, given as an (n, p) array or
    the equivalent flat vector; d_matrix is the graph incidence matrix.
    """
    if lambda2 <= 0:
        raise ValueError(f"lambda_2 must be positive (connected graph), got {lambda2}")
    x0 = np.asarray(x0, dtype=float).reshape(n, -1)
    spread = float(np.abs(d_matrix.T @ x0).sum())
    n_fbar = n * fbar
    return BoundedGainAdvisory(
        alpha=alpha,
        eta=eta,
        lambda2=lambda2,
        initial_spread=spread,
        n_fbar=n_fbar,
        alpha_partial_bound=(n_fbar + spread) / lambda2,
        eta_partial_bound=2.0 * fbar,
        omitted=(
            "2*||s(0)||_1 term of the alpha bound",
            "2*||s~(0)||_1 + ||x~(0)||_1 terms of the eta bound",
        ),
    )
