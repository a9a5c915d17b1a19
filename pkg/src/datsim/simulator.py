"""Fixed-step propagation of the coupled agent-filter-reference system.

The default integrator is explicit Euler with the exact signum: Euler
composes correctly with a discontinuous right-hand side, while RK4 is
reserved for the smoothed policy. Time is carried as step-count times dt,
never by repeated addition.
"""
from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn_mod
from . import metrics as metrics_mod
from . import protocol as proto
from .graph import Graph, algebraic_connectivity, incidence, is_connected, laplacian
from .metrics import DecayFit, MetricsRecord
from .scenario import ScenarioConfig

__all__ = [
    "SystemState",
    "Derivative",
    "TrajectoryLog",
    "RunSummary",
    "NonFiniteStateError",
    "ScenarioValidationError",
    "ValidationCheck",
    "ValidationReport",
    "derivative",
    "step",
    "run",
    "validate_scenario",
]

# Sampling settings for the empirical dynamics validators; fixed so that a
# scenario's validation verdict does not depend on its simulation seed.
VALIDATION_SEED = 20260809
VALIDATION_SAMPLES = 2000
DECLARED_CONSTANT_SLACK = 1e-6

# Trailing-median window (in samples) applied before terminal error checks.
MEDIAN_WINDOW = 50


@dataclass(frozen=True)
class SystemState:
    """Snapshot of all agent, filter, and reference states at time t.

    Arrays are (n, p): one row per agent. The filter outputs p_i = z_i + r_i
    and q_i = zdot_i + vr_i are always recomputed from z and r, never stored.
    """

    t: float
    x: np.ndarray
    v: np.ndarray
    z: np.ndarray
    zdot: np.ndarray
    r: np.ndarray
    vr: np.ndarray

    def filter_outputs(self) -> tuple[np.ndarray, np.ndarray]:
        return self.z + self.r, self.zdot + self.vr


@dataclass(frozen=True)
class Derivative:
    """Time derivative of a SystemState (same shapes)."""

    dx: np.ndarray
    dv: np.ndarray
    dz: np.ndarray
    dzdot: np.ndarray
    dr: np.ndarray
    dvr: np.ndarray


class NonFiniteStateError(RuntimeError):
    """A step produced an overflow or NaN; names the first offending agent."""

    def __init__(self, agent: int, t: float):
        self.agent = agent
        self.t = t
        super().__init__(f"non-finite state for agent {agent} at t = {t:g}")


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ValidationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


class ScenarioValidationError(ValueError):
    """Raised by run() when a scenario fails its pre-integration validators."""

    def __init__(self, report: ValidationReport):
        self.report = report
        failures = [c.line() for c in report.checks if not c.passed]
        super().__init__("; ".join(failures) or "validation failed")


@dataclass
class RunSummary:
    """Plain-text run digest: validator outcomes, terminal error, decay, timing."""

    validator_lines: list[str] = field(default_factory=list)
    terminal_max_error: float | None = None
    decay: DecayFit | None = None
    wall_time: float = 0.0
    aborted: bool = False
    abort_reason: str | None = None

    def text(self) -> str:
        lines = ["run summary", "-----------"]
        lines += self.validator_lines
        if self.terminal_max_error is not None:
            lines.append(
                f"terminal max-agent error (median-filtered e_x + e_v): "
                f"{self.terminal_max_error:.6g}")
        if self.decay is not None:
            lines.append(
                f"decay fit on [{self.decay.window[0]:g}, {self.decay.window[1]:g}]: "
                f"slope {self.decay.slope:.6g} (r^2 {self.decay.r_squared:.4f})")
        lines.append(f"wall time: {self.wall_time:.3f} s")
        lines.append(f"aborted: {'yes - ' + self.abort_reason if self.aborted else 'no'}")
        return "\n".join(lines) + "\n"


@dataclass
class TrajectoryLog:
    """Sampled metrics records (strictly increasing in t) plus the run summary."""

    records: list[MetricsRecord]
    summary: RunSummary
    states: list[SystemState] | None = None


def derivative(state: SystemState, variant: str, graph: Graph,
               dynamics: dyn_mod.DynamicsSpec, gains, policy: proto.SignumPolicy,
               neighbors: list[np.ndarray] | None = None) -> Derivative:
    """Assemble the full right-hand side on a frozen state snapshot.

    Per-agent protocol evaluations read only the input state, so the
    couplings within one step are order-independent.
    """
    n = graph.n
    if state.x.shape[0] != n:
        raise ValueError(f"state has {state.x.shape[0]} agents but graph has {n} nodes")
    if neighbors is None:
        neighbors = graph.neighbor_lists()
    p_out, q_out = state.filter_outputs()
    zdd = np.empty_like(state.z)
    u = np.empty_like(state.v)
    for i in range(n):
        nbr = neighbors[i]
        if variant == "lipschitz":
            zdd[i] = proto.filter_accel_lipschitz(
                p_out[i], q_out[i], p_out[nbr], q_out[nbr],
                state.r[i], state.vr[i], gains, policy)
            u[i] = proto.control_lipschitz(
                state.x[i], state.v[i], p_out[i], q_out[i],
                state.r[i], state.vr[i], zdd[i], gains, policy)
        elif variant == "bounded":
            zdd[i] = proto.filter_accel_bounded(
                p_out[i], q_out[i], p_out[nbr], q_out[nbr], gains.alpha, policy)
            u[i] = proto.control_bounded(
                state.x[i], state.v[i], p_out[i], q_out[i], zdd[i], gains.eta, policy)
        else:
            raise ValueError(f"unknown variant '{variant}'")
    f_agents = dyn_mod._eval_batch(dynamics, state.x, state.v, state.t)
    f_refs = dyn_mod._eval_batch(dynamics, state.r, state.vr, state.t)
    return Derivative(dx=state.v, dv=f_agents + u, dz=state.zdot, dzdot=zdd,
                      dr=state.vr, dvr=f_refs)


def _advance(state: SystemState, d: Derivative, h: float, t: float) -> SystemState:
    return SystemState(
        t=t,
        x=state.x + h * d.dx,
        v=state.v + h * d.dv,
        z=state.z + h * d.dz,
        zdot=state.zdot + h * d.dzdot,
        r=state.r + h * d.dr,
        vr=state.vr + h * d.dvr,
    )


def _check_finite(state: SystemState) -> None:
    for arr in (state.x, state.v, state.z, state.zdot, state.r, state.vr):
        bad = ~np.isfinite(arr)
        if bad.any():
            agent = int(np.nonzero(bad.any(axis=1))[0][0]) + 1
            raise NonFiniteStateError(agent=agent, t=state.t)


def step(state: SystemState, variant: str, graph: Graph,
         dynamics: dyn_mod.DynamicsSpec, gains, integrator,
         neighbors: list[np.ndarray] | None = None,
         t_next: float | None = None) -> SystemState:
    """Advance one fixed step; raises NonFiniteStateError on overflow/NaN.

    t_next pins the new time exactly (the run loop passes k*dt); otherwise
    the state time advances by dt.
    """
    dt = integrator.dt
    policy = integrator.policy
    if t_next is None:
        t_next = state.t + dt
    if integrator.scheme == "euler":
        d = derivative(state, variant, graph, dynamics, gains, policy, neighbors)
        new = _advance(state, d, dt, t_next)
    else:
        k1 = derivative(state, variant, graph, dynamics, gains, policy, neighbors)
        s2 = _advance(state, k1, dt / 2.0, state.t + dt / 2.0)
        k2 = derivative(s2, variant, graph, dynamics, gains, policy, neighbors)
        s3 = _advance(state, k2, dt / 2.0, state.t + dt / 2.0)
        k3 = derivative(s3, variant, graph, dynamics, gains, policy, neighbors)
        s4 = _advance(state, k3, dt, state.t + dt)
        k4 = derivative(s4, variant, graph, dynamics, gains, policy, neighbors)
        combined = Derivative(
            dx=(k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx) / 6.0,
            dv=(k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv) / 6.0,
            dz=(k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz) / 6.0,
            dzdot=(k1.dzdot + 2.0 * k2.dzdot + 2.0 * k3.dzdot + k4.dzdot) / 6.0,
            dr=(k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr) / 6.0,
            dvr=(k1.dvr + 2.0 * k2.dvr + 2.0 * k3.dvr + k4.dvr) / 6.0,
        )
        new = _advance(state, combined, dt, t_next)
    _check_finite(new)
    return new


def validate_scenario(config: ScenarioConfig) -> ValidationReport:
    """Run every pre-integration validator and report each outcome.

    Covers graph connectivity, the variant's gain conditions (with the
    bounded variant's advisory acknowledgment), the declared dynamics
    constants checked empirically, and the filter initialization sums
    required by the bounded variant.
    """
    checks: list[ValidationCheck] = []
    g = config.graph
    dyn = config.dynamics

    connected = is_connected(g)
    lam2 = algebraic_connectivity(g) if g.n >= 2 else float("inf")
    checks.append(ValidationCheck(
        "graph connectivity", connected,
        f"n = {g.n}, m = {g.m}, lambda_2 = {lam2:g}"))

    box = dyn_mod.SamplingBox(t=(0.0, max(config.integrator.duration, 1.0)))
    if config.variant == "lipschitz":
        report = proto.validate_gains_lipschitz(config.gains, dyn.rho1, dyn.rho2)
        for cond in report.conditions:
            checks.append(ValidationCheck(f"gain condition {cond.name}", cond.passed,
                                          f"margin {cond.margin:g}"))
        rho1_hat, rho2_hat = dyn_mod.estimate_lipschitz(
            dyn, box, VALIDATION_SAMPLES, VALIDATION_SEED)
        ok1 = rho1_hat <= dyn.rho1 * (1.0 + DECLARED_CONSTANT_SLACK) + 1e-300
        ok2 = rho2_hat <= dyn.rho2 * (1.0 + DECLARED_CONSTANT_SLACK) + 1e-300
        checks.append(ValidationCheck(
            "declared position sensitivity rho1", ok1,
            f"sampled {rho1_hat:g} vs declared {dyn.rho1:g}"))
        checks.append(ValidationCheck(
            "declared velocity sensitivity rho2", ok2,
            f"sampled {rho2_hat:g} vs declared {dyn.rho2:g}"))
        origin = dyn_mod.origin_deviation(dyn, np.linspace(box.t[0], box.t[1], 100))
        checks.append(ValidationCheck(
            "f(0, 0, t) = 0", origin == 0.0, f"max deviation {origin:g}"))
    else:
        if connected:
            advisory = proto.validate_gains_bounded(
                config.gains.alpha, config.gains.eta, lam2, dyn.fbar, g.n,
                config.initial.materialize(g.n, dyn.dim, config.seed)["x"],
                incidence(g))
            for line in advisory.lines():
                checks.append(ValidationCheck("gain advisory", True, line))
        checks.append(ValidationCheck(
            "gain advisory acknowledged", config.gains.acknowledged,
            "acknowledged" if config.gains.acknowledged
            else "set gains.acknowledged = true after reviewing the advisory"))
        fmax = dyn_mod.check_bounded(dyn, box, VALIDATION_SAMPLES, VALIDATION_SEED)
        ok = fmax <= dyn.fbar * (1.0 + DECLARED_CONSTANT_SLACK) + 1e-300
        checks.append(ValidationCheck(
            "declared drift bound fbar", ok,
            f"sampled {fmax:g} vs declared {dyn.fbar:g}"))
        init = config.initial.materialize(g.n, dyn.dim, config.seed)
        for name in ("z", "zdot"):
            residual = float(np.abs(init[name].sum(axis=0)).sum())
            checks.append(ValidationCheck(
                f"initial sum_i {name}_i(0) = 0", residual <= 1e-12,
                f"1-norm residual {residual:g}"))
    return ValidationReport(checks=tuple(checks))


def _v_monitor_gains(config: ScenarioConfig) -> tuple[float, float]:
    # The bounded variant has no kappa; its V1 column is a plain
    # disagreement-energy diagnostic evaluated at kappa = 1.
    if config.variant == "lipschitz":
        return config.gains.kappa, config.gains.eta
    return 1.0, config.gains.eta


def run(config: ScenarioConfig) -> TrajectoryLog:
    """Validate, integrate from t = 0 to duration, and collect sampled metrics.

    Validator failures raise ScenarioValidationError before integration.
    A non-finite state aborts mid-run and returns the partial log with the
    summary flagged. Identical configs and seeds give bit-identical logs.
    """
    t_start = _time.perf_counter()
    report = validate_scenario(config)
    if not report.passed:
        raise ScenarioValidationError(report)

    g = config.graph
    integ = config.integrator
    lap = laplacian(g)
    neighbors = g.neighbor_lists()
    v1_kappa, v2_eta = _v_monitor_gains(config)
    init = config.initial.materialize(g.n, config.dynamics.dim, config.seed)
    state = SystemState(t=0.0, **init)

    def record(s: SystemState) -> MetricsRecord:
        p_out, q_out = s.filter_outputs()
        return metrics_mod.make_record(s.t, s.x, s.v, p_out, q_out, s.r, s.vr,
                                       s.z, lap, v1_kappa, v2_eta)

    records = [record(state)]
    states = [state] if config.store_states else None
    summary = RunSummary(validator_lines=report.lines())

    for k in range(1, integ.n_steps + 1):
        try:
            state = step(state, config.variant, g, config.dynamics, config.gains,
                         integ, neighbors, t_next=k * integ.dt)
        except NonFiniteStateError as exc:
            summary.aborted = True
            summary.abort_reason = str(exc)
            break
        if k % config.record_every == 0:
            records.append(record(state))
            if states is not None:
                states.append(state)

    times = np.array([rec.t for rec in records])
    per_agent = np.stack([rec.e_x + rec.e_v for rec in records])
    filtered = np.stack([metrics_mod.trailing_median(per_agent[:, i], MEDIAN_WINDOW)
                         for i in range(per_agent.shape[1])], axis=1)
    summary.terminal_max_error = float(filtered[-1].max())
    totals = per_agent.sum(axis=1)
    t_end = float(times[-1])
    if not summary.aborted and t_end > 0 and (totals > 0).all():
        try:
            summary.decay = metrics_mod.decay_fit(
                times, totals, (t_end / 4.0, 3.0 * t_end / 4.0))
        except ValueError:
            summary.decay = None
    summary.wall_time = _time.perf_counter() - t_start
    return TrajectoryLog(records=records, summary=summary, states=states)
