"""Declarative scenario configuration.

A scenario is a single strict-schema JSON document; unknown keys are
rejected everywhere and parsing reports every violation found, not just
the first. Defaults: explicit Euler at dt = 1e-3, exact signum, one
metrics record every 10 steps, all states initially zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DynamicsSpec, make_dynamics
from .graph import Graph, build_graph, family_graph
from .protocol import (
    GainSetBounded,
    GainSetLipschitz,
    SignumPolicy,
    validate_gains_lipschitz,
)

__all__ = [
    "IntegratorConfig",
    "InitialCondition",
    "ScenarioConfig",
    "ScenarioParseError",
    "parse_scenario",
    "scenario_from_dict",
    "VARIANTS",
]

VARIANTS = ("lipschitz", "bounded")

DEFAULT_DT = 1e-3
DEFAULT_RECORD_EVERY = 10
INITIAL_SUM_TOL = 1e-12


class ScenarioParseError(ValueError):
    """Carries the complete list of schema/consistency violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    RK4 is only meaningful with the smoothed signum: intermediate stages
    straddling the switching surface make stage mixing meaningless with
    the exact sign map.
    """

    duration: float
    scheme: str = "euler"
    dt: float = DEFAULT_DT
    policy: SignumPolicy = field(default_factory=SignumPolicy)

    def __post_init__(self):
        if self.scheme not in ("euler", "rk4"):
            raise ValueError(f"scheme must be 'euler' or 'rk4', got '{self.scheme}'")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.duration < 0:
            raise ValueError(f"duration must be nonnegative, got {self.duration}")
        if self.scheme == "rk4" and self.policy.mode != "smoothed":
            raise ValueError("rk4 requires the smoothed signum policy")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class InitialCondition:
    """Initial states; anything left unspecified defaults to zeros.

    reference_box draws the reference inputs r(0) uniformly from the given
    interval using the scenario seed; reference velocities default to zero
    like every other state unless given explicitly. The box cannot be
    mixed with an explicit r array.
    """

    x: np.ndarray | None = None
    v: np.ndarray | None = None
    z: np.ndarray | None = None
    zdot: np.ndarray | None = None
    r: np.ndarray | None = None
    vr: np.ndarray | None = None
    reference_box: tuple[float, float] | None = None

    def materialize(self, n: int, p: int, seed: int) -> dict[str, np.ndarray]:
        """Resolve every initial state to an (n, p) array."""
        out = {}
        for name in ("x", "v", "z", "zdot", "vr"):
            value = getattr(self, name)
            out[name] = np.zeros((n, p)) if value is None else np.array(value, dtype=float)
        if self.reference_box is not None:
            rng = np.random.default_rng(seed)
            lo, hi = self.reference_box
            out["r"] = rng.uniform(lo, hi, (n, p))
        else:
            out["r"] = np.zeros((n, p)) if self.r is None else np.array(self.r, dtype=float)
        for name, arr in out.items():
            if arr.shape != (n, p):
                raise ValueError(f"initial {name} must have shape ({n}, {p}), got {arr.shape}")
        return out


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated simulation scenario."""

    graph: Graph
    variant: str
    dynamics: DynamicsSpec
    gains: GainSetLipschitz | GainSetBounded
    integrator: IntegratorConfig
    initial: InitialCondition
    record_every: int = DEFAULT_RECORD_EVERY
    seed: int = 0
    output: str | None = None
    store_states: bool = False


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_keys(name: str, obj, required: set, optional: set, violations: list) -> bool:
    """Strict-schema key check; returns False when the section is unusable."""
    if not isinstance(obj, dict):
        violations.append(f"{name}: expected a JSON object")
        return False
    ok = True
    for key in sorted(set(obj) - required - optional):
        violations.append(f"{name}: unknown key '{key}'")
        ok = False
    for key in sorted(required - set(obj)):
        violations.append(f"{name}: missing required key '{key}'")
        ok = False
    return ok


def _take_number(name: str, obj: dict, key: str, violations: list, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if not _is_number(value):
        violations.append(f"{name}: '{key}' must be a number")
        return default
    return float(value)


def _parse_graph(obj, violations) -> Graph | None:
    if not isinstance(obj, dict):
        violations.append("graph: expected a JSON object")
        return None
    if "family" in obj:
        if not _check_keys("graph", obj, {"family", "n"}, set(), violations):
            return None
        try:
            return family_graph(str(obj["family"]), int(obj["n"]))
        except (ValueError, TypeError) as exc:
            violations.append(f"graph: {exc}")
            return None
    if not _check_keys("graph", obj, {"n", "edges"}, set(), violations):
        return None
    if not isinstance(obj["edges"], list):
        violations.append("graph: 'edges' must be a list of node pairs")
        return None
    try:
        return build_graph(int(obj["n"]), [tuple(e) for e in obj["edges"]])
    except (ValueError, TypeError, IndexError) as exc:
        violations.append(f"graph: {exc}")
        return None


def _parse_dynamics(obj, violations) -> DynamicsSpec | None:
    if not _check_keys("dynamics", obj, {"kind", "dim"},
                       {"params", "rho1", "rho2", "fbar"}, violations):
        return None
    params = obj.get("params", {})
    if not isinstance(params, dict):
        violations.append("dynamics: 'params' must be an object")
        return None
    try:
        return make_dynamics(
            kind=str(obj["kind"]),
            dim=int(obj["dim"]),
            params={k: float(v) for k, v in params.items()},
            rho1=_take_number("dynamics", obj, "rho1", violations),
            rho2=_take_number("dynamics", obj, "rho2", violations),
            fbar=_take_number("dynamics", obj, "fbar", violations),
        )
    except (ValueError, TypeError) as exc:
        violations.append(f"dynamics: {exc}")
        return None


def _parse_gains(obj, variant, dyn: DynamicsSpec | None, violations):
    if variant == "lipschitz":
        if not _check_keys("gains", obj, {"kappa", "alpha", "gamma", "eta"}, set(), violations):
            return None
        values = {k: _take_number("gains", obj, k, violations) for k in
                  ("kappa", "alpha", "gamma", "eta")}
        if any(v is None for v in values.values()):
            return None
        try:
            gains = GainSetLipschitz(**values)
        except ValueError as exc:
            violations.append(f"gains: {exc}")
            return None
        if dyn is not None:
            if not dyn.has_lipschitz:
                violations.append(
                    "gains: lipschitz variant requires dynamics with declared (rho1, rho2)")
            else:
                report = validate_gains_lipschitz(gains, dyn.rho1, dyn.rho2)
                for cond in report.failures():
                    violations.append(
                        f"gains: condition '{cond.name}' violated "
                        f"(value {cond.value:g}, bound {cond.bound:g})")
        return gains
    if variant == "bounded":
        if not _check_keys("gains", obj, {"alpha", "eta"}, {"acknowledged"}, violations):
            return None
        alpha = _take_number("gains", obj, "alpha", violations)
        eta = _take_number("gains", obj, "eta", violations)
        acknowledged = obj.get("acknowledged", False)
        if not isinstance(acknowledged, bool):
            violations.append("gains: 'acknowledged' must be a boolean")
            acknowledged = False
        if alpha is None or eta is None:
            return None
        try:
            gains = GainSetBounded(alpha=alpha, eta=eta, acknowledged=acknowledged)
        except ValueError as exc:
            violations.append(f"gains: {exc}")
            return None
        if dyn is not None and not dyn.has_bound:
            violations.append("gains: bounded variant requires dynamics with declared fbar")
        return gains
    return None


def _parse_signum(obj, violations) -> SignumPolicy | None:
    if obj is None:
        return SignumPolicy()
    if not _check_keys("integrator.signum", obj, {"mode"}, {"epsilon"}, violations):
        return None
    epsilon = _take_number("integrator.signum", obj, "epsilon", violations, default=1e-2)
    try:
        return SignumPolicy(mode=str(obj["mode"]), epsilon=epsilon)
    except ValueError as exc:
        violations.append(f"integrator.signum: {exc}")
        return None


def _parse_integrator(obj, violations) -> IntegratorConfig | None:
    if not _check_keys("integrator", obj, {"duration"}, {"scheme", "dt", "signum"}, violations):
        return None
    duration = _take_number("integrator", obj, "duration", violations)
    dt = _take_number("integrator", obj, "dt", violations, default=DEFAULT_DT)
    policy = _parse_signum(obj.get("signum"), violations)
    if duration is None or policy is None:
        return None
    try:
        return IntegratorConfig(duration=duration, scheme=str(obj.get("scheme", "euler")),
                                dt=dt, policy=policy)
    except ValueError as exc:
        violations.append(f"integrator: {exc}")
        return None


def _parse_array(name: str, value, n: int | None, p: int | None, violations):
    try:
        arr = np.array(value, dtype=float)
    except (ValueError, TypeError):
        violations.append(f"initial: '{name}' must be a nested list of numbers")
        return None
    if n is not None and p is not None and arr.shape != (n, p):
        violations.append(f"initial: '{name}' must have shape ({n}, {p}), got {arr.shape}")
        return None
    return arr


def _parse_initial(obj, n, p, variant, violations) -> InitialCondition | None:
    state_keys = {"x", "v", "z", "zdot", "r", "vr"}
    if obj is None:
        obj = {}
    if not _check_keys("initial", obj, set(), state_keys | {"reference_box"}, violations):
        return None
    arrays = {}
    for key in state_keys:
        if key in obj:
            arrays[key] = _parse_array(key, obj[key], n, p, violations)
    box = None
    if "reference_box" in obj:
        raw = obj["reference_box"]
        if (not isinstance(raw, list) or len(raw) != 2
                or not all(_is_number(v) for v in raw) or raw[0] >= raw[1]):
            violations.append("initial: 'reference_box' must be [lo, hi] with lo < hi")
        else:
            box = (float(raw[0]), float(raw[1]))
        if "r" in obj:
            violations.append("initial: 'reference_box' cannot be combined with an explicit r")
    if variant == "bounded":
        for key in ("z", "zdot"):
            arr = arrays.get(key)
            if arr is not None:
                residual = float(np.abs(arr.sum(axis=0)).sum())
                if residual > INITIAL_SUM_TOL:
                    violations.append(
                        f"initial: bounded variant requires sum_i {key}_i(0) = 0 "
                        f"(got 1-norm residual {residual:g})")
    if any(v is None for v in arrays.values()):
        return None
    return InitialCondition(reference_box=box, **arrays)


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    """Validate a raw configuration mapping; raises ScenarioParseError with all violations."""
    violations: list[str] = []
    top_required = {"graph", "variant", "dynamics", "gains", "integrator", "seed"}
    top_optional = {"initial", "record_every", "output", "store_states"}
    if not _check_keys("scenario", doc, top_required, top_optional, violations):
        raise ScenarioParseError(violations)

    variant = doc.get("variant")
    if variant not in VARIANTS:
        violations.append(f"variant: must be one of {list(VARIANTS)}, got {variant!r}")
        variant = None

    graph = _parse_graph(doc.get("graph"), violations)
    dyn = _parse_dynamics(doc.get("dynamics"), violations)
    gains = _parse_gains(doc.get("gains"), variant, dyn, violations) if variant else None
    integrator = _parse_integrator(doc.get("integrator"), violations)

    n = graph.n if graph is not None else None
    p = dyn.dim if dyn is not None else None
    initial = _parse_initial(doc.get("initial"), n, p, variant, violations)

    record_every = doc.get("record_every", DEFAULT_RECORD_EVERY)
    if not isinstance(record_every, int) or isinstance(record_every, bool) or record_every < 1:
        violations.append(f"record_every: must be a positive integer, got {record_every!r}")
        record_every = DEFAULT_RECORD_EVERY

    seed = doc.get("seed")
    if "seed" in doc and (not isinstance(seed, int) or isinstance(seed, bool)):
        violations.append(f"seed: must be an integer, got {seed!r}")
        seed = None

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        violations.append("output: must be a string path")
        output = None

    store_states = doc.get("store_states", False)
    if not isinstance(store_states, bool):
        violations.append("store_states: must be a boolean")
        store_states = False

    if violations or None in (graph, dyn, gains, integrator, initial) or seed is None:
        raise ScenarioParseError(violations or ["scenario: incomplete configuration"])
    return ScenarioConfig(
        graph=graph, variant=variant, dynamics=dyn, gains=gains,
        integrator=integrator, initial=initial, record_every=record_every,
        seed=seed, output=output, store_states=store_states,
    )


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse a JSON scenario document; raises ScenarioParseError listing every violation."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError([f"invalid JSON: {exc}"]) from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError(["scenario: top level must be a JSON object"])
    return scenario_from_dict(doc)
