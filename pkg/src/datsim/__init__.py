"""Distributed average tracking of second-order nonlinear agents.

Library for simulating and validating two coupling protocols over an
undirected graph: a Lipschitz-drift variant with state-dependent gains and
a bounded-drift variant with constant gains. Each agent runs a local
second-order filter whose outputs converge to the average of all
reference inputs, plus a discontinuous control input that tracks those
outputs.
"""
from .dynamics import DynamicsSpec, SamplingBox, check_bounded, estimate_lipschitz, eval_f, make_dynamics
from .graph import (
    Graph,
    algebraic_connectivity,
    build_graph,
    family_graph,
    incidence,
    is_connected,
    laplacian,
    symmetric_eigenvalues,
)
from .metrics import (
    DecayFit,
    MetricsRecord,
    decay_fit,
    lyapunov_v1,
    lyapunov_v2,
    sum_residuals,
    tracking_errors,
    trailing_median,
)
from .output import read_csv, write_csv, write_summary
from .protocol import (
    BoundedGainAdvisory,
    GainReport,
    GainSetBounded,
    GainSetLipschitz,
    SignumPolicy,
    control_bounded,
    control_lipschitz,
    filter_accel_bounded,
    filter_accel_lipschitz,
    psi_gain,
    signum,
    validate_gains_bounded,
    validate_gains_lipschitz,
)
from .scenario import (
    InitialCondition,
    IntegratorConfig,
    ScenarioConfig,
    ScenarioParseError,
    parse_scenario,
    scenario_from_dict,
)
from .simulator import (
    NonFiniteStateError,
    ScenarioValidationError,
    SystemState,
    TrajectoryLog,
    derivative,
    run,
    step,
    validate_scenario,
)

__version__ = "0.1.0"
