"""Zeroth-order online ADMM.

Gradient-free online optimization of

    min (1/T) sum_t f(x; w_t) + phi(y)   s.t.  A x + B y = c

where f is only available through function values. The x-step uses a
two-point random gradient estimate inside a linearized ADMM update.
"""

from .core import (
    ConstraintSystem,
    DiagnosticUnavailable,
    Distribution,
    EstimationError,
    InvalidConfigError,
    InvalidInputError,
    InvertibleSide,
    LossOracle,
    NumericalError,
    ProblemSpec,
    ReferenceFailureError,
    Regularizer,
    Schedule,
    ScheduleError,
    ScheduleKind,
    SingularityError,
    SolverConfig,
    SolverError,
    ZooAdmmError,
    build_config,
    lambda_max_gram,
)
from .gradient import (
    DirectionSampler,
    estimate_avg_directions,
    estimate_avg_observations,
    estimate_hybrid,
    estimate_single,
)
from .metrics import average_regret, loglog_slope, offline_optimum, regret_report
from .solver import Minibatch, RunTrace, SolverState, run_oadmm, run_zoo_admm

__version__ = "0.1.0"
