"""Primal-dual first-order solver for problems of the form

    minimize  f(x) + h(x) + H(g(x))

with smooth convex f, prox-friendly h and H, and a smooth (possibly
nonlinear) coupling map g such that H(g(.)) is convex.  The package bundles
the single-loop solver, four parameter schedules with convergence
certificates, cone-constrained specializations, desk-scale test instances
with independent solution oracles, and a config-driven benchmark CLI.
"""

from ._core import HAVE_EXTENSION, backend_name
from .errors import (
    CertificateUnavailableError,
    CheckFailedError,
    ConfigError,
    InvalidInputError,
    ParseError,
    PreconditionError,
)
from .metrics import (
    DualOracle,
    TraceRecord,
    cone_measure,
    curvature_sandwich_check,
    dual_residual,
    dual_value,
    fit_rate_slope,
    pd_gap,
    primal_residual,
    theorem_bound,
)
from .problem import (
    CompositeProblem,
    Mapping,
    ProxTerm,
    SaddleOracle,
    SmoothTerm,
    aggregate_constants,
    evaluate_primal,
    finite_diff_check,
    lagrangian_value,
)
from .schedules import ScheduleParams, ScheduleState, Variant, make_schedule
from .solver import (
    IterateState,
    RunResult,
    init_state,
    reconstruct_s,
    reported_points,
    run,
    step,
    update_averages,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
