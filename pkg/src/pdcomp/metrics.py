"""Convergence metrics: residuals, duality gap, cone measure, certificates.

All computations here are pure functions over snapshots and never touch a
running solver's state.  The dual oracle is an independent accelerated
projected-gradient solver for the inner minimization of the dual function, so
dual residuals and gaps are legitimate cross-checks of the main algorithm.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CertificateUnavailableError, InvalidInputError
from .problem import check_vector, evaluate_primal
from .prox import dist_to_polar_cone
from .schedules import Variant, make_schedule


@dataclass
class TraceRecord:
    """One per-iteration metrics row; optional fields stay None when skipped."""

    k: int
    tau: float
    rho: float
    eta: float
    L: float
    beta: float
    primal_residual: float
    dual_residual: Optional[float] = None
    pd_gap: Optional[float] = None
    feasibility: Optional[float] = None
    theorem_bound: Optional[float] = None
    wall_time_ms: float = 0.0

FIELD_ORDER = (
    "k", "tau", "rho", "eta", "L", "beta", "primal_residual",
    "dual_residual", "pd_gap", "feasibility", "theorem_bound", "wall_time_ms",
)


def primal_residual(prob, x, p_star):
    """P(x) - P*; +inf when x is infeasible for the prox term or outer term."""
    if not math.isfinite(p_star):
        raise InvalidInputError("p_star must be finite")
    val = evaluate_primal(prob, x)
    if val == math.inf:
        return math.inf
    return val - p_star


@dataclass
class DualValue:
    value: float
    low_accuracy: bool
    inner_iterations: int
    x_inner: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DualOracle:
    """Inner solver configuration for evaluating the dual function.

    The inner problem min_x f(x) + h(x) + <y, g(x)> is solved by accelerated
    proximal gradient (projected gradient when h is an indicator) with
    function-restart, using the safe step 1 / (L_f + L_g ||y||).
    """

    tolerance: float = 1e-10
    iteration_cap: int = 100_000

    def solve_inner(self, prob, y, x0=None):
        y = check_vector(y, prob.dim_dual, "y")
        x = np.zeros(prob.dim_primal) if x0 is None else check_vector(x0, prob.dim_primal, "x0")
        x = prob.h.prox(x, 1.0)  # ensure a feasible start
        lip = prob.f.grad_lipschitz + prob.map_grad_lipschitz * float(np.linalg.norm(y))
        step = 1.0 / max(lip, 1e-12)

        def grad(u):
            return prob.f.grad(u) + prob.g.jtvec(u, y)

        w = x.copy()
        x_prev = x.copy()
        t = 1.0
        iters = 0
        converged = False
        for iters in range(1, self.iteration_cap + 1):
            gw = grad(w)
            x = prob.h.prox(w - step * gw, step)
            # gradient mapping at the extrapolated point
            if np.linalg.norm(w - x) / step <= self.tolerance:
                converged = True
                break
            if np.dot(w - x, x - x_prev) > 0.0:
                t = 1.0  # restart momentum when it points uphill
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            w = x + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
            x_prev = x
        value = float(prob.f.value(x) + prob.h.value(x) + np.dot(y, prob.g.apply(x)))
        return x, value, converged, iters


def dual_value(prob, y, oracle=None):
    """Dual objective D(y) = H*(y) - min_x { f(x) + h(x) + <y, g(x)> }.

    D is a minimization objective here, so strong duality reads
    D* = -P* and the duality gap is P(x) + D(y) >= 0.
    """
    oracle = oracle or DualOracle()
    if prob.H.conjugate_value is None:
        raise CertificateUnavailableError(
            "dual metrics need the conjugate of the outer term (H.conjugate_value)"
        )
    hy = prob.H.conjugate_value(check_vector(y, prob.dim_dual, "y"))
    if not hy < math.inf:
        return DualValue(math.inf, False, 0)
    x, inner, converged, iters = oracle.solve_inner(prob, y)
    return DualValue(float(hy - inner), not converged, iters, x)


def dual_residual(prob, y, p_star, oracle=None):
    """D(y) - D* = D(y) + P* (nonnegative up to oracle accuracy)."""
    dv = dual_value(prob, y, oracle)
    return dv.value + p_star


def pd_gap(prob, x, y, oracle=None):
    """Duality gap P(x) + D(y); nonnegative up to oracle tolerance."""
    p = evaluate_primal(prob, x)
    d = dual_value(prob, y, oracle).value
    return p + d


def cone_measure(prob, x, f_star, cone=None):
    """Combined optimality measure max(|F(x) - F*|, dist(g(x), -K)).

    F here is f + h (the outer indicator is accounted for by the distance
    term).
    """
    if not math.isfinite(f_star):
        raise InvalidInputError("f_star must be finite")
    cone = cone or prob.cone
    if cone is None:
        raise InvalidInputError("cone measure needs a cone tag")
    x = check_vector(x, prob.dim_primal, "x")
    fval = prob.f.value(x) + prob.h.value(x)
    obj = abs(fval - f_star) if math.isfinite(fval) else math.inf
    infeas = dist_to_polar_cone(prob.g.apply(x), cone)
    return max(obj, infeas)


def theorem_bound(prob, params, k, x0, y0, saddle=None, schedule=None):
    """Right-hand side of the variant's primal convergence guarantee at k.

    In cone mode the combined-measure bound is returned instead; it uses
    ||y*|| + 1 in place of the outer term's Lipschitz constant.
    """
    if k < 1:
        raise InvalidInputError("bounds are stated for k >= 1")
    saddle = saddle or prob.optimum
    if saddle is None:
        raise CertificateUnavailableError("certificates need a solution oracle")
    x0 = check_vector(x0, prob.dim_primal, "x0")
    y0 = check_vector(y0, prob.dim_dual, "y0")
    sched = schedule or make_schedule(prob, params, x0, y0)
    L0, eta0, rho0 = sched.L0, sched.eta0, sched.rho0
    dx2 = float(np.dot(x0 - saddle.x, x0 - saddle.x))
    y0_norm = float(np.linalg.norm(y0))
    variant = params.variant

    if params.cone_mode:
        radius = y0_norm + float(np.linalg.norm(saddle.y)) + 1.0
        delta0 = L0 * dx2 + radius**2 / eta0
        if variant == Variant.ERGODIC_CVX:
            return delta0 / (2.0 * k)
        if variant == Variant.ERGODIC_SCVX:
            return delta0 / (2.0 * (rho0 * k + sched.P0 * k * (k - 1)))
        if variant == Variant.SEMI_CVX:
            return delta0 / (2.0 * k)
        return 2.0 * delta0 / (k + 1.0) ** 2

    m_outer = prob.H.lipschitz
    if not m_outer < math.inf:
        raise CertificateUnavailableError(
            "the primal bound needs a Lipschitz outer term (H.lipschitz finite)"
        )
    dual_rad2 = (y0_norm + m_outer) ** 2
    if variant == Variant.ERGODIC_CVX:
        return (L0 * dx2 + (2.0 / rho0) * dual_rad2) / (2.0 * k)
    if variant == Variant.ERGODIC_SCVX:
        num = L0 * dx2 + (2.0 / rho0) * dual_rad2
        return num / (2.0 * rho0 * k + sched.P0 * k * (k - 1))
    if variant == Variant.SEMI_CVX:
        num = L0 * dx2 + dual_rad2 / ((1.0 - params.gamma) * rho0)
        return num / (2.0 * k)
    num = L0 * dx2 + dual_rad2 / ((1.0 - params.gamma) * rho0)
    return 2.0 * num / (k + 1.0) ** 2


def fit_rate_slope(series, k_min, k_max):
    """Log-log slope of the running-minimum envelope of (k, value) pairs.

    Least-squares fit of log(envelope) against log(k) over k in
    [k_min, k_max]; at least 5 points must fall in the range.
    """
    ks = []
    envelope = []
    best = math.inf
    for k, v in series:
        if k <= 0:
            continue
        best = min(best, v)
        if k_min <= k <= k_max:
            ks.append(float(k))
            envelope.append(best)
    if len(ks) < 5:
        raise InvalidInputError(
            f"need at least 5 points in [{k_min}, {k_max}], got {len(ks)}"
        )
    env = np.asarray(envelope)
    if np.any(env <= 0.0):
        raise InvalidInputError("envelope must stay positive on the fitted range")
    logk = np.log(np.asarray(ks))
    logv = np.log(env)
    slope = np.polyfit(logk, logv, 1)[0]
    return float(slope)


def coupling_penalty(prob, x, s, y, rho):
    """phi_rho(x, s, y) = <y, g(x) - s> + (rho/2) ||g(x) - s||^2."""
    r = prob.g.apply(x) - s
    return float(np.dot(y, r) + 0.5 * rho * np.dot(r, r))


def linearization_gap(prob, x_hat, s_hat, x, s, y, rho):
    """Bregman-style gap of the coupling penalty between (x, s) and (x_hat, s_hat).

    Computed from the definition: phi at the new point minus its first-order
    expansion around (x, s).
    """
    gx = prob.g.apply(x)
    r = gx - s
    w = y + rho * r
    grad_x_dir = float(np.dot(prob.g.jtvec(x, w), x_hat - x))
    grad_s_dir = float(np.dot(-w, s_hat - s))
    return (
        coupling_penalty(prob, x_hat, s_hat, y, rho)
        - coupling_penalty(prob, x, s, y, rho)
        - grad_x_dir
        - grad_s_dir
    )


@dataclass(frozen=True)
class SandwichReport:
    min_lower_slack: float
    max_upper_slack: float
    samples: int
    skipped: int

    @property
    def passed(self):
        return self.min_lower_slack >= -1e-9 and self.max_upper_slack <= 1e-9


def curvature_sandwich_check(prob, samples=1000, seed=0, rho=1.0, anchor=None, radius=0.5):
    """Verify the two-sided curvature estimate of the coupling penalty.

    For sampled points the linearization gap minus the exact quadratic term
    must be nonnegative and at most (1/2) L_g ||y'|| ||x_hat - x||^2, where
    y' is the shifted dual point y + rho [g(x) - s].  Sampling keeps y' in
    the domain of the outer conjugate by construction: s is chosen as
    g(x) + (y - y') / rho with y, y' drawn through the conjugate's prox.
    """
    rng = np.random.default_rng(seed)
    p, n = prob.dim_primal, prob.dim_dual
    if anchor is None:
        anchor = np.zeros(p) if prob.start is None else np.asarray(prob.start[0], float)

    def draw_dual(scale=1.0):
        # prox of the conjugate maps any point into dom H*
        z = rng.standard_normal(n) * scale
        return z - prob.H.prox(z, 1.0)

    min_lower = math.inf
    max_upper = -math.inf
    skipped = 0
    done = 0
    while done < samples:
        x = prob.h.prox(anchor + radius * rng.standard_normal(p), 1.0)
        x_hat = prob.h.prox(anchor + radius * rng.standard_normal(p), 1.0)
        y = draw_dual()
        y_shift = draw_dual()
        s = prob.g.apply(x) + (y - y_shift) / rho
        s_hat = rng.standard_normal(n)
        values = np.concatenate([x, x_hat, y, y_shift, s, s_hat])
        if not np.all(np.isfinite(values)):
            skipped += 1
            continue
        gap = linearization_gap(prob, x_hat, s_hat, x, s, y, rho)
        quad = prob.g.apply(x_hat) - s_hat - (prob.g.apply(x) - s)
        lower = gap - 0.5 * rho * float(np.dot(quad, quad))
        curvature = 0.5 * prob.map_grad_lipschitz * float(np.linalg.norm(y_shift))
        upper = lower - curvature * float(np.dot(x_hat - x, x_hat - x))
        min_lower = min(min_lower, lower)
        max_upper = max(max_upper, upper)
        done += 1
    return SandwichReport(min_lower, max_upper, samples, skipped)
