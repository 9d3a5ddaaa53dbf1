"""Single-loop primal-dual iteration with momentum and dual averaging.

One iteration advances the state (x, x_hat, y, y_tilde, y_breve, Theta) by

    y_new     = prox of the scaled outer conjugate at  y_tilde + rho g(x_hat)
    x_new     = prox of h at  x_hat - (grad f(x_hat) + g'(x_hat)^T y_new) / L
    Theta_new = g(x_new) - g(x_hat) + (y_new - y_tilde) / rho
    y_tilde  += eta (Theta_new - (1 - tau) Theta)
    x_hat_new = x_new + beta (x_new - x)
    y_breve   = (1 - tau) y_breve + tau y_new

In cone mode the dual prox becomes the projection onto the dual cone (the two
coincide when the outer term is the indicator of the negated cone).  The
auxiliary splitting variable s is never stored; ``reconstruct_s`` recovers it
from the dual step when diagnostics need it.

Per-iteration cost: one Jacobian-transpose product, one gradient of f, one
prox of h, one dual prox, and one evaluation of g at the new point plus one at
x_hat; the latter is served from cache whenever the previous momentum weight
was zero, since then x_hat equals the point g was last evaluated at.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError, PreconditionError
from .metrics import TraceRecord, cone_measure, primal_residual
from .problem import check_vector
from .prox import dist_to_polar_cone, project_dual_cone, prox_conjugate_moreau
from .schedules import ScheduleParams, make_schedule


class Diverged(RuntimeError):
    """A produced iterate contains NaN or Inf."""


@dataclass
class OpCounts:
    """Oracle calls made by the most recent iteration."""

    g_evals: int = 0
    jvp_evals: int = 0
    grad_f_evals: int = 0
    prox_h_calls: int = 0
    prox_Hstar_calls: int = 0


@dataclass
class IterateState:
    """Live variables of one run plus ergodic accumulators and caches."""

    k: int
    x: np.ndarray
    x_hat: np.ndarray
    y: np.ndarray
    y_tilde: np.ndarray
    y_breve: np.ndarray
    theta: np.ndarray
    xbar_num: np.ndarray
    ybar_num: np.ndarray
    weight_sum: float = 0.0
    ops: OpCounts = field(default_factory=OpCounts)
    # caches: g at x_hat (valid for the upcoming step), and the previous
    # step's ingredients for reconstruct_s
    g_xhat: Optional[np.ndarray] = None
    g_xhat_prev: Optional[np.ndarray] = None
    y_tilde_prev: Optional[np.ndarray] = None
    rho_prev: Optional[float] = None


@dataclass(frozen=True)
class Snapshot:
    """Read-only copy handed to callbacks after each iteration."""

    k: int
    x: np.ndarray
    y: np.ndarray
    y_breve: np.ndarray
    reported_x: np.ndarray
    reported_y: np.ndarray
    ops: OpCounts


@dataclass
class RunResult:
    final_state: IterateState
    trace: list
    status: str  # completed | diverged | precondition_failed


def init_state(prob, x0, y0):
    """Initial state: x_hat = x0, y_tilde = y_breve = y0, Theta = 0."""
    x0 = check_vector(x0, prob.dim_primal, "x0")
    y0 = check_vector(y0, prob.dim_dual, "y0")
    if not prob.h.value(x0) < math.inf:
        raise InvalidInputError("x0 is infeasible for the prox term h")
    n = prob.dim_dual
    return IterateState(
        k=0,
        x=x0.copy(),
        x_hat=x0.copy(),
        y=y0.copy(),
        y_tilde=y0.copy(),
        y_breve=y0.copy(),
        theta=np.zeros(n),
        xbar_num=np.zeros(prob.dim_primal),
        ybar_num=np.zeros(n),
    )


def step(prob, sched_state, state):
    """Advance the state by one iteration using the given parameters."""
    ops = OpCounts()
    tau, rho, eta, lk, beta = (
        sched_state.tau, sched_state.rho, sched_state.eta,
        sched_state.L, sched_state.beta,
    )

    if state.g_xhat is None:
        g_xhat = prob.g.apply(state.x_hat)
        ops.g_evals += 1
    else:
        g_xhat = state.g_xhat

    w = state.y_tilde + rho * g_xhat
    if sched_state.cone_mode:
        y_new = project_dual_cone(w, prob.cone)
    else:
        y_new = prox_conjugate_moreau(prob.H.prox, w, rho)
    ops.prox_Hstar_calls += 1

    grad = prob.f.grad(state.x_hat)
    ops.grad_f_evals += 1
    jty = prob.g.jtvec(state.x_hat, y_new)
    ops.jvp_evals += 1
    x_new = prob.h.prox(state.x_hat - (grad + jty) / lk, 1.0 / lk)
    ops.prox_h_calls += 1

    g_xnew = prob.g.apply(x_new)
    ops.g_evals += 1
    theta_new = g_xnew - g_xhat + (y_new - state.y_tilde) / rho
    y_tilde_new = state.y_tilde + eta * (theta_new - (1.0 - tau) * state.theta)
    x_hat_new = x_new + beta * (x_new - state.x)
    y_breve_new = (1.0 - tau) * state.y_breve + tau * y_new

    produced = np.concatenate([y_new, x_new, theta_new, y_tilde_new, x_hat_new, y_breve_new])
    if not np.all(np.isfinite(produced)):
        raise Diverged(f"non-finite iterate at iteration {state.k}")

    state.g_xhat_prev = g_xhat
    state.y_tilde_prev = state.y_tilde
    state.rho_prev = rho
    # when the momentum weight is zero, x_hat_new == x_new, so g there is known
    state.g_xhat = g_xnew if beta == 0.0 else None

    state.y = y_new
    state.x, state.x_hat = x_new, x_hat_new
    state.theta = theta_new
    state.y_tilde = y_tilde_new
    state.y_breve = y_breve_new
    state.ops = ops
    state.k += 1
    return state


def update_averages(state, sched_state):
    """Accumulate the variant's ergodic averages after a completed step."""
    variant = sched_state.variant
    if variant is None or not variant.averaged_primal:
        return state
    weight = 1.0 if variant.name == "ERGODIC_CVX" else sched_state.rho
    state.xbar_num += weight * state.x
    state.ybar_num += weight * state.y
    state.weight_sum += weight
    return state


def reconstruct_s(prob, state, rho_k=None):
    """Recover the implicit splitting variable of the last completed step.

    s = g(x_hat) + (y_tilde_before - y_new) / rho; equals the prox of the
    outer term at y_tilde/rho + g(x_hat).
    """
    if state.g_xhat_prev is None:
        raise InvalidInputError("no completed iteration to reconstruct from")
    rho = state.rho_prev if rho_k is None else rho_k
    if rho is None or rho <= 0:
        raise InvalidInputError("rho must be positive")
    return state.g_xhat_prev + (state.y_tilde_prev - state.y) / rho


def reported_points(state, variant):
    """The (x, y) pair the variant's guarantee speaks about."""
    if variant is not None and variant.averaged_primal and state.weight_sum > 0:
        return state.xbar_num / state.weight_sum, state.ybar_num / state.weight_sum
    return state.x, state.y_breve


def run(prob, params, x0, y0, max_iters, callbacks=(), with_trace=True):
    """Run the solver for ``max_iters`` iterations (or until divergence).

    Returns a :class:`RunResult` whose trace holds one row per iteration plus
    the initial row.  Callbacks receive (snapshot, sched_state) after every
    iteration and must not mutate anything.  Deterministic given its inputs;
    only wall_time_ms varies between repeated runs.
    """
    if max_iters < 1:
        raise InvalidInputError("max_iters must be at least 1")
    if not isinstance(params, ScheduleParams):
        raise InvalidInputError("params must be a ScheduleParams")
    state = init_state(prob, x0, y0)
    try:
        sched = make_schedule(prob, params, x0, y0)
    except PreconditionError:
        return RunResult(state, [], "precondition_failed")

    p_star = prob.optimum.value if prob.optimum is not None else None
    variant = params.variant
    trace = []

    def record(k, ss, wall_ms):
        rx, _ = reported_points(state, variant)
        feas = None
        if prob.cone is not None:
            feas = dist_to_polar_cone(prob.g.apply(rx), prob.cone)
        if p_star is None:
            resid = math.nan
        elif prob.cone is not None:
            # the objective is +inf at any infeasible iterate, so cone runs
            # trace the combined measure max(|F - F*|, infeasibility) instead
            resid = cone_measure(prob, rx, p_star)
        else:
            resid = primal_residual(prob, rx, p_star)
        trace.append(TraceRecord(
            k=k, tau=ss.tau, rho=ss.rho, eta=ss.eta, L=ss.L, beta=ss.beta,
            primal_residual=resid, feasibility=feas, wall_time_ms=wall_ms,
        ))

    if with_trace:
        record(0, sched.at(0), 0.0)

    status = "completed"
    for k in range(max_iters):
        ss = sched.at(k)
        t0 = time.perf_counter()
        try:
            step(prob, ss, state)
        except Diverged:
            status = "diverged"
            break
        update_averages(state, ss)
        wall_ms = (time.perf_counter() - t0) * 1e3
        if with_trace:
            record(k + 1, ss, wall_ms)
        if callbacks:
            rx, ry = reported_points(state, variant)
            snap = Snapshot(
                k=state.k, x=state.x.copy(), y=state.y.copy(),
                y_breve=state.y_breve.copy(), reported_x=rx.copy(),
                reported_y=ry.copy(), ops=state.ops,
            )
            for cb in callbacks:
                cb(snap, ss)

    return RunResult(state, trace, status)
