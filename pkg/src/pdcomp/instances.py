"""Concrete test problems with verified constants and solution oracles.

Desk-scale instances (p <= 50, n <= 10) so the reference solutions can come
from brute-force or KKT oracles that are entirely independent of the solver:

* ``toy``            -- 1-D bilinear coupling with a quadratic outer term;
  everything is hand-checkable.
* ``toy_max``        -- 1-D primal, outer max of (x, -x); absolute-value
  objective with a Lipschitz outer term.
* ``game``           -- simplex-constrained logistic cost coupled to a
  max-type payoff through the nonlinear map b_i / (1 + x_i).
* ``classification`` -- worst-group regularized logistic loss over several
  synthetic data groups (strongly convex).
* ``cone_qp``        -- small quadratic program with an affine map constrained
  to a cone, solved exactly by active-set KKT enumeration.

Builders are pure given their parameters and seed; instances are immutable.
"""

import functools
import math

import numpy as np

from .errors import CheckFailedError, InvalidInputError, ParseError
from .metrics import DualOracle
from .problem import (
    CompositeProblem,
    Mapping,
    ProxTerm,
    SaddleOracle,
    SmoothTerm,
    zero_prox_term,
    zero_smooth_term,
)
from .prox import (
    project_dual_cone,
    project_polar_cone,
    project_simplex,
    prox_max_coords,
)

_FEAS_TOL = 1e-8


def _sigmoid(t):
    out = np.empty_like(t, dtype=np.float64)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def simplex_indicator():
    """Indicator of the unit simplex with a small feasibility tolerance."""

    def value(x):
        if abs(float(np.sum(x)) - 1.0) <= _FEAS_TOL and np.min(x) >= -_FEAS_TOL:
            return 0.0
        return math.inf

    return ProxTerm(value=value, prox=lambda v, lam: project_simplex(v))


def max_prox_term():
    """Outer term max_i(u_i): Lipschitz constant 1, conjugate = simplex indicator."""

    def conj(y):
        if abs(float(np.sum(y)) - 1.0) <= _FEAS_TOL and np.min(y) >= -_FEAS_TOL:
            return 0.0
        return math.inf

    return ProxTerm(
        value=lambda u: float(np.max(u)),
        prox=prox_max_coords,
        lipschitz=1.0,
        conjugate_value=conj,
    )


def polar_cone_indicator(cone):
    """Outer term for cone-constrained programs: indicator of -K."""

    def value(s):
        s = np.asarray(s, float)
        return 0.0 if np.linalg.norm(s - project_polar_cone(s, cone)) <= _FEAS_TOL else math.inf

    def conj(y):
        y = np.asarray(y, float)
        return 0.0 if np.linalg.norm(y - project_dual_cone(y, cone)) <= _FEAS_TOL else math.inf

    return ProxTerm(
        value=value,
        prox=lambda v, lam: project_polar_cone(v, cone),
        conjugate_value=conj,
    )


# ---------------------------------------------------------------------------
# hand-checkable toys

def build_bilinear_toy():
    """1-D problem with identity coupling and a quadratic outer term.

    The objective is x^2 / 2 with saddle point (0, 0); the outer term is its
    own conjugate, which makes every prox in the loop a one-line formula.
    """
    quad = ProxTerm(
        value=lambda s: 0.5 * float(s[0]) ** 2,
        prox=lambda v, lam: v / (1.0 + lam),
        strong_convexity=1.0,
        conjugate_value=lambda y: 0.5 * float(y[0]) ** 2,
    )
    g = Mapping(
        apply=lambda x: x.copy(),
        jtvec=lambda x, y: y.copy(),
        component_lipschitz=[1.0],
        component_grad_lipschitz=[0.0],
        is_affine=True,
    )
    return CompositeProblem(
        f=zero_smooth_term(), h=zero_prox_term(), H=quad, g=g,
        dim_primal=1, dim_dual=1,
        optimum=SaddleOracle(np.zeros(1), np.zeros(1), 0.0, 1e-15, "analytic"),
        start=(np.array([1.0]), np.array([0.0])),
        name="toy",
    )


def build_max_toy():
    """1-D problem with coupling (x, -x) and outer max: objective |x|."""
    g = Mapping(
        apply=lambda x: np.array([x[0], -x[0]]),
        jtvec=lambda x, y: np.array([y[0] - y[1]]),
        component_lipschitz=[1.0, 1.0],
        component_grad_lipschitz=[0.0, 0.0],
        is_affine=True,
        bound=math.sqrt(2.0),
    )
    return CompositeProblem(
        f=zero_smooth_term(), h=zero_prox_term(), H=max_prox_term(), g=g,
        dim_primal=1, dim_dual=2,
        optimum=SaddleOracle(np.zeros(1), np.array([0.5, 0.5]), 0.0, 1e-15, "analytic"),
        start=(np.array([1.0]), np.array([0.5, 0.5])),
        name="toy_max",
    )


# ---------------------------------------------------------------------------
# minimax game on the simplex

def build_game(A, b, oracle=None, name="game"):
    """Simplex game: mean logistic cost plus the worst payoff b_i / (1 + x_i).

    The primal strategy lives on the unit simplex, the coupling map is
    componentwise convex there provided b >= 0, and the outer term is a max
    over the n payoff coordinates (so n <= p entries of x are coupled).
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInputError("A must be a matrix")
    if b.ndim != 1 or b.size == 0:
        raise InvalidInputError("b must be a nonempty vector")
    if np.any(b < 0):
        raise InvalidInputError("b must be nonnegative to keep the coupling convex")
    n_rows, p = A.shape
    n = b.size
    if n > p:
        raise InvalidInputError("the payoff couples one x-coordinate per entry of b; need len(b) <= p")

    def f_val(x):
        return float(np.logaddexp(0.0, A @ x).mean())

    def f_grad(x):
        return A.T @ _sigmoid(A @ x) / n_rows

    lf = float(np.linalg.norm(A, 2) ** 2 / (4.0 * n_rows))
    f = SmoothTerm(value=f_val, grad=f_grad, grad_lipschitz=lf)

    def g_apply(x):
        return b / (1.0 + x[:n])

    def g_jtvec(x, y):
        out = np.zeros(p)
        out[:n] = -b * y / (1.0 + x[:n]) ** 2
        return out

    g = Mapping(
        apply=g_apply,
        jtvec=g_jtvec,
        component_lipschitz=np.abs(b),
        component_grad_lipschitz=2.0 * np.abs(b),
        bound=float(np.linalg.norm(b)),
    )
    return CompositeProblem(
        f=f, h=simplex_indicator(), H=max_prox_term(), g=g,
        dim_primal=p, dim_dual=n,
        fstar_lipschitz=1.0,  # the feasible set is the unit simplex
        optimum=oracle,
        start=(np.full(p, 1.0 / p), np.full(n, 1.0 / n)),
        name=name,
    )


def _triangle_grid(centers, half_width, step):
    """Grid over {x1, x2 >= 0, x1 + x2 <= 1} near (c1, c2), third coord implied."""
    c1, c2 = centers
    a1 = np.arange(max(c1 - half_width, 0.0), min(c1 + half_width, 1.0) + step / 2, step)
    a2 = np.arange(max(c2 - half_width, 0.0), min(c2 + half_width, 1.0) + step / 2, step)
    x1, x2 = np.meshgrid(a1, a2, indexing="ij")
    x1, x2 = x1.ravel(), x2.ravel()
    keep = x1 + x2 <= 1.0 + 1e-12
    x1, x2 = x1[keep], x2[keep]
    return np.stack([x1, x2, 1.0 - x1 - x2], axis=1)


def _game_objective(A, b, X, chunk=20000):
    vals = np.empty(X.shape[0])
    for lo in range(0, X.shape[0], chunk):
        block = X[lo:lo + chunk]
        f = np.logaddexp(0.0, block @ A.T).mean(axis=1)
        payoff = np.max(b / (1.0 + block[:, : b.size]), axis=1)
        vals[lo:lo + chunk] = f + payoff
    return vals


def game_grid_oracle(A, b, step=1e-3, refinements=3):
    """Brute-force reference solution of the 3-D game by grid search.

    A full sweep of the simplex at the given step is followed by local
    refinements that shrink the step tenfold each round, so the stored value
    is an upper bound on the optimum that is tight to roughly the curvature
    times the final step squared.  The dual point comes from the stationarity
    system at the incumbent; the stated accuracy is certified afterwards by
    an independent dual evaluation.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    if A.shape[1] != 3 or b.size != 3:
        raise InvalidInputError("the grid oracle covers the 3-dimensional game")
    X = _triangle_grid((0.5, 0.5), 0.5, step)
    vals = _game_objective(A, b, X)
    best = int(np.argmin(vals))
    x_best, v_best = X[best], vals[best]
    h = step
    for _ in range(refinements):
        h /= 10.0
        X = _triangle_grid((x_best[0], x_best[1]), 20 * h, h)
        vals = _game_objective(A, b, X)
        best = int(np.argmin(vals))
        if vals[best] < v_best:
            x_best, v_best = X[best], vals[best]

    # multipliers from the stationarity system on the active face: for free
    # coordinates j, grad f_j + sum_{i in S} y_i (grad g_i)_j = mu, with S the
    # active payoff groups, weights of inactive groups pinned to zero
    grad_f = A.T @ _sigmoid(A @ x_best) / A.shape[0]
    payoff = b / (1.0 + x_best)
    active = np.nonzero(payoff >= payoff.max() - 1e-4)[0]
    free = np.nonzero(x_best > 1e-4)[0]
    col = {int(i): k for k, i in enumerate(active)}
    mat = np.zeros((free.size + 1, active.size + 1))
    rhs = np.zeros(free.size + 1)
    for row, j in enumerate(free):
        if int(j) in col:
            mat[row, col[int(j)]] = -b[j] / (1.0 + x_best[j]) ** 2
        mat[row, -1] = -1.0
        rhs[row] = -grad_f[j]
    mat[-1, : active.size] = 1.0
    rhs[-1] = 1.0
    sol = np.linalg.lstsq(mat, rhs, rcond=None)[0]
    y_best = np.zeros(b.size)
    y_best[active] = np.maximum(sol[: active.size], 0.0)
    y_best /= np.sum(y_best)

    polished = _game_saddle_polish(A, b, x_best, y_best, active, free)
    if polished is not None:
        x_pol, y_pol = polished
        v_pol = float(np.logaddexp(0.0, A @ x_pol).mean() + np.max(b / (1.0 + x_pol)))
        if v_pol <= v_best + 1e-12:
            return x_pol, y_pol, min(v_pol, float(v_best))
    return x_best, y_best, float(v_best)


def _game_saddle_polish(A, b, x, y, active, free, tol=1e-12, max_iter=50):
    """Newton on the game's saddle system over fixed active/free index sets.

    Unknowns (x_free, y_active, nu, mu): stationarity on the free coordinates
    with simplex multiplier mu, equal active payoffs at level nu, and the two
    affine normalizations.  Returns None when the sets are inconsistent.
    """
    n_rows = A.shape[0]
    nf, ns = free.size, active.size
    x = x.copy()
    x[np.setdiff1d(np.arange(x.size), free)] = 0.0
    ys = y[active].copy()
    nu = float(np.max(b / (1.0 + x)))
    mu = 0.0
    col = {int(i): k for k, i in enumerate(active)}
    for _ in range(max_iter):
        t = A @ x
        sig = _sigmoid(t)
        grad_f = A.T @ sig / n_rows
        y_full = np.zeros(b.size)
        y_full[active] = ys
        r1 = np.array([
            grad_f[j] - b[j] * y_full[j] / (1.0 + x[j]) ** 2 - mu for j in free
        ])
        r2 = b[active] / (1.0 + x[active]) - nu
        r3 = np.sum(x[free]) - 1.0
        r4 = np.sum(ys) - 1.0
        resid = np.concatenate([r1, r2, [r3, r4]])
        if np.linalg.norm(resid) <= tol:
            break
        hess_f = (A.T * (sig * (1.0 - sig))) @ A / n_rows
        dim = nf + ns + 2
        jac = np.zeros((dim, dim))
        for r, j in enumerate(free):
            for c, l in enumerate(free):
                jac[r, c] = hess_f[j, l]
                if l == j and int(j) in col:
                    jac[r, c] += 2.0 * b[j] * y_full[j] / (1.0 + x[j]) ** 3
            if int(j) in col:
                jac[r, nf + col[int(j)]] = -b[j] / (1.0 + x[j]) ** 2
            jac[r, -1] = -1.0  # d/d mu
        for r, i in enumerate(active):
            if int(i) in {int(j) for j in free}:
                c = int(np.nonzero(free == i)[0][0])
                jac[nf + r, c] = -b[i] / (1.0 + x[i]) ** 2
            jac[nf + r, nf + ns] = -1.0  # d/d nu
        jac[nf + ns, :nf] = 1.0
        jac[nf + ns + 1, nf:nf + ns] = 1.0
        try:
            delta = np.linalg.solve(jac, -resid)
        except np.linalg.LinAlgError:
            return None
        x[free] += delta[:nf]
        ys += delta[nf:nf + ns]
        nu += delta[nf + ns]
        mu += delta[-1]
    else:
        return None
    if np.any(ys < -1e-10) or np.any(x[free] < -1e-10):
        return None
    payoff = b / (1.0 + np.maximum(x, 0.0))
    inactive = np.setdiff1d(np.arange(b.size), active)
    if inactive.size and np.max(payoff[inactive]) > nu + 1e-9:
        return None
    x = np.maximum(x, 0.0)
    y_out = np.zeros(b.size)
    y_out[active] = np.maximum(ys, 0.0)
    y_out /= np.sum(y_out)
    return x, y_out


@functools.lru_cache(maxsize=None)
def default_game(seed=11, rows=200, certify=True):
    """The canonical 3x3 game instance with a grid-search oracle attached."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, 3))
    b = rng.uniform(0.0, 1.0, 3)
    x_star, y_star, p_star = game_grid_oracle(A, b)
    accuracy = 1e-6
    prob = build_game(A, b, oracle=SaddleOracle(x_star, y_star, p_star, accuracy, "grid"))
    if certify:
        _certify_oracle(prob, accuracy)
    return prob


def _certify_oracle(prob, accuracy):
    """Cross-check the stored optimum by an independent dual evaluation."""
    from .metrics import dual_value

    d = dual_value(prob, prob.optimum.y, DualOracle(tolerance=1e-12))
    gap = prob.optimum.value + d.value
    if not -1e-9 <= gap <= accuracy:
        raise CheckFailedError(
            f"oracle certification failed: duality gap {gap:.3e} exceeds {accuracy:.1e}"
        )


# ---------------------------------------------------------------------------
# worst-group logistic classification

def synth_data(p, n_groups, n_per_group, seed):
    """Synthetic data groups: unit-covariance Gaussians with distinct means.

    Group means sit on scaled coordinate axes, pairwise 3 units apart, so the
    group losses genuinely differ and the outer max is non-degenerate.
    """
    if p <= 0 or n_groups <= 0 or n_per_group <= 0:
        raise InvalidInputError("sizes must be positive")
    rng = np.random.default_rng(seed)
    datasets = []
    for i in range(n_groups):
        mean = np.zeros(p)
        mean[i % p] = 3.0 / math.sqrt(2.0)
        datasets.append(mean + rng.standard_normal((n_per_group, p)))
    return datasets


def build_multidist_logistic(datasets, reg=0.01, oracle=None, name="classification"):
    """Worst-group regularized logistic model.

    Each group i contributes the mean loss log(1 + exp(1 + a^T x)) over its
    rows; the objective is the worst group plus (reg/2) ||x||^2, which makes
    the smooth term reg-strongly convex.
    """
    if len(datasets) == 0:
        raise InvalidInputError("need at least one data group")
    mats = [np.asarray(d, dtype=np.float64) for d in datasets]
    p = mats[0].shape[1]
    for d in mats:
        if d.ndim != 2 or d.shape[1] != p:
            raise InvalidInputError("all data groups must share the feature dimension")
        if d.shape[0] == 0:
            raise InvalidInputError("data groups must be nonempty")
    if reg <= 0:
        raise InvalidInputError("reg must be positive")
    n = len(mats)

    f = SmoothTerm(
        value=lambda x: 0.5 * reg * float(np.dot(x, x)),
        grad=lambda x: reg * x,
        grad_lipschitz=reg,
        strong_convexity=reg,
    )

    def g_apply(x):
        return np.array([float(np.logaddexp(0.0, 1.0 + d @ x).mean()) for d in mats])

    def g_jtvec(x, y):
        out = np.zeros(p)
        for yi, d in zip(y, mats):
            out += (yi / d.shape[0]) * (d.T @ _sigmoid(1.0 + d @ x))
        return out

    row_norms = [np.linalg.norm(d, axis=1) for d in mats]
    g = Mapping(
        apply=g_apply,
        jtvec=g_jtvec,
        component_lipschitz=[float(r.max()) for r in row_norms],
        component_grad_lipschitz=[float(np.sum(r**2) / (4.0 * r.size)) for r in row_norms],
    )
    return CompositeProblem(
        f=f, h=zero_prox_term(), H=max_prox_term(), g=g,
        dim_primal=p, dim_dual=n,
        optimum=oracle,
        start=(np.zeros(p), np.full(n, 1.0 / n)),
        name=name,
    )


def _inner_newton(mats, reg, y, x0, tol=1e-11, max_iter=40):
    """Minimize (reg/2)||x||^2 + sum_i y_i * mean loss_i(x) by damped Newton."""
    x = x0.copy()
    for _ in range(max_iter):
        grad = reg * x
        hess = reg * np.eye(x.size)
        for yi, d in zip(y, mats):
            if yi == 0.0:
                continue
            t = 1.0 + d @ x
            s = _sigmoid(t)
            grad += (yi / d.shape[0]) * (d.T @ s)
            hess += (yi / d.shape[0]) * (d.T * (s * (1.0 - s))) @ d
        if np.linalg.norm(grad) <= tol:
            break
        x = x - np.linalg.solve(hess, grad)
    return x


def _group_value(mats, reg, y, x):
    val = 0.5 * reg * float(np.dot(x, x))
    for yi, d in zip(y, mats):
        if yi != 0.0:
            val += yi * float(np.logaddexp(0.0, 1.0 + d @ x).mean())
    return val


def _saddle_polish(mats, reg, x, y, active, tol=1e-12, max_iter=50):
    """Newton on the saddle system over a fixed active group set.

    Unknowns (x, y_S, nu) with equations: stationarity of the weighted inner
    problem, equal group losses on S, and unit weight sum.  Returns the
    refined (x, y) or None when the polish is inconsistent (wrong active set).
    """
    p = x.size
    ns = len(active)
    ys = np.array([y[i] for i in active])
    nu = 0.0
    for _ in range(max_iter):
        grads = []
        hess = reg * np.eye(p)
        grad_x = reg * x
        losses = []
        for k, i in enumerate(active):
            d = mats[i]
            t = 1.0 + d @ x
            s = _sigmoid(t)
            gi = d.T @ s / d.shape[0]
            grads.append(gi)
            grad_x += ys[k] * gi
            hess += (ys[k] / d.shape[0]) * (d.T * (s * (1.0 - s))) @ d
            losses.append(float(np.logaddexp(0.0, t).mean()))
        resid = np.concatenate([grad_x, np.asarray(losses) - nu, [np.sum(ys) - 1.0]])
        if np.linalg.norm(resid) <= tol:
            break
        jac = np.zeros((p + ns + 1, p + ns + 1))
        jac[:p, :p] = hess
        for k in range(ns):
            jac[:p, p + k] = grads[k]
            jac[p + k, :p] = grads[k]
            jac[p + k, -1] = -1.0
        jac[-1, p:p + ns] = 1.0
        try:
            delta = np.linalg.solve(jac, -resid)
        except np.linalg.LinAlgError:
            return None
        x = x + delta[:p]
        ys = ys + delta[p:p + ns]
        nu = nu + delta[-1]
    else:
        return None
    if np.any(ys < -1e-10):
        return None
    # inactive groups must not beat the shared active loss
    for i in range(len(mats)):
        if i not in active:
            if float(np.logaddexp(0.0, 1.0 + mats[i] @ x).mean()) > nu + 1e-9:
                return None
    y_full = np.zeros(len(mats))
    for k, i in enumerate(active):
        y_full[i] = max(ys[k], 0.0)
    y_full /= np.sum(y_full)
    return x, y_full


def classification_dual_oracle(mats, reg, step=0.05, refinements=1):
    """Bracketing oracle for the worst-group model (3 groups).

    Maximizes the concave surrogate d(y) = min_x [(reg/2)||x||^2 +
    sum y_i g_i(x)] over the weight simplex by refined grid search with exact
    Newton inner solves, then polishes the incumbent through the active-set
    saddle system.  Returns the weights, the matching primal point, the
    primal value (an upper bound), and the certified bracket width
    P(x) - d(y) >= P(x) - P*.
    """
    if len(mats) != 3:
        raise InvalidInputError("the bracketing oracle covers 3 data groups")
    p = mats[0].shape[1]
    x_ws = np.zeros(p)

    def d_of(y):
        nonlocal x_ws
        x_ws = _inner_newton(mats, reg, y, x_ws)
        return _group_value(mats, reg, y, x_ws), x_ws.copy()

    center, half = (0.5, 0.5), 0.5
    best_y, best_d, best_x = None, -math.inf, None
    h = step
    for _ in range(refinements + 1):
        Y = _triangle_grid(center, half, h)
        for row in Y:
            val, x_at = d_of(row)
            if val > best_d:
                best_d, best_y, best_x = val, row, x_at
        center = (best_y[0], best_y[1])
        half = 2.0 * h
        h /= 10.0

    losses = np.array([float(np.logaddexp(0.0, 1.0 + d @ best_x).mean()) for d in mats])
    active = sorted(
        set(np.nonzero(best_y > 1e-3)[0]) | set(np.nonzero(losses >= losses.max() - 1e-4)[0])
    )
    polished = _saddle_polish(mats, reg, best_x, best_y, active)
    if polished is not None:
        x_star, y_star = polished
        x_star = _inner_newton(mats, reg, y_star, x_star)
        best_d = _group_value(mats, reg, y_star, x_star)
    else:
        y_star = np.asarray(best_y)
        x_star = _inner_newton(mats, reg, y_star, best_x)
        best_d = _group_value(mats, reg, y_star, x_star)
    upper = 0.5 * reg * float(np.dot(x_star, x_star)) + max(
        float(np.logaddexp(0.0, 1.0 + d @ x_star).mean()) for d in mats
    )
    gap = upper - best_d
    return x_star, np.asarray(y_star), float(upper), float(gap)


@functools.lru_cache(maxsize=None)
def default_classification(seed=7, p=10, n_groups=3, n_per_group=50, reg=0.01):
    """The canonical strongly convex classification instance with its oracle."""
    datasets = synth_data(p, n_groups, n_per_group, seed)
    x_star, y_star, p_star, gap = classification_dual_oracle(
        [np.asarray(d) for d in datasets], reg
    )
    if gap > 1e-8:
        raise CheckFailedError(f"classification oracle bracket too wide: {gap:.3e}")
    oracle = SaddleOracle(x_star, y_star, p_star, max(gap, 1e-12), "dual-bracket")
    return build_multidist_logistic(datasets, reg, oracle=oracle)


# ---------------------------------------------------------------------------
# cone-constrained quadratic program

def build_cone_qp(Q, q, K, bvec, cone="nonneg", name="cone_qp"):
    """QP  min (1/2) x^T Q x + q^T x  s.t.  K x - bvec in -cone.

    For the orthant cone the reference solution is found exactly by
    enumerating active sets of the KKT system.
    """
    Q = np.asarray(Q, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    K = np.asarray(K, dtype=np.float64)
    bvec = np.asarray(bvec, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidInputError("Q must be square")
    if not np.allclose(Q, Q.T, atol=1e-12):
        raise InvalidInputError("Q must be symmetric")
    p = Q.shape[0]
    m = K.shape[0]
    if K.shape != (m, p) or q.shape != (p,) or bvec.shape != (m,):
        raise InvalidInputError("inconsistent QP dimensions")

    eigs = np.linalg.eigvalsh(Q)
    f = SmoothTerm(
        value=lambda x: 0.5 * float(x @ Q @ x) + float(q @ x),
        grad=lambda x: Q @ x + q,
        grad_lipschitz=float(max(eigs[-1], 0.0)),
        strong_convexity=float(max(eigs[0], 0.0)),
    )
    g = Mapping(
        apply=lambda x: K @ x - bvec,
        jtvec=lambda x, y: K.T @ y,
        component_lipschitz=np.linalg.norm(K, axis=1),
        component_grad_lipschitz=np.zeros(m),
        is_affine=True,
    )
    oracle = None
    if cone == "nonneg":
        oracle = qp_kkt_oracle(Q, q, K, bvec)
    return CompositeProblem(
        f=f, h=zero_prox_term(), H=polar_cone_indicator(cone), g=g,
        dim_primal=p, dim_dual=m,
        optimum=oracle,
        cone=cone,
        start=(np.zeros(p), np.zeros(m)),
        name=name,
    )


def qp_kkt_oracle(Q, q, K, bvec, tol=1e-9):
    """Exact solution of an inequality-constrained QP (Kx <= bvec, Q > 0).

    Enumerates active sets and solves the equality-constrained KKT system;
    the unique candidate passing primal feasibility and multiplier signs is
    the optimum.
    """
    m, p = K.shape
    if m > 12:
        raise InvalidInputError("active-set enumeration is for desk-scale QPs")
    best = None
    for mask in range(2**m):
        active = [i for i in range(m) if mask >> i & 1]
        na = len(active)
        kkt = np.zeros((p + na, p + na))
        kkt[:p, :p] = Q
        rhs = np.concatenate([-q, bvec[active]])
        if na:
            kkt[:p, p:] = K[active].T
            kkt[p:, :p] = K[active]
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            continue
        x, lam = sol[:p], sol[p:]
        if np.any(K @ x - bvec > tol) or np.any(lam < -tol):
            continue
        y = np.zeros(m)
        y[active] = np.maximum(lam, 0.0)
        val = 0.5 * float(x @ Q @ x) + float(q @ x)
        if best is None or val < best[2]:
            best = (x, y, val)
    if best is None:
        raise CheckFailedError("no KKT point found; the QP may be infeasible")
    return SaddleOracle(best[0], best[1], best[2], 1e-9, "kkt")


@functools.lru_cache(maxsize=None)
def default_cone_qp():
    """2-D QP with one active linear constraint; solution (0.5, 0.5)."""
    return build_cone_qp(
        np.eye(2), np.array([-1.0, -1.0]), np.array([[1.0, 1.0]]), np.array([1.0])
    )


# ---------------------------------------------------------------------------
# LIBSVM-style text files

def read_libsvm(path):
    """Parse 'label idx:val idx:val ...' lines into a dense matrix and labels.

    Indices are 1-based and must be strictly ascending per line; rows are
    padded to the largest index observed anywhere in the file.
    """
    labels = []
    rows = []
    max_dim = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise ParseError(f"bad label {tokens[0]!r}", lineno) from None
            entries = []
            prev = 0
            for tok in tokens[1:]:
                idx_s, _, val_s = tok.partition(":")
                if not val_s:
                    raise ParseError(f"bad feature token {tok!r}", lineno)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"bad feature token {tok!r}", lineno) from None
                if idx < 1:
                    raise ParseError(f"feature index must be >= 1, got {idx}", lineno)
                if idx <= prev:
                    raise ParseError(
                        f"feature indices must ascend, got {idx} after {prev}", lineno
                    )
                prev = idx
                entries.append((idx, val))
            rows.append(entries)
            max_dim = max(max_dim, prev)
    matrix = np.zeros((len(rows), max_dim))
    for r, entries in enumerate(rows):
        for idx, val in entries:
            matrix[r, idx - 1] = val
    return matrix, np.asarray(labels)


# ---------------------------------------------------------------------------
# registry used by the CLI

def build_named(name, seed=None):
    """Build a registry instance by name (canonical seed when none given)."""
    if name == "toy":
        return build_bilinear_toy()
    if name == "toy_max":
        return build_max_toy()
    if name == "game":
        return default_game(seed=11 if seed is None else seed)
    if name == "classification":
        return default_classification(seed=7 if seed is None else seed)
    if name == "cone_qp":
        return default_cone_qp()
    raise InvalidInputError(
        f"unknown instance {name!r}; expected one of "
        "'toy', 'toy_max', 'game', 'classification', 'cone_qp'"
    )


INSTANCE_NAMES = ("toy", "toy_max", "game", "classification", "cone_qp")
