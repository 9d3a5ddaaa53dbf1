"""Composite problem model: minimize f(x) + h(x) + H(g(x)).

A :class:`CompositeProblem` bundles the four building blocks together with the
smoothness / Lipschitz / strong-convexity constants the solver schedules need:

* ``f``  -- smooth convex term (gradient oracle, gradient-Lipschitz constant,
  strong-convexity modulus),
* ``h``  -- proper closed convex term with a prox oracle (may be an indicator),
* ``H``  -- outer proper closed convex term with a prox oracle,
* ``g``  -- smooth coupling map with a Jacobian-transpose-vector oracle and
  componentwise Lipschitz constants.

Indicators return ``inf``; arithmetic with ``inf`` is saturating, and products
of a zero constant with an infinite one evaluate to zero (needed for affine
coupling maps paired with non-Lipschitz outer terms).  Problems are immutable
after construction and safe to share between concurrent solver runs.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CheckFailedError, InvalidInputError

Array = np.ndarray


def mul0(a, b):
    """Product with the convention 0 * inf = 0."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def check_vector(x, length, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != length:
        raise InvalidInputError(
            f"{name} must be a vector of length {length}, got shape {x.shape}"
        )
    return x


@dataclass(frozen=True)
class SmoothTerm:
    """Differentiable convex term with known curvature constants.

    ``grad_lipschitz`` bounds the gradient's Lipschitz modulus and
    ``strong_convexity`` is the largest mu with value - (mu/2)||.||^2 convex.
    """

    value: Callable[[Array], float]
    grad: Callable[[Array], Array]
    grad_lipschitz: float = 0.0
    strong_convexity: float = 0.0

    def __post_init__(self):
        if self.grad_lipschitz < 0 or self.strong_convexity < 0:
            raise InvalidInputError("curvature constants must be nonnegative")
        if 0 < self.grad_lipschitz < self.strong_convexity:
            raise InvalidInputError("strong convexity cannot exceed smoothness")


@dataclass(frozen=True)
class ProxTerm:
    """Proper closed convex term accessed through value and prox oracles.

    ``value`` may return ``inf`` (indicators).  ``prox(v, lam)`` solves
    argmin_u value(u) + (1/2 lam)||u - v||^2.  ``lipschitz`` is a Lipschitz
    constant of the function itself (``inf`` if none), and
    ``conjugate_value``, when supplied, evaluates the Fenchel conjugate (used
    by the dual metrics).
    """

    value: Callable[[Array], float]
    prox: Callable[[Array, float], Array]
    strong_convexity: float = 0.0
    lipschitz: float = math.inf
    conjugate_value: Optional[Callable[[Array], float]] = None

    def __post_init__(self):
        if self.strong_convexity < 0:
            raise InvalidInputError("strong convexity must be nonnegative")
        if self.lipschitz < 0:
            raise InvalidInputError("Lipschitz constant must be nonnegative")


def zero_smooth_term():
    return SmoothTerm(value=lambda x: 0.0, grad=np.zeros_like)


def zero_prox_term():
    return ProxTerm(value=lambda x: 0.0, prox=lambda v, lam: np.asarray(v, float).copy(), lipschitz=0.0)


@dataclass(frozen=True)
class Mapping:
    """Smooth coupling map g with componentwise curvature constants.

    ``jtvec(x, y)`` returns the Jacobian-transpose product g'(x)^T y.
    ``component_lipschitz[i]`` bounds |g_i(x) - g_i(x')| / ||x - x'|| and
    ``component_grad_lipschitz[i]`` bounds the Lipschitz modulus of grad g_i.
    ``bound`` is an optional sup-norm bound on ||g(x)|| over the feasible set.
    """

    apply: Callable[[Array], Array]
    jtvec: Callable[[Array, Array], Array]
    component_lipschitz: Sequence[float]
    component_grad_lipschitz: Sequence[float]
    is_affine: bool = False
    bound: Optional[float] = None

    def __post_init__(self):
        for c in list(self.component_lipschitz) + list(self.component_grad_lipschitz):
            if c < 0:
                raise InvalidInputError("componentwise constants must be nonnegative")
        if self.is_affine and any(c != 0 for c in self.component_grad_lipschitz):
            raise InvalidInputError("affine maps must have zero gradient-Lipschitz constants")


def aggregate_constants(component_lipschitz, component_grad_lipschitz):
    """Aggregate componentwise constants into map-level ones.

    Returns (sqrt(sum M_i^2), sqrt(sum L_i^2)).  The first is the exact
    Lipschitz constant of g as a vector map; the second is a conservative
    Cauchy-Schwarz bound for the y-weighted Jacobian modulus.
    """
    m = np.asarray(component_lipschitz, dtype=np.float64)
    l = np.asarray(component_grad_lipschitz, dtype=np.float64)
    if m.size == 0 or l.size == 0:
        raise InvalidInputError("component constant lists must be nonempty")
    if np.any(m < 0) or np.any(l < 0):
        raise InvalidInputError("component constants must be nonnegative")
    return float(np.sqrt(np.sum(m * m))), float(np.sqrt(np.sum(l * l)))


@dataclass(frozen=True)
class SaddleOracle:
    """Reference solution attached to a test instance.

    ``value`` is the optimal primal value, accurate to ``accuracy`` (for grid
    oracles the stored value is an upper bound whose error is below the stated
    accuracy, so measured residuals stay nonnegative to rounding).
    """

    x: Array
    y: Array
    value: float
    accuracy: float
    method: str = ""


@dataclass(frozen=True)
class CompositeProblem:
    """Immutable description of minimize f(x) + h(x) + H(g(x))."""

    f: SmoothTerm
    h: ProxTerm
    H: ProxTerm
    g: Mapping
    dim_primal: int
    dim_dual: int
    map_lipschitz: float = field(default=None)  # type: ignore[assignment]
    map_grad_lipschitz: float = field(default=None)  # type: ignore[assignment]
    fstar_lipschitz: float = math.inf
    optimum: Optional[SaddleOracle] = None
    cone: Optional[str] = None
    start: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        if self.dim_primal <= 0 or self.dim_dual <= 0:
            raise InvalidInputError("dimensions must be positive")
        n_components = len(self.g.component_lipschitz)
        if n_components != self.dim_dual:
            raise InvalidInputError(
                f"g has {n_components} component constants for dual dimension {self.dim_dual}"
            )
        agg_m, agg_l = aggregate_constants(
            self.g.component_lipschitz, self.g.component_grad_lipschitz
        )
        if self.map_lipschitz is None:
            object.__setattr__(self, "map_lipschitz", agg_m)
        if self.map_grad_lipschitz is None:
            object.__setattr__(self, "map_grad_lipschitz", agg_l)

    @property
    def strong_convexity(self):
        """Strong-convexity modulus of f + h."""
        return self.f.strong_convexity + self.h.strong_convexity


def evaluate_primal(prob, x):
    """Objective value f(x) + h(x) + H(g(x)); inf outside the domain."""
    x = check_vector(x, prob.dim_primal, "x")
    hx = prob.h.value(x)
    if not hx < math.inf:
        return math.inf
    gx = prob.g.apply(x)
    Hx = prob.H.value(gx)
    if not Hx < math.inf:
        return math.inf
    return float(prob.f.value(x) + hx + Hx)


def lagrangian_value(prob, x, s, y):
    """Surrogate Lagrangian f(x) + h(x) + H(s) + <y, g(x) - s>."""
    x = check_vector(x, prob.dim_primal, "x")
    s = check_vector(s, prob.dim_dual, "s")
    y = check_vector(y, prob.dim_dual, "y")
    fx = prob.f.value(x) + prob.h.value(x)
    Hs = prob.H.value(s)
    if not (fx < math.inf and Hs < math.inf):
        return math.inf
    return float(fx + Hs + np.dot(y, prob.g.apply(x) - s))


@dataclass(frozen=True)
class FiniteDiffReport:
    max_grad_error: float
    max_jac_error: float
    samples: int
    resampled: int
    tolerance: float

    @property
    def passed(self):
        return max(self.max_grad_error, self.max_jac_error) <= self.tolerance


def finite_diff_check(prob, samples=100, seed=0, anchor=None, radius=0.5,
                      tolerance=1e-4, step=1e-6):
    """Validate grad f and g'(x)^T y against centered finite differences.

    Points are drawn uniformly from a ball of the given radius around
    ``anchor`` (default: the origin).  Samples where any evaluation is
    non-finite are redrawn; if no finite sample can be found the check fails
    with :class:`CheckFailedError`.
    """
    if samples <= 0:
        raise InvalidInputError("samples must be positive")
    rng = np.random.default_rng(seed)
    p, n = prob.dim_primal, prob.dim_dual
    if anchor is None:
        anchor = np.zeros(p)
    anchor = check_vector(anchor, p, "anchor")

    max_grad_err = 0.0
    max_jac_err = 0.0
    resampled = 0
    collected = 0
    attempts = 0
    while collected < samples:
        attempts += 1
        if attempts > 50 * samples:
            raise CheckFailedError("could not draw finite samples for the derivative check")
        u = rng.standard_normal(p)
        u *= radius * rng.random() ** (1.0 / p) / np.linalg.norm(u)
        x = anchor + u
        y = rng.standard_normal(n)
        direction = rng.standard_normal(p)
        direction /= np.linalg.norm(direction)

        try:
            grad = prob.f.grad(x)
            jty = prob.g.jtvec(x, y)
            fp = prob.f.value(x + step * direction)
            fm = prob.f.value(x - step * direction)
            gp = prob.g.apply(x + step * direction)
            gm = prob.g.apply(x - step * direction)
        except (FloatingPointError, ValueError, ZeroDivisionError):
            resampled += 1
            continue
        pieces = np.concatenate([grad, jty, [fp, fm], gp, gm])
        if not np.all(np.isfinite(pieces)):
            resampled += 1
            continue

        fd_f = (fp - fm) / (2 * step)
        an_f = float(np.dot(grad, direction))
        scale_f = max(abs(fd_f), abs(an_f), 1.0)
        max_grad_err = max(max_grad_err, abs(fd_f - an_f) / scale_f)

        fd_g = float(np.dot(y, gp - gm)) / (2 * step)
        an_g = float(np.dot(jty, direction))
        scale_g = max(abs(fd_g), abs(an_g), 1.0)
        max_jac_err = max(max_jac_err, abs(fd_g - an_g) / scale_g)
        collected += 1

    return FiniteDiffReport(max_grad_err, max_jac_err, samples, resampled, tolerance)
