"""Per-iteration parameter schedules for the primal-dual solver.

Each schedule yields the tuple (tau_k, rho_k, eta_k, L_k, beta_{k+1}) for one
of four variants:

* ``ERGODIC_CVX``   -- constant parameters, uniformly averaged iterates,
  O(1/k) guarantee for merely convex problems;
* ``ERGODIC_SCVX``  -- geometrically growing rho_k/L_k driven by a contraction
  factor theta, rho-weighted averaging, O(1/k^2) under strong convexity;
* ``SEMI_CVX``      -- homotopy tau_k = 1/(k+1) with momentum, O(1/k) on the
  primal last iterate;
* ``SEMI_SCVX``     -- quadratic homotopy tau-recursion with a curvature-aware
  momentum coefficient, O(1/k^2) on the primal last iterate.

Schedules are computed lazily and cached per iteration so that L_{k+1}
(needed by the SEMI_SCVX momentum coefficient) is available one step ahead.
A schedule instance is single-consumer; create one per run.
"""

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError, PreconditionError
from .problem import mul0


class Variant(str, Enum):
    """Schedule variants; the string values are the CLI config tags."""

    ERGODIC_CVX = "thm1"
    ERGODIC_SCVX = "thm2"
    SEMI_CVX = "thm3"
    SEMI_SCVX = "thm4"

    @classmethod
    def from_tag(cls, tag):
        for member in cls:
            if tag == member.value or tag == member.name:
                return member
        raise InvalidInputError(f"unknown variant tag {tag!r}")

    @property
    def averaged_primal(self):
        return self in (Variant.ERGODIC_CVX, Variant.ERGODIC_SCVX)

    @property
    def needs_strong_convexity(self):
        return self in (Variant.ERGODIC_SCVX, Variant.SEMI_SCVX)


@dataclass(frozen=True)
class ScheduleParams:
    """User-tunable knobs of a schedule.

    ``d_bound`` over-estimates max(||x0 - x*||, ||y0 - y*||, ||y*||) for the
    ergodic variants; ``y0_norm`` feeds the cone-mode step-size bound.
    """

    variant: Variant
    rho0: float = 1.0
    gamma: float = 0.5
    d_bound: float = None
    cone_mode: bool = False
    y0_norm: float = 0.0

    def __post_init__(self):
        if self.rho0 <= 0:
            raise InvalidInputError(f"rho0 must be positive, got {self.rho0}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidInputError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.d_bound is not None and self.d_bound <= 0:
            raise InvalidInputError(f"d_bound must be positive, got {self.d_bound}")
        if self.y0_norm < 0:
            raise InvalidInputError("y0_norm must be nonnegative")


@dataclass(frozen=True)
class ScheduleState:
    """Parameters applied at iteration k (beta is the k+1 momentum weight)."""

    k: int
    tau: float
    rho: float
    eta: float
    L: float
    beta: float
    theta: float = 1.0
    constant_C: float = 0.0
    P0: float = 0.0
    cone_mode: bool = False
    variant: Variant = None


def resolve_d_bound(prob, params, x0=None, y0=None):
    """Upper bound D >= max(||x0 - x*||, ||y0 - y*||, ||y*||).

    Preference order: an explicit ``params.d_bound``; the exact maximum when
    the instance carries a solution oracle and the start is known; otherwise
    the defensive default 10 * (||x0|| + ||y0|| + 1), which trades step size
    for validity and is logged with a warning.
    """
    if params.d_bound is not None:
        return float(params.d_bound)
    if prob.optimum is not None and x0 is not None and y0 is not None:
        d = max(
            float(np.linalg.norm(np.asarray(x0, float) - prob.optimum.x)),
            float(np.linalg.norm(np.asarray(y0, float) - prob.optimum.y)),
            float(np.linalg.norm(prob.optimum.y)),
        )
        # slack absorbs the oracle's positional error
        return d * (1.0 + 1e-9) + 1e-12
    x0n = 0.0 if x0 is None else float(np.linalg.norm(x0))
    y0n = 0.0 if y0 is None else float(np.linalg.norm(y0))
    d = 10.0 * (x0n + y0n + 1.0)
    warnings.warn(
        "no solution oracle available: using the defensive diameter bound "
        f"D = {d:.6g}; the ergodic guarantee presumes D truly dominates the "
        "start-to-solution distances",
        stacklevel=2,
    )
    return d


def step_bound_constant(prob, d_bound):
    """The constant C = max(L_f + 2 M_g^2 + 2, L_g D (L_g D + 4 M_g + 2))."""
    if d_bound <= 0:
        raise InvalidInputError(f"d_bound must be positive, got {d_bound}")
    lf = prob.f.grad_lipschitz
    mg = prob.map_lipschitz
    lgd = prob.map_grad_lipschitz * d_bound
    return max(lf + 2.0 * mg**2 + 2.0, lgd * (lgd + 4.0 * mg + 2.0))


class Schedule:
    """Base class: lazy per-k cache plus shared constants."""

    def __init__(self, prob, params):
        self.prob = prob
        self.params = params
        self.variant = params.variant
        self.rho0 = params.rho0
        self.gamma = params.gamma
        self.cone_mode = params.cone_mode
        self._cache = {}

    def at(self, k):
        if k < 0:
            raise InvalidInputError("iteration index must be nonnegative")
        if k not in self._cache:
            self._cache[k] = self._compute(k)
        return self._cache[k]

    def _compute(self, k):
        raise NotImplementedError

    @property
    def L0(self):
        return self.at(0).L

    @property
    def eta0(self):
        return self.at(0).eta

    @property
    def P0(self):
        return self.at(0).P0

    @property
    def constant_C(self):
        return self.at(0).constant_C


class ErgodicSchedule(Schedule):
    """Constant parameters: tau = 1, beta = 0, eta = rho/2."""

    def __init__(self, prob, params, d_bound):
        super().__init__(prob, params)
        self.C = step_bound_constant(prob, d_bound)
        self.d_bound = d_bound
        rho = params.rho0
        self._L = prob.f.grad_lipschitz + rho * (self.C + 2.0 * prob.map_lipschitz**2)
        self._state = dict(rho=rho, eta=rho / 2.0, L=self._L)

    def _compute(self, k):
        return ScheduleState(
            k=k, tau=1.0, beta=0.0, theta=1.0, constant_C=self.C,
            cone_mode=self.cone_mode, variant=self.variant, **self._state,
        )


class ErgodicStrongSchedule(Schedule):
    """Contraction-driven growth of (L_k, rho_k) exploiting strong convexity."""

    def __init__(self, prob, params, d_bound):
        super().__init__(prob, params)
        if prob.strong_convexity <= 0:
            raise PreconditionError(
                "the accelerated ergodic schedule requires a strongly convex "
                "f + h (strong convexity modulus must be positive)"
            )
        self.C = step_bound_constant(prob, d_bound)
        self.d_bound = d_bound
        mu_f = prob.f.strong_convexity
        mu_h = prob.h.strong_convexity
        rho0 = params.rho0
        L0 = prob.f.grad_lipschitz + rho0 * (self.C + 2.0 * prob.map_lipschitz**2)
        self._P0 = (rho0 / (2.0 * L0)) * (
            math.sqrt(4.0 * L0 * (mu_f + mu_h) + (2.0 * L0 - mu_f) ** 2)
            - (2.0 * L0 - mu_f)
        )
        self._mu_f, self._mu_h = mu_f, mu_h
        self._seq = [(L0, rho0)]  # (L_k, rho_k)

    def _extend_to(self, k):
        mu_f, mu_h = self._mu_f, self._mu_h
        while len(self._seq) <= k:
            L, rho = self._seq[-1]
            theta = 2.0 * L / (mu_f + math.sqrt(mu_f**2 + 4.0 * L * (L + mu_h)))
            self._seq.append((L / theta, rho / theta))

    def contraction(self, k):
        """theta_{k+1}, the multiplier taking step k's constants to step k+1."""
        self._extend_to(k)
        L, _ = self._seq[k]
        mu_f, mu_h = self._mu_f, self._mu_h
        return 2.0 * L / (mu_f + math.sqrt(mu_f**2 + 4.0 * L * (L + mu_h)))

    def _compute(self, k):
        self._extend_to(k)
        L, rho = self._seq[k]
        return ScheduleState(
            k=k, tau=1.0, beta=0.0, rho=rho, eta=rho / 2.0, L=L,
            theta=self.contraction(k), constant_C=self.C, P0=self._P0,
            cone_mode=self.cone_mode, variant=self.variant,
        )


class _HomotopySchedule(Schedule):
    """Shared machinery of the two last-iterate schedules."""

    def __init__(self, prob, params):
        super().__init__(prob, params)
        lg = prob.map_grad_lipschitz
        mh = prob.H.lipschitz
        if params.cone_mode:
            if lg > 0 and prob.g.bound is None:
                raise PreconditionError(
                    "cone mode with a nonlinear coupling map needs a bound on "
                    "||g|| over the feasible set (Mapping.bound)"
                )
            self._smooth_base = None  # cone override used instead
        else:
            if lg > 0 and not mh < math.inf:
                raise PreconditionError(
                    "the last-iterate schedules need a Lipschitz outer term "
                    "when the coupling map is nonlinear (or an affine map)"
                )
            self._smooth_base = prob.f.grad_lipschitz + mul0(lg, mh)

    def _tau(self, k):
        raise NotImplementedError

    def _rho(self, k):
        raise NotImplementedError

    def _L(self, k):
        rho = self._rho(k)
        if self.cone_mode:
            return cone_step_constant(self.prob, self.params, rho)
        return self._smooth_base + self.prob.map_lipschitz**2 * rho / self.gamma


def cone_step_constant(prob, params, rho_k):
    """Step constant for cone-constrained runs of the last-iterate schedules.

    L_k = L_f + (rho_k / gamma) * (L_g [||y0||/rho0 + (2 - gamma) B_g] + M_g^2);
    for affine maps (L_g = 0) this reduces to L_f + rho_k M_g^2 / gamma.
    """
    lg = prob.map_grad_lipschitz
    if lg > 0:
        if prob.g.bound is None:
            raise PreconditionError(
                "cone mode with a nonlinear coupling map needs Mapping.bound"
            )
        bracket = params.y0_norm / params.rho0 + (2.0 - params.gamma) * prob.g.bound
        lg_term = lg * bracket
    else:
        lg_term = 0.0
    return prob.f.grad_lipschitz + (rho_k / params.gamma) * (
        lg_term + prob.map_lipschitz**2
    )


class LastIterateSchedule(_HomotopySchedule):
    """Homotopy tau_k = 1/(k+1); O(1/k) on the primal last iterate."""

    def _tau(self, k):
        return 1.0 / (k + 1.0)

    def _rho(self, k):
        return self.rho0 / self._tau(k)

    def _compute(self, k):
        tau = self._tau(k)
        beta = (1.0 - tau) * self._tau(k + 1) / tau
        return ScheduleState(
            k=k, tau=tau, rho=self._rho(k), eta=(1.0 - self.gamma) * self._rho(k),
            L=self._L(k), beta=beta, cone_mode=self.cone_mode, variant=self.variant,
        )


class LastIterateStrongSchedule(_HomotopySchedule):
    """Quadratic homotopy for strongly convex f + h; O(1/k^2) last iterate."""

    def __init__(self, prob, params):
        super().__init__(prob, params)
        mu = prob.strong_convexity
        if mu <= 0:
            raise PreconditionError(
                "the accelerated last-iterate schedule requires a strongly "
                "convex f + h (strong convexity modulus must be positive)"
            )
        denom = mul0(prob.map_grad_lipschitz, prob.H.lipschitz) + prob.map_lipschitz**2
        rho_max = math.inf if denom == 0 else mu / denom
        if params.rho0 > rho_max * (1.0 + 1e-12):
            raise PreconditionError(
                f"rho0 = {params.rho0:.6g} exceeds the admissible range "
                f"(0, {rho_max:.6g}] for this instance"
            )
        self.rho_max = rho_max
        self._taus = [1.0]

    def _tau(self, k):
        while len(self._taus) <= k:
            t = self._taus[-1]
            self._taus.append(0.5 * t * (math.sqrt(t * t + 4.0) - t))
        return self._taus[k]

    def _rho(self, k):
        t = self._tau(k)
        return self.rho0 / (t * t)

    def _compute(self, k):
        tau = self._tau(k)
        tau_next = self._tau(k + 1)
        mu_h = self.prob.h.strong_convexity
        lk = self._L(k)
        lk_next = self._L(k + 1)
        beta = ((1.0 - tau) * tau * (lk + mu_h)) / (
            tau * tau * (lk + mu_h) + (lk_next + mu_h) * tau_next
        )
        return ScheduleState(
            k=k, tau=tau, rho=self._rho(k), eta=(1.0 - self.gamma) * self._rho(k),
            L=lk, beta=beta, cone_mode=self.cone_mode, variant=self.variant,
        )


def momentum_safe_rho0(prob, gamma=0.5, cone_mode=False, y0_norm=0.0, rho0_hint=1.0):
    """Largest rho0 for the accelerated last-iterate schedule that satisfies
    both the stated admissible range and the momentum coefficient's
    sufficient conditions.

    The stated range mu_F / (L_g M_H + M_g^2) can exceed what the momentum
    conditions tolerate when gamma is small; those conditions need
    rho0 <= mu_F / c with c the growth slope of L_k in rho_k, i.e.
    c = M_g^2 / gamma (or its cone-mode analogue).
    """
    mu = prob.strong_convexity
    if mu <= 0:
        raise PreconditionError("needs a strongly convex f + h")
    denom_stated = mul0(prob.map_grad_lipschitz, prob.H.lipschitz) + prob.map_lipschitz**2
    stated = math.inf if denom_stated == 0 else mu / denom_stated
    if cone_mode:
        lg = prob.map_grad_lipschitz
        bracket = 0.0
        if lg > 0:
            if prob.g.bound is None:
                raise PreconditionError("cone mode with nonlinear map needs Mapping.bound")
            bracket = y0_norm / rho0_hint + (2.0 - gamma) * prob.g.bound
        slope = (lg * bracket + prob.map_lipschitz**2) / gamma
    else:
        slope = prob.map_lipschitz**2 / gamma
    # back off the lemma arm so the conditions hold strictly under rounding
    lemma = math.inf if slope == 0 else (mu / slope) * (1.0 - 1e-6)
    return min(stated, lemma)


def make_schedule(prob, params, x0=None, y0=None):
    """Build the schedule for ``params.variant``, validating preconditions."""
    variant = params.variant
    if variant == Variant.ERGODIC_CVX:
        return ErgodicSchedule(prob, params, resolve_d_bound(prob, params, x0, y0))
    if variant == Variant.ERGODIC_SCVX:
        return ErgodicStrongSchedule(prob, params, resolve_d_bound(prob, params, x0, y0))
    if variant == Variant.SEMI_CVX:
        return LastIterateSchedule(prob, params)
    if variant == Variant.SEMI_SCVX:
        return LastIterateStrongSchedule(prob, params)
    raise InvalidInputError(f"unknown variant {variant!r}")
