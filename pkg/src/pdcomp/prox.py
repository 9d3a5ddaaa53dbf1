"""Proximal operators and cone projections used by the solver and instances.

All functions are stateless and safe for concurrent use.  The numeric work is
delegated to the selected kernel backend (compiled or pure-numpy, see
:mod:`pdcomp._core`).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _core
from .errors import InvalidInputError

CONE_TAGS = ("nonneg", "soc", "zero")


def _as_vector(v, name="v"):
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def project_simplex(v):
    """Project onto the unit simplex {u >= 0, sum(u) = 1} in Euclidean norm."""
    return _core.impl.project_simplex(_as_vector(v))


def prox_max_coords(v, lam):
    """Prox of lam * max_i(.) at v.

    max_i is the support function of the unit simplex, so the prox is
    v - lam * proj_simplex(v / lam).
    """
    v = _as_vector(v)
    if lam <= 0:
        raise InvalidInputError(f"lam must be positive, got {lam}")
    return v - lam * _core.impl.project_simplex(v / lam)


def prox_conjugate_moreau(prox_fn, v, rho):
    """Prox of rho * phi^* at v, given the prox of phi.

    Moreau decomposition: prox_{rho phi*}(v) = v - rho * prox_{phi/rho}(v/rho),
    where prox_{phi/rho}(w) = prox_fn(w, 1/rho).
    """
    v = _as_vector(v)
    if rho <= 0:
        raise InvalidInputError(f"rho must be positive, got {rho}")
    return v - rho * prox_fn(v / rho, 1.0 / rho)


def soft_threshold(v, lam):
    """Componentwise sign(v_i) * max(|v_i| - lam, 0)."""
    v = _as_vector(v)
    if lam <= 0:
        raise InvalidInputError(f"lam must be positive, got {lam}")
    return _core.impl.soft_threshold(v, lam)


def project_cone(v, cone):
    """Euclidean projection onto a named cone.

    Supported tags: 'nonneg' (nonnegative orthant), 'soc' (second-order cone
    {(t, u): ||u|| <= t} with t the first coordinate), 'zero' (the origin).
    """
    v = _as_vector(v)
    if cone == "nonneg":
        return _core.impl.project_nonneg(v)
    if cone == "soc":
        return _core.impl.project_soc(v)
    if cone == "zero":
        return np.zeros_like(v)
    raise InvalidInputError(f"unknown cone tag {cone!r}; expected one of {CONE_TAGS}")


def project_dual_cone(v, cone):
    """Projection onto the dual cone of a named cone.

    The orthant and the second-order cone are self-dual; the dual of the zero
    cone is the whole space.
    """
    v = _as_vector(v)
    if cone == "nonneg":
        return _core.impl.project_nonneg(v)
    if cone == "soc":
        return _core.impl.project_soc(v)
    if cone == "zero":
        return v.copy()
    raise InvalidInputError(f"unknown cone tag {cone!r}; expected one of {CONE_TAGS}")


def project_polar_cone(v, cone):
    """Projection onto -K for a named cone K.

    -K is the polar of the dual cone, so by Moreau's cone decomposition
    proj_{-K}(v) = v - proj_{K*}(v); this also realizes the prox of the
    indicator of -K at any step size.
    """
    return _as_vector(v) - project_dual_cone(v, cone)


def dist_to_polar_cone(v, cone):
    """Euclidean distance from v to -K for a named cone K."""
    v = _as_vector(v)
    return float(np.linalg.norm(v - project_polar_cone(v, cone)))


@dataclass(frozen=True)
class ProxOperator:
    """A scaled proximal map v, lam -> argmin_u phi(u) + (1/2 lam) ||u - v||^2."""

    apply: Callable[[np.ndarray, float], np.ndarray]

    def __call__(self, v, lam):
        return self.apply(v, lam)
