"""Pure-numpy implementations of the hot per-iteration kernels.

These mirror the compiled versions in ``_kernels.pyx`` one-to-one and are
selected at import time when the extension is unavailable (or when
``PDCOMP_PURE_PYTHON`` is set).  Inputs are contiguous float64 arrays; the
callers in :mod:`pdcomp.prox` handle validation.
"""

import numpy as np


def project_simplex(v):
    """Euclidean projection onto the unit simplex {u >= 0, sum(u) = 1}."""
    u = np.sort(v)[::-1]
    cs = np.cumsum(u)
    idx = np.arange(1, v.shape[0] + 1, dtype=np.float64)
    # largest index with u_i - (cs_i - 1)/i > 0; always holds at i = 1
    rho = np.nonzero(u - (cs - 1.0) / idx > 0.0)[0][-1]
    theta = (cs[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def soft_threshold(v, lam):
    """Componentwise shrinkage sign(v) * max(|v| - lam, 0)."""
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


def project_soc(v):
    """Projection onto the second-order cone {(t, u) : ||u|| <= t}."""
    t = v[0]
    u = v[1:]
    nu = float(np.sqrt(np.dot(u, u)))
    if nu <= t:
        return v.copy()
    if nu <= -t:
        return np.zeros_like(v)
    alpha = 0.5 * (t + nu)
    out = np.empty_like(v)
    out[0] = alpha
    out[1:] = (alpha / nu) * u
    return out


def project_nonneg(v):
    """Projection onto the nonnegative orthant."""
    return np.maximum(v, 0.0)
