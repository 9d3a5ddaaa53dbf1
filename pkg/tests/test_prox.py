import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdcomp import _core, prox
from pdcomp.errors import InvalidInputError

from conftest import rng


def brute_force_simplex(v, step=1e-3):
    """Grid minimizer of ||u - v|| over the unit simplex (2-D inputs)."""
    best, best_d = None, np.inf
    for t in np.arange(0.0, 1.0 + step / 2, step):
        u = np.array([t, 1.0 - t])
        d = np.linalg.norm(u - v)
        if d < best_d:
            best, best_d = u, d
    return best


class TestProjectSimplex:
    def test_already_on_simplex(self):
        assert np.allclose(prox.project_simplex([0.5, 0.5]), [0.5, 0.5], atol=1e-15)

    def test_nearest_vertex(self):
        assert np.allclose(prox.project_simplex([2.0, 0.0]), [1.0, 0.0], atol=1e-15)

    def test_kkt_shift(self):
        # shift u = v - theta with theta = -0.2, verified by brute force
        out = prox.project_simplex([0.4, 0.2])
        assert np.allclose(out, [0.6, 0.4], atol=1e-12)
        assert np.allclose(out, brute_force_simplex(np.array([0.4, 0.2])), atol=1e-3)

    def test_output_feasible(self):
        r = rng(1)
        for _ in range(200):
            v = r.standard_normal(r.integers(1, 9)) * 5
            u = prox.project_simplex(v)
            assert abs(u.sum() - 1.0) <= 1e-12
            assert np.min(u) >= 0.0

    def test_permutation_equivariance(self):
        r = rng(2)
        for _ in range(100):
            v = r.standard_normal(6)
            p = r.permutation(6)
            assert np.max(np.abs(prox.project_simplex(v)[p] - prox.project_simplex(v[p]))) <= 1e-15

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            prox.project_simplex([])

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=10),
           st.lists(st.floats(-50, 50), min_size=1, max_size=10))
    @settings(max_examples=200, deadline=None)
    def test_nonexpansive(self, a, b):
        n = min(len(a), len(b))
        va, vb = np.array(a[:n]), np.array(b[:n])
        pa, pb = prox.project_simplex(va), prox.project_simplex(vb)
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(va - vb) + 1e-12

    def test_idempotent(self):
        r = rng(3)
        for _ in range(200):
            u = prox.project_simplex(r.standard_normal(5) * 3)
            assert np.max(np.abs(prox.project_simplex(u) - u)) <= 1e-12


def brute_force_prox(objective, v, lam, lo, hi, step):
    """Grid argmin of objective(u) + ||u - v||^2 / (2 lam) over a 2-D box."""
    grid = np.arange(lo, hi + step / 2, step)
    best, best_val = None, np.inf
    for u1 in grid:
        for u2 in grid:
            u = np.array([u1, u2])
            val = objective(u) + np.dot(u - v, u - v) / (2 * lam)
            if val < best_val:
                best, best_val = u, val
    return best


class TestProxMax:
    def test_symmetric_two_coords(self):
        # argmin max(u) + 0.5||u - 0||^2 pulls both coordinates to -1/2
        assert np.allclose(prox.prox_max_coords([0.0, 0.0], 1.0), [-0.5, -0.5], atol=1e-12)

    def test_against_grid(self):
        v = np.array([10.0, 0.0])
        out = prox.prox_max_coords(v, 1.0)
        assert np.allclose(out, [9.0, 0.0], atol=1e-12)
        ref = brute_force_prox(np.max, v, 1.0, -1.0, 11.0, 0.05)
        assert np.linalg.norm(out - ref) <= 0.1

    def test_smooth_region(self):
        # unique max with margin > lam only shifts the top coordinate
        r = rng(4)
        for _ in range(100):
            v = np.sort(r.standard_normal(4))[::-1]
            lam = 0.5 * (v[0] - v[1])
            if lam <= 1e-6:
                continue
            expect = v.copy()
            expect[0] -= lam
            assert np.allclose(prox.prox_max_coords(v, lam), expect, atol=1e-10)

    def test_rejects_nonpositive_lam(self):
        with pytest.raises(InvalidInputError):
            prox.prox_max_coords([1.0], 0.0)

    def test_prox_optimality(self):
        r = rng(5)
        for _ in range(1000):
            n = int(r.integers(1, 7))
            v = r.standard_normal(n) * 3
            lam = float(r.uniform(0.05, 5.0))
            u = prox.prox_max_coords(v, lam)
            fu = np.max(u) + np.dot(u - v, u - v) / (2 * lam)
            w = u + r.standard_normal(n) * 0.1
            fw = np.max(w) + np.dot(w - v, w - v) / (2 * lam)
            assert fu <= fw + 1e-12


class TestMoreauBridge:
    def test_max_outer(self):
        # conjugate of max is the simplex indicator: prox is the projection
        out = prox.prox_conjugate_moreau(prox.prox_max_coords, np.array([1.0, 1.0]), 1.0)
        assert np.allclose(out, [0.5, 0.5], atol=1e-14)

    def test_zero_conjugate(self):
        # phi = indicator of the origin (prox maps to 0): phi* = 0, prox = id
        to_zero = lambda v, lam: np.zeros_like(v)
        r = rng(6)
        for _ in range(50):
            v = r.standard_normal(4)
            rho = float(r.uniform(0.1, 10))
            assert np.allclose(prox.prox_conjugate_moreau(to_zero, v, rho), v, atol=1e-15)

    def test_self_conjugate_quadratic(self):
        quad = lambda v, lam: v / (1.0 + lam)
        out = prox.prox_conjugate_moreau(quad, np.array([1.0]), 1.0)
        assert np.allclose(out, [0.5], atol=1e-15)

    def test_identity_dual_routes(self):
        # three prox pairs with independent closed forms for prox_{rho phi*}
        pairs = [
            (lambda v, lam: v / (1.0 + lam), lambda v, rho: v / (1.0 + rho)),
            (prox.prox_max_coords, lambda v, rho: prox.project_simplex(v)),
            (lambda v, lam: prox.soft_threshold(v, lam), lambda v, rho: np.clip(v, -1, 1)),
        ]
        r = rng(7)
        worst = 0.0
        for _ in range(1000):
            v = r.standard_normal(int(r.integers(1, 8))) * 3
            rho = float(r.uniform(0.1, 10))
            for prox_phi, direct in pairs:
                diff = prox.prox_conjugate_moreau(prox_phi, v, rho) - direct(v, rho)
                worst = max(worst, float(np.max(np.abs(diff))))
        assert worst <= 1e-10


class TestSoftThreshold:
    def test_componentwise(self):
        assert np.allclose(prox.soft_threshold([2.0, -0.5], 1.0), [1.0, 0.0], atol=1e-15)

    def test_zero_fixed_point(self):
        assert np.allclose(prox.soft_threshold([0.0, 0.0], 3.0), [0.0, 0.0])

    def test_sign_preserved(self):
        assert np.allclose(prox.soft_threshold([-3.0], 0.5), [-2.5], atol=1e-15)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=8),
           st.floats(0.01, 10))
    @settings(max_examples=200, deadline=None)
    def test_nonexpansive(self, vals, lam):
        v = np.array(vals)
        w = v + 0.1
        dv = prox.soft_threshold(v, lam) - prox.soft_threshold(w, lam)
        assert np.linalg.norm(dv) <= np.linalg.norm(v - w) + 1e-12


class TestProjectCone:
    def test_orthant_clamp(self):
        assert np.allclose(prox.project_cone([1.0, -2.0], "nonneg"), [1.0, 0.0])

    def test_soc_closed_form(self):
        out = prox.project_cone([0.0, 2.0], "soc")
        assert np.allclose(out, [1.0, 1.0], atol=1e-14)
        # grid check over the cone {(t,u): |u| <= t}
        best, best_d = None, np.inf
        for t in np.arange(0, 3, 0.01):
            for u in np.arange(-t, t + 1e-9, 0.01):
                d = np.hypot(t - 0.0, u - 2.0)
                if d < best_d:
                    best, best_d = np.array([t, u]), d
        assert np.linalg.norm(out - best) <= 0.02

    def test_zero_cone(self):
        assert np.allclose(prox.project_cone([3.0, -1.0], "zero"), [0.0, 0.0])

    def test_soc_apex(self):
        assert np.allclose(prox.project_cone([-1.0, 0.0, 0.0], "soc"), 0.0)

    def test_unknown_tag(self):
        with pytest.raises(InvalidInputError):
            prox.project_cone([1.0], "psd")

    def test_idempotent(self):
        r = rng(8)
        for tag in ("nonneg", "soc", "zero"):
            for _ in range(200):
                v = r.standard_normal(4) * 3
                u = prox.project_cone(v, tag)
                assert np.max(np.abs(prox.project_cone(u, tag) - u)) <= 1e-12

    def test_polar_decomposition(self):
        # v = proj_{-K}(v) + proj_{K*}(v) and the parts are orthogonal
        r = rng(9)
        for tag in ("nonneg", "soc", "zero"):
            for _ in range(100):
                v = r.standard_normal(5)
                a = prox.project_polar_cone(v, tag)
                b = prox.project_dual_cone(v, tag)
                assert np.allclose(a + b, v, atol=1e-12)
                assert abs(np.dot(a, b)) <= 1e-10


class TestBackends:
    def test_simplex_agreement(self, kernel_impl):
        r = rng(10)
        for _ in range(500):
            v = np.ascontiguousarray(r.standard_normal(int(r.integers(1, 12))) * 4)
            assert np.array_equal(kernel_impl.project_simplex(v),
                                  _core.kernels_py.project_simplex(v))

    def test_soft_threshold_agreement(self, kernel_impl):
        r = rng(11)
        for _ in range(500):
            v = np.ascontiguousarray(r.standard_normal(6) * 4)
            assert np.array_equal(kernel_impl.soft_threshold(v, 0.7),
                                  _core.kernels_py.soft_threshold(v, 0.7))

    def test_soc_agreement(self, kernel_impl):
        r = rng(12)
        for _ in range(500):
            v = np.ascontiguousarray(r.standard_normal(int(r.integers(2, 12))))
            a = kernel_impl.project_soc(v)
            b = _core.kernels_py.project_soc(v)
            assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
