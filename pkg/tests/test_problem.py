import math

import numpy as np
import pytest

from pdcomp import (
    InvalidInputError,
    Mapping,
    SmoothTerm,
    aggregate_constants,
    evaluate_primal,
    finite_diff_check,
    lagrangian_value,
)
from pdcomp.instances import build_game, build_bilinear_toy, simplex_indicator
from pdcomp.problem import CompositeProblem, mul0, zero_prox_term, zero_smooth_term

from conftest import rng


class TestEvaluatePrimal:
    def test_toy(self, toy):
        assert evaluate_primal(toy, np.array([1.0])) == pytest.approx(0.5, abs=1e-15)

    def test_indicator_infeasible(self, game):
        assert evaluate_primal(game, np.array([2.0, 0.0, 0.0])) == math.inf

    def test_game_matches_inline_evaluation(self, game):
        # independent re-implementation of the game objective
        r = rng(0)
        rr = np.random.default_rng(11)  # the instance's canonical seed
        A = rr.standard_normal((200, 3))
        b = rr.uniform(0.0, 1.0, 3)
        for _ in range(20):
            x = r.dirichlet(np.ones(3))
            expected = np.mean(np.log1p(np.exp(A @ x))) + np.max(b / (1.0 + x))
            assert evaluate_primal(game, x) == pytest.approx(expected, abs=1e-12)

    def test_dimension_mismatch(self, toy):
        with pytest.raises(InvalidInputError):
            evaluate_primal(toy, np.array([1.0, 2.0]))


class TestAggregateConstants:
    def test_single_component(self):
        assert aggregate_constants([1.0], [0.0]) == (1.0, 0.0)

    def test_pythagorean(self):
        assert aggregate_constants([3.0, 4.0], [0.0, 0.0]) == (5.0, 0.0)

    def test_game_convention(self):
        # payoff b = (1, 2): per-component constants |b_i| and 2|b_i|
        mg, lg = aggregate_constants([1.0, 2.0], [2.0, 4.0])
        assert mg == pytest.approx(math.sqrt(5.0), abs=1e-15)
        assert lg == pytest.approx(2.0 * math.sqrt(5.0), abs=1e-15)

    def test_permutation_invariant(self):
        r = rng(1)
        for _ in range(100):
            m = r.uniform(0, 3, 6)
            l = r.uniform(0, 3, 6)
            p = r.permutation(6)
            a = aggregate_constants(m, l)
            b = aggregate_constants(m[p], l[p])
            assert abs(a[0] - b[0]) <= 1e-15 and abs(a[1] - b[1]) <= 1e-15

    def test_negative_rejected(self):
        with pytest.raises(InvalidInputError):
            aggregate_constants([-1.0], [0.0])


class TestLagrangian:
    def test_toy_hand_value(self, toy):
        val = lagrangian_value(toy, np.array([1.0]), np.array([0.5]), np.array([0.5]))
        assert val == pytest.approx(0.375, abs=1e-15)

    def test_coupling_vanishes(self, game):
        r = rng(2)
        for _ in range(20):
            x = r.dirichlet(np.ones(3))
            y = r.dirichlet(np.ones(3))
            s = game.g.apply(x)
            expected = game.f.value(x) + game.h.value(x) + game.H.value(s)
            assert lagrangian_value(game, x, s, y) == pytest.approx(expected, abs=1e-13)

    def test_saddle_value(self, game):
        o = game.optimum
        s = game.g.apply(o.x)
        assert lagrangian_value(game, o.x, s, o.y) == pytest.approx(o.value, abs=2 * o.accuracy)

    def test_conjugate_subgradient_tightness(self, toy, toy_max):
        # where s is a conjugate subgradient, the s-free and s-form
        # Lagrangians coincide
        r = rng(3)
        for _ in range(50):
            x = r.standard_normal(1)
            y = r.standard_normal(1)
            s = y.copy()  # subgradient of the quadratic conjugate
            sfree = float(y[0] * x[0] - 0.5 * y[0] ** 2)
            assert lagrangian_value(toy, x, s, y) == pytest.approx(sfree, abs=1e-8)
        for _ in range(50):
            x = r.standard_normal(1)
            y = r.dirichlet(np.ones(2))
            c = float(r.standard_normal()) * 2.0
            s = np.array([c, c])  # normal direction of the simplex at interior y
            sfree = float(np.dot(toy_max.g.apply(x), y))
            assert lagrangian_value(toy_max, x, s, y) == pytest.approx(sfree, abs=1e-8)


class TestFiniteDiff:
    def test_toy_passes_tightly(self, toy):
        rep = finite_diff_check(toy, samples=100, seed=0)
        assert rep.passed and max(rep.max_grad_error, rep.max_jac_error) <= 1e-8

    def test_wrong_gradient_fails(self):
        bad = CompositeProblem(
            f=SmoothTerm(value=lambda x: 0.5 * float(x @ x), grad=lambda x: 2.0 * x,
                         grad_lipschitz=2.0),
            h=zero_prox_term(),
            H=zero_prox_term(),
            g=Mapping(apply=lambda x: x.copy(), jtvec=lambda x, y: y.copy(),
                      component_lipschitz=[1.0, 1.0], component_grad_lipschitz=[0.0, 0.0],
                      is_affine=True),
            dim_primal=2, dim_dual=2,
        )
        assert not finite_diff_check(bad, samples=50, seed=0).passed

    def test_affine_jacobian_tight(self, toy_max):
        rep = finite_diff_check(toy_max, samples=100, seed=1)
        assert rep.max_jac_error <= 1e-10

    @pytest.mark.parametrize("name", ["toy", "toy_max", "game", "classification", "cone_qp"])
    def test_registered_instances_pass(self, name, request):
        prob = request.getfixturevalue({"cone_qp": "cone_qp"}.get(name, name))
        anchor = prob.start[0]
        rep = finite_diff_check(prob, samples=100, seed=2, anchor=anchor, radius=0.25)
        assert rep.passed, (name, rep)


class TestMappingConstants:
    @pytest.mark.parametrize("name", ["toy", "toy_max", "game", "classification", "cone_qp"])
    def test_lipschitz_bounds_on_domain(self, name, request):
        prob = request.getfixturevalue(name)
        r = rng(4)
        p = prob.dim_primal
        simplex_domain = prob.h.value(np.zeros(p)) == math.inf
        for _ in range(1000):
            if simplex_domain:
                x, xh = r.dirichlet(np.ones(p)), r.dirichlet(np.ones(p))
            else:
                x, xh = r.standard_normal(p), r.standard_normal(p)
            dg = np.linalg.norm(prob.g.apply(x) - prob.g.apply(xh))
            assert dg <= prob.map_lipschitz * np.linalg.norm(x - xh) + 1e-12
            y = r.standard_normal(prob.dim_dual)
            dj = np.linalg.norm(prob.g.jtvec(x, y) - prob.g.jtvec(xh, y))
            bound = prob.map_grad_lipschitz * np.linalg.norm(y) * np.linalg.norm(x - xh)
            assert dj <= bound + 1e-12


class TestModelValidation:
    def test_mul0(self):
        assert mul0(0.0, math.inf) == 0.0
        assert mul0(math.inf, 0.0) == 0.0
        assert mul0(2.0, 3.0) == 6.0
        assert mul0(2.0, math.inf) == math.inf

    def test_component_count_must_match_dual_dim(self):
        with pytest.raises(InvalidInputError):
            CompositeProblem(
                f=zero_smooth_term(), h=zero_prox_term(), H=zero_prox_term(),
                g=Mapping(apply=lambda x: x.copy(), jtvec=lambda x, y: y.copy(),
                          component_lipschitz=[1.0], component_grad_lipschitz=[0.0]),
                dim_primal=2, dim_dual=2,
            )

    def test_aggregates_autocomputed(self, game):
        b = np.asarray(game.g.component_lipschitz, float)
        assert game.map_lipschitz == pytest.approx(float(np.sqrt(np.sum(b * b))), rel=1e-12)

    def test_curvature_ordering_enforced(self):
        with pytest.raises(InvalidInputError):
            SmoothTerm(value=lambda x: 0.0, grad=np.zeros_like,
                       grad_lipschitz=1.0, strong_convexity=2.0)
