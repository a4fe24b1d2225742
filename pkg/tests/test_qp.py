import numpy as np
import pytest

from chargeopt.qp import (
    LinearConstraintSet,
    QpInfeasibleError,
    concavity_report,
    grid_oracle,
    maximize_quadratic,
)
from chargeopt.utility import QuadForm


def _box(lower, upper, rows=()):
    return LinearConstraintSet.build(rows, np.asarray(lower, float), np.asarray(upper, float))


def _random_concave_instance(rng, dim):
    m = rng.normal(0, 1, (dim, dim))
    q = -(m @ m.T) - 0.5 * np.eye(dim)
    b = rng.normal(0, 3, dim)
    lo = rng.uniform(-1.0, 0.0, dim)
    hi = lo + rng.uniform(0.4, 1.2, dim)
    return QuadForm(q, b, float(rng.normal())), _box(lo, hi)


class TestMaximizeQuadratic:
    def test_interior_vertex_1d(self):
        form = QuadForm(np.array([[-2.0]]), np.array([2.0]), 3.0)
        sol = maximize_quadratic(form, _box([0.0], [5.0]))
        assert sol.x[0] == pytest.approx(1.0, abs=1e-8)
        assert sol.value == pytest.approx(4.0)
        assert sol.status == "optimal"

    def test_active_bound_1d(self):
        form = QuadForm(np.array([[-2.0]]), np.array([2.0]), 3.0)
        sol = maximize_quadratic(form, _box([2.0], [5.0]))
        assert sol.x[0] == pytest.approx(2.0, abs=1e-8)
        assert sol.value == pytest.approx(3.0)

    def test_interior_optimum_matches_closed_form(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            dim = int(rng.integers(2, 6))
            m = rng.normal(0, 1, (dim, dim))
            q = -(m @ m.T) - np.eye(dim)
            x_star = rng.uniform(-0.3, 0.3, dim)
            b = -q @ x_star  # optimum of 0.5 x'Qx + b'x is -Q^{-1} b = x_star
            form = QuadForm(q, b, 0.0)
            sol = maximize_quadratic(form, _box(-np.ones(dim), np.ones(dim)))
            assert np.max(np.abs(sol.x - x_star)) < 1e-6

    def test_linear_objective_zero_curvature(self):
        # Q singular: pure LP over the box, optimum at a vertex
        form = QuadForm(np.zeros((2, 2)), np.array([1.0, -2.0]), 0.0)
        sol = maximize_quadratic(form, _box([0.0, 0.0], [3.0, 4.0]))
        assert np.allclose(sol.x, [3.0, 0.0], atol=1e-8)
        assert sol.value == pytest.approx(3.0)

    def test_general_rows_respected(self):
        # max -(x^2+y^2) + x + y subject to x + y <= 0.5
        form = QuadForm(-2 * np.eye(2), np.array([1.0, 1.0]), 0.0)
        cons = _box([-2, -2], [2, 2], rows=[(np.array([1.0, 1.0]), 0.5)])
        sol = maximize_quadratic(form, cons)
        assert np.allclose(sol.x, [0.25, 0.25], atol=1e-7)

    def test_solution_satisfies_all_constraints(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            dim = int(rng.integers(1, 5))
            form, cons = _random_concave_instance(rng, dim)
            sol = maximize_quadratic(form, cons)
            assert cons.max_violation(sol.x) <= 1e-6

    def test_dominates_random_feasible_points(self):
        rng = np.random.default_rng(2)
        form, cons = _random_concave_instance(rng, 3)
        sol = maximize_quadratic(form, cons)
        pts = rng.uniform(cons.lower, cons.upper, size=(1000, 3))
        vals = 0.5 * np.einsum("ij,jk,ik->i", pts, form.Q, pts) + pts @ form.B + form.r
        assert sol.value >= vals.max() - 1e-7

    def test_infeasible_rows_raise(self):
        form = QuadForm(-np.eye(1), np.zeros(1), 0.0)
        cons = _box([0.0], [1.0], rows=[(np.array([1.0]), -5.0)])  # x <= -5 vs x >= 0
        with pytest.raises(QpInfeasibleError):
            maximize_quadratic(form, cons)

    def test_non_concave_flagged_and_grid_checked(self):
        form = QuadForm(np.array([[2.0]]), np.array([0.0]), 0.0)  # convex: max at a bound
        sol = maximize_quadratic(form, _box([-1.0], [2.0]))
        assert sol.status == "non_concave"
        assert sol.x[0] == pytest.approx(2.0, abs=1e-6)

    def test_warm_start_equals_cold_start(self):
        rng = np.random.default_rng(3)
        form, cons = _random_concave_instance(rng, 3)
        cold = maximize_quadratic(form, cons)
        warm = maximize_quadratic(form, cons, initial=cons.upper.copy())
        assert np.allclose(cold.x, warm.x, atol=1e-7)


class TestGridOracle:
    def test_singleton_box(self):
        form = QuadForm(-np.eye(2), np.array([1.0, 1.0]), 2.0)
        x, v = grid_oracle(form, _box([0.3, 0.4], [0.3, 0.4]), resolution=0.1)
        assert np.allclose(x, [0.3, 0.4])
        assert v == pytest.approx(form.value(np.array([0.3, 0.4])))

    def test_grid_hits_exact_optimum(self):
        form = QuadForm(np.array([[-2.0]]), np.array([2.0]), 0.0)
        x, v = grid_oracle(form, _box([0.0], [5.0]), resolution=0.5)
        assert x[0] == 1.0
        assert v == pytest.approx(1.0)

    def test_refining_never_decreases_value(self):
        rng = np.random.default_rng(4)
        form, cons = _random_concave_instance(rng, 2)
        base = None
        for res in (0.4, 0.2, 0.1, 0.05):
            _, v = grid_oracle(form, cons, resolution=res)
            if base is not None:
                assert v >= base - 1e-12
            base = v

    def test_dimension_guard(self):
        form = QuadForm(-np.eye(5), np.zeros(5), 0.0)
        with pytest.raises(ValueError, match="dimension"):
            grid_oracle(form, _box(np.zeros(5), np.ones(5)), resolution=0.5)

    def test_infeasible_grid_raises(self):
        form = QuadForm(-np.eye(1), np.zeros(1), 0.0)
        cons = _box([0.0], [1.0], rows=[(np.array([1.0]), -1.0)])
        with pytest.raises(QpInfeasibleError):
            grid_oracle(form, cons, resolution=0.5)

    def test_agreement_with_solver(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            dim = int(rng.integers(1, 4))
            form, cons = _random_concave_instance(rng, dim)
            sol = maximize_quadratic(form, cons)
            _, grid_v = grid_oracle(form, cons, resolution=0.01)
            assert sol.value >= grid_v - 1e-3


class TestConcavityReport:
    def test_negative_definite(self):
        rep = concavity_report(np.diag([-1.0, -1.0]))
        assert rep.is_negative_semidefinite
        assert rep.min_eigenvalue == pytest.approx(-1.0)

    def test_indefinite(self):
        rep = concavity_report(np.diag([-1.0, 1.0]))
        assert not rep.is_negative_semidefinite

    def test_zero_matrix_is_nsd(self):
        rep = concavity_report(np.zeros((3, 3)))
        assert rep.is_negative_semidefinite

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            concavity_report(np.array([[0.0, 1.0], [0.0, 0.0]]))
