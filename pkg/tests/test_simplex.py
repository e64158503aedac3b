"""Tests for the two-phase equality-form simplex solver."""

import numpy as np
import pytest

from eprlab.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp


class TestBasicSolves:
    def test_single_constraint_vertex(self):
        """min -x1 on the simplex x1 + x2 = 1 puts all mass on x1."""
        result = solve_lp([-1.0, 0.0], [[1.0, 1.0]], [1.0])
        assert result.status == OPTIMAL
        assert result.x == pytest.approx([1.0, 0.0], abs=1e-9)
        assert result.objective == pytest.approx(-1.0, abs=1e-9)

    def test_two_constraints(self):
        """min x1 + x2 with x1 + 2 x2 = 4 and 3 x1 + x2 = 7."""
        result = solve_lp([1.0, 1.0], [[1.0, 2.0], [3.0, 1.0]], [4.0, 7.0])
        assert result.status == OPTIMAL
        assert result.x == pytest.approx([2.0, 1.0], abs=1e-9)
        assert result.objective == pytest.approx(3.0, abs=1e-9)

    def test_negative_rhs_handled(self):
        """Rows are reoriented so a negative right-hand side still solves."""
        result = solve_lp([1.0, 1.0], [[-1.0, -2.0], [3.0, 1.0]], [-4.0, 7.0])
        assert result.status == OPTIMAL
        assert result.x == pytest.approx([2.0, 1.0], abs=1e-9)

    def test_zero_objective_is_feasibility_check(self):
        result = solve_lp([0.0, 0.0, 0.0], [[1.0, 1.0, 1.0]], [1.0])
        assert result.status == OPTIMAL
        assert result.x.sum() == pytest.approx(1.0, abs=1e-9)
        assert result.x.min() >= -1e-12


class TestStatuses:
    def test_infeasible_by_sign(self):
        """x1 + x2 = -1 has no nonnegative solution."""
        result = solve_lp([0.0, 0.0], [[1.0, 1.0]], [-1.0])
        assert result.status == INFEASIBLE
        assert result.x is None
        assert result.objective is None

    def test_infeasible_by_contradiction(self):
        result = solve_lp([0.0], [[1.0], [1.0]], [1.0, 2.0])
        assert result.status == INFEASIBLE

    def test_unbounded(self):
        """min -x1 with only x2 pinned lets x1 grow without limit."""
        result = solve_lp([-1.0, 0.0], [[0.0, 1.0]], [1.0])
        assert result.status == UNBOUNDED
        assert result.x is None

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="2-d"):
            solve_lp([1.0], [1.0, 2.0], [1.0])
        with pytest.raises(ValueError, match="mismatch"):
            solve_lp([1.0, 2.0, 3.0], [[1.0, 1.0]], [1.0])


class TestDeterminism:
    def test_degenerate_problem_repeats_identically(self):
        """A degenerate vertex is resolved the same way every run."""
        c = [0.0, 0.0, -1.0, 2.0]
        a = [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 0.0, 0.0]]
        b = [1.0, 0.0]
        first = solve_lp(c, a, b)
        for _ in range(5):
            again = solve_lp(c, a, b)
            assert again.status == first.status
            assert np.array_equal(again.x, first.x)
            assert again.iterations == first.iterations


class TestRandomProblems:
    def test_constructed_feasible_problems_solve(self):
        """Problems built around a known feasible point always come back optimal."""
        rng = np.random.default_rng(61)
        for _ in range(100):
            m, n = 4, 9
            a = rng.normal(size=(m, n))
            x0 = rng.random(n)
            b = a @ x0
            c = rng.normal(size=n)
            result = solve_lp(c, a, b)
            assert result.status in (OPTIMAL, UNBOUNDED)
            if result.status == OPTIMAL:
                assert np.allclose(a @ result.x, b, atol=1e-7)
                assert result.x.min() >= -1e-9
                # The optimum cannot exceed the value at the feasible seed.
                assert result.objective <= c @ x0 + 1e-7

    def test_convex_weight_problems(self):
        """Normalization plus random moment constraints, as the callers use it."""
        rng = np.random.default_rng(67)
        for _ in range(50):
            signs = rng.choice([-1.0, 1.0], size=(3, 16))
            weights = rng.dirichlet(np.ones(16))
            a = np.vstack([np.ones(16), signs])
            b = a @ weights
            result = solve_lp(np.zeros(16), a, b)
            assert result.status == OPTIMAL
            assert np.allclose(a @ result.x, b, atol=1e-8)
            assert result.x.min() >= -1e-9
