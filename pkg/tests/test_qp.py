"""Tests for the interior-point QP solver."""

import numpy as np
import pytest

from pqtrain.services.qp import MehrotraIPMSolver, QuadraticProgram


def simplex_program(c):
    """minimize x^T x + c^T x subject to sum(x) = 1, x >= 0."""
    n = len(c)
    return QuadraticProgram(H=2.0 * np.eye(n), c=np.asarray(c, dtype=float),
                            A=np.ones((1, n)), b=np.array([1.0]))


class TestQuadraticProgram:
    """Tests for the problem container."""

    def test_dimensions(self):
        """Test the reported variable and constraint counts."""
        qp = simplex_program([0.0, 0.0, 0.0])
        assert (qp.n, qp.m) == (3, 1)

    def test_rejects_bad_hessian(self):
        """Test that a Hessian that does not match c is rejected."""
        with pytest.raises(ValueError):
            QuadraticProgram(H=np.eye(3), c=np.zeros(2), A=np.ones((1, 2)), b=np.ones(1))

    def test_rejects_bad_constraints(self):
        """Test that mismatched A and b are rejected."""
        with pytest.raises(ValueError):
            QuadraticProgram(H=np.eye(2), c=np.zeros(2), A=np.ones((1, 3)), b=np.ones(1))


class TestMehrotraIPMSolver:
    """Tests for MehrotraIPMSolver.solve."""

    def test_interior_optimum(self):
        """Test a problem whose optimum is strictly positive."""
        result = MehrotraIPMSolver().solve(simplex_program([0.0, 0.0]))
        assert result.converged
        assert np.allclose(result.x, [0.5, 0.5], atol=1e-8)

    def test_active_bound(self):
        """Test a problem with an active x >= 0 bound."""
        # Optimum x = (1, 0) with multiplier z_1 = 2 on the bound
        result = MehrotraIPMSolver().solve(simplex_program([0.0, 4.0]))
        assert result.converged
        assert np.allclose(result.x, [1.0, 0.0], atol=1e-8)
        assert result.z[1] == pytest.approx(2.0, abs=1e-6)

    def test_residuals_below_tolerance(self):
        """Test that the final residuals meet the tolerance."""
        solver = MehrotraIPMSolver(tol=1e-11)
        result = solver.solve(simplex_program([0.3, -0.2, 0.1, 0.0]))
        assert result.converged
        assert max(result.residuals.values()) < 1e-10

    def test_iteration_cap(self):
        """Test that hitting the cap raises ConvergenceError."""
        result = MehrotraIPMSolver(max_iter=1).solve(simplex_program([0.0, 0.0]))
        assert result.status == 'max_iter'
        assert not result.converged
        assert result.iterations == 1

    def test_defaults_come_from_settings(self, monkeypatch):
        """Test that defaults follow the PQTRAIN_ settings."""
        from pqtrain.config import get_settings
        monkeypatch.setenv('PQTRAIN_QP_MAX_ITER', '7')
        get_settings.cache_clear()
        assert MehrotraIPMSolver().max_iter == 7

    def test_deterministic(self):
        """Test that two solves give identical solutions and iteration counts."""
        qp = simplex_program([0.3, -0.2, 0.1, 0.0])
        first = MehrotraIPMSolver().solve(qp)
        second = MehrotraIPMSolver().solve(qp)
        assert np.array_equal(first.x, second.x)
        assert first.iterations == second.iterations
