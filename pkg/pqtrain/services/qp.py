"""
Primal-dual interior-point solver for small convex quadratic programs.

Problems are taken in standard form

    minimize    1/2 x^T H x + c^T x
    subject to  A x = b,  x >= 0

and solved with Mehrotra's predictor-corrector method on the full KKT
system. Sizes here are tens of variables, so dense solves are used.
"""

from __future__ import annotations
import logging
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..config import get_settings

logger = logging.getLogger(__name__)

STEP_FRACTION = 0.99


class QuadraticProgram:
    """Container for H, c, A, b of a standard-form QP."""

    def __init__(self, H: np.ndarray, c: np.ndarray, A: np.ndarray, b: np.ndarray):
        self.H = np.asarray(H, dtype=np.float64)
        self.c = np.asarray(c, dtype=np.float64)
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.asarray(b, dtype=np.float64)
        n = self.c.shape[0]
        if self.H.shape != (n, n):
            raise ValueError(f"H must be {n}x{n}, got {self.H.shape}")
        if self.A.shape[1] != n or self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"A has shape {self.A.shape}, incompatible with n={n}, m={self.b.shape[0]}")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    def residuals(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> Dict[str, float]:
        rd = self.H @ x + self.c - self.A.T @ y - z
        rp = self.A @ x - self.b
        return {
            'primal': float(np.max(np.abs(rp))) if rp.size else 0.0,
            'dual': float(np.max(np.abs(rd))),
            'gap': float(np.dot(x, z) / self.n),
        }


class SolverResult(BaseModel):
    """Primal/dual iterates and status of one solve."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    status: str
    iterations: int
    residuals: Dict[str, float]

    @property
    def converged(self) -> bool:
        return self.status == 'optimal'


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest alpha in (0, 1] keeping v + alpha*dv >= 0."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


class MehrotraIPMSolver:
    """
    Mehrotra predictor-corrector interior-point method.

    Iteration stops when the primal residual, dual residual and
    complementarity gap all fall below ``tol``. Starting point and iteration
    order are fixed, so results are deterministic.
    """

    def __init__(self, max_iter: Optional[int] = None, tol: Optional[float] = None):
        settings = get_settings()
        self.max_iter = settings.qp_max_iter if max_iter is None else max_iter
        self.tol = settings.qp_tol if tol is None else tol

    def _newton(self, qp: QuadraticProgram, x, z, rd, rp, rc):
        n, m = qp.n, qp.m
        K = np.zeros((n + m, n + m))
        K[:n, :n] = qp.H + np.diag(z / x)
        K[:n, n:] = -qp.A.T
        K[n:, :n] = qp.A
        rhs = np.concatenate([-rd + rc / x, -rp])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        dx, dy = sol[:n], sol[n:]
        dz = (rc - z * dx) / x
        return dx, dy, dz

    def solve(self, qp: QuadraticProgram) -> SolverResult:
        n = qp.n
        x = np.ones(n)
        z = np.ones(n)
        y = np.zeros(qp.m)

        status = 'max_iter'
        iterations = 0
        for iterations in range(1, self.max_iter + 1):
            rd = qp.H @ x + qp.c - qp.A.T @ y - z
            rp = qp.A @ x - qp.b
            mu = float(np.dot(x, z) / n)
            worst = max(float(np.max(np.abs(rp))) if rp.size else 0.0,
                        float(np.max(np.abs(rd))), mu)
            logger.debug(f"IPM iteration {iterations}: residual={worst:.3e} mu={mu:.3e}")
            if worst < self.tol:
                status = 'optimal'
                iterations -= 1
                break

            # Predictor
            dx_a, dy_a, dz_a = self._newton(qp, x, z, rd, rp, -x * z)
            alpha_a = min(_max_step(x, dx_a), _max_step(z, dz_a))
            mu_aff = float(np.dot(x + alpha_a * dx_a, z + alpha_a * dz_a) / n)
            sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

            # Corrector
            rc = -x * z - dx_a * dz_a + sigma * mu
            dx, dy, dz = self._newton(qp, x, z, rd, rp, rc)
            alpha = min(1.0, STEP_FRACTION * min(_max_step(x, dx), _max_step(z, dz)))

            x = x + alpha * dx
            y = y + alpha * dy
            z = z + alpha * dz
        else:
            iterations = self.max_iter

        residuals = qp.residuals(x, y, z)
        if status == 'optimal':
            logger.info(f"IPM converged in {iterations} iterations")
        else:
            logger.warning(f"IPM stopped at iteration cap {self.max_iter}: {residuals}")
        return SolverResult(x=x, y=y, z=z, status=status, iterations=iterations, residuals=residuals)
