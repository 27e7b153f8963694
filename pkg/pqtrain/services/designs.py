"""
Design service - named (P,Q) transmit-receive designs.

Families:
    - PTM: Prouhet-Thue-Morse ordering with unit weights (null order log2 N - 1)
    - binomial: alternating ordering with binomial weights (null order N - 2)
    - conventional: alternating ordering with unit weights (null order 0)
    - general: any combination of the (1 - z)^k null-subspace basis
    - max-SNR: best ||r||_1^2 / ||r||_2^2 subject to an M-th order null
    - D-ary products of binary (or lifted) factors
"""

from __future__ import annotations
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError

from ..config import get_settings
from ..errors import ConvergenceError, InfeasibleOrderError, InvalidArgumentError
from ..models.designs import Design, DesignVector, KktReport, MaxSnrProblem, Number
from ..models.waveforms import is_power_of_two
from .qp import MehrotraIPMSolver, QuadraticProgram
from .spectra import null_order, pq_from_r, r_from_coeffs

logger = logging.getLogger(__name__)

SIGN_SEARCH_CHUNK = 2 ** 15
SCORE_TIE_TOL = 1e-12


def ptm_design(N: int) -> Design:
    """
    Prouhet-Thue-Morse design: p_{2k} = p_k, p_{2k+1} = 1 - p_k, unit weights.

    Raises:
        InvalidArgumentError: If N is not a power of two >= 4.
    """
    if not is_power_of_two(N) or N < 4:
        raise InvalidArgumentError(f"PTM length must be a power of two >= 4, got {N}")
    P = tuple(bin(n).count('1') % 2 for n in range(N))
    return Design(name=f"ptm{N}", P=P, Q=(1,) * N, D=2,
                  declared_null_order=N.bit_length() - 2)


def binomial_design(N: int) -> Design:
    """Alternating P starting at p_0 = 0, q_n = binom(N-1, n)."""
    if N < 3:
        raise InvalidArgumentError(f"Binomial design needs N >= 3, got {N}")
    P = tuple(n % 2 for n in range(N))
    Q = tuple(math.comb(N - 1, n) for n in range(N))
    return Design(name=f"binomial{N}", P=P, Q=Q, D=2, declared_null_order=N - 2)


def conventional_design(N: int) -> Design:
    """Alternating Golay transmission with a plain matched filter."""
    if N < 2 or N % 2:
        raise InvalidArgumentError(f"Conventional design needs an even N >= 2, got {N}")
    return Design(name=f"conventional{N}", P=tuple(n % 2 for n in range(N)),
                  Q=(1,) * N, D=2, declared_null_order=0)


def general_design(a: Sequence[Number], N: int, M: int) -> Design:
    """Design with r = B_M a; see spectra.r_from_coeffs."""
    r = r_from_coeffs(a, N, M)
    P, Q = pq_from_r(r)
    return Design(name=f"general{N}:{M}", P=P, Q=Q, D=2, declared_null_order=M)


# Max-SNR designs

class SolverOptions(BaseModel):
    """Overrides for the max-SNR solver; None falls back to settings."""

    tol: Optional[float] = None
    max_iter: Optional[int] = None
    kkt_tol: Optional[float] = None
    sign_search_max_n: Optional[int] = None


def moment_constraint_basis(N: int, M: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orthonormal bases (C, U) with span(C) = row space of V_M and
    span(U) = null(V_M) = span(B_M).

    The row space of V_M is the degree-<=M polynomials sampled at n = 0..N-1;
    Chebyshev polynomials on the scaled index give a well-conditioned basis
    of the same space.
    """
    if M < 0 or M > N - 2:
        raise InfeasibleOrderError(f"Null order {M} infeasible for length {N} (max {N - 2})")
    grid = 2.0 * np.arange(N) / (N - 1) - 1.0
    T = np.polynomial.chebyshev.chebvander(grid, M)
    Q, _ = np.linalg.qr(T, mode='complete')
    return Q[:, :M + 1], Q[:, M + 1:]


def _sign_patterns(start: int, stop: int, N: int) -> np.ndarray:
    """Rows sigma with sigma_0 = +1 and sigma_{1..N-1} from the bits of the index."""
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(N - 1, dtype=np.int64)) & 1
    return np.hstack([np.ones((len(idx), 1)), 1.0 - 2.0 * bits])


def _exhaustive_sign_search(C: np.ndarray) -> np.ndarray:
    """Minimize ||C^T sigma||^2 over sign patterns; ties keep the earliest."""
    N = C.shape[0]
    total = 2 ** (N - 1)
    best_score, best = np.inf, None
    for start in range(0, total, SIGN_SEARCH_CHUNK):
        sigma = _sign_patterns(start, min(total, start + SIGN_SEARCH_CHUNK), N)
        scores = np.sum((sigma @ C) ** 2, axis=1)
        low = scores.min()
        if low < best_score - SCORE_TIE_TOL:
            first = int(np.flatnonzero(scores <= low + SCORE_TIE_TOL)[0])
            best_score, best = float(scores[first]), sigma[first]
    return best


def _local_sign_search(C: np.ndarray) -> np.ndarray:
    """Greedy single-flip descent from the alternating pattern."""
    N = C.shape[0]
    sigma = np.array([1.0 if n % 2 == 0 else -1.0 for n in range(N)])
    g = C.T @ sigma
    row_norms = np.sum(C ** 2, axis=1)
    for _ in range(N * N):
        # ||g - 2 sigma_i c_i||^2 - ||g||^2 for every flip i
        delta = -4.0 * sigma * (C @ g) + 4.0 * row_norms
        i = int(np.argmin(delta))
        if delta[i] >= -SCORE_TIE_TOL:
            break
        g = g - 2.0 * sigma[i] * C[i]
        sigma[i] = -sigma[i]
    return sigma


def _pattern_constraints(C: np.ndarray, sigma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """1^T x = 1 and C^T (sigma * x) = 0 for the magnitudes x."""
    A = np.vstack([np.ones(C.shape[0]), (C * sigma[:, None]).T])
    b = np.zeros(A.shape[0])
    b[0] = 1.0
    return A, b


def _kkt_report(x: np.ndarray, sigma: np.ndarray, A: np.ndarray, b: np.ndarray,
                iterations: int, mode: str) -> KktReport:
    """
    KKT residuals of min ||x||^2 s.t. A x = b, x >= 0 at x.

    Multipliers of the equality rows come from least squares on the support,
    where the bound multipliers must vanish.
    """
    support = x > 1e-9 * max(float(np.max(x)), 1e-300)
    y = np.linalg.lstsq(A[:, support].T, 2.0 * x[support], rcond=None)[0]
    z = 2.0 * x - A.T @ y
    s, t = MaxSnrProblem.split(sigma * x)
    objective = MaxSnrProblem.objective(s, t)
    return KktReport(
        stationarity=float(np.max(np.abs(z[support]))),
        primal=float(max(np.max(np.abs(A @ x - b)), max(0.0, -float(np.min(x))))),
        dual=float(max(0.0, -float(np.min(z)))),
        complementarity=float(np.max(np.abs(x * z))),
        split_product=float(np.max(s * t)),
        iterations=iterations,
        objective=objective,
        gain=float(np.sum(np.abs(x)) ** 2 / objective),
        sign_search=mode,
    )


def _polish(x: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Re-solve the equality-constrained problem on the support of x."""
    support = x > 1e-7 * float(np.max(x))
    polished = np.zeros_like(x)
    polished[support] = np.linalg.lstsq(A[:, support], b, rcond=None)[0]
    if np.min(polished) < 0:
        logger.warning("Active-set polish left the nonnegative orthant; keeping IPM iterate")
        return x
    return polished


def max_snr_design(N: int, M: int,
                   options: Optional[SolverOptions] = None) -> Tuple[Design, DesignVector, KktReport]:
    """
    Maximize ||r||_1^2 / ||r||_2^2 subject to an M-th order spectral null.

    The best sign pattern sigma maximizes sigma^T Pi sigma, with Pi the
    projector onto null(V_M). It fixes the split r = s - t (s carries the
    positive entries, t the negative ones), and the remaining convex program

        minimize ||s - t||^2  s.t.  1^T (s + t) = 1,  V_M (s - t) = 0,  s, t >= 0

    is solved by the interior-point method and polished on its support.

    Returns:
        (design, r, kkt_report) with ||r||_1 = 1 and the first nonzero r_n > 0.

    Raises:
        InfeasibleOrderError: If M > N - 2.
        ConvergenceError: If the interior-point method hits its iteration cap
            or the final KKT residuals exceed the tolerance.
    """
    settings = get_settings()
    options = options or SolverOptions()
    kkt_tol = settings.kkt_tol if options.kkt_tol is None else options.kkt_tol
    max_n = settings.sign_search_max_n if options.sign_search_max_n is None else options.sign_search_max_n

    try:
        problem = MaxSnrProblem(N=N, M=M)
    except ValidationError:
        raise InfeasibleOrderError(f"Null order {M} infeasible for length {N} (max {N - 2})")

    C, _ = moment_constraint_basis(problem.N, problem.M)
    if N <= max_n:
        sigma = _exhaustive_sign_search(C)
        mode = 'exhaustive'
    else:
        logger.warning(f"N={N} exceeds exhaustive sign-search limit {max_n}; using local search")
        sigma = _local_sign_search(C)
        mode = 'local'

    A, b = _pattern_constraints(C, sigma)
    qp = QuadraticProgram(H=2.0 * np.eye(N), c=np.zeros(N), A=A, b=b)
    result = MehrotraIPMSolver(max_iter=options.max_iter, tol=options.tol).solve(qp)
    if not result.converged:
        raise ConvergenceError(
            f"Max-SNR QP did not converge in {result.iterations} iterations",
            residuals=result.residuals,
        )

    x = _polish(result.x, A, b)
    report = _kkt_report(x, sigma, A, b, result.iterations, mode)
    if not report.passes(kkt_tol):
        raise ConvergenceError(
            f"Max-SNR KKT residuals above {kkt_tol}: {report.max_residual:.3e}",
            residuals=report.model_dump(include={'stationarity', 'primal', 'dual', 'complementarity'}),
        )

    r = sigma * x
    nonzero = np.flatnonzero(r)
    if nonzero.size and r[nonzero[0]] < 0:
        r = -r
    vector = DesignVector(r=tuple(float(v) for v in r))
    P, Q = pq_from_r(vector)
    design = Design(name=f"maxsnr{N}:{M}", P=P, Q=Q, D=2, declared_null_order=M)
    logger.info(f"Max-SNR design N={N} M={M}: gain={report.gain:.4f} ({mode} sign search)")
    return design, vector, report


def kkt_check(r: DesignVector, M: int) -> KktReport:
    """Re-derive the max-SNR KKT residuals of a given r under its own sign pattern."""
    N = r.N
    C, _ = moment_constraint_basis(N, M)
    values = r.to_array()
    l1 = float(np.sum(np.abs(values)))
    if l1 == 0:
        raise InvalidArgumentError("KKT check needs a nonzero design vector")
    sigma = np.where(values < 0, -1.0, 1.0)
    x = np.abs(values) / l1
    A, b = _pattern_constraints(C, sigma)
    return _kkt_report(x, sigma, A, b, 0, 'given')


# D-ary products

def binomial_lift_factor(n: int, D: int) -> Design:
    """
    Factor (1 + zeta e^{j theta})^n as a D-ary design: p_i = i mod D, q_i = binom(n, i).

    Its binary view (-1)^i binom(n, i) has null order n - 1.
    """
    if n < 2:
        raise InvalidArgumentError(f"Lifted binomial factor needs n >= 2, got {n}")
    if not is_power_of_two(D) or D < 2:
        raise InvalidArgumentError(f"Alphabet size D must be a power of two >= 2, got {D}")
    return Design(name=f"lift{n}", P=tuple(i % D for i in range(n + 1)),
                  Q=tuple(math.comb(n, i) for i in range(n + 1)), D=D)


def _factor_binary_order(factor: Design, index: int) -> int:
    r = DesignVector(r=tuple(-q if p % 2 else q for p, q in zip(factor.P, factor.Q)))
    order = null_order(r)
    if order is None:
        raise InvalidArgumentError(f"Factor {index} ({factor.name}) has no spectral null at theta=0")
    if factor.declared_null_order is not None and order < factor.declared_null_order:
        raise InvalidArgumentError(
            f"Factor {index} ({factor.name}) declares null order "
            f"{factor.declared_null_order} but achieves {order}"
        )
    return order


def compose_dary(factors: Sequence[Design]) -> Design:
    """
    Product design over the alphabet D = 2^m from m factors.

    With mixed-radix index n = n_1 + N_1 n_2 + N_1 N_2 n_3 + ... (factor 1
    fastest), P[n] = sum_k 2^{k-1} P_k[n_k] mod D and Q[n] = prod_k Q_k[n_k].
    Every channel r = 1..D-1 inherits the smallest factor null order.

    Raises:
        InvalidArgumentError: On an empty list, a factor without a null, or a
            factor alphabet that is neither binary nor D.
    """
    if not factors:
        raise InvalidArgumentError("compose_dary needs at least one factor")
    m = len(factors)
    if m == 1:
        return factors[0]

    D = 2 ** m
    orders = []
    for k, factor in enumerate(factors, start=1):
        if factor.D not in (2, D):
            raise InvalidArgumentError(
                f"Factor {k} has alphabet {factor.D}; expected 2 or {D}"
            )
        orders.append(_factor_binary_order(factor, k))

    P: List[int] = list(factors[0].P)
    Q: List[Number] = list(factors[0].Q)
    for k, factor in enumerate(factors[1:], start=2):
        weight = 2 ** (k - 1)
        P = [(p + weight * pk) % D for pk in factor.P for p in P]
        Q = [q * qk for qk in factor.Q for q in Q]

    name = "x".join(f.name for f in factors)
    logger.info(f"Composed D={D} design of length {len(P)} from {m} factors (null order {min(orders)})")
    return Design(name=f"compose[{name}]", P=tuple(P), Q=tuple(Q), D=D,
                  declared_null_order=min(orders))
