"""
Spectra service - moments, null orders and null-subspace bases of (P,Q) designs.

The binary spectrum S(theta) = sum_n r_n e^{jn theta} has an M-th order null
at theta = 0 exactly when the moments sum_n n^m r_n vanish for m = 0..M.
Integer-valued vectors are tested in exact Python-int arithmetic; real-valued
ones with a relative tolerance that scales like N^m.
"""

from __future__ import annotations
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_settings
from ..errors import InfeasibleOrderError, InvalidArgumentError
from ..models.designs import DArySpectrumInput, Design, DesignVector, NullSubspaceBasis, Number
from ..models.waveforms import is_power_of_two

logger = logging.getLogger(__name__)

# exp(j*2*pi*e/4) for e = 0..3
_QUARTER_TURNS = ((1, 0), (0, 1), (-1, 0), (0, -1))


# Conversions between (P, Q) and r

def r_from_pq(P: Sequence[int], Q: Sequence[Number]) -> DesignVector:
    """
    r_n = (-1)^{p_n} q_n.

    Raises:
        InvalidArgumentError: On length mismatch, non-binary P or negative Q.
    """
    if len(P) != len(Q):
        raise InvalidArgumentError(f"P and Q lengths differ: {len(P)} != {len(Q)}")
    if any(p not in (0, 1) for p in P):
        raise InvalidArgumentError("P must be binary (symbols 0 and 1)")
    if any(q < 0 for q in Q):
        raise InvalidArgumentError("Q must be nonnegative")
    return DesignVector(r=tuple(-q if p else q for p, q in zip(P, Q)))


def pq_from_r(r: DesignVector) -> Tuple[Tuple[int, ...], Tuple[Number, ...]]:
    """p_n = (1 - sgn r_n)/2 with sgn(0) = 1, q_n = |r_n|."""
    P = tuple(1 if v < 0 else 0 for v in r.r)
    Q = tuple(abs(v) for v in r.r)
    return P, Q


# Moments and null orders

def moment(r: DesignVector, m: int) -> Number:
    """sum_n n^m r_n with 0^0 = 1; exact for integer-valued r."""
    if m < 0:
        raise InvalidArgumentError(f"Moment order must be nonnegative, got {m}")
    if r.is_integer:
        return sum(n ** m * v for n, v in zip(range(r.N), r.as_ints()))
    return math.fsum(float(n) ** m * float(v) for n, v in enumerate(r.r))


def null_order(r: DesignVector, tol: Optional[float] = None) -> Optional[int]:
    """
    Largest M with every moment m <= M vanishing; None if the zeroth fails.

    A moment vanishes when it is exactly zero (integer r) or when
    |mu_m| <= tol * ||r||_1 * N^m (real r).
    """
    if r.is_zero:
        raise InvalidArgumentError("Null order is undefined for the zero vector")
    tol = get_settings().null_order_tol if tol is None else tol
    exact = r.is_integer
    scale = r.l1
    M: Optional[int] = None
    for m in range(r.N):
        mu = moment(r, m)
        vanishes = (mu == 0) if exact else abs(mu) <= tol * scale * float(r.N) ** m
        if not vanishes:
            break
        M = m
    return M


def sidelobe_bound(r: DesignVector, M: int, theta: float) -> float:
    """
    Upper bound on |S(theta)| for a vector whose moments 0..M vanish.

    Taylor remainder: |S(theta)| <= sum_n n^{M+1} |r_n| * |theta|^{M+1} / (M+1)!.
    """
    order = M + 1
    weight = math.fsum(float(n) ** order * abs(float(v)) for n, v in enumerate(r.r))
    return weight * abs(theta) ** order / math.factorial(order)


# Spectrum evaluation

def _evaluate_chunked(fn: Callable[[np.ndarray], np.ndarray], thetas: np.ndarray,
                      threads: Optional[int]) -> np.ndarray:
    threads = get_settings().threads if threads is None else threads
    if threads <= 1 or len(thetas) < 2 * threads:
        return fn(thetas)
    chunks = np.array_split(thetas, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)


def exponential_sum(weights: np.ndarray, thetas: Sequence[float],
                    threads: Optional[int] = None) -> np.ndarray:
    """
    sum_n w_n e^{jn theta} at each theta.

    The sum runs n = 0..N-1 independently per theta, so results do not depend
    on how the grid is split across threads.
    """
    w = np.asarray(weights)
    thetas = np.asarray(thetas, dtype=np.float64)

    def evaluate(chunk: np.ndarray) -> np.ndarray:
        acc = np.zeros(chunk.shape, dtype=np.complex128)
        for n, wn in enumerate(w):
            if wn != 0:
                acc += wn * np.exp(1j * n * chunk)
        return acc

    return _evaluate_chunked(evaluate, thetas, threads)


def spectrum_eval(r: DesignVector, thetas: Sequence[float],
                  threads: Optional[int] = None) -> np.ndarray:
    """S(theta) = sum_n r_n e^{jn theta}."""
    return exponential_sum(r.to_array(), thetas, threads)


# Null-subspace bases

def vandermonde(N: int, M: int) -> np.ndarray:
    """(M+1) x N integer Vandermonde with entry (m, n) = n^m, 0^0 = 1."""
    V = np.empty((M + 1, N), dtype=object)
    for m in range(M + 1):
        for n in range(N):
            V[m, n] = n ** m
    return V


def basis_matrix(N: int, M: int) -> NullSubspaceBasis:
    """
    Integer basis B of the designs with an M-th order null.

    Entry (n, m) is (-1)^n binom(m+M+1, n): column m expands (1-z)^(m+M+1).
    V * B = 0 is checked exactly before returning.

    Raises:
        InfeasibleOrderError: If M > N - 2.
    """
    if M < 0:
        raise InvalidArgumentError(f"Null order must be nonnegative, got {M}")
    if M > N - 2:
        raise InfeasibleOrderError(f"Null order {M} infeasible for length {N} (max {N - 2})")

    cols = N - M - 1
    B = np.empty((N, cols), dtype=object)
    for n in range(N):
        for m in range(cols):
            B[n, m] = (-1) ** n * math.comb(m + M + 1, n)
    V = vandermonde(N, M)
    if np.any(V.dot(B) != 0):
        raise ArithmeticError(f"Vandermonde product nonzero for N={N}, M={M}")
    return NullSubspaceBasis(N=N, M=M, B=B, V=V)


def r_from_coeffs(a: Sequence[Number], N: int, M: int) -> DesignVector:
    """
    r = B_M a: a combination of the (1-z)^(m+M+1) basis vectors.

    Raises:
        InvalidArgumentError: If a is all zero or has the wrong length.
    """
    basis = basis_matrix(N, M)
    if len(a) != basis.dimension:
        raise InvalidArgumentError(
            f"Coefficient vector must have length {basis.dimension}, got {len(a)}"
        )
    if all(v == 0 for v in a):
        raise InvalidArgumentError("Coefficient vector must not be all zero")

    if _all_integral(a):
        coeffs = np.array([int(v) for v in a], dtype=object)
        r = tuple(int(v) for v in basis.B.dot(coeffs))
    else:
        r = tuple(float(v) for v in basis.B_float() @ np.asarray(a, dtype=np.float64))
    return DesignVector(r=r)


def _all_integral(values: Sequence[Number]) -> bool:
    return all(isinstance(v, int) or float(v).is_integer() for v in values)


# D-ary channels

def unit_root_powers(D: int) -> np.ndarray:
    """omega^e for e = 0..D-1, omega = exp(j 2 pi / D); exact at quarter turns."""
    powers = np.exp(2j * np.pi * np.arange(D) / D)
    for e in range(D):
        if (4 * e) % D == 0:
            powers[e] = complex(*_QUARTER_TURNS[4 * e // D])
    return powers


def _exact_channel(D: int) -> bool:
    return D in (2, 4)


def _quarter_turn(D: int, e: int) -> Tuple[int, int]:
    return _QUARTER_TURNS[(e % D) * 4 // D]


def dary_moment(spec: DArySpectrumInput, m: int) -> complex:
    """sum_n omega^{r p_n} q_n n^m."""
    if _exact_channel(spec.D) and _all_integral(spec.Q):
        re, im = _exact_dary_moment(spec.P, spec.Q, spec.D, spec.r, m)
        return complex(re, im)
    roots = unit_root_powers(spec.D)
    terms = [roots[(spec.r * p) % spec.D] * float(q) * float(n) ** m
             for n, (p, q) in enumerate(zip(spec.P, spec.Q))]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _exact_dary_moment(P, Q, D, r, m) -> Tuple[int, int]:
    re = im = 0
    for n, (p, q) in enumerate(zip(P, Q)):
        c, s = _quarter_turn(D, r * p)
        w = int(q) * n ** m
        re += c * w
        im += s * w
    return re, im


def _channel_null_order(P, Q, D, r, tol) -> Optional[int]:
    spec = DArySpectrumInput(P=tuple(P), Q=tuple(Q), D=D, r=r)
    N = len(P)
    exact = _exact_channel(D) and _all_integral(Q)
    scale = float(sum(abs(q) for q in Q))
    M: Optional[int] = None
    for m in range(N):
        if exact:
            vanishes = _exact_dary_moment(spec.P, spec.Q, D, r, m) == (0, 0)
        else:
            vanishes = abs(dary_moment(spec, m)) <= tol * scale * float(N) ** m
        if not vanishes:
            break
        M = m
    return M


def dary_null_orders(P: Sequence[int], Q: Sequence[Number], D: int,
                     tol: Optional[float] = None) -> List[Optional[int]]:
    """Null order of each channel r = 1..D-1 (None where m = 0 already fails)."""
    if not is_power_of_two(D) or D < 2:
        raise InvalidArgumentError(f"Alphabet size D must be a power of two >= 2, got {D}")
    tol = get_settings().null_order_tol if tol is None else tol
    return [_channel_null_order(P, Q, D, r, tol) for r in range(1, D)]


def dary_null_order(P: Sequence[int], Q: Sequence[Number], D: int,
                    tol: Optional[float] = None) -> Optional[int]:
    """Minimum null order over the D-1 channels."""
    orders = dary_null_orders(P, Q, D, tol)
    if any(o is None for o in orders):
        return None
    return min(orders)


def dary_spectrum_eval(P: Sequence[int], Q: Sequence[Number], D: int, r: int,
                       thetas: Sequence[float], threads: Optional[int] = None) -> np.ndarray:
    """S_{P,Q,r}(theta) = sum_n omega^{r p_n} q_n e^{jn theta}; r = 0 gives sum_n q_n e^{jn theta}."""
    if not 0 <= r < D:
        raise InvalidArgumentError(f"Channel index must lie in 0..{D - 1}, got {r}")
    roots = unit_root_powers(D)
    weights = np.array([roots[(r * p) % D] * float(q) for p, q in zip(P, Q)])
    return exponential_sum(weights, thetas, threads)


def channel_null_factor(r: int, D: int) -> int:
    """
    Index k' with omega^{2^{k'-1} r} = -1 for channel r of alphabet D = 2^m.

    Writing r = 2^{m-k'} l with l odd, factor k' of a product design is the
    one whose binary null silences channel r.
    """
    if not is_power_of_two(D) or D < 2:
        raise InvalidArgumentError(f"Alphabet size D must be a power of two >= 2, got {D}")
    if not 1 <= r <= D - 1:
        raise InvalidArgumentError(f"Channel index must lie in 1..{D - 1}, got {r}")
    m = D.bit_length() - 1
    twos = (r & -r).bit_length() - 1
    return m - twos


def design_null_order(design: Design, tol: Optional[float] = None) -> Optional[int]:
    """Verified null order: binary moments for D = 2, channel minimum otherwise."""
    if design.is_binary:
        return null_order(design.r, tol)
    return dary_null_order(design.P, design.Q, design.D, tol)
