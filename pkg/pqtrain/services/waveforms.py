"""
Waveform service - Golay pairs, complementary sets and paraunitary matrices.

All correlations are computed on the integer real/imaginary parts of the
chips, so complementarity checks are exact identities with no tolerance.
"""

from __future__ import annotations
import logging
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from ..config import get_settings
from ..errors import CapacityError, InvalidArgumentError
from ..models.waveforms import (
    ComplementarySet,
    GolayPair,
    ParaunitaryMatrix,
    UnimodularSeq,
    is_power_of_two,
)

logger = logging.getLogger(__name__)

MAX_GOLAY_ORDER = 20


# Above this length correlations go through the FFT and are rounded back to
# integers; the float error stays far below 0.5 for every permitted length.
FFT_MIN_LENGTH = 512


def _correlate_real(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integer sum_l a[l] b[l-k] for lags -(L_b-1)..(L_a-1)."""
    if max(len(a), len(b)) < FFT_MIN_LENGTH:
        return np.correlate(a, b, mode='full')
    size = 1 << (len(a) + len(b) - 2).bit_length()
    circ = np.fft.irfft(np.fft.rfft(a, size) * np.conj(np.fft.rfft(b, size)), size)
    full = np.concatenate([circ[size - (len(b) - 1):], circ[:len(a)]])
    return np.rint(full).astype(np.int64)


def _correlate_parts(a: UnimodularSeq, b: UnimodularSeq) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integer real and imaginary parts of C_ab[k] = sum_l a[l] conj(b[l-k]).

    Index i of the returned arrays holds lag k = i - (L_b - 1).
    """
    ar, br = a.real, b.real
    re = _correlate_real(ar, br)
    if a.is_binary and b.is_binary:
        return re, np.zeros_like(re)
    ai, bi = a.imag, b.imag
    re = re + _correlate_real(ai, bi)
    im = _correlate_real(ai, br) - _correlate_real(ar, bi)
    return re, im


def cross_correlation(a: UnimodularSeq, b: UnimodularSeq) -> np.ndarray:
    """
    Full cross-correlation over lags -(L-1)..(L-1).

    Values are Gaussian integers held in complex128, which represents them
    exactly for every permitted sequence length.
    """
    if a.L != b.L:
        raise InvalidArgumentError(f"Sequence lengths differ: {a.L} != {b.L}")
    re, im = _correlate_parts(a, b)
    return re.astype(np.float64) + 1j * im.astype(np.float64)


def autocorrelation(s: UnimodularSeq, k: int) -> complex:
    """
    C_s[k] = sum_l s[l] conj(s[l-k]); zero outside |k| <= L-1.

    Example:
        >>> autocorrelation(UnimodularSeq.from_elements([1, -1]), 1)
        (-1+0j)
    """
    if abs(k) > s.L - 1:
        return 0j
    lo, hi = (k, 0) if k >= 0 else (0, -k)
    n = s.L - abs(k)
    ar, ai = s.real[lo:lo + n], s.imag[lo:lo + n]
    br, bi = s.real[hi:hi + n], s.imag[hi:hi + n]
    re = int(np.dot(ar, br) + np.dot(ai, bi))
    im = int(np.dot(ai, br) - np.dot(ar, bi))
    return complex(re, im)


def reverse_conjugate(s: UnimodularSeq) -> UnimodularSeq:
    """output[l] = conj(input[L-1-l])."""
    return UnimodularSeq(phases=tuple((-p) % 4 for p in reversed(s.phases)))


def _check_matrix_capacity(m: int) -> None:
    settings = get_settings()
    if m < 0:
        raise InvalidArgumentError(f"Golay order must be nonnegative, got {m}")
    if m > MAX_GOLAY_ORDER:
        raise CapacityError(f"Golay order {m} exceeds the supported maximum {MAX_GOLAY_ORDER}")
    if 4 ** m > settings.max_matrix_entries:
        raise CapacityError(
            f"Golay matrix of order {m} has {4 ** m} entries "
            f"(limit {settings.max_matrix_entries})"
        )


def _partition_mask(n: int) -> np.ndarray:
    """Rows of an n-row Golay matrix that form F1: quarter blocks 0 and 2."""
    quarter = max(n // 4, 1)
    return (np.arange(n) // quarter) % 2 == 0


def golay_matrix(m: int) -> np.ndarray:
    """
    Build the 2^m x 2^m Golay matrix.

    Starting from [[1, 1], [1, -1]], each step splits the rows into F1 and F2
    and stacks [F1 F2; F1 -F2; F2 F1; F2 -F1]. F1 takes quarter blocks 0 and
    2 and F2 blocks 1 and 3, so that F1[i] and F2[i] are complementary at
    every order. Rows 2j and 2j+1 are then a Golay pair, as are rows i and
    i + 2^(m-2) within each half.

    Args:
        m: Order of the matrix (0 gives [[1]]).

    Returns:
        int64 array of +/-1 with shape (2^m, 2^m).

    Raises:
        CapacityError: If the matrix would exceed the configured entry cap.
    """
    _check_matrix_capacity(m)
    if m == 0:
        return np.ones((1, 1), dtype=np.int64)

    G = np.array([[1, 1], [1, -1]], dtype=np.int64)
    for _ in range(1, m):
        mask = _partition_mask(G.shape[0])
        F1, F2 = G[mask], G[~mask]
        G = np.block([[F1, F2], [F1, -F2], [F2, F1], [F2, -F1]])
    return G


@lru_cache(maxsize=1024)
def _golay_row_cached(m: int, index: int) -> np.ndarray:
    if m == 0:
        row = np.ones(1, dtype=np.int64)
    elif m == 1:
        row = np.array([1, 1] if index == 0 else [1, -1], dtype=np.int64)
    else:
        block, i = divmod(index, 2 ** (m - 2))
        # i-th F1 and F2 rows of the order m-1 matrix
        quarter = max(2 ** (m - 1) // 4, 1)
        a = (i // quarter) * 2 * quarter + i % quarter
        f1 = _golay_row_cached(m - 1, a)
        f2 = _golay_row_cached(m - 1, a + quarter)
        row = np.concatenate({
            0: (f1, f2),
            1: (f1, -f2),
            2: (f2, f1),
            3: (f2, -f1),
        }[block])
    row.setflags(write=False)
    return row


def golay_row(m: int, index: int) -> np.ndarray:
    """Row ``index`` of golay_matrix(m) without building the whole matrix."""
    if not 0 <= m <= MAX_GOLAY_ORDER:
        raise CapacityError(f"Golay order {m} outside 0..{MAX_GOLAY_ORDER}")
    if not 0 <= index < 2 ** m:
        raise InvalidArgumentError(f"Row index {index} outside 0..{2 ** m - 1}")
    return _golay_row_cached(m, index).copy()


def _seq_from_signs(signs: Iterable[int]) -> UnimodularSeq:
    return UnimodularSeq(phases=tuple(0 if v > 0 else 2 for v in signs))


def golay_pair(L: int) -> GolayPair:
    """
    Canonical Golay pair of length L: rows 0 and 1 of golay_matrix(log2 L).

    Raises:
        InvalidArgumentError: If L is not a power of two >= 2.
        CapacityError: If L exceeds the configured sequence cap.
    """
    if not is_power_of_two(L) or L < 2:
        raise InvalidArgumentError(f"Golay pair length must be a power of two >= 2, got {L}")
    if L > get_settings().max_sequence_length:
        raise CapacityError(
            f"Sequence length {L} exceeds limit {get_settings().max_sequence_length}"
        )
    m = L.bit_length() - 1
    pair = GolayPair(x=_seq_from_signs(golay_row(m, 0)), y=_seq_from_signs(golay_row(m, 1)))
    logger.debug(f"Built Golay pair of length {L}")
    return pair


def paraunitary(K: int, base: GolayPair) -> ParaunitaryMatrix:
    """
    Build the 2^K x 2^K paraunitary matrix seeded by a Golay pair.

    S_2 = [[x, -y~], [y, x~]] and S_{2D} = [[S, S], [S~, -S~]], where ~
    reverse-conjugates every entry in place.
    """
    if K < 1:
        raise InvalidArgumentError(f"Paraunitary order K must be >= 1, got {K}")
    D = 2 ** K
    if D * D * base.L > get_settings().max_matrix_entries:
        raise CapacityError(f"Paraunitary matrix {D}x{D} of length {base.L} is too large")

    x, y = base.x, base.y
    S: List[List[UnimodularSeq]] = [
        [x, reverse_conjugate(y).negated()],
        [y, reverse_conjugate(x)],
    ]
    for _ in range(1, K):
        tilde = [[reverse_conjugate(s) for s in row] for row in S]
        top = [row + row for row in S]
        bottom = [row + [s.negated() for s in row] for row in tilde]
        S = top + bottom
    return ParaunitaryMatrix(entries=tuple(tuple(row) for row in S))


def paraunitary_gram(S: ParaunitaryMatrix, k: int) -> np.ndarray:
    """Lagged Gram sum_l S[l] S[l-k]^H as a D x D complex array."""
    D, L = S.D, S.L
    gram = np.zeros((D, D), dtype=np.complex128)
    if abs(k) > L - 1:
        return gram
    idx = k + L - 1
    for i in range(D):
        for j in range(D):
            total = 0j
            for d in range(D):
                re, im = _correlate_parts(S.entries[i][d], S.entries[j][d])
                total += complex(int(re[idx]), int(im[idx]))
            gram[i, j] = total
    return gram


SequenceSet = Union[
    GolayPair,
    ComplementarySet,
    ParaunitaryMatrix,
    Sequence[UnimodularSeq],
    Sequence[Sequence[UnimodularSeq]],
]


def _scalar_residual(seqs: Sequence[UnimodularSeq]) -> float:
    L = seqs[0].L
    re = np.zeros(2 * L - 1, dtype=np.int64)
    im = np.zeros(2 * L - 1, dtype=np.int64)
    for s in seqs:
        cr, ci = _correlate_parts(s, s)
        re += cr
        im += ci
    re[L - 1] -= len(seqs) * L
    return float(np.max(np.hypot(re, im)))


def _vector_residual(vectors: Sequence[Sequence[UnimodularSeq]]) -> float:
    rows = len(vectors[0])
    if any(len(v) != rows for v in vectors):
        raise InvalidArgumentError("Complementary vectors have unequal dimensions")
    L = vectors[0][0].L
    worst = 0.0
    for i in range(rows):
        for j in range(rows):
            re = np.zeros(2 * L - 1, dtype=np.int64)
            im = np.zeros(2 * L - 1, dtype=np.int64)
            for v in vectors:
                cr, ci = _correlate_parts(v[i], v[j])
                re += cr
                im += ci
            if i == j:
                re[L - 1] -= len(vectors) * L
            worst = max(worst, float(np.max(np.hypot(re, im))))
    return worst


def check_complementary(items: SequenceSet) -> float:
    """
    Max absolute residual of sum_d C_{x_d}[k] - D*L*delta[k] over all lags.

    Accepts scalar sequences (pairs and sets) or sequence-valued column
    vectors (a paraunitary matrix's columns); for vectors the residual is
    taken entrywise against D*L*I*delta[k].

    Raises:
        InvalidArgumentError: If the sequences have unequal lengths.
    """
    if isinstance(items, GolayPair):
        items = [items.x, items.y]
    elif isinstance(items, ComplementarySet):
        items = list(items.members)
    elif isinstance(items, ParaunitaryMatrix):
        items = items.columns()
    items = list(items)
    if not items:
        raise InvalidArgumentError("Cannot check an empty set")

    if isinstance(items[0], UnimodularSeq):
        lengths = {s.L for s in items}
        if len(lengths) != 1:
            raise InvalidArgumentError(f"Sequence lengths differ: {sorted(lengths)}")
        return _scalar_residual(items)

    lengths = {s.L for v in items for s in v}
    if len(lengths) != 1:
        raise InvalidArgumentError(f"Sequence lengths differ: {sorted(lengths)}")
    return _vector_residual(items)


def complementary_set(D: int, L: int) -> ComplementarySet:
    """Row 0 of paraunitary(log2 D, golay_pair(L)): a D-member scalar set."""
    if not is_power_of_two(D) or D < 2:
        raise InvalidArgumentError(f"Set size must be a power of two >= 2, got {D}")
    K = D.bit_length() - 1
    return paraunitary(K, golay_pair(L)).row_set(0)
