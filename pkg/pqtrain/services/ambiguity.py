"""
Ambiguity service - discretized cross-ambiguity of (P,Q) designs and SNR metrics.

For binary designs the map factors into two delay profiles weighted by two
Doppler spectra:

    chi(k, theta) = 1/2 (C_x + C_y)[k] S_Q(theta) - 1/2 (C_x - C_y)[k] S_r(theta)

Complementarity kills the first term off k = 0, so range sidelobes are
governed entirely by S_r. The D-ary and MIMO maps generalize this with one
spectrum per channel r = 0..D-1.
"""

from __future__ import annotations
import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from ..errors import InvalidArgumentError
from ..models.ambiguity import AmbiguityMap, DopplerGrid, MimoAmbiguity
from ..models.designs import Design, Number
from ..models.waveforms import ComplementarySet, GolayPair, ParaunitaryMatrix
from .spectra import dary_spectrum_eval, exponential_sum, spectrum_eval, unit_root_powers
from .waveforms import check_complementary, cross_correlation

logger = logging.getLogger(__name__)

Waveform = Union[GolayPair, ComplementarySet]


def _require_complementary(waveform, label: str) -> None:
    residual = check_complementary(waveform)
    if residual != 0:
        raise InvalidArgumentError(f"{label} is not complementary (residual {residual})")


def _waveform_id(waveform) -> str:
    if isinstance(waveform, GolayPair):
        return f"golay{waveform.L}"
    if isinstance(waveform, ComplementarySet):
        return f"set{waveform.D}x{waveform.L}"
    return f"paraunitary{waveform.D}x{waveform.L}"


# Binary maps

def binary_values(design: Design, pair: GolayPair, thetas: np.ndarray,
                  threads: Optional[int] = None) -> np.ndarray:
    """Factored binary map at arbitrary Doppler phases (rows k = -(L-1)..L-1)."""
    cx = cross_correlation(pair.x, pair.x)
    cy = cross_correlation(pair.y, pair.y)
    s_q = exponential_sum(np.asarray(design.Q, dtype=np.float64), thetas, threads)
    s_r = spectrum_eval(design.r, thetas, threads)
    return 0.5 * (cx + cy)[:, None] * s_q[None, :] - 0.5 * (cx - cy)[:, None] * s_r[None, :]


def _reference(design: Design, L: int) -> float:
    """|chi(0, 0)| = L * sum_n q_n for complementary waveforms."""
    return float(L * math.fsum(float(q) for q in design.Q))


def cross_ambiguity(design: Design, pair: GolayPair, grid: DopplerGrid,
                    threads: Optional[int] = None) -> AmbiguityMap:
    """
    Binary cross-ambiguity map of a (P,Q) design over a Golay pair.

    Symbol 1 transmits x and symbol 0 transmits y.

    Raises:
        InvalidArgumentError: If the design is not binary or the pair is not
            complementary.
    """
    if not design.is_binary:
        raise InvalidArgumentError(f"cross_ambiguity needs a binary design (D={design.D})")
    _require_complementary(pair, "Golay pair")
    values = binary_values(design, pair, grid.to_array(), threads)
    return AmbiguityMap(values=values, grid=grid, L=pair.L, reference=_reference(design, pair.L),
                        design_id=design.name, waveform_id=_waveform_id(pair))


def cross_ambiguity_oracle(design: Design, waveform: Waveform, grid: DopplerGrid) -> AmbiguityMap:
    """
    Direct double sum chi(k, theta) = sum_n q_n e^{jn theta} C_{x_{p_n}}[k].

    Used to cross-check the factored formulas; a Golay pair is read as the
    set (y, x) so that symbol 1 transmits x.
    """
    members = waveform.as_set().members if isinstance(waveform, GolayPair) else waveform.members
    if design.D != len(members):
        raise InvalidArgumentError(f"Design alphabet {design.D} != waveform set size {len(members)}")
    autos = [cross_correlation(s, s) for s in members]
    thetas = grid.to_array()
    L = members[0].L
    values = np.zeros((2 * L - 1, len(thetas)), dtype=np.complex128)
    for n, (p, q) in enumerate(zip(design.P, design.Q)):
        values += autos[p][:, None] * (float(q) * np.exp(1j * n * thetas))[None, :]
    return AmbiguityMap(values=values, grid=grid, L=L, reference=_reference(design, L),
                        design_id=design.name, waveform_id=_waveform_id(waveform))


# D-ary and MIMO maps

def _channel_spectra(design: Design, thetas: np.ndarray, threads: Optional[int]) -> List[np.ndarray]:
    return [dary_spectrum_eval(design.P, design.Q, design.D, r, thetas, threads)
            for r in range(design.D)]


def dary_values(design: Design, cset: ComplementarySet, thetas: np.ndarray,
                threads: Optional[int] = None) -> np.ndarray:
    """(1/D) sum_{r=0}^{D-1} S_{P,Q,r}(theta) Delta_r[k], Delta_r = sum_d omega^{-rd} C_{x_d}."""
    D = design.D
    roots = unit_root_powers(D)
    autos = [cross_correlation(s, s) for s in cset.members]
    spectra = _channel_spectra(design, thetas, threads)
    values = np.zeros((2 * cset.L - 1, len(thetas)), dtype=np.complex128)
    for r in range(D):
        delta = sum(roots[(-r * d) % D] * autos[d] for d in range(D))
        values += delta[:, None] * spectra[r][None, :]
    return values / D


def cross_ambiguity_dary(design: Design, cset: ComplementarySet, grid: DopplerGrid,
                         threads: Optional[int] = None) -> AmbiguityMap:
    """
    D-ary cross-ambiguity: symbol d transmits member x_d of a complementary set.

    The r = 0 term reduces to D*L*delta[k]*sum_n q_n e^{jn theta} by
    complementarity; the remaining channels carry all range sidelobes.

    Raises:
        InvalidArgumentError: If design.D differs from the set size or the
            set is not complementary.
    """
    if design.D != cset.D:
        raise InvalidArgumentError(f"Design alphabet {design.D} != set size {cset.D}")
    _require_complementary(cset, "Complementary set")
    values = dary_values(design, cset, grid.to_array(), threads)
    return AmbiguityMap(values=values, grid=grid, L=cset.L, reference=_reference(design, cset.L),
                        design_id=design.name, waveform_id=_waveform_id(cset))


def mimo_cross_ambiguity(design: Design, S: ParaunitaryMatrix, grid: DopplerGrid,
                         threads: Optional[int] = None) -> MimoAmbiguity:
    """
    Matrix-valued map: pulse n transmits column p_n of S across the D channels.

    Entry (i, j) is (1/D) sum_r S_{P,Q,r}(theta) (Delta_r)_{ij}[k] with
    Delta_r = sum_d omega^{-rd} C_{x_d}[k] and C_{x_d} the autocorrelation
    matrix of column d. Every entry is referenced to the diagonal peak.
    """
    if design.D != S.D:
        raise InvalidArgumentError(f"Design alphabet {design.D} != paraunitary order {S.D}")
    D, L = S.D, S.L
    thetas = grid.to_array()
    roots = unit_root_powers(D)
    spectra = _channel_spectra(design, thetas, threads)
    reference = _reference(design, L)

    rows = []
    for i in range(D):
        row = []
        for j in range(D):
            corr = [cross_correlation(S.entries[i][d], S.entries[j][d]) for d in range(D)]
            values = np.zeros((2 * L - 1, len(thetas)), dtype=np.complex128)
            for r in range(D):
                delta = sum(roots[(-r * d) % D] * corr[d] for d in range(D))
                values += delta[:, None] * spectra[r][None, :]
            row.append(AmbiguityMap(values=values / D, grid=grid, L=L, reference=reference,
                                    design_id=design.name, waveform_id=f"{_waveform_id(S)}[{i},{j}]"))
        rows.append(tuple(row))
    logger.debug(f"Computed {D}x{D} MIMO ambiguity over {len(thetas)} Doppler bins")
    return MimoAmbiguity(maps=tuple(rows))


# SNR and separability

def _weights(Q: Sequence[Number]) -> np.ndarray:
    q = np.asarray(Q, dtype=np.float64)
    if q.size == 0 or np.any(q < 0):
        raise InvalidArgumentError("Q must be a nonempty nonnegative sequence")
    if not np.any(q > 0):
        raise InvalidArgumentError("Q must not be all zero")
    return q


def effective_bandwidth(Q: Sequence[Number]) -> float:
    """beta_Q = ||q||_2^2 / ||q||_1^2."""
    q = _weights(Q)
    return float(np.dot(q, q) / q.sum() ** 2)


def snr_gain(Q: Sequence[Number]) -> float:
    """1 / beta_Q: the SNR gain of the multi-pulse receiver."""
    return 1.0 / effective_bandwidth(Q)


def output_snr(Q: Sequence[Number], L: int, sigma_b2: float = 1.0, N0: float = 1.0) -> float:
    """rho = (L sigma_b^2 / N0) / beta_Q."""
    if N0 <= 0:
        raise InvalidArgumentError(f"Noise density N0 must be positive, got {N0}")
    return L * sigma_b2 / N0 * snr_gain(Q)


def peak_sidelobe_ratio(amb: AmbiguityMap, theta: float) -> float:
    """
    gamma(theta) = |chi(0,0)|^2 / max_{k != 0} |chi(k, theta)|^2.

    Returns +inf when every sidelobe in the column is exactly zero.
    """
    col = amb.grid.index_of(theta)
    column = np.abs(amb.values[:, col])
    sidelobes = np.delete(column, amb.row_index(0))
    worst = float(np.max(sidelobes)) if sidelobes.size else 0.0
    if worst == 0.0:
        return math.inf
    return amb.reference ** 2 / worst ** 2


def kappa(amb: AmbiguityMap, theta: float, rho: float) -> float:
    """Separability (1/gamma + 1/rho)^-1 of a strong and a weak target."""
    if rho <= 0:
        raise InvalidArgumentError(f"rho must be positive, got {rho}")
    gamma = peak_sidelobe_ratio(amb, theta)
    if math.isinf(gamma):
        return rho
    return 1.0 / (1.0 / gamma + 1.0 / rho)
