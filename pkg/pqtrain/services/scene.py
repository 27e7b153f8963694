"""
Scene service - superpose shifted ambiguity responses of point targets.

Each target contributes a_i * chi(k - k_i, theta - theta_i). Targets snap to
grid bins; delay shifts truncate at the map edges and Doppler shifts wrap
modulo 2*pi. On periodic grids the Doppler shift is an exact column roll of
one precomputed map; other grids evaluate chi directly at the offsets.
"""

from __future__ import annotations
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from ..errors import InvalidArgumentError
from ..models.ambiguity import GRID_ATOL, AmbiguityMap, DopplerGrid
from ..models.scene import PointTarget, Scene, TargetVisibility
from ..models.waveforms import ComplementarySet, GolayPair
from .ambiguity import binary_values, dary_values
from .waveforms import check_complementary

logger = logging.getLogger(__name__)


def _chi(scene: Scene, thetas: np.ndarray, threads: Optional[int]) -> np.ndarray:
    """Ambiguity values of the scene's design/waveform at arbitrary Doppler phases."""
    design, waveform = scene.design, scene.waveform
    if isinstance(waveform, GolayPair):
        if not design.is_binary:
            raise InvalidArgumentError(f"A Golay pair needs a binary design (D={design.D})")
        return binary_values(design, waveform, thetas, threads)
    if design.D != waveform.D:
        raise InvalidArgumentError(f"Design alphabet {design.D} != set size {waveform.D}")
    return dary_values(design, waveform, thetas, threads)


def _wrap(theta: np.ndarray) -> np.ndarray:
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def snap_target(grid: DopplerGrid, target: PointTarget, L: int) -> int:
    """
    Grid column of a target's Doppler phase.

    Raises:
        InvalidArgumentError: If the delay lies outside the map or theta
            outside the span of a non-periodic grid.
    """
    if abs(target.delay_bin) > L - 1:
        raise InvalidArgumentError(f"Target delay {target.delay_bin} outside map extent +-{L - 1}")
    if not grid.is_periodic:
        lo, hi = grid.thetas[0], grid.thetas[-1]
        if not lo - GRID_ATOL <= target.doppler_theta <= hi + GRID_ATOL:
            raise InvalidArgumentError(
                f"Target Doppler {target.doppler_theta} outside grid span [{lo}, {hi}]"
            )
    return grid.nearest_index(target.doppler_theta)


def _shift_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Row k' of the result holds row k' - k of values; vacated rows are zero."""
    out = np.zeros_like(values)
    if k >= 0:
        out[k:] = values[:values.shape[0] - k]
    else:
        out[:k] = values[-k:]
    return out


def target_response(scene: Scene, column: int, threads: Optional[int] = None,
                    base: Optional[np.ndarray] = None) -> np.ndarray:
    """chi(k, theta - theta_c) over the grid for a unit target at (0, theta_c)."""
    grid = scene.grid
    if grid.is_periodic:
        if base is None:
            base = _chi(scene, grid.to_array(), threads)
        return np.roll(base, column - grid.count // 2, axis=1)
    offsets = _wrap(grid.to_array() - grid.thetas[column])
    return _chi(scene, offsets, threads)


def _responses(scene: Scene, threads: Optional[int]) -> List[Tuple[int, np.ndarray]]:
    """Per-target (column, a_i * shifted chi), in target order."""
    residual = check_complementary(scene.waveform)
    if residual != 0:
        raise InvalidArgumentError(f"Scene waveform is not complementary (residual {residual})")
    base = _chi(scene, scene.grid.to_array(), threads) if scene.grid.is_periodic else None
    out = []
    for target in scene.targets:
        col = snap_target(scene.grid, target, scene.L)
        response = target_response(scene, col, threads, base)
        out.append((col, target.amplitude * _shift_rows(response, target.delay_bin)))
    return out


def render_scene(scene: Scene, normalize: bool = True, threads: Optional[int] = None) -> AmbiguityMap:
    """
    Sum of the shifted target responses.

    With ``normalize`` the map's reference is its peak magnitude (0 dB at the
    peak); otherwise the reference is 1 and the map is linear in the target
    amplitudes.
    """
    total = np.zeros((2 * scene.L - 1, scene.grid.count), dtype=np.complex128)
    for _, response in _responses(scene, threads):
        total += response
    peak = float(np.max(np.abs(total)))
    reference = peak if normalize and peak > 0 else 1.0
    logger.info(f"Rendered scene with {len(scene.targets)} targets, peak {peak:.6g}")
    waveform_id = f"golay{scene.L}" if isinstance(scene.waveform, GolayPair) else f"set{scene.waveform.D}x{scene.L}"
    return AmbiguityMap(values=total, grid=scene.grid, L=scene.L, reference=reference,
                        design_id=scene.design.name, waveform_id=waveform_id)


def visibility_report(scene: Scene, band: Tuple[float, float],
                      threads: Optional[int] = None) -> List[TargetVisibility]:
    """
    Margin of each in-band target over the other targets' range sidelobes.

    The target level is a_i * |chi(0, 0)|. The interference is the largest
    magnitude of the summed other-target responses in the target's column,
    skipping the other targets' own delay rows, which hold their Doppler
    mainlobes rather than range sidelobes. The target's own delay row is never
    skipped: a target sharing it contributes its Doppler response there.

    Raises:
        InvalidArgumentError: If no grid point lies in the band.
    """
    lo, hi = band
    grid_arr = scene.grid.to_array()
    in_band = (grid_arr >= lo - GRID_ATOL) & (grid_arr <= hi + GRID_ATOL)
    if not np.any(in_band):
        raise InvalidArgumentError(f"No grid points in band [{lo}, {hi}]")

    responses = _responses(scene, threads)
    L = scene.L
    reference = L * math.fsum(float(q) for q in scene.design.Q)

    report = []
    for i, (target, (col, _)) in enumerate(zip(scene.targets, responses)):
        if not in_band[col]:
            continue
        column = np.zeros(2 * L - 1, dtype=np.complex128)
        excluded = []
        for j, (other, (_, response)) in enumerate(zip(scene.targets, responses)):
            if j == i:
                continue
            column += response[:, col]
            if other.delay_bin != target.delay_bin:
                excluded.append(other.delay_bin + L - 1)
        mags = np.abs(column)
        if excluded:
            mags[excluded] = 0.0
        worst = float(np.max(mags))
        peak_db = 20.0 * math.log10(target.amplitude * reference)
        if worst == 0.0:
            interference_db, margin = -math.inf, math.inf
        else:
            interference_db = 20.0 * math.log10(worst)
            margin = peak_db - interference_db
        report.append(TargetVisibility(index=i, delay_bin=target.delay_bin,
                                       doppler_theta=float(grid_arr[col]), peak_db=peak_db,
                                       interference_db=interference_db, margin_db=margin))
        logger.debug(f"Target {i}: margin {margin:.2f} dB")
    return report


def build_scene(targets: List[PointTarget], design, waveform, grid: DopplerGrid,
                title: Optional[str] = None) -> Scene:
    """Assemble a Scene, rejecting a waveform that does not fit the design."""
    if isinstance(waveform, ComplementarySet) and waveform.D != design.D:
        raise InvalidArgumentError(f"Design alphabet {design.D} != set size {waveform.D}")
    if isinstance(waveform, GolayPair) and not design.is_binary:
        raise InvalidArgumentError(f"A Golay pair needs a binary design (D={design.D})")
    return Scene(targets=targets, design=design, waveform=waveform, grid=grid, title=title)
