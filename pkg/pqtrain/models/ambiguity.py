"""
Pydantic models for delay-Doppler maps.

Doppler is measured as the phase theta = nu*T accrued over one pulse
repetition interval; delay in chip bins k = -(L-1)..(L-1).
"""

from __future__ import annotations
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional, Tuple
import math
import numpy as np

from ..errors import InvalidArgumentError

GRID_ATOL = 1e-12


class DopplerGrid(BaseModel):
    """Strictly increasing Doppler phases in [-pi, pi)."""
    model_config = ConfigDict(frozen=True)

    thetas: Tuple[float, ...]
    pri: Optional[float] = Field(None, description="Pulse repetition interval T in seconds (labels only)")

    @field_validator('thetas')
    @classmethod
    def validate_thetas(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) < 2:
            raise ValueError(f"Doppler grid needs at least 2 points, got {len(v)}")
        arr = np.asarray(v)
        if np.any(np.diff(arr) <= 0):
            raise ValueError("Doppler grid must be strictly increasing")
        # +pi aliases -pi
        if arr[0] < -math.pi - GRID_ATOL or arr[-1] >= math.pi - GRID_ATOL:
            raise ValueError(f"Doppler grid must lie within [-pi, pi), got [{arr[0]}, {arr[-1]}]")
        return v

    @field_validator('pri')
    @classmethod
    def validate_pri(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v <= 0:
            raise ValueError(f"PRI must be positive, got {v}")
        return v

    @classmethod
    def uniform(cls, lo: float, hi: float, count: int, pri: Optional[float] = None) -> "DopplerGrid":
        """count points from lo to hi inclusive."""
        return cls(thetas=tuple(float(t) for t in np.linspace(lo, hi, count)), pri=pri)

    @classmethod
    def periodic(cls, count: int, pri: Optional[float] = None) -> "DopplerGrid":
        """count points covering [-pi, pi) with theta = 0 on the grid."""
        if count < 2:
            raise ValueError(f"Periodic grid needs at least 2 points, got {count}")
        step = 2.0 * math.pi / count
        return cls(thetas=tuple(float((i - count // 2) * step) for i in range(count)), pri=pri)

    @classmethod
    def parse(cls, spec: str, pri: Optional[float] = None) -> "DopplerGrid":
        """Parse 'lo:hi:count'."""
        parts = spec.split(':')
        if len(parts) != 3:
            raise InvalidArgumentError(f"Grid spec must be lo:hi:count, got '{spec}'")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise InvalidArgumentError(f"Grid spec must be lo:hi:count, got '{spec}'")
        if count < 2:
            raise InvalidArgumentError(f"Grid needs at least 2 points, got {count}")
        return cls.uniform(lo, hi, count, pri=pri)

    @property
    def count(self) -> int:
        return len(self.thetas)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.thetas, dtype=np.float64)

    @property
    def is_periodic(self) -> bool:
        """Uniform spacing whose count * step spans exactly one turn."""
        arr = self.to_array()
        steps = np.diff(arr)
        step = 2.0 * math.pi / self.count
        return bool(np.all(np.abs(steps - step) <= 1e-9) and abs(arr[0] + math.pi) <= 1e-9)

    def index_of(self, theta: float) -> int:
        """Index of the grid point within GRID_ATOL of theta."""
        arr = self.to_array()
        i = int(np.argmin(np.abs(arr - theta)))
        if abs(arr[i] - theta) > GRID_ATOL:
            raise InvalidArgumentError(f"theta={theta} is not on the Doppler grid")
        return i

    def nearest_index(self, theta: float) -> int:
        """Snap theta to the nearest grid point, wrapping modulo 2*pi on periodic grids."""
        arr = self.to_array()
        if self.is_periodic:
            wrapped = (theta + math.pi) % (2.0 * math.pi) - math.pi
            dist = np.abs((arr - wrapped + math.pi) % (2.0 * math.pi) - math.pi)
            return int(np.argmin(dist))
        return int(np.argmin(np.abs(arr - theta)))

    def doppler_hz(self) -> Optional[np.ndarray]:
        """nu = theta / (2 pi T) when a PRI is attached."""
        if self.pri is None:
            return None
        return self.to_array() / (2.0 * math.pi * self.pri)


class AmbiguityMap(BaseModel):
    """
    Complex map over (delay bin, Doppler phase).

    ``reference`` is the magnitude used as 0 dB: |chi(0, 0)| for ambiguity
    functions, the peak magnitude for normalized scene renders.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    grid: DopplerGrid
    L: int
    reference: float
    design_id: str = ""
    waveform_id: str = ""

    @model_validator(mode='after')
    def validate_shape(self) -> "AmbiguityMap":
        expected = (2 * self.L - 1, self.grid.count)
        if self.values.shape != expected:
            raise ValueError(f"Map values have shape {self.values.shape}, expected {expected}")
        return self

    @property
    def delays(self) -> np.ndarray:
        return np.arange(-(self.L - 1), self.L)

    def row_index(self, k: int) -> int:
        return k + self.L - 1

    def magnitude_db(self, floor: float = -300.0) -> np.ndarray:
        """20 log10(|chi| / reference), clamped at floor."""
        ref = self.reference if self.reference > 0 else 1.0
        mag = np.abs(self.values) / ref
        with np.errstate(divide='ignore'):
            db = 20.0 * np.log10(mag)
        return np.maximum(db, floor)

    def band_columns(self, lo: Optional[float] = None, hi: Optional[float] = None) -> np.ndarray:
        arr = self.grid.to_array()
        mask = np.ones(arr.shape, dtype=bool)
        if lo is not None:
            mask &= arr >= lo - 1e-12
        if hi is not None:
            mask &= arr <= hi + 1e-12
        return np.flatnonzero(mask)

    def max_sidelobe_db(self, lo: Optional[float] = None, hi: Optional[float] = None,
                        floor: float = -300.0) -> float:
        """Largest k != 0 level (dB re reference) over theta in [lo, hi]."""
        cols = self.band_columns(lo, hi)
        if cols.size == 0:
            raise InvalidArgumentError(f"No grid points in band [{lo}, {hi}]")
        db = self.magnitude_db(floor)[:, cols]
        db = np.delete(db, self.row_index(0), axis=0)
        return float(np.max(db))

    def column(self, theta: float) -> np.ndarray:
        """Delay profile at an on-grid Doppler phase."""
        return self.values[:, self.grid.index_of(theta)]

    def mainlobe_rolloff_db(self, floor: float = -300.0) -> np.ndarray:
        """|chi(0, theta)| / |chi(0, 0)| in dB along the grid."""
        return self.magnitude_db(floor)[self.row_index(0)]


class MimoAmbiguity(BaseModel):
    """D x D array of maps; entry (i, j) correlates transmit channel i with receive channel j."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    maps: Tuple[Tuple[AmbiguityMap, ...], ...]

    @model_validator(mode='after')
    def validate_square(self) -> "MimoAmbiguity":
        D = len(self.maps)
        if D == 0 or any(len(row) != D for row in self.maps):
            raise ValueError("MIMO ambiguity must be a non-empty square array of maps")
        return self

    @property
    def D(self) -> int:
        return len(self.maps)

    def entry(self, i: int, j: int) -> AmbiguityMap:
        return self.maps[i][j]

    def stacked(self) -> np.ndarray:
        """Values as a (D, D, 2L-1, G) array."""
        return np.array([[m.values for m in row] for row in self.maps])
