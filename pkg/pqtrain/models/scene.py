"""
Pydantic models for delay-Doppler scenes of point targets.
"""

from __future__ import annotations
from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Optional, Union
import math

from .ambiguity import DopplerGrid
from .designs import Design
from .waveforms import ComplementarySet, GolayPair


class PointTarget(BaseModel):
    """A reflector at an integer delay bin and Doppler phase theta (radians)."""
    model_config = ConfigDict(frozen=True)

    delay_bin: int
    doppler_theta: float
    power_db: float = Field(0.0, description="Power relative to the strongest target, dB")

    @field_validator('doppler_theta')
    @classmethod
    def validate_theta(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"Doppler phase must be finite, got {v}")
        return v

    @property
    def amplitude(self) -> float:
        return 10.0 ** (self.power_db / 20.0)


class Scene(BaseModel):
    """
    Targets observed through one (P,Q) design and one waveform set.

    Binary designs take a GolayPair, D-ary designs a ComplementarySet of
    matching size.
    """
    model_config = ConfigDict(frozen=True)

    targets: List[PointTarget]
    design: Design
    waveform: Union[GolayPair, ComplementarySet]
    grid: DopplerGrid
    title: Optional[str] = None

    @field_validator('targets')
    @classmethod
    def validate_targets(cls, v: List[PointTarget]) -> List[PointTarget]:
        if len(v) == 0:
            raise ValueError("Scene needs at least one target")
        return v

    @property
    def L(self) -> int:
        return self.waveform.L


class TargetVisibility(BaseModel):
    """How far a target's peak stands above the other targets' sidelobes."""

    index: int
    delay_bin: int
    doppler_theta: float = Field(..., description="Grid-snapped Doppler phase")
    peak_db: float
    interference_db: float
    margin_db: float = Field(..., description="peak_db - interference_db; +inf when nothing interferes")

    @property
    def visible(self) -> bool:
        return self.margin_db > 0
