"""Pydantic models for waveforms, designs, ambiguity maps and scenes."""

from .waveforms import (
    UnimodularSeq,
    GolayPair,
    ComplementarySet,
    ParaunitaryMatrix,
)
from .designs import (
    DesignVector,
    DArySpectrumInput,
    NullSubspaceBasis,
    Design,
    MaxSnrProblem,
    KktReport,
)
from .ambiguity import (
    DopplerGrid,
    AmbiguityMap,
    MimoAmbiguity,
)
from .scene import (
    PointTarget,
    Scene,
    TargetVisibility,
)

__all__ = [
    "UnimodularSeq",
    "GolayPair",
    "ComplementarySet",
    "ParaunitaryMatrix",
    "DesignVector",
    "DArySpectrumInput",
    "NullSubspaceBasis",
    "Design",
    "MaxSnrProblem",
    "KktReport",
    "DopplerGrid",
    "AmbiguityMap",
    "MimoAmbiguity",
    "PointTarget",
    "Scene",
    "TargetVisibility",
]
