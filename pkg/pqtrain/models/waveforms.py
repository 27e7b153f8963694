"""
Pydantic models for code sequences.

Sequence elements are restricted to the quarter-turn alphabet {1, j, -1, -j}
and are stored as exponents of j, so every correlation over them stays in
exact Gaussian-integer arithmetic.
"""

from __future__ import annotations
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Sequence, Tuple, Union
import numpy as np

# j**phase as (real, imag)
_PHASE_PARTS = ((1, 0), (0, 1), (-1, 0), (0, -1))
_VALUE_TO_PHASE = {1: 0, 1j: 1, -1: 2, -1j: 3}


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class UnimodularSeq(BaseModel):
    """
    A length-L code sequence of unit-modulus chips.

    Example:
        UnimodularSeq.from_elements([1, 1, 1, -1])
    """
    model_config = ConfigDict(frozen=True)

    phases: Tuple[int, ...] = Field(
        ...,
        description="Quarter-turn exponents; chip l equals j**phases[l]"
    )

    @field_validator('phases')
    @classmethod
    def validate_phases(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        """Require a non-empty sequence over {0, 1, 2, 3}."""
        if len(v) == 0:
            raise ValueError("Sequence length must be at least 1")
        bad = [p for p in v if p not in (0, 1, 2, 3)]
        if bad:
            raise ValueError(f"Invalid phase exponents {bad[:5]} (must be 0..3)")
        return v

    @classmethod
    def from_elements(cls, values: Sequence[Union[int, complex]]) -> "UnimodularSeq":
        """Build from chip values in {1, -1, 1j, -1j}."""
        phases = []
        for value in values:
            key = complex(value)
            phase = _VALUE_TO_PHASE.get(key.real if key.imag == 0 else key)
            if phase is None:
                raise ValueError(f"Chip {value!r} is not one of 1, -1, 1j, -1j")
            phases.append(phase)
        return cls(phases=tuple(phases))

    @property
    def L(self) -> int:
        return len(self.phases)

    @property
    def real(self) -> np.ndarray:
        return np.array([_PHASE_PARTS[p][0] for p in self.phases], dtype=np.int64)

    @property
    def imag(self) -> np.ndarray:
        return np.array([_PHASE_PARTS[p][1] for p in self.phases], dtype=np.int64)

    @property
    def elements(self) -> List[complex]:
        return [complex(*_PHASE_PARTS[p]) for p in self.phases]

    @property
    def is_binary(self) -> bool:
        return all(p in (0, 2) for p in self.phases)

    def to_array(self) -> np.ndarray:
        """Chips as a complex128 array (exact for this alphabet)."""
        return self.real + 1j * self.imag

    def negated(self) -> "UnimodularSeq":
        return UnimodularSeq(phases=tuple((p + 2) % 4 for p in self.phases))


class GolayPair(BaseModel):
    """
    Two equal-length sequences whose autocorrelations sum to 2L at lag zero
    and vanish elsewhere.

    Complementarity is established by the constructors in
    ``services.waveforms`` and checked with ``check_complementary``.
    """
    model_config = ConfigDict(frozen=True)

    x: UnimodularSeq
    y: UnimodularSeq

    @model_validator(mode='after')
    def validate_lengths(self) -> "GolayPair":
        if self.x.L != self.y.L:
            raise ValueError(f"Golay pair lengths differ: {self.x.L} != {self.y.L}")
        return self

    @property
    def L(self) -> int:
        return self.x.L

    def as_set(self) -> "ComplementarySet":
        """Symbol 0 transmits y and symbol 1 transmits x."""
        return ComplementarySet(members=(self.y, self.x))


class ComplementarySet(BaseModel):
    """D equal-length sequences whose autocorrelations sum to D*L*delta[k]."""
    model_config = ConfigDict(frozen=True)

    members: Tuple[UnimodularSeq, ...]

    @model_validator(mode='after')
    def validate_members(self) -> "ComplementarySet":
        if not is_power_of_two(len(self.members)) or len(self.members) < 2:
            raise ValueError(
                f"Complementary set size must be a power of two >= 2, got {len(self.members)}"
            )
        lengths = {m.L for m in self.members}
        if len(lengths) != 1:
            raise ValueError(f"Complementary set members have unequal lengths: {sorted(lengths)}")
        return self

    @property
    def D(self) -> int:
        return len(self.members)

    @property
    def L(self) -> int:
        return self.members[0].L


class ParaunitaryMatrix(BaseModel):
    """
    A D x D matrix of length-L sequences with lagged Gram D*L*I*delta[k].

    Each column, read as a sequence-valued vector, belongs to a complementary
    vector set; each row is a scalar complementary set.
    """
    model_config = ConfigDict(frozen=True)

    entries: Tuple[Tuple[UnimodularSeq, ...], ...]

    @model_validator(mode='after')
    def validate_shape(self) -> "ParaunitaryMatrix":
        D = len(self.entries)
        if not is_power_of_two(D) or D < 2:
            raise ValueError(f"Paraunitary matrix order must be a power of two >= 2, got {D}")
        if any(len(row) != D for row in self.entries):
            raise ValueError("Paraunitary matrix must be square")
        lengths = {s.L for row in self.entries for s in row}
        if len(lengths) != 1:
            raise ValueError(f"Paraunitary entries have unequal lengths: {sorted(lengths)}")
        return self

    @property
    def D(self) -> int:
        return len(self.entries)

    @property
    def L(self) -> int:
        return self.entries[0][0].L

    def column(self, d: int) -> Tuple[UnimodularSeq, ...]:
        return tuple(row[d] for row in self.entries)

    def columns(self) -> List[Tuple[UnimodularSeq, ...]]:
        return [self.column(d) for d in range(self.D)]

    def row_set(self, i: int = 0) -> ComplementarySet:
        """Row i as a scalar complementary set."""
        return ComplementarySet(members=tuple(self.entries[i]))
