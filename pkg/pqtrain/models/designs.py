"""
Pydantic models for transmit-receive (P,Q) designs and their spectra.

A design pairs a symbol sequence P over {0..D-1} (which waveform each pulse
transmits) with a nonnegative weight sequence Q (how the receiver weights
each pulse). For D = 2 the signed vector r_n = (-1)^{p_n} q_n carries all the
sidelobe behaviour.
"""

from __future__ import annotations
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator
from typing import List, Literal, Optional, Tuple, Union
import numpy as np

from .waveforms import is_power_of_two

Number = Union[int, float]


def _is_integral(values) -> bool:
    return all(isinstance(v, int) or float(v).is_integer() for v in values)


class DesignVector(BaseModel):
    """Signed real vector r linking a binary design to its spectrum."""
    model_config = ConfigDict(frozen=True)

    r: Tuple[Number, ...] = Field(..., description="Signed weights r_n")

    @field_validator('r')
    @classmethod
    def validate_not_empty(cls, v: Tuple[Number, ...]) -> Tuple[Number, ...]:
        if len(v) == 0:
            raise ValueError("Design vector must have at least one entry")
        return v

    @property
    def N(self) -> int:
        return len(self.r)

    @property
    def is_integer(self) -> bool:
        return _is_integral(self.r)

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.r)

    def as_ints(self) -> List[int]:
        return [int(v) for v in self.r]

    def to_array(self) -> np.ndarray:
        return np.asarray(self.r, dtype=np.float64)

    @property
    def l1(self) -> float:
        return float(sum(abs(v) for v in self.r))


class DArySpectrumInput(BaseModel):
    """Inputs of the D-ary channel spectrum S_{P,Q,r}(theta)."""
    model_config = ConfigDict(frozen=True)

    P: Tuple[int, ...]
    Q: Tuple[Number, ...]
    D: int
    r: int = Field(..., description="Channel index 1..D-1")

    @model_validator(mode='after')
    def validate_alphabet(self) -> "DArySpectrumInput":
        if not is_power_of_two(self.D) or self.D < 2:
            raise ValueError(f"Alphabet size D must be a power of two >= 2, got {self.D}")
        if len(self.P) != len(self.Q):
            raise ValueError(f"P and Q lengths differ: {len(self.P)} != {len(self.Q)}")
        if any(not 0 <= p < self.D for p in self.P):
            raise ValueError(f"P symbols must lie in 0..{self.D - 1}")
        if any(q < 0 for q in self.Q):
            raise ValueError("Q weights must be nonnegative")
        if not 1 <= self.r <= self.D - 1:
            raise ValueError(f"Channel index r must lie in 1..{self.D - 1}, got {self.r}")
        return self


class NullSubspaceBasis(BaseModel):
    """
    Integer bases for designs with an M-th order spectral null.

    B (N x (N-M-1)) spans the null space of the (M+1) x N Vandermonde V;
    column m holds the coefficients of (1 - z)^(m+M+1).
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    N: int
    M: int
    B: np.ndarray = Field(..., description="Object array of Python ints, rows n, columns m")
    V: np.ndarray = Field(..., description="Object array of Python ints, rows m, columns n")

    @property
    def dimension(self) -> int:
        return self.N - self.M - 1

    def B_float(self) -> np.ndarray:
        return self.B.astype(np.float64)


class Design(BaseModel):
    """
    A (P,Q) transmit-receive pair.

    The declared null order is re-verified against the spectra on
    construction (binary path for D = 2, minimum over channels otherwise).

    Example:
        Design(name="ptm4", P=(0, 1, 1, 0), Q=(1, 1, 1, 1), D=2, declared_null_order=1)
    """
    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    P: Tuple[int, ...]
    Q: Tuple[Number, ...]
    D: int = 2
    declared_null_order: Optional[int] = Field(
        None,
        description="Claimed spectral-null order; None makes no claim"
    )

    @model_validator(mode='after')
    def validate_design(self) -> "Design":
        if not is_power_of_two(self.D) or self.D < 2:
            raise ValueError(f"Alphabet size D must be a power of two >= 2, got {self.D}")
        if len(self.P) == 0:
            raise ValueError("Design must have at least one pulse")
        if len(self.P) != len(self.Q):
            raise ValueError(f"P and Q lengths differ: {len(self.P)} != {len(self.Q)}")
        bad = [p for p in self.P if not 0 <= p < self.D]
        if bad:
            raise ValueError(f"P symbols {bad[:5]} outside alphabet 0..{self.D - 1}")
        negative = [i for i, q in enumerate(self.Q) if q < 0]
        if negative:
            raise ValueError(f"Q must be nonnegative; negative weight at index {negative[0]}")
        if all(q == 0 for q in self.Q):
            raise ValueError("Q must not be all zero")

        if self.declared_null_order is not None:
            from ..services.spectra import design_null_order

            verified = design_null_order(self)
            if verified is None or verified < self.declared_null_order:
                raise ValueError(
                    f"Declared null order {self.declared_null_order} not achieved "
                    f"(verified: {verified})"
                )
        return self

    @property
    def N(self) -> int:
        return len(self.P)

    @property
    def is_binary(self) -> bool:
        return self.D == 2

    @property
    def r(self) -> DesignVector:
        """Signed vector (-1)^{p_n} q_n; binary designs only."""
        if not self.is_binary:
            raise ValueError(f"Design vector r is defined for D=2 only (D={self.D})")
        return DesignVector(r=tuple(-q if p else q for p, q in zip(self.P, self.Q)))

    @computed_field
    @property
    def snr_gain(self) -> float:
        """||q||_1^2 / ||q||_2^2."""
        q = np.asarray(self.Q, dtype=np.float64)
        return float(q.sum() ** 2 / np.dot(q, q))


class MaxSnrProblem(BaseModel):
    """
    Split form of the max-SNR program for length N and null order M.

        minimize ||s - t||_2^2  s.t.  1^T (s + t) = 1,  V_M (s - t) = 0,  s, t >= 0

    At an optimum s_n * t_n = 0, so r = s - t has ||r||_1 = 1.
    """
    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=2)
    M: int = Field(..., ge=0)

    @model_validator(mode='after')
    def validate_order(self) -> "MaxSnrProblem":
        if self.M > self.N - 2:
            raise ValueError(f"Null order {self.M} infeasible for length {self.N} (max {self.N - 2})")
        return self

    @staticmethod
    def split(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Complementary split r = s - t with s, t >= 0 and s_n t_n = 0."""
        r = np.asarray(r, dtype=np.float64)
        return np.maximum(r, 0.0), np.maximum(-r, 0.0)

    @staticmethod
    def objective(s: np.ndarray, t: np.ndarray) -> float:
        d = s - t
        return float(np.dot(d, d))


class KktReport(BaseModel):
    """Optimality residuals of a max-SNR solution in split (s, t) form."""

    stationarity: float
    primal: float
    dual: float
    complementarity: float
    split_product: float = Field(..., description="max_n s_n * t_n")
    iterations: int = 0
    objective: float
    gain: float
    sign_search: Literal['exhaustive', 'local', 'given'] = 'exhaustive'

    @property
    def max_residual(self) -> float:
        return max(self.stationarity, self.primal, self.dual, self.complementarity)

    def passes(self, tol: float) -> bool:
        return self.max_residual <= tol and self.split_product <= tol
