from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Literal
import math
import numpy as np


class BandlimitedSignal(BaseModel):
    """
    Sinc series g(t) = A * sum_n c_n sinc_Omega(t - n*pi/Omega).

    `normalization` is the factor already folded into the coefficients so
    that the unscaled series peaks at 1 on [0, support_end].
    """
    model_config = ConfigDict(frozen=True)

    coefficients: List[float]
    bandwidth: float = Field(..., description="Omega in rad/s")
    amplitude: float = 1.0
    support_end: float
    normalization: float = 1.0
    offset: float = 0.0  # time shift of the series (sinusoid inputs)
    kind: Literal["sinc", "sinusoid"] = "sinc"

    @field_validator("bandwidth", "support_end")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("must be positive")
        return value

    @field_validator("coefficients")
    @classmethod
    def _non_empty(cls, value: List[float]) -> List[float]:
        if len(value) == 0:
            raise ValueError("coefficient list must not be empty")
        return value

    @property
    def grid_spacing(self) -> float:
        return math.pi / self.bandwidth

    @property
    def centers(self) -> np.ndarray:
        return np.arange(len(self.coefficients)) * self.grid_spacing

    @property
    def weights(self) -> np.ndarray:
        return self.amplitude * np.asarray(self.coefficients, dtype=float)


class DenseWaveform(BaseModel):
    model_config = ConfigDict(frozen=True)

    start: float
    step: float
    samples: List[float]

    @field_validator("step")
    @classmethod
    def _positive_step(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("step must be positive")
        return value

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(len(self.samples))

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.samples, dtype=float)

    @property
    def end(self) -> float:
        return self.start + self.step * (len(self.samples) - 1)

    def same_grid(self, other: "DenseWaveform") -> bool:
        return (
            len(self.samples) == len(other.samples)
            and math.isclose(self.start, other.start, rel_tol=0, abs_tol=1e-12)
            and math.isclose(self.step, other.step, rel_tol=1e-12)
        )


class SignalSummary(BaseModel):
    bandwidth: float
    amplitude: float
    support_end: float
    peak: float
    coefficient_count: int


class DynamicRangeResponse(BaseModel):
    delta: float
    b: float
    omega: float
    g_max: float
