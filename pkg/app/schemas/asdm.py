from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Optional, Tuple
import numpy as np


class AsdmParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., description="Schmitt trigger threshold (integrator units)")
    b: float = Field(..., description="feedback level")

    @field_validator("delta", "b")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("must be positive")
        return value

    def isi_bounds(self, amplitude: float) -> Tuple[float, float]:
        """Gap bounds [2 delta/(b + a), 2 delta/(b - a)] for inputs with |x| <= a < b."""
        upper = 2.0 * self.delta / (self.b - amplitude) if amplitude < self.b else float("inf")
        return 2.0 * self.delta / (self.b + amplitude), upper


class TriggerTimes(BaseModel):
    """Trigger instants t_0 = 0 < t_1 < ... < t_K."""
    model_config = ConfigDict(frozen=True)

    times: List[float]

    @model_validator(mode="after")
    def _check_times(self):
        if len(self.times) == 0:
            raise ValueError("trigger list must contain t_0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("trigger times must be strictly increasing")
        return self

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    @property
    def count(self) -> int:
        """Number of triggers after t_0."""
        return len(self.times) - 1

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def t_min(self) -> float:
        gaps = self.gaps
        return float(gaps.min()) if len(gaps) else float("nan")

    @property
    def t_max(self) -> float:
        gaps = self.gaps
        return float(gaps.max()) if len(gaps) else float("nan")


class SampleSeries(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: List[float]
    X: List[float]
    G_est: Optional[List[float]] = None
    E_est: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_lengths(self):
        if len(self.X) != len(self.q) + 1:
            raise ValueError("X must have one more entry than q")
        if self.X and self.X[0] != 0.0:
            raise ValueError("X(t_0) must be 0")
        return self

    @property
    def q_array(self) -> np.ndarray:
        return np.asarray(self.q, dtype=float)

    @property
    def X_array(self) -> np.ndarray:
        return np.asarray(self.X, dtype=float)
