from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List
import numpy as np


class ModuloParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold: float = Field(..., description="lambda, fold threshold")
    hysteresis: float = Field(0.0, description="h, separation of threshold and reset levels")

    @model_validator(mode="after")
    def _check_range(self):
        if not self.threshold > 0:
            raise ValueError("threshold lambda must be positive")
        if not 0 <= self.hysteresis < self.threshold:
            raise ValueError("hysteresis must satisfy 0 <= h < lambda")
        return self

    @property
    def lambda_h(self) -> float:
        return self.threshold - self.hysteresis / 2.0

    @property
    def h_star(self) -> float:
        return min(self.hysteresis, 2.0 * self.lambda_h)

    @property
    def fold_step(self) -> float:
        """Size of one residue step, 2 * lambda_h."""
        return 2.0 * self.lambda_h

    @property
    def reset_level(self) -> float:
        return self.threshold - self.hysteresis


class FoldRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    times: List[float] = []
    signs: List[int] = []

    @model_validator(mode="after")
    def _check_record(self):
        if len(self.times) != len(self.signs):
            raise ValueError("fold times and signs must have equal length")
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("fold signs must be +1 or -1")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("fold times must be strictly increasing")
        return self

    @property
    def count(self) -> int:
        return len(self.times)

    @property
    def tau(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    @property
    def s(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float)

    def min_gap(self) -> float:
        if self.count < 2:
            return float("inf")
        return float(np.min(np.diff(self.tau)))
