from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Optional
from enum import Enum
import math

from app.core.config import settings
from app.schemas.asdm import AsdmParams
from app.schemas.modulo import ModuloParams
from app.schemas.recovery import ConditionReport, RecoveryConfig, RecoveryReport


class SignalKind(str, Enum):
    RANDOM = "random"
    SINUSOID = "sinusoid"


class SweepStatus(str, Enum):
    OK = "ok"
    FOLD_MISMATCH = "fold_mismatch"
    DETECTION_FAILED = "detection_failed"
    FAILED = "failed"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, use_enum_values=True, validate_default=True)

    seed: int = 0
    omega: float = Field(150.0, description="bandwidth in rad/s")
    duration: float = 0.13
    amplitude: float = 34.6
    kind: SignalKind = SignalKind.RANDOM
    phase: float = 0.0
    threshold: float = 4.38
    hysteresis: float = 2.19
    delta: float = 2.5e-3
    b: float = 9.0
    order: int = 3
    iterations: int = Field(default_factory=lambda: settings.MAX_ITERATIONS)
    oversampling: float = 1.0
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_config(self):
        for name in ("omega", "duration", "amplitude", "threshold", "delta", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.hysteresis < self.threshold:
            raise ValueError("hysteresis must satisfy 0 <= h < lambda")
        if self.order < 2:
            raise ValueError("recovery order must be at least 2")
        if self.oversampling < 1:
            raise ValueError("oversampling must be at least 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        limit = self.b - 2.0 * self.delta * self.omega / math.pi
        if self.threshold > limit:
            raise ValueError(
                f"lambda={self.threshold} exceeds the ASDM dynamic range b - 2 delta Omega/pi = {limit:.6g}"
            )
        return self

    @property
    def modulo(self) -> ModuloParams:
        return ModuloParams(threshold=self.threshold, hysteresis=self.hysteresis)

    @property
    def asdm(self) -> AsdmParams:
        return AsdmParams(delta=self.delta, b=self.b)

    def recovery(self, **overrides) -> RecoveryConfig:
        values = {"order": self.order, "iterations": self.iterations, "oversampling": self.oversampling}
        return RecoveryConfig(**{**values, **overrides})


class SweepRow(BaseModel):
    delta: float
    err_meds: float
    err_tau: float
    trigger_count: int
    fold_count: int
    detected_count: int
    status: SweepStatus = SweepStatus.OK

    model_config = ConfigDict(use_enum_values=True, validate_default=True)


class SyntheticResult(BaseModel):
    config: ExperimentConfig
    report: Optional[RecoveryReport] = None
    conditions: Optional[ConditionReport] = None
    err_asdm: float
    err_meds: Optional[float] = None
    err_tau: Optional[float] = None
    fold_count: int
    trigger_count_meds: int
    trigger_count_asdm: int
    peak: float
    error_bound: Optional[float] = None
    failure: Optional[str] = None
    output_dir: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.failure is None


class SweepRequest(BaseModel):
    config: ExperimentConfig = ExperimentConfig()
    delta_min: Optional[float] = None
    delta_max: Optional[float] = None
    count: int = Field(10, ge=1)
    workers: Optional[int] = None


class SweepResponse(BaseModel):
    rows: List[SweepRow]
    output_dir: Optional[str] = None


class CheckRequest(BaseModel):
    config: ExperimentConfig = ExperimentConfig()
    g_sup: Optional[float] = None


class BaselineResponse(BaseModel):
    err_asdm: float
    trigger_count: int
    peak: float
    dynamic_range: float


class RecoverResponse(BaseModel):
    report: RecoveryReport
    source: Literal["upload", "file"] = "upload"
