from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Optional, Tuple

from app.core.config import settings


class RecoveryConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: int = Field(3, ge=2, description="difference order N")
    iterations: int = Field(default_factory=lambda: settings.MAX_ITERATIONS, ge=1)
    tolerance: float = Field(default_factory=lambda: settings.ITERATION_TOL, gt=0)
    points_per_nyquist: int = Field(default_factory=lambda: settings.DENSE_POINTS_PER_NYQUIST, ge=2)
    sinc_radius: float = Field(default_factory=lambda: settings.SINC_RADIUS, gt=0)
    # "infinite": an index whose threshold needs an out-of-range pivot is never flagged.
    # "partial": take the minimum over the pivots that exist (+inf when none do).
    psi_boundary: Literal["infinite", "partial"] = "infinite"
    # trimmed from both ends of the error window, in units of pi/Omega
    error_margin: float = Field(0.5, ge=0)
    # reconstruction kernels use sinc at oversampling * Omega; 1 is the signal band
    oversampling: float = Field(1.0, ge=1.0)
    # record the full-line and in-span norm of every update (quadratic in the trigger count)
    span_energy: bool = False

    def bandwidth(self, omega: float) -> float:
        return omega * self.oversampling


class MuBetaTable(BaseModel):
    """mu_l^N[k] and beta_l^N[k] for k in [pivot - order + 1, pivot]."""
    model_config = ConfigDict(frozen=True)

    pivot: int
    order: int
    mu: List[float]
    beta: List[float]

    @property
    def start(self) -> int:
        return self.pivot - self.order + 1

    def mu_at(self, k: int) -> float:
        i = k - self.start
        return self.mu[i] if 0 <= i < len(self.mu) else 0.0

    def beta_at(self, k: int) -> float:
        i = k - self.start
        return self.beta[i] if 0 <= i < len(self.beta) else 0.0

    def mu_support(self) -> List[int]:
        return [self.start + i for i, v in enumerate(self.mu) if v != 0.0]

    def beta_support(self) -> List[int]:
        return [self.start + i for i, v in enumerate(self.beta) if v != 0.0]


class DetectedFold(BaseModel):
    k_m: int
    k_M: int
    tau_est: Optional[float] = None
    sign_est: Optional[int] = None

    @property
    def span(self) -> int:
        return self.k_M - self.k_m


class DetectionResult(BaseModel):
    order: int
    folds: List[DetectedFold] = []

    @model_validator(mode="after")
    def _ordered(self):
        for prev, cur in zip(self.folds, self.folds[1:]):
            if cur.k_m <= prev.k_M:
                raise ValueError("detected windows must be disjoint and ordered")
        return self

    @property
    def count(self) -> int:
        return len(self.folds)

    @property
    def taus(self) -> List[float]:
        return [f.tau_est for f in self.folds]

    @property
    def signs(self) -> List[int]:
        return [f.sign_est for f in self.folds]


class IterationTrace(BaseModel):
    update_norms: List[float] = []
    errors: Optional[List[float]] = None  # percent, g_0 .. g_n, when a reference is given
    iterations: int = 0
    contraction_bound: float = 0.0
    # (norm on the whole line, norm on [t_0, t_K]) of every update, with config.span_energy
    update_split: Optional[List[Tuple[float, float]]] = None


class ConditionReport(BaseModel):
    order: int
    g_sup: float
    C: float
    t_min: float
    t_max: float
    s1_lhs: float
    s1_rhs: float
    s1_pass: bool
    s2_lhs: float
    s2_rhs: float
    s2_pass: bool
    kappa: float
    delta: float
    delta_bound: float
    delta_pass: bool

    @property
    def s1_margin(self) -> float:
        return self.s1_rhs - self.s1_lhs

    @property
    def s2_margin(self) -> float:
        return self.s2_rhs - self.s2_lhs

    @property
    def delta_margin(self) -> float:
        return self.delta_bound - self.delta


class RecoveryReport(BaseModel):
    order: int
    trigger_count: int
    t_min: float
    t_max: float
    detection: DetectionResult
    trace: IterationTrace
    classical: bool = False
    error: Optional[float] = None
    error_bound: Optional[float] = None
    conditions: Optional[ConditionReport] = None

    @property
    def fold_count(self) -> int:
        return self.detection.count
