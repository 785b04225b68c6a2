from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from app.core.exceptions import (
    BoundaryError,
    DetectionFailureError,
    DivergenceError,
    DomainError,
    ParameterError,
    PreconditionError,
    ShapeError,
)
from app.schemas.asdm import AsdmParams, SampleSeries, TriggerTimes
from app.schemas.modulo import FoldRecord, ModuloParams
from app.schemas.recovery import (
    ConditionReport,
    DetectedFold,
    DetectionResult,
    RecoveryConfig,
    RecoveryReport,
)
from app.schemas.signal import DenseWaveform
from app.services.asdm_service import dynamic_range, sample_series
from app.services.bounds_service import check_sufficient_conditions, final_error_bound
from app.services.difference_service import nonuniform_diff, threshold_psi
from app.services.modulo_service import residue_samples
from app.services.reconstruction_service import local_average_reconstruct
from app.services.signal_service import l2_norm

logger = logging.getLogger(__name__)


def _valid_spans(order: int) -> Tuple[int, ...]:
    return tuple(s for s in (order - 3, order - 2, order - 1) if s >= 0)


def detect_folds(filtered: Sequence[float], psi: Sequence[float], order: int) -> DetectionResult:
    """
    Sequential window rule: k_m is the first index with |X^N[k]| >= Psi[k]
    after the previous window, k_M the last such index within k_m + N - 1.
    """
    values = np.abs(np.asarray(filtered, dtype=float))
    psi = np.asarray(psi, dtype=float)
    if values.shape != psi.shape:
        raise ShapeError(f"filtered data ({values.size}) and threshold ({psi.size}) differ in length")
    flagged = values >= psi
    spans = _valid_spans(order)

    folds: List[DetectedFold] = []
    start = 0
    while start < len(flagged):
        hits = np.flatnonzero(flagged[start:])
        if len(hits) == 0:
            break
        k_m = start + int(hits[0])
        stop = min(k_m + order, len(flagged))
        k_M = k_m + int(np.flatnonzero(flagged[k_m:stop])[-1])
        if k_M - k_m not in spans:
            raise DetectionFailureError(
                f"window ({k_m}, {k_M}) spans {k_M - k_m}, expected one of {list(spans)}",
                pair=(k_m, k_M),
            )
        folds.append(DetectedFold(k_m=k_m, k_M=k_M))
        start = k_M + 1
    return DetectionResult(order=order, folds=folds)


def estimate_fold(
    pair: Tuple[int, int],
    triggers: TriggerTimes,
    filtered: Sequence[float],
    order: int,
) -> Tuple[float, int]:
    """Fold time and sign from a detected window (k_m, k_M)."""
    k_m, k_M = pair
    span = k_M - k_m
    if span not in _valid_spans(order):
        raise DetectionFailureError(f"window ({k_m}, {k_M}) is malformed for order {order}", pair=pair)
    value = float(filtered[k_m])
    if value == 0.0:
        raise DetectionFailureError(f"filtered sample at k_m={k_m} is zero, fold sign undefined", pair=pair)
    sign = -1 if value > 0 else 1

    t = triggers.t
    reach = k_M + 2 if span == order - 3 else k_M + 1
    if reach >= len(t):
        raise BoundaryError(f"window ({k_m}, {k_M}) needs t_{reach}, have t_0..t_{len(t) - 1}")
    if span == order - 1:
        tau = 0.5 * (t[k_M] + t[k_M + 1])
    elif span == order - 2:
        tau = float(t[k_M + 1])
    else:
        tau = 0.5 * (t[k_M + 1] + t[k_M + 2])
    return float(tau), sign


def estimate_residue(detection: DetectionResult, triggers: TriggerTimes, lambda_h: float) -> np.ndarray:
    """E_g(t_k) rebuilt from the estimated folds: 2 lambda_h sum s_r max(0, t_k - tau_r)."""
    t = triggers.t
    if detection.count == 0:
        return np.zeros_like(t)
    taus = np.asarray(detection.taus, dtype=float)
    signs = np.asarray(detection.signs, dtype=float)
    ramps = np.clip(t[:, None] - taus[None, :], 0.0, None)
    return 2.0 * lambda_h * (ramps @ signs)


def recover(
    triggers: TriggerTimes,
    asdm: AsdmParams,
    modulo: ModuloParams,
    omega: float,
    config: Optional[RecoveryConfig] = None,
    window: Optional[Tuple[float, float]] = None,
    reference: Optional[DenseWaveform] = None,
    g_sup: Optional[float] = None,
) -> Tuple[DenseWaveform, RecoveryReport]:
    """
    Recover g from MEDS trigger times.

    1. X^N = D^N of the running sums of q_m.
    2. Detect fold windows against Psi^N.
    3. Estimate every fold time and sign.
    4. G(t_k) = X(t_k) + E_g(t_k) with the estimated residue.
    5. Local-average reconstruction from the increments of G.

    The report carries the sufficient conditions evaluated at `g_sup` (the
    peak of the reference, else of the recovery, when not given) and the
    error bound for the iterations actually run.
    """
    config = config or RecoveryConfig()
    if modulo.threshold > dynamic_range(asdm, omega):
        raise PreconditionError(
            f"lambda={modulo.threshold} exceeds the ASDM dynamic range b - 2 delta Omega/pi"
            f" = {dynamic_range(asdm, omega):.6g}"
        )

    series = sample_series(triggers, asdm)
    samples = series.X_array
    filtered = nonuniform_diff(samples, triggers, config.order)
    psi = threshold_psi(triggers, config.order, modulo.lambda_h, config.psi_boundary)
    detection = detect_folds(filtered, psi, config.order)

    estimated = []
    for fold in detection.folds:
        tau, sign = estimate_fold((fold.k_m, fold.k_M), triggers, filtered, config.order)
        estimated.append(DetectedFold(k_m=fold.k_m, k_M=fold.k_M, tau_est=tau, sign_est=sign))
    detection = DetectionResult(order=config.order, folds=estimated)
    logger.info(f"Detected {detection.count} folds from {triggers.count} triggers (N={config.order})")

    residue = estimate_residue(detection, triggers, modulo.lambda_h)
    series = SampleSeries(
        q=series.q,
        X=series.X,
        G_est=(samples + residue).tolist(),
        E_est=residue.tolist(),
    )
    increments = np.diff(np.asarray(series.G_est))
    waveform, trace = local_average_reconstruct(
        increments, triggers, omega, config, window=window, reference=reference
    )

    known = reference if reference is not None else waveform
    if g_sup is None:
        g_sup = float(np.max(np.abs(known.values))) if len(known.samples) else 0.0
    conditions, error_bound = _guarantees(
        asdm, modulo, omega, config, g_sup, detection.count, trace.iterations, l2_norm(known)
    )

    report = RecoveryReport(
        order=config.order,
        trigger_count=triggers.count,
        t_min=triggers.t_min,
        t_max=triggers.t_max,
        detection=detection,
        trace=trace,
        classical=detection.count == 0,
        error=trace.errors[-1] if trace.errors else None,
        error_bound=error_bound,
        conditions=conditions,
    )
    return waveform, report


def _guarantees(
    asdm: AsdmParams,
    modulo: ModuloParams,
    omega: float,
    config: RecoveryConfig,
    g_sup: float,
    folds: int,
    iterations: int,
    g_norm: float,
) -> Tuple[Optional[ConditionReport], Optional[float]]:
    """Sufficient conditions at g_sup and the L2 error bound after `iterations` steps."""
    conditions = None
    error_bound = None
    try:
        conditions = check_sufficient_conditions(asdm, modulo, omega, g_sup, config.order)
    except ParameterError as e:
        logger.warning(f"No condition report: {e.message}")
    try:
        error_bound = final_error_bound(
            modulo.lambda_h, asdm.delta, folds, config.bandwidth(omega),
            asdm.b, modulo.threshold, iterations, g_norm,
        )
    except DivergenceError as e:
        logger.warning(f"No error bound: {e.message}")
    return conditions, error_bound


def fold_time_error(true_folds: FoldRecord, detection: DetectionResult) -> float:
    """100 * ||tau - tau_est|| / ||tau||, in percent."""
    if true_folds.count != detection.count:
        raise ShapeError(f"{true_folds.count} true folds against {detection.count} detected")
    tau = true_folds.tau
    norm = float(np.linalg.norm(tau))
    if norm == 0.0:
        raise DomainError("fold time error is undefined without folds")
    return 100.0 * float(np.linalg.norm(tau - np.asarray(detection.taus, dtype=float))) / norm


def residue_increment_error(
    true_folds: FoldRecord,
    detection: DetectionResult,
    triggers: TriggerTimes,
    lambda_h: float,
) -> float:
    """max_k |Delta G_est(t_k) - Delta G(t_k)|, which only depends on the residues."""
    truth = residue_samples(true_folds, lambda_h, triggers.t)
    estimate = estimate_residue(detection, triggers, lambda_h)
    if len(truth) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(estimate) - np.diff(truth))))
