from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union
import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    ConfigurationError,
    DetectionFailureError,
    InsufficientDataError,
    MedsError,
    ParameterError,
)
from app.db import csv_store
from app.db.config_store import save_config
from app.schemas.asdm import TriggerTimes
from app.schemas.experiment import ExperimentConfig, SignalKind, SweepRow, SweepStatus, SyntheticResult
from app.schemas.modulo import FoldRecord
from app.schemas.recovery import RecoveryConfig, RecoveryReport
from app.schemas.signal import BandlimitedSignal, DenseWaveform
from app.services.asdm_service import classical_decode, dynamic_range, encode_asdm, encode_meds
from app.services.bounds_service import check_sufficient_conditions
from app.services.recovery_service import fold_time_error, recover
from app.services.signal_service import (
    make_random_bandlimited,
    make_sinusoid,
    peak_amplitude,
    relative_error,
    sample_waveform,
    signal_callable,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Err_tau reported for a sweep point whose fold count is wrong
MISMATCH_ERROR = 100.0

# default sweep span as multiples of the configured delta
SWEEP_SPAN = (0.4, 2.4)


def synthetic_preset(seed: int = 0) -> ExperimentConfig:
    """Random bandlimited input well above the ASDM dynamic range."""
    return ExperimentConfig(seed=seed)


def hardware_preset() -> ExperimentConfig:
    """
    Sinusoid with the parameters of the hardware prototype, long enough for 12 folds.

    The capture spans about three Nyquist intervals and the tone sits on the
    band edge, so the decoder reconstructs at four times Omega; the dense
    trigger stream keeps T_max * 4 Omega / pi near 0.1.
    """
    return ExperimentConfig(
        kind=SignalKind.SINUSOID,
        omega=125.0,
        duration=0.0768,
        amplitude=4.51,
        phase=0.0,
        threshold=1.53,
        hysteresis=1.51,
        delta=2.07e-4,
        b=2.22,
        order=2,
        iterations=100,
        oversampling=4.0,
    )


PRESETS = {
    "synthetic": synthetic_preset,
    "hardware": hardware_preset,
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return PRESETS[name]()


def build_signal(config: ExperimentConfig) -> BandlimitedSignal:
    if config.kind == SignalKind.SINUSOID:
        return make_sinusoid(config.amplitude, config.omega, config.duration, config.phase)
    return make_random_bandlimited(config.seed, config.omega, config.duration, config.amplitude)


def evaluation_window(config: ExperimentConfig, recovery: RecoveryConfig) -> Tuple[float, float]:
    margin = recovery.error_margin * math.pi / config.omega
    start, end = margin, config.duration - margin
    if not end > start:
        raise ConfigurationError(
            f"duration {config.duration} leaves no evaluation window after trimming {margin:.4g} s per side"
        )
    return start, end


def _reference(sig: BandlimitedSignal, config: ExperimentConfig, recovery: RecoveryConfig) -> DenseWaveform:
    start, end = evaluation_window(config, recovery)
    return sample_waveform(signal_callable(sig), start, end, config.omega, recovery.points_per_nyquist)


def _resolve_output(config: ExperimentConfig, output_dir: Optional[PathLike]) -> Path:
    return Path(output_dir or config.output_dir or settings.OUTPUT_DIR)


def run_baseline(
    config: ExperimentConfig,
    sig: Optional[BandlimitedSignal] = None,
    reference: Optional[DenseWaveform] = None,
) -> Tuple[TriggerTimes, Optional[DenseWaveform], float]:
    """Standalone ASDM on the raw input, decoded classically."""
    recovery = config.recovery()
    sig = sig or build_signal(config)
    reference = reference or _reference(sig, config, recovery)
    triggers = encode_asdm(signal_callable(sig), config.asdm, config.duration, config.omega)
    try:
        baseline = classical_decode(triggers, config.asdm, config.omega, recovery, reference=reference)
    except InsufficientDataError:
        logger.warning(f"Standalone ASDM saturated completely ({triggers.count} triggers); baseline is zero")
        return triggers, None, 100.0
    err = relative_error(reference, baseline)
    if not math.isfinite(err):
        logger.warning("Baseline reconstruction overflowed")
    return triggers, baseline, err


def run_synthetic(config: ExperimentConfig, output_dir: Optional[PathLike] = None, write: bool = True) -> SyntheticResult:
    """
    Encode one input with the standalone ASDM and with MEDS, decode both and
    write the artifacts. A detection failure is reported in the result, the
    remaining artifacts are still written.
    """
    recovery = config.recovery()
    sig = build_signal(config)
    fn = signal_callable(sig)
    peak = peak_amplitude(fn, 0.0, config.duration, config.omega)
    reference = _reference(sig, config, recovery)
    logger.info(f"Synthetic run: seed={config.seed}, peak={peak:.4g}, g_MAX={dynamic_range(config.asdm, config.omega):.4g}")

    triggers_asdm, baseline, err_asdm = run_baseline(config, sig, reference)

    folds, folded, triggers = encode_meds(sig, config.modulo, config.asdm)
    conditions = check_sufficient_conditions(config.asdm, config.modulo, config.omega, peak, config.order)

    report: Optional[RecoveryReport] = None
    recovered: Optional[DenseWaveform] = None
    failure = None
    err_tau = None
    error_bound = None
    try:
        recovered, report = recover(
            triggers, config.asdm, config.modulo, config.omega, recovery, reference=reference, g_sup=peak
        )
    except DetectionFailureError as e:
        failure = e.message
        logger.warning(f"Fold detection failed: {e.message}")

    if report is not None:
        if folds.count and report.fold_count == folds.count:
            err_tau = fold_time_error(folds, report.detection)
        error_bound = report.error_bound

    result = SyntheticResult(
        config=config,
        report=report,
        conditions=conditions,
        err_asdm=err_asdm,
        err_meds=report.error if report is not None else None,
        err_tau=err_tau,
        fold_count=folds.count,
        trigger_count_meds=triggers.count,
        trigger_count_asdm=triggers_asdm.count,
        peak=peak,
        error_bound=error_bound,
        failure=failure,
    )
    logger.info(
        f"Err_ASDM={err_asdm:.4g}%, Err_MEDS={result.err_meds if result.err_meds is None else f'{result.err_meds:.4g}'}%, "
        f"folds={folds.count}, triggers={triggers.count}"
    )

    if write:
        target = _resolve_output(config, output_dir)
        _write_synthetic(target, config, result, sig, folded, folds, triggers, triggers_asdm, recovered, baseline)
        result = result.model_copy(update={"output_dir": str(target)})
    return result


def _write_synthetic(
    target: Path,
    config: ExperimentConfig,
    result: SyntheticResult,
    sig: BandlimitedSignal,
    folded,
    folds: FoldRecord,
    triggers: TriggerTimes,
    triggers_asdm: TriggerTimes,
    recovered: Optional[DenseWaveform],
    baseline: Optional[DenseWaveform],
) -> None:
    full = (0.0, config.duration)
    csv_store.write_waveform(target / "signal.csv", sample_waveform(signal_callable(sig), *full, config.omega))
    csv_store.write_waveform(target / "folded.csv", sample_waveform(folded, *full, config.omega))
    if recovered is not None:
        csv_store.write_waveform(target / "recovered.csv", recovered)
    if baseline is not None:
        csv_store.write_waveform(target / "baseline.csv", baseline)
    csv_store.write_folds(target / "folds_true.csv", folds)
    csv_store.write_triggers(target / "triggers_meds.csv", triggers)
    csv_store.write_triggers(target / "triggers_asdm.csv", triggers_asdm)
    save_config(target / "config.txt", config)

    extra = {
        "seed": config.seed,
        "peak": result.peak,
        "fold_count_true": result.fold_count,
        "trigger_count_asdm": result.trigger_count_asdm,
        "err_asdm": result.err_asdm,
        "err_meds": result.err_meds,
        "err_tau": result.err_tau,
    }
    if result.report is not None:
        csv_store.write_detected(target / "folds_detected.csv", result.report.detection)
        csv_store.write_iterations(target / "iterations.csv", result.report.trace)
        text = csv_store.render_report(result.report, extra)
    else:
        extra["failure"] = result.failure
        text = csv_store.render_summary(extra) + "\n" + csv_store.render_conditions(result.conditions)
    csv_store.write_text(target / "report.txt", text)
    logger.info(f"Artifacts written to {target}")


def _sweep_point(
    config: ExperimentConfig,
    delta: float,
    sig: BandlimitedSignal,
    reference: DenseWaveform,
) -> SweepRow:
    try:
        point = ExperimentConfig(**{**config.model_dump(), "delta": float(delta)})
    except ValueError as e:
        logger.warning(f"Sweep point delta={delta:.4g} rejected: {e}")
        return SweepRow(delta=delta, err_meds=math.inf, err_tau=math.inf, trigger_count=0,
                        fold_count=0, detected_count=0, status=SweepStatus.FAILED)

    recovery = point.recovery()
    folds, _, triggers = encode_meds(sig, point.modulo, point.asdm)
    try:
        _, report = recover(triggers, point.asdm, point.modulo, point.omega, recovery, reference=reference)
    except DetectionFailureError as e:
        logger.warning(f"Sweep point delta={delta:.4g}: {e.message}")
        try:
            fallback = classical_decode(triggers, point.asdm, point.omega, recovery, reference=reference)
            err = relative_error(reference, fallback)
        except MedsError:
            err = math.inf
        return SweepRow(delta=delta, err_meds=err, err_tau=MISMATCH_ERROR, trigger_count=triggers.count,
                        fold_count=folds.count, detected_count=0, status=SweepStatus.DETECTION_FAILED)
    except MedsError as e:
        logger.warning(f"Sweep point delta={delta:.4g} failed: {e.message}")
        return SweepRow(delta=delta, err_meds=math.inf, err_tau=math.inf, trigger_count=triggers.count,
                        fold_count=folds.count, detected_count=0, status=SweepStatus.FAILED)

    status = SweepStatus.OK
    if report.fold_count != folds.count:
        err_tau = MISMATCH_ERROR
        status = SweepStatus.FOLD_MISMATCH
    elif folds.count == 0:
        err_tau = 0.0
    else:
        err_tau = fold_time_error(folds, report.detection)
    return SweepRow(
        delta=delta,
        err_meds=report.error,
        err_tau=err_tau,
        trigger_count=triggers.count,
        fold_count=folds.count,
        detected_count=report.fold_count,
        status=status,
    )


def sweep_range(config: ExperimentConfig) -> Tuple[float, float]:
    """Default delta span: SWEEP_SPAN scaled by the configured delta."""
    low, high = SWEEP_SPAN
    return low * config.delta, high * config.delta


def run_delta_sweep(
    config: ExperimentConfig,
    delta_min: Optional[float] = None,
    delta_max: Optional[float] = None,
    count: int = 10,
    workers: Optional[int] = None,
    output_dir: Optional[PathLike] = None,
    write: bool = True,
) -> List[SweepRow]:
    """
    Repeat the MEDS experiment over `count` evenly spaced delta values.

    Missing ends of the range come from `sweep_range(config)`.
    """
    default_min, default_max = sweep_range(config)
    delta_min = default_min if delta_min is None else delta_min
    delta_max = default_max if delta_max is None else delta_max
    if not 0 < delta_min < delta_max:
        raise ParameterError(f"need 0 < delta_min < delta_max, got [{delta_min}, {delta_max}]")
    if count < 1:
        raise ParameterError(f"sweep needs at least one point, got {count}")

    sig = build_signal(config)
    reference = _reference(sig, config, config.recovery())
    deltas = np.linspace(delta_min, delta_max, count) if count > 1 else np.array([delta_min])
    workers = workers or settings.SWEEP_WORKERS

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda d: _sweep_point(config, float(d), sig, reference), deltas))
    else:
        rows = [_sweep_point(config, float(d), sig, reference) for d in deltas]

    failed = sum(1 for r in rows if r.status != SweepStatus.OK)
    logger.info(f"Delta sweep finished: {len(rows)} points, {failed} not ok")
    if write:
        target = _resolve_output(config, output_dir)
        csv_store.write_sweep(target / "sweep.csv", rows)
    return rows


def ingest_and_recover(
    trigger_csv: PathLike,
    config: ExperimentConfig,
    reference_csv: Optional[PathLike] = None,
    output_dir: Optional[PathLike] = None,
    write: bool = False,
) -> Tuple[DenseWaveform, RecoveryReport]:
    """Run the recovery on trigger times stored in `k,t` form."""
    triggers = csv_store.read_triggers(trigger_csv)
    reference = csv_store.read_waveform(reference_csv) if reference_csv else None
    waveform, report = recover(
        triggers, config.asdm, config.modulo, config.omega, config.recovery(), reference=reference
    )
    logger.info(f"Recovered {report.fold_count} folds from {trigger_csv}")
    if write:
        target = _resolve_output(config, output_dir)
        csv_store.write_waveform(target / "recovered.csv", waveform)
        csv_store.write_detected(target / "folds_detected.csv", report.detection)
        csv_store.write_iterations(target / "iterations.csv", report.trace)
        csv_store.write_text(target / "report.txt", csv_store.render_report(report))
    return waveform, report
