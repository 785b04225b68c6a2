import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigurationError, ParameterError
from app.db import csv_store
from app.schemas.experiment import ExperimentConfig, SignalKind, SweepStatus
from app.services.asdm_service import encode_meds
from app.services.experiment_service import (
    build_signal,
    evaluation_window,
    ingest_and_recover,
    preset,
    run_baseline,
    run_delta_sweep,
    run_synthetic,
    sweep_range,
)
from app.services.recovery_service import recover
from app.services.signal_service import l2_norm, sample_waveform, signal_callable


def reference_for(config):
    start, end = evaluation_window(config, config.recovery())
    return sample_waveform(signal_callable(build_signal(config)), start, end, config.omega)


def test_config_enforces_dynamic_range():
    with pytest.raises(ValidationError):
        ExperimentConfig(threshold=8.9)
    with pytest.raises(ValidationError):
        ExperimentConfig(hysteresis=5.0)
    assert ExperimentConfig().modulo.lambda_h == pytest.approx(3.285)


def test_presets():
    hardware = preset("hardware")
    assert hardware.kind == SignalKind.SINUSOID
    assert hardware.order == 2
    assert hardware.recovery().oversampling == 4.0
    assert hardware.recovery().iterations == 100
    assert preset("synthetic") == ExperimentConfig()
    with pytest.raises(ConfigurationError):
        preset("oscilloscope")


def test_evaluation_window_trims_both_ends():
    config = ExperimentConfig()
    start, end = evaluation_window(config, config.recovery())
    margin = 0.5 * math.pi / config.omega
    assert start == pytest.approx(margin)
    assert end == pytest.approx(config.duration - margin)
    with pytest.raises(ConfigurationError):
        evaluation_window(ExperimentConfig(duration=0.01), config.recovery())


def test_in_range_run_matches_baseline(in_range_config, output_dir):
    result = run_synthetic(in_range_config)
    assert result.succeeded
    assert result.fold_count == 0
    assert result.trigger_count_meds == result.trigger_count_asdm
    assert result.err_meds == pytest.approx(result.err_asdm, rel=1e-6)
    assert result.err_tau is None
    assert result.output_dir == str(output_dir)
    for name in ("signal.csv", "folded.csv", "recovered.csv", "baseline.csv", "folds_true.csv",
                 "triggers_meds.csv", "triggers_asdm.csv", "config.txt", "folds_detected.csv",
                 "iterations.csv", "report.txt"):
        assert (output_dir / name).exists(), name
    report = (output_dir / "report.txt").read_text()
    assert "[summary]" in report
    assert "[conditions]" in report


def test_runs_are_deterministic(in_range_config):
    first = run_synthetic(in_range_config, write=False)
    second = run_synthetic(in_range_config, write=False)
    assert first.model_dump() == second.model_dump()


def test_baseline_only(in_range_config):
    triggers, waveform, err = run_baseline(in_range_config)
    assert triggers.count > 100
    assert waveform is not None
    assert math.isfinite(err)
    assert err < 10.0


def test_ingested_triggers_give_the_same_report(in_range_config, tmp_path):
    config = in_range_config
    sig = build_signal(config)
    _, _, triggers = encode_meds(sig, config.modulo, config.asdm)
    reference = reference_for(config)
    _, expected = recover(triggers, config.asdm, config.modulo, config.omega, config.recovery(), reference=reference)

    trigger_csv = csv_store.write_triggers(tmp_path / "triggers.csv", triggers)
    reference_csv = csv_store.write_waveform(tmp_path / "reference.csv", reference)
    _, report = ingest_and_recover(trigger_csv, config, reference_csv)
    assert report.trigger_count == expected.trigger_count
    assert report.detection == expected.detection
    assert report.error == pytest.approx(expected.error, rel=1e-9)


def test_ingest_writes_artifacts(in_range_config, tmp_path, output_dir):
    _, _, triggers = encode_meds(build_signal(in_range_config), in_range_config.modulo, in_range_config.asdm)
    trigger_csv = csv_store.write_triggers(tmp_path / "triggers.csv", triggers)
    waveform, report = ingest_and_recover(trigger_csv, in_range_config, write=True)
    assert report.error is None
    assert (output_dir / "recovered.csv").exists()
    assert (output_dir / "report.txt").read_text().startswith("[summary]")
    assert csv_store.read_waveform(output_dir / "recovered.csv").samples == waveform.samples
    assert report.conditions is not None
    assert report.conditions.delta == in_range_config.delta
    assert report.error_bound is not None
    assert "[conditions]" in (output_dir / "report.txt").read_text()


def test_small_sweep(in_range_config, output_dir):
    rows = run_delta_sweep(in_range_config, 1e-3, 3e-3, 3)
    assert [row.delta for row in rows] == pytest.approx([1e-3, 2e-3, 3e-3])
    counts = [row.trigger_count for row in rows]
    assert counts[0] > counts[1] > counts[2]
    assert all(row.status == SweepStatus.OK for row in rows)
    assert all(row.err_tau == 0.0 for row in rows)
    assert csv_store.read_sweep(output_dir / "sweep.csv") == rows

    threaded = run_delta_sweep(in_range_config, 1e-3, 3e-3, 3, workers=3, write=False)
    assert threaded == rows


def test_sweep_rejects_bad_range(in_range_config):
    with pytest.raises(ParameterError):
        run_delta_sweep(in_range_config, 3e-3, 1e-3, 5, write=False)
    with pytest.raises(ParameterError):
        run_delta_sweep(in_range_config, 1e-3, 3e-3, 0, write=False)


@pytest.mark.slow
def test_synthetic_reproduction(synthetic_config, output_dir):
    result = run_synthetic(synthetic_config)
    assert result.succeeded, result.failure
    assert result.fold_count >= 10
    assert result.report.fold_count == result.fold_count
    assert result.err_meds <= 1.0
    assert result.err_asdm >= 100 * result.err_meds
    assert result.err_tau is not None

    g_norm = l2_norm(reference_for(synthetic_config))
    assert result.err_meds / 100 * g_norm <= result.error_bound
    errors = result.report.trace.errors
    assert errors[-1] <= errors[0]


@pytest.mark.slow
def test_hardware_parameters_reproduction():
    result = run_synthetic(preset("hardware"), write=False)
    assert result.succeeded, result.failure
    assert result.fold_count == 12
    assert result.report.fold_count == 12
    assert result.err_meds <= 1.0
    assert result.report.trace.contraction_bound < 0.2


def test_default_sweep_range_scales_with_delta():
    assert sweep_range(ExperimentConfig()) == pytest.approx((1e-3, 6e-3))
    assert sweep_range(ExperimentConfig(delta=1e-3)) == pytest.approx((4e-4, 2.4e-3))


@pytest.mark.slow
def test_delta_sweep_trend(synthetic_config):
    rows = run_delta_sweep(synthetic_config, count=10, write=False)
    deltas = [row.delta for row in rows]
    assert (deltas[0], deltas[-1]) == pytest.approx(sweep_range(synthetic_config))

    counts = np.array([row.trigger_count for row in rows])
    assert np.all(np.diff(counts) <= 0)
    # trigger count roughly proportional to 1/delta
    scaled = counts * np.array(deltas)
    assert scaled.max() / scaled.min() < 1.5

    assert rows[0].status == SweepStatus.OK
    assert rows[0].err_meds < 10.0
    # coarse enough thresholds lose folds
    assert any(row.status != SweepStatus.OK or row.err_meds > 10.0 for row in rows)

    leading = []
    for row in rows:
        if row.status != SweepStatus.OK or row.err_meds > 10.0:
            break
        if row.err_tau:
            leading.append(row.err_meds / row.err_tau)
    assert leading
    # fold-time error reaches the increments scaled by 2 lambda_h
    lambda_h = synthetic_config.modulo.lambda_h
    assert 2 * lambda_h / 6 <= float(np.median(leading)) <= 2 * 2 * lambda_h


@pytest.mark.slow
def test_reports_are_byte_identical(synthetic_config, tmp_path):
    run_synthetic(synthetic_config, output_dir=tmp_path / "a")
    run_synthetic(synthetic_config, output_dir=tmp_path / "b")
    assert (tmp_path / "a" / "report.txt").read_bytes() == (tmp_path / "b" / "report.txt").read_bytes()


def test_iterations_default_follows_settings(monkeypatch):
    monkeypatch.setattr(settings, "MAX_ITERATIONS", 12)
    assert ExperimentConfig().iterations == 12
    assert ExperimentConfig().recovery().iterations == 12
    assert ExperimentConfig(iterations=5).recovery().iterations == 5
