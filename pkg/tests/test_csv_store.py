import numpy as np
import pytest

from app.core.exceptions import IngestionError
from app.db import csv_store
from app.schemas.asdm import TriggerTimes
from app.schemas.experiment import SweepRow, SweepStatus
from app.schemas.modulo import FoldRecord
from app.schemas.recovery import DetectedFold, DetectionResult, IterationTrace, RecoveryReport
from app.schemas.signal import DenseWaveform


def test_waveform_roundtrip_is_exact(tmp_path):
    samples = np.random.default_rng(1).normal(size=50).tolist()
    waveform = DenseWaveform(start=0.0105, step=0.1 / 3, samples=samples)
    path = csv_store.write_waveform(tmp_path / "wave.csv", waveform)
    loaded = csv_store.read_waveform(path)
    assert loaded.samples == samples
    assert loaded.start == waveform.start
    assert loaded.step == pytest.approx(waveform.step, rel=1e-12)
    assert path.read_text().splitlines()[0] == "t,value"


def test_triggers_and_folds_roundtrip(tmp_path):
    triggers = TriggerTimes(times=[0.0, 1 / 3, 2 / 3, 1.0 + 1e-17])
    folds = FoldRecord(times=[0.01, 0.02], signs=[1, -1])
    assert csv_store.read_triggers(csv_store.write_triggers(tmp_path / "t.csv", triggers)) == triggers
    assert csv_store.read_folds(csv_store.write_folds(tmp_path / "f.csv", folds)) == folds


def test_write_leaves_no_temporary_files(tmp_path):
    csv_store.write_triggers(tmp_path / "nested" / "t.csv", TriggerTimes(times=[0.0, 0.5]))
    assert [p.name for p in (tmp_path / "nested").iterdir()] == ["t.csv"]


@pytest.mark.parametrize("content", [
    "",
    "k,time\n0,0.0\n",
    "k,t\n0,0.0\n1,abc\n",
    "k,t\n0,0.0\n2,0.1\n",
    "k,t\n0,0.0\n1,0.2\n2,0.1\n",
    "k,t\n0,0.0\n1\n",
    "k,t\n0,0.0\n1,nan\n",
])
def test_bad_trigger_files(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(IngestionError):
        csv_store.read_triggers(path)


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        csv_store.read_triggers(tmp_path / "absent.csv")


def test_non_uniform_waveform_is_rejected(tmp_path):
    path = tmp_path / "wave.csv"
    path.write_text("t,value\n0.0,1.0\n0.1,2.0\n0.3,3.0\n")
    with pytest.raises(IngestionError):
        csv_store.read_waveform(path)


def test_fold_file_with_bad_sign(tmp_path):
    path = tmp_path / "folds.csv"
    path.write_text("tau,s\n0.1,3\n")
    with pytest.raises(IngestionError):
        csv_store.read_folds(path)


def test_sweep_roundtrip(tmp_path):
    rows = [
        SweepRow(delta=1e-3, err_meds=0.3, err_tau=0.05, trigger_count=400, fold_count=21, detected_count=21),
        SweepRow(delta=3e-3, err_meds=float("inf"), err_tau=100.0, trigger_count=130, fold_count=21,
                 detected_count=0, status="detection_failed"),
    ]
    path = csv_store.write_sweep(tmp_path / "sweep.csv", rows)
    assert csv_store.read_sweep(path) == rows


def test_iteration_rows_and_report():
    detection = DetectionResult(order=3, folds=[DetectedFold(k_m=4, k_M=6, tau_est=0.012, sign_est=-1)])
    trace = IterationTrace(update_norms=[0.1, 0.01], errors=[5.0, 1.0, 0.5], iterations=2, contraction_bound=0.1)
    report = RecoveryReport(order=3, trigger_count=40, t_min=1e-3, t_max=2e-3, detection=detection,
                            trace=trace, error=0.5)
    text = csv_store.render_report(report, {"seed": 7})
    assert text.startswith("[summary]\n")
    assert "seed=7" in text
    assert "err=0.5" in text
    assert "[folds]\ntau_est,s_est,k_m,k_M\n0.012,-1,4,6\n" in text
    assert "[iterations]\niteration,update_norm,error\n0,,5.0\n1,0.1,1.0\n2,0.01,0.5\n" in text
    assert "[conditions]" not in text


def test_format_value():
    assert csv_store.format_value(None) == ""
    assert csv_store.format_value(True) == "True"
    assert csv_store.format_value(np.int64(3)) == "3"
    assert csv_store.format_value(np.float64(0.1)) == "0.1"
    assert float(csv_store.format_value(1 / 3)) == 1 / 3
    assert csv_store.format_value(SweepStatus.FOLD_MISMATCH) == "fold_mismatch"


def test_default_sweep_status_is_written_as_its_value(tmp_path):
    row = SweepRow(delta=2e-3, err_meds=0.4, err_tau=0.1, trigger_count=200, fold_count=5, detected_count=5)
    assert row.status == "ok"
    path = csv_store.write_sweep(tmp_path / "sweep.csv", [row])
    assert path.read_text().splitlines()[1].endswith(",ok")
    assert csv_store.read_sweep(path) == [row]
