"""
File-backed storage for experiment artifacts.

Every table is a headed CSV. Floats go through repr so reading a file back
gives the exact values that were written. Writes land in a temporary file
next to the target and are moved into place with os.replace.
"""
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union
import csv
import io
import logging
import math
import os
import tempfile

import numpy as np
from pydantic import ValidationError

from app.core.exceptions import IngestionError
from app.schemas.asdm import TriggerTimes
from app.schemas.experiment import SweepRow
from app.schemas.modulo import FoldRecord
from app.schemas.recovery import ConditionReport, DetectionResult, IterationTrace, RecoveryReport
from app.schemas.signal import DenseWaveform

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

WAVEFORM_HEADER = ["t", "value"]
FOLDS_HEADER = ["tau", "s"]
TRIGGERS_HEADER = ["k", "t"]
DETECTED_HEADER = ["tau_est", "s_est", "k_m", "k_M"]
ITERATIONS_HEADER = ["iteration", "update_norm", "error"]
SWEEP_HEADER = ["delta", "err_meds", "err_tau", "trigger_count", "fold_count", "detected_count", "status"]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_text(path: PathLike, text: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except OSError as e:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise IngestionError(f"could not write {target}: {e}") from e
    return target


def write_table(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    target = write_text(path, buffer.getvalue())
    logger.debug(f"Wrote {target}")
    return target


def read_table(path: PathLike, header: Sequence[str]) -> List[List[str]]:
    source = Path(path)
    try:
        with open(source, newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as e:
        raise IngestionError(f"could not read {source}: {e}") from e
    if not rows:
        raise IngestionError(f"{source} is empty")
    found = [cell.strip() for cell in rows[0]]
    if found != list(header):
        raise IngestionError(f"{source}: expected header {','.join(header)}, found {','.join(found)}")
    body = [row for row in rows[1:] if any(cell.strip() for cell in row)]
    for number, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise IngestionError(f"{source}:{number}: expected {len(header)} fields, got {len(row)}")
    return body


def _float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise IngestionError(f"{where}: '{text}' is not a number") from e
    if not math.isfinite(value):
        raise IngestionError(f"{where}: non-finite value '{text}'")
    return value


def _int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise IngestionError(f"{where}: '{text}' is not an integer") from e


def write_waveform(path: PathLike, waveform: DenseWaveform) -> Path:
    return write_table(path, WAVEFORM_HEADER, zip(waveform.times, waveform.values))


def read_waveform(path: PathLike) -> DenseWaveform:
    rows = read_table(path, WAVEFORM_HEADER)
    if len(rows) < 2:
        raise IngestionError(f"{path}: a waveform needs at least two samples")
    times = np.array([_float(r[0], f"{path}:{i + 2}") for i, r in enumerate(rows)])
    values = [_float(r[1], f"{path}:{i + 2}") for i, r in enumerate(rows)]
    steps = np.diff(times)
    step = (times[-1] - times[0]) / (len(times) - 1)
    if step <= 0 or np.max(np.abs(steps - step)) > 1e-9 * max(1.0, abs(times[-1])):
        raise IngestionError(f"{path}: waveform samples are not on a uniform increasing grid")
    return DenseWaveform(start=float(times[0]), step=float(step), samples=values)


def write_folds(path: PathLike, folds: FoldRecord) -> Path:
    return write_table(path, FOLDS_HEADER, zip(folds.times, folds.signs))


def read_folds(path: PathLike) -> FoldRecord:
    rows = read_table(path, FOLDS_HEADER)
    times = [_float(r[0], f"{path}:{i + 2}") for i, r in enumerate(rows)]
    signs = [_int(r[1], f"{path}:{i + 2}") for i, r in enumerate(rows)]
    try:
        return FoldRecord(times=times, signs=signs)
    except ValidationError as e:
        raise IngestionError(f"{path}: invalid fold record ({e.errors()[0]['msg']})") from e


def write_triggers(path: PathLike, triggers: TriggerTimes) -> Path:
    return write_table(path, TRIGGERS_HEADER, enumerate(triggers.times))


def read_triggers(path: PathLike) -> TriggerTimes:
    """Trigger times in `k,t` form, from the simulator or an external acquisition."""
    rows = read_table(path, TRIGGERS_HEADER)
    if not rows:
        raise IngestionError(f"{path}: no trigger times")
    indices = [_int(r[0], f"{path}:{i + 2}") for i, r in enumerate(rows)]
    times = [_float(r[1], f"{path}:{i + 2}") for i, r in enumerate(rows)]
    if indices != list(range(len(indices))):
        raise IngestionError(f"{path}: trigger indices must run 0, 1, 2, ... without gaps")
    bad = next((i for i in range(1, len(times)) if times[i] <= times[i - 1]), None)
    if bad is not None:
        raise IngestionError(f"{path}: trigger times not strictly increasing at k={bad}")
    return TriggerTimes(times=times)


def write_detected(path: PathLike, detection: DetectionResult) -> Path:
    rows = ((f.tau_est, f.sign_est, f.k_m, f.k_M) for f in detection.folds)
    return write_table(path, DETECTED_HEADER, rows)


def write_iterations(path: PathLike, trace: IterationTrace) -> Path:
    return write_table(path, ITERATIONS_HEADER, _iteration_rows(trace))


def _iteration_rows(trace: IterationTrace) -> List[Tuple]:
    rows = []
    errors = trace.errors or []
    if errors:
        rows.append((0, None, errors[0]))
    for n, norm in enumerate(trace.update_norms, start=1):
        rows.append((n, norm, errors[n] if n < len(errors) else None))
    return rows


def write_sweep(path: PathLike, rows: Sequence[SweepRow]) -> Path:
    return write_table(
        path,
        SWEEP_HEADER,
        ((r.delta, r.err_meds, r.err_tau, r.trigger_count, r.fold_count, r.detected_count, r.status) for r in rows),
    )


def read_sweep(path: PathLike) -> List[SweepRow]:
    rows = read_table(path, SWEEP_HEADER)
    result = []
    for i, r in enumerate(rows):
        where = f"{path}:{i + 2}"
        result.append(SweepRow(
            delta=_float(r[0], where),
            err_meds=float(r[1]),
            err_tau=float(r[2]),
            trigger_count=_int(r[3], where),
            fold_count=_int(r[4], where),
            detected_count=_int(r[5], where),
            status=r[6],
        ))
    return result


def _csv_block(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def _conditions_block(conditions: ConditionReport) -> str:
    lines = [
        f"order={conditions.order}",
        f"g_sup={format_value(conditions.g_sup)}",
        f"C={format_value(conditions.C)}",
        f"t_min={format_value(conditions.t_min)}",
        f"t_max={format_value(conditions.t_max)}",
        f"s1={'pass' if conditions.s1_pass else 'fail'} lhs={format_value(conditions.s1_lhs)} "
        f"rhs={format_value(conditions.s1_rhs)} margin={format_value(conditions.s1_margin)}",
        f"s2={'pass' if conditions.s2_pass else 'fail'} lhs={format_value(conditions.s2_lhs)} "
        f"rhs={format_value(conditions.s2_rhs)} margin={format_value(conditions.s2_margin)}",
        f"delta={format_value(conditions.delta)} delta_bound={format_value(conditions.delta_bound)} "
        f"margin={format_value(conditions.delta_margin)} kappa={format_value(conditions.kappa)} "
        f"delta_check={'pass' if conditions.delta_pass else 'fail'}",
    ]
    return "\n".join(lines) + "\n"


def render_conditions(conditions: ConditionReport) -> str:
    return "[conditions]\n" + _conditions_block(conditions)


def render_summary(values: dict) -> str:
    return "[summary]\n" + "\n".join(f"{key}={format_value(value)}" for key, value in values.items()) + "\n"


def render_report(report: RecoveryReport, extra: Optional[dict] = None) -> str:
    """Structured text: summary, detected folds, iteration trace, condition block."""
    summary = {
        "order": report.order,
        "trigger_count": report.trigger_count,
        "t_min": report.t_min,
        "t_max": report.t_max,
        "fold_count": report.fold_count,
        "classical": report.classical,
        "iterations": report.trace.iterations,
    }
    if report.error is not None:
        summary["err"] = report.error
    if report.error_bound is not None:
        summary["error_bound"] = report.error_bound
    summary.update(extra or {})

    parts = [render_summary(summary)]
    parts.append("[folds]\n" + _csv_block(
        DETECTED_HEADER, ((f.tau_est, f.sign_est, f.k_m, f.k_M) for f in report.detection.folds)
    ))
    if report.trace.errors is not None:
        parts.append("[iterations]\n" + _csv_block(ITERATIONS_HEADER, _iteration_rows(report.trace)))
    if report.conditions is not None:
        parts.append(render_conditions(report.conditions))
    return "\n".join(parts)
