from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import ConfigurationError, InsufficientDataError, ParameterError
from app.schemas.asdm import AsdmParams, SampleSeries, TriggerTimes
from app.schemas.modulo import FoldRecord, ModuloParams
from app.schemas.recovery import RecoveryConfig
from app.schemas.signal import BandlimitedSignal, DenseWaveform
from app.services.modulo_service import FoldedWaveform, encode_hysteresis
from app.services.reconstruction_service import local_average_reconstruct
from app.utils.numerics import gauss_cells, gauss_partial, integrate_piecewise, refine_crossing

logger = logging.getLogger(__name__)

Waveform = Callable[[np.ndarray], np.ndarray]

_SEARCH_CHUNK = 4096


def _integration_nodes(
    input: Waveform,
    params: AsdmParams,
    duration: float,
    bandwidth: Optional[float],
    breakpoints: Sequence[float],
) -> np.ndarray:
    # the cell must resolve both the input and the shortest possible interval
    scan_step = math.pi / (64.0 * bandwidth) if bandwidth else duration / 4096.0
    scan = np.linspace(0.0, duration, max(2, int(math.ceil(duration / scan_step)) + 1))
    sup = float(np.max(np.abs(input(scan))))
    t_min = 2.0 * params.delta / (params.b + sup)
    step = min(scan_step, t_min / 16.0)
    nodes = np.linspace(0.0, duration, max(2, int(math.ceil(duration / step)) + 1))
    inner = [p for p in breakpoints if 0.0 < p < duration]
    if inner:
        nodes = np.unique(np.concatenate([nodes, np.asarray(inner, dtype=float)]))
    return nodes


def encode_asdm(
    input: Waveform,
    params: AsdmParams,
    duration: float,
    bandwidth: Optional[float] = None,
    breakpoints: Sequence[float] = (),
    tol: Optional[float] = None,
) -> TriggerTimes:
    """
    Trigger times of the asynchronous sigma-delta modulator on [0, duration].

    The integrator starts at -delta with feedback +b. Over the k-th interval
    the comparator fires when (-1)^k (I(t) - I(t_k)) + b (t - t_k) reaches
    2 delta, I being the running integral of the input. Running integrals
    use Gauss-Legendre cells with the input's discontinuities
    (`breakpoints`) on cell boundaries.
    """
    if not duration > 0:
        raise ParameterError(f"duration must be positive, got {duration}")
    tol = tol or settings.CROSSING_TOL
    threshold = 2.0 * params.delta
    b = params.b

    nodes = _integration_nodes(input, params, duration, bandwidth, breakpoints)
    running = np.concatenate([[0.0], np.cumsum(gauss_cells(input, nodes))])
    last = len(nodes) - 1

    def integral_to(t: float, cell: int) -> float:
        return running[cell] + gauss_partial(input, nodes[cell], t)

    times: List[float] = [0.0]
    t_k, i_k, cell_k = 0.0, 0.0, 0
    k = 0
    while cell_k < last:
        sigma = 1.0 if k % 2 == 0 else -1.0
        level = sigma * i_k + b * t_k
        hit = None
        lo_idx = cell_k + 1
        while lo_idx <= last:
            hi_idx = min(last, lo_idx + _SEARCH_CHUNK - 1)
            climb = sigma * running[lo_idx:hi_idx + 1] + b * nodes[lo_idx:hi_idx + 1] - level
            found = np.flatnonzero(climb >= threshold)
            if len(found):
                hit = lo_idx + int(found[0])
                break
            lo_idx = hi_idx + 1
        if hit is None:
            break

        cell = hit - 1

        def excess(t: float, sigma=sigma, cell=cell, t_k=t_k, i_k=i_k) -> float:
            return sigma * (integral_to(t, cell) - i_k) + b * (t - t_k) - threshold

        lo = max(nodes[cell], t_k)
        t_next = refine_crossing(excess, lo, nodes[hit], excess(lo), excess(nodes[hit]), tol)
        if t_next <= t_k:
            t_next = float(np.nextafter(t_k, np.inf))
        i_k = integral_to(t_next, cell)
        t_k = float(t_next)
        cell_k = cell
        times.append(t_k)
        k += 1

    triggers = TriggerTimes(times=times)
    logger.info(f"ASDM produced {triggers.count} triggers on [0, {duration:.6g}] (delta={params.delta}, b={b})")
    return triggers


def t_transform_residuals(
    input: Waveform,
    triggers: TriggerTimes,
    params: AsdmParams,
    breakpoints: Sequence[float] = (),
) -> np.ndarray:
    """Per interval, |integral of x + (-1)^k b over [t_k, t_k+1] - (-1)^k 2 delta| for each k."""
    t = triggers.t
    if len(t) < 2:
        return np.zeros(0)
    if hasattr(input, "antiderivative"):
        primitive = np.asarray(input.antiderivative(t), dtype=float)
        integrals = np.diff(primitive)
    else:
        step = float(np.min(np.diff(t))) / 8.0
        integrals = np.array([
            integrate_piecewise(input, a, c, step, breakpoints) for a, c in zip(t[:-1], t[1:])
        ])
    sigma = np.where(np.arange(len(t) - 1) % 2 == 0, 1.0, -1.0)
    return np.abs(integrals + sigma * params.b * np.diff(t) - sigma * 2.0 * params.delta)


def t_transform_residual(
    input: Waveform,
    triggers: TriggerTimes,
    params: AsdmParams,
    breakpoints: Sequence[float] = (),
) -> float:
    """Largest t-transform residual, 0 when there is no complete interval."""
    residuals = t_transform_residuals(input, triggers, params, breakpoints)
    return float(residuals.max()) if len(residuals) else 0.0


def dynamic_range(params: AsdmParams, omega: float) -> float:
    """Largest input amplitude b - 2 delta Omega / pi the ASDM recovers classically."""
    if not omega > 0:
        raise ParameterError(f"bandwidth must be positive, got {omega}")
    limit = params.b - 2.0 * params.delta * omega / math.pi
    if limit <= 0:
        raise ConfigurationError(
            f"delta={params.delta} is too large for b={params.b} at Omega={omega}: no usable dynamic range"
        )
    return limit


def sample_series(triggers: TriggerTimes, params: AsdmParams) -> SampleSeries:
    """
    q_k = (-1)^k (2 delta - b (t_k+1 - t_k)), the integral of x over the
    k-th interval, and X(t_k) as its running sum from X(t_0) = 0.
    """
    if len(triggers.times) < 2:
        raise InsufficientDataError("need at least two trigger times to form samples")
    gaps = triggers.gaps
    sigma = np.where(np.arange(len(gaps)) % 2 == 0, 1.0, -1.0)
    q = sigma * (2.0 * params.delta - params.b * gaps)
    x = np.concatenate([[0.0], np.cumsum(q)])
    return SampleSeries(q=q.tolist(), X=x.tolist())


def classical_decode(
    triggers: TriggerTimes,
    params: AsdmParams,
    omega: float,
    config: Optional[RecoveryConfig] = None,
    window: Optional[Tuple[float, float]] = None,
    reference: Optional[DenseWaveform] = None,
) -> DenseWaveform:
    """
    Conventional ASDM decoding: local-average reconstruction from q_k alone.

    Used as the baseline for saturated inputs, so sparse trigger sets only
    warn instead of failing.
    """
    series = sample_series(triggers, params)
    waveform, trace = local_average_reconstruct(
        series.q, triggers, omega, config, window=window, reference=reference, enforce_density=False
    )
    logger.info(f"Classical decode finished after {trace.iterations} iterations")
    return waveform


def encode_meds(
    sig: BandlimitedSignal,
    modulo: ModuloParams,
    asdm: AsdmParams,
) -> Tuple[FoldRecord, FoldedWaveform, TriggerTimes]:
    """Modulo-hysteresis followed by the ASDM: g -> x -> {t_k}."""
    folds, folded = encode_hysteresis(sig, modulo)
    triggers = encode_asdm(folded, asdm, sig.support_end, sig.bandwidth, folded.breakpoints)
    return folds, folded, triggers
