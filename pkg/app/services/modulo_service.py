from typing import Sequence, Tuple, Union
import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import ParameterError, UnsupportedStartError
from app.schemas.modulo import FoldRecord, ModuloParams
from app.schemas.signal import BandlimitedSignal
from app.services.signal_service import antiderivative, eval_signal
from app.utils.numerics import refine_crossing

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class FoldedWaveform:
    """
    Output of the modulo-hysteresis, x(t) = g(t) - eps_g(t).

    Callable on arrays. The fold times are its only discontinuities and are
    exposed as `breakpoints` so integrators can split cells there.
    """

    def __init__(self, signal: BandlimitedSignal, folds: FoldRecord, lambda_h: float):
        self.signal = signal
        self.folds = folds
        self.lambda_h = lambda_h
        self._tau = folds.tau
        self._levels = np.concatenate([[0.0], np.cumsum(folds.s)]) * 2.0 * lambda_h

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return tuple(self.folds.times)

    def residue(self, t: ArrayLike) -> np.ndarray:
        """eps_g(t), the staircase of 2 lambda_h steps."""
        times = np.atleast_1d(np.asarray(t, dtype=float))
        return self._levels[np.searchsorted(self._tau, times, side="right")]

    def __call__(self, t: ArrayLike) -> np.ndarray:
        times = np.atleast_1d(np.asarray(t, dtype=float))
        return eval_signal(self.signal, times) - self.residue(times)

    def antiderivative(self, t: ArrayLike) -> np.ndarray:
        """X(t) = G(t) - E_g(t), exact."""
        times = np.atleast_1d(np.asarray(t, dtype=float))
        return antiderivative(self.signal, times) - residue_samples(self.folds, self.lambda_h, times)


def ideal_modulo(value: ArrayLike, threshold: float) -> ArrayLike:
    """Centered modulo into [-lambda, lambda)."""
    if not threshold > 0:
        raise ParameterError(f"threshold must be positive, got {threshold}")
    scaled = np.asarray(value, dtype=float) / (2.0 * threshold) + 0.5
    folded = 2.0 * threshold * (scaled - np.floor(scaled) - 0.5)
    return float(folded) if np.ndim(folded) == 0 else folded


def encode_hysteresis(
    sig: BandlimitedSignal,
    params: ModuloParams,
    scan_points: int = None,
    tol: float = None,
) -> Tuple[FoldRecord, FoldedWaveform]:
    """
    Run g through the modulo-hysteresis on [0, support_end].

    A running offset C starts at 0. Whenever g - C reaches +lambda a fold
    (tau, +1) is recorded and C grows by 2 lambda_h; reaching -lambda records
    (tau, -1) and C shrinks by 2 lambda_h. Crossings are bracketed on a scan
    grid and refined with Brent's method.
    """
    threshold = params.threshold
    step_size = params.fold_step
    start_value = eval_signal(sig, 0.0)
    if abs(start_value) >= threshold:
        raise UnsupportedStartError(
            f"|g(0)| = {abs(start_value):.6g} is not below the threshold {threshold}"
        )

    points = scan_points or settings.SCAN_POINTS_PER_NYQUIST
    tol = tol or settings.CROSSING_TOL
    spacing = (math.pi / sig.bandwidth) / points
    count = max(2, int(math.ceil(sig.support_end / spacing)) + 1)
    nodes = np.linspace(0.0, sig.support_end, count)
    g_nodes = eval_signal(sig, nodes)

    offset = 0.0
    times, signs = [], []
    last_tau = 0.0
    idx = 1
    while idx < count:
        rel = g_nodes[idx:] - offset
        hits = np.flatnonzero((rel >= threshold) | (rel <= -threshold))
        if len(hits) == 0:
            break
        j = idx + int(hits[0])
        sign = 1 if g_nodes[j] - offset >= threshold else -1

        def distance(t: float, sign=sign, offset=offset) -> float:
            return sign * (eval_signal(sig, t) - offset) - threshold

        lo = max(nodes[j - 1], last_tau)
        tau = refine_crossing(distance, lo, nodes[j], distance(lo), distance(nodes[j]), tol)
        if times and tau <= times[-1]:
            tau = np.nextafter(times[-1], np.inf)
        times.append(float(tau))
        signs.append(sign)
        offset += sign * step_size
        last_tau = tau
        idx = j if tau < nodes[j] else j + 1

    folds = FoldRecord(times=times, signs=signs)
    logger.info(f"Modulo-hysteresis produced {folds.count} folds (lambda={threshold}, h={params.hysteresis})")
    return folds, FoldedWaveform(sig, folds, params.lambda_h)


def ideal_fold_times(sig: BandlimitedSignal, threshold: float) -> FoldRecord:
    """Folding instants of the ideal modulo, the h = 0 limit."""
    folds, _ = encode_hysteresis(sig, ModuloParams(threshold=threshold, hysteresis=0.0))
    return folds


def residue_samples(folds: FoldRecord, lambda_h: float, times: Sequence[float]) -> np.ndarray:
    """E_g(t) = 2 lambda_h * sum_r s_r * max(0, t - tau_r), exact."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if folds.count == 0:
        return np.zeros_like(t)
    ramps = np.clip(t[:, None] - folds.tau[None, :], 0.0, None)
    return 2.0 * lambda_h * (ramps @ folds.s)


def min_fold_separation(params: ModuloParams, omega: float, g_sup: float) -> float:
    """Lower bound h* / (Omega g_sup) on the gap between consecutive folds."""
    if not omega > 0 or not g_sup > 0:
        raise ParameterError("bandwidth and amplitude bound must be positive")
    return params.h_star / (omega * g_sup)
