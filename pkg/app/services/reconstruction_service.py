"""
Local-average reconstruction of a bandlimited function from its integrals
over consecutive trigger intervals.

Every iterate lives in the span of sinc_W(t - s_k), s_k the interval
midpoints and W = oversampling * Omega the reconstruction bandwidth, so the
fixed-point map g <- g + g_0 - S_W[L g] reduces to a linear recursion on
coefficients. The local-average operator on that span has an exact matrix
in terms of the sine integral. A signal of bandwidth Omega also lies in
PW_W, so any W with T_max < pi/W keeps the iteration contractive.

On a finite trigger set every update obeys
||d_n+1|| <= q ||d_n||_[t_0, t_K] + ||d_n||_outside with q = T_max W / pi, so
the per-step ratio q only binds for energy inside the trigger span.
"""
from typing import Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import sici

from app.core.exceptions import DensityViolationError, InsufficientDataError, ShapeError
from app.schemas.asdm import TriggerTimes
from app.schemas.recovery import IterationTrace, RecoveryConfig
from app.schemas.signal import DenseWaveform
from app.services.signal_service import relative_error, sinc_omega
from app.utils.numerics import gauss_cells

logger = logging.getLogger(__name__)


def check_density(triggers: TriggerTimes, omega: float) -> Tuple[float, float]:
    """Return (T_max, pi/Omega); the iteration contracts only when T_max < pi/Omega."""
    return triggers.t_max, math.pi / omega


def local_average_matrix(t: np.ndarray, omega: float, radius: float) -> np.ndarray:
    """A[j, k] = integral over [t_j, t_j+1] of sinc_Omega(u - s_k) du."""
    mids = 0.5 * (t[:-1] + t[1:])
    upper = sici(omega * (t[1:, None] - mids[None, :]))[0]
    lower = sici(omega * (t[:-1, None] - mids[None, :]))[0]
    matrix = (upper - lower) / math.pi
    if np.isfinite(radius):
        matrix[np.abs(mids[:, None] - mids[None, :]) > radius] = 0.0
    return matrix


def synthesis_matrix(times: np.ndarray, mids: np.ndarray, omega: float, radius: float) -> np.ndarray:
    diff = times[:, None] - mids[None, :]
    matrix = sinc_omega(diff, omega)
    if np.isfinite(radius):
        matrix[np.abs(diff) > radius] = 0.0
    return matrix


SPAN_SUBCELLS = 8


def span_norms(coefficients: np.ndarray, t: np.ndarray, omega: float) -> Tuple[float, float]:
    """
    Norms of f = sum_k c_k sinc_Omega(. - s_k) on the whole line and on [t_0, t_K].

    The whole-line norm is exact through the Gram matrix sinc_Omega(s_j - s_k).
    The in-span norm is a Gauss-Legendre sum over every trigger interval
    split into SPAN_SUBCELLS cells.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    mids = 0.5 * (t[:-1] + t[1:])
    gram = sinc_omega(mids[:, None] - mids[None, :], omega)
    full = float(coefficients @ gram @ coefficients)

    fractions = np.arange(SPAN_SUBCELLS) / SPAN_SUBCELLS
    nodes = np.append((t[:-1, None] + np.diff(t)[:, None] * fractions[None, :]).ravel(), t[-1])

    def energy(u: np.ndarray) -> np.ndarray:
        return (sinc_omega(u[:, None] - mids[None, :], omega) @ coefficients) ** 2

    inside = float(np.sum(gauss_cells(energy, nodes)))
    return math.sqrt(max(full, 0.0)), math.sqrt(max(inside, 0.0))


def _norm(values: np.ndarray, step: float) -> float:
    if len(values) < 2:
        return float(np.sqrt(np.sum(values * values) * step))
    return float(math.sqrt(trapezoid(values * values, dx=step)))


def local_average_reconstruct(
    increments: Sequence[float],
    triggers: TriggerTimes,
    omega: float,
    config: Optional[RecoveryConfig] = None,
    window: Optional[Tuple[float, float]] = None,
    reference: Optional[DenseWaveform] = None,
    enforce_density: bool = True,
) -> Tuple[DenseWaveform, IterationTrace]:
    """
    Reconstruct g from Delta G[k] = integral of g over [t_k, t_k+1].

    The result is sampled on `window` (default [t_0, t_K]) at
    `config.points_per_nyquist` points per pi/Omega; kernels, the density
    check and the contraction bound use `config.bandwidth(omega)`. A `reference` waveform
    takes precedence: the result is sampled on its grid and the trace
    carries the error of every iterate.
    """
    config = config or RecoveryConfig()
    t = triggers.t
    if len(t) < 2:
        raise InsufficientDataError("local-average reconstruction needs at least two trigger times")
    incr = np.asarray(increments, dtype=float)
    if incr.shape != (len(t) - 1,):
        raise ShapeError(f"expected {len(t) - 1} increments, got {incr.size}")

    bandwidth = config.bandwidth(omega)
    t_max, limit = check_density(triggers, bandwidth)
    if t_max >= limit:
        if enforce_density:
            raise DensityViolationError(t_max, limit)
        logger.warning(f"Trigger density below Nyquist (T_max={t_max:.6g} >= {limit:.6g}); result may diverge")

    if reference is not None:
        start, step, count = reference.start, reference.step, len(reference.samples)
    else:
        start, end = window if window is not None else (float(t[0]), float(t[-1]))
        step = (math.pi / omega) / config.points_per_nyquist
        count = int(math.floor((end - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(count)

    radius = config.sinc_radius * math.pi / bandwidth
    mids = 0.5 * (t[:-1] + t[1:])
    average = local_average_matrix(t, bandwidth, radius)
    synth = synthesis_matrix(grid, mids, bandwidth, radius)

    def waveform(coefficients: np.ndarray) -> DenseWaveform:
        return DenseWaveform(start=start, step=step, samples=(synth @ coefficients).tolist())

    c0 = incr.copy()
    coefficients = c0.copy()
    base_norm = _norm(synth @ c0, step)
    update_norms = []
    update_split = [] if config.span_energy else None
    errors = [relative_error(reference, waveform(coefficients))] if reference is not None else None

    for n in range(config.iterations):
        updated = coefficients + c0 - average @ coefficients
        change = _norm(synth @ (updated - coefficients), step)
        if update_split is not None:
            update_split.append(span_norms(updated - coefficients, t, bandwidth))
        coefficients = updated
        update_norms.append(change)
        if errors is not None:
            errors.append(relative_error(reference, waveform(coefficients)))
        if change <= config.tolerance * base_norm:
            break

    trace = IterationTrace(
        update_norms=update_norms,
        errors=errors,
        iterations=len(update_norms),
        contraction_bound=t_max * bandwidth / math.pi,
        update_split=update_split,
    )
    logger.debug(f"Reconstruction ran {trace.iterations} iterations over {len(mids)} intervals")
    return waveform(coefficients), trace
