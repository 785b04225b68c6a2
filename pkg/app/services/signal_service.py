from typing import Callable, Union
import logging
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar
from scipy.special import sici

from app.core.config import settings
from app.core.exceptions import DomainError, ParameterError, ShapeError
from app.schemas.signal import BandlimitedSignal, DenseWaveform

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Waveform = Callable[[np.ndarray], np.ndarray]


def sinc_omega(u: ArrayLike, omega: float) -> np.ndarray:
    """sinc_Omega(u) = sin(Omega u) / (pi u), equal to Omega/pi at u = 0."""
    return (omega / math.pi) * np.sinc(omega * np.asarray(u, dtype=float) / math.pi)


def _sinc_derivative(u: np.ndarray, omega: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    nz = np.abs(u) > 1e-12
    x = u[nz]
    out[nz] = (omega * x * np.cos(omega * x) - np.sin(omega * x)) / (math.pi * x * x)
    return out


def make_random_bandlimited(
    seed: int,
    omega: float,
    duration: float,
    amplitude: float,
    quiet_edges: bool = True,
) -> BandlimitedSignal:
    """
    Random sinc series on the Nyquist grid points inside [0, duration].

    Coefficients are drawn from U[-1, 1], the series is normalised to a unit
    peak on [0, duration] and then scaled by `amplitude`. With `quiet_edges`
    the first and last coefficients are zero, so g(0) = 0.
    """
    if not omega > 0:
        raise ParameterError(f"bandwidth must be positive, got {omega}")
    if not duration > 0:
        raise ParameterError(f"duration must be positive, got {duration}")

    spacing = math.pi / omega
    count = int(math.floor(duration / spacing + 1e-12)) + 1
    rng = np.random.default_rng(seed)
    coefficients = rng.uniform(-1.0, 1.0, count)
    if quiet_edges and count >= 3:
        coefficients[0] = 0.0
        coefficients[-1] = 0.0

    raw = BandlimitedSignal(
        coefficients=coefficients.tolist(),
        bandwidth=omega,
        amplitude=1.0,
        support_end=duration,
    )
    peak = peak_amplitude(lambda t: eval_signal(raw, t), 0.0, duration, omega)
    if peak == 0.0:
        logger.warning(f"Seed {seed} produced an all-zero series; leaving it unnormalised")
        peak = 1.0

    signal = BandlimitedSignal(
        coefficients=(coefficients / peak).tolist(),
        bandwidth=omega,
        amplitude=amplitude,
        support_end=duration,
        normalization=1.0 / peak,
    )
    logger.debug(f"Generated bandlimited signal: seed={seed}, terms={count}, peak={amplitude}")
    return signal


def make_sinusoid(amplitude: float, omega: float, duration: float, phase: float = 0.0) -> BandlimitedSignal:
    """g(t) = A sin(Omega (t - phase)), the single-tone test input."""
    if not omega > 0:
        raise ParameterError(f"bandwidth must be positive, got {omega}")
    if not duration > 0:
        raise ParameterError(f"duration must be positive, got {duration}")
    return BandlimitedSignal(
        coefficients=[1.0],
        bandwidth=omega,
        amplitude=amplitude,
        support_end=duration,
        offset=phase,
        kind="sinusoid",
    )


def eval_signal(sig: BandlimitedSignal, t: ArrayLike) -> ArrayLike:
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if sig.kind == "sinusoid":
        values = sig.amplitude * np.sin(sig.bandwidth * (times - sig.offset))
    else:
        u = times[:, None] - sig.centers[None, :]
        values = sinc_omega(u, sig.bandwidth) @ sig.weights
    return float(values[0]) if scalar else values


def eval_derivative(sig: BandlimitedSignal, t: ArrayLike) -> ArrayLike:
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if sig.kind == "sinusoid":
        values = sig.amplitude * sig.bandwidth * np.cos(sig.bandwidth * (times - sig.offset))
    else:
        u = times[:, None] - sig.centers[None, :]
        values = _sinc_derivative(u, sig.bandwidth) @ sig.weights
    return float(values[0]) if scalar else values


class SignalWaveform:
    """g as a callable, with its exact running integral attached."""

    def __init__(self, sig: BandlimitedSignal):
        self.signal = sig

    def __call__(self, t: ArrayLike) -> np.ndarray:
        return np.atleast_1d(eval_signal(self.signal, np.asarray(t, dtype=float)))

    def antiderivative(self, t: ArrayLike) -> np.ndarray:
        return np.atleast_1d(antiderivative(self.signal, np.asarray(t, dtype=float)))


def signal_callable(sig: BandlimitedSignal) -> SignalWaveform:
    return SignalWaveform(sig)


def antiderivative(sig: BandlimitedSignal, t: ArrayLike) -> ArrayLike:
    """G(t) = integral of g from 0 to t, in closed form."""
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    omega = sig.bandwidth
    if sig.kind == "sinusoid":
        values = sig.amplitude * (np.cos(omega * sig.offset) - np.cos(omega * (times - sig.offset))) / omega
    else:
        upper = sici(omega * (times[:, None] - sig.centers[None, :]))[0]
        lower = sici(-omega * sig.centers)[0]
        values = ((upper - lower[None, :]) / math.pi) @ sig.weights
    return float(values[0]) if scalar else values


def integrate_signal(sig: BandlimitedSignal, a: float, b: float) -> float:
    """Integral of g over [a, b] via the sine integral."""
    if a > b:
        raise ParameterError(f"integration bounds reversed: [{a}, {b}]")
    if a == b:
        return 0.0
    omega = sig.bandwidth
    if sig.kind == "sinusoid":
        return float(sig.amplitude * (np.cos(omega * (a - sig.offset)) - np.cos(omega * (b - sig.offset))) / omega)
    si_b = sici(omega * (b - sig.centers))[0]
    si_a = sici(omega * (a - sig.centers))[0]
    return float(((si_b - si_a) / math.pi) @ sig.weights)


def peak_amplitude(
    fn: Waveform,
    start: float,
    end: float,
    omega: float,
    points_per_nyquist: int = None,
) -> float:
    """
    max |fn| on [start, end].

    Grid search at `points_per_nyquist` points per pi/Omega, then a
    golden-section refinement around the best grid point.
    """
    points = points_per_nyquist or settings.PEAK_POINTS_PER_NYQUIST
    step = (math.pi / omega) / points
    count = max(2, int(math.ceil((end - start) / step)) + 1)
    grid = np.linspace(start, end, count)
    magnitude = np.abs(fn(grid))
    best = int(np.argmax(magnitude))
    peak = float(magnitude[best])
    if 0 < best < count - 1:
        try:
            result = minimize_scalar(
                lambda x: -abs(float(np.atleast_1d(fn(np.array([x])))[0])),
                bracket=(grid[best - 1], grid[best], grid[best + 1]),
                method="golden",
            )
            if start <= result.x <= end:
                peak = max(peak, -float(result.fun))
        except ValueError:
            # flat neighbourhood, the grid value stands
            pass
    return peak


def sample_waveform(
    fn: Waveform,
    start: float,
    end: float,
    omega: float,
    points_per_nyquist: int = None,
) -> DenseWaveform:
    points = points_per_nyquist or settings.DENSE_POINTS_PER_NYQUIST
    step = (math.pi / omega) / points
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    times = start + step * np.arange(count)
    return DenseWaveform(start=start, step=step, samples=np.asarray(fn(times), dtype=float).tolist())


def l2_norm(waveform: DenseWaveform) -> float:
    values = waveform.values
    if len(values) < 2:
        return 0.0
    return float(math.sqrt(trapezoid(values * values, dx=waveform.step)))


def relative_error(reference: DenseWaveform, estimate: DenseWaveform) -> float:
    """100 * ||g - g_est||_2 / ||g||_2 on a shared grid, in percent."""
    if not reference.same_grid(estimate):
        raise ShapeError(
            f"waveform grids differ: {len(reference.samples)} vs {len(estimate.samples)} samples"
        )
    reference_norm = l2_norm(reference)
    if reference_norm == 0.0:
        raise DomainError("reference waveform has zero norm")
    difference = DenseWaveform(
        start=reference.start,
        step=reference.step,
        samples=(reference.values - estimate.values).tolist(),
    )
    return 100.0 * l2_norm(difference) / reference_norm
