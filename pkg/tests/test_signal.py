import math

import numpy as np
import pytest
from scipy.integrate import quad

from app.core.exceptions import DomainError, ParameterError, ShapeError
from app.schemas.signal import BandlimitedSignal, DenseWaveform
from app.services.signal_service import (
    antiderivative,
    eval_derivative,
    eval_signal,
    integrate_signal,
    l2_norm,
    make_random_bandlimited,
    make_sinusoid,
    peak_amplitude,
    relative_error,
    sample_waveform,
    signal_callable,
    sinc_omega,
)

OMEGA = 150.0


def test_sinc_at_origin():
    assert sinc_omega(0.0, OMEGA) == pytest.approx(OMEGA / math.pi)
    assert sinc_omega(math.pi / OMEGA, OMEGA) == pytest.approx(0.0, abs=1e-12)


def test_eval_on_grid_point_returns_scaled_coefficient():
    sig = BandlimitedSignal(coefficients=[0.0, 0.7, 0.0], bandwidth=OMEGA, amplitude=2.0, support_end=0.05)
    assert eval_signal(sig, math.pi / OMEGA) == pytest.approx(2.0 * 0.7 * OMEGA / math.pi)
    assert eval_signal(sig, 2 * math.pi / OMEGA) == pytest.approx(0.0, abs=1e-9)


def test_eval_matches_term_by_term_sum(rng):
    sig = make_random_bandlimited(5, OMEGA, 0.13, 10.0)
    for t in rng.uniform(-0.05, 0.2, 200):
        expected = 0.0
        for n, c in enumerate(sig.coefficients):
            u = t - n * math.pi / OMEGA
            expected += sig.amplitude * c * (math.sin(OMEGA * u) / (math.pi * u) if u != 0 else OMEGA / math.pi)
        assert eval_signal(sig, t) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_random_signal_is_deterministic_and_normalised():
    first = make_random_bandlimited(7, OMEGA, 0.13, 34.6)
    second = make_random_bandlimited(7, OMEGA, 0.13, 34.6)
    assert first == second
    assert peak_amplitude(signal_callable(first), 0.0, 0.13, OMEGA) == pytest.approx(34.6, rel=1e-6)
    assert make_random_bandlimited(8, OMEGA, 0.13, 34.6) != first


def test_quiet_edges_start_at_zero():
    sig = make_random_bandlimited(11, OMEGA, 0.13, 34.6)
    assert sig.coefficients[0] == 0.0
    assert sig.coefficients[-1] == 0.0
    assert abs(eval_signal(sig, 0.0)) < 1e-9


@pytest.mark.parametrize("omega,duration", [(0.0, 0.1), (-1.0, 0.1), (OMEGA, 0.0)])
def test_invalid_generation_parameters(omega, duration):
    with pytest.raises(ParameterError):
        make_random_bandlimited(0, omega, duration, 1.0)


def test_integral_is_additive(rng):
    sig = make_random_bandlimited(2, OMEGA, 0.13, 34.6)
    for _ in range(200):
        a, b, c = np.sort(rng.uniform(0.0, 0.13, 3))
        whole = integrate_signal(sig, a, c)
        parts = integrate_signal(sig, a, b) + integrate_signal(sig, b, c)
        assert whole == pytest.approx(parts, abs=1e-10 * 34.6)


def test_integral_matches_adaptive_quadrature():
    sig = make_random_bandlimited(4, OMEGA, 0.13, 34.6)
    for a, b in [(0.0, 0.13), (0.01, 0.02), (0.05, 0.051), (0.1, 0.13)]:
        expected, _ = quad(lambda x: eval_signal(sig, x), a, b, limit=400, epsabs=1e-12, epsrel=1e-12)
        assert integrate_signal(sig, a, b) == pytest.approx(expected, abs=1e-8)


def test_integral_bounds():
    sig = make_random_bandlimited(0, OMEGA, 0.13, 1.0)
    assert integrate_signal(sig, 0.05, 0.05) == 0.0
    with pytest.raises(ParameterError):
        integrate_signal(sig, 0.1, 0.05)


def test_antiderivative_matches_integral():
    sig = make_random_bandlimited(9, OMEGA, 0.13, 20.0)
    times = np.linspace(0.0, 0.13, 17)
    primitive = antiderivative(sig, times)
    for t, value in zip(times, primitive):
        assert value == pytest.approx(integrate_signal(sig, 0.0, t), abs=1e-12)


def test_sinusoid_closed_forms():
    sig = make_sinusoid(2.0, 125.0, 0.1, phase=0.004)
    assert eval_signal(sig, 0.004) == pytest.approx(0.0, abs=1e-12)
    expected = 2.0 * (math.cos(125.0 * -0.004) - math.cos(125.0 * (0.05 - 0.004))) / 125.0
    assert integrate_signal(sig, 0.0, 0.05) == pytest.approx(expected)
    assert peak_amplitude(signal_callable(sig), 0.0, 0.1, 125.0) == pytest.approx(2.0, rel=1e-9)


def test_derivative_matches_finite_difference(rng):
    sig = make_random_bandlimited(1, OMEGA, 0.13, 34.6)
    step = 1e-7
    for t in rng.uniform(0.0, 0.13, 50):
        slope = (eval_signal(sig, t + step) - eval_signal(sig, t - step)) / (2 * step)
        assert eval_derivative(sig, t) == pytest.approx(slope, rel=1e-5, abs=1e-4)


def test_slope_stays_within_bernstein_bound():
    rng = np.random.default_rng(7)
    for seed in range(200):
        duration = rng.uniform(0.05, 0.2)
        sig = make_random_bandlimited(seed, OMEGA, duration, rng.uniform(1.0, 40.0))
        # the bound uses the global supremum, so look beyond the support
        g_sup = peak_amplitude(signal_callable(sig), -duration, 2 * duration, OMEGA)
        times = np.linspace(0.0, duration, 2001)
        slope = np.max(np.abs(eval_derivative(sig, times)))
        assert slope <= OMEGA * g_sup * (1 + 1e-6)



def test_sample_waveform_grid():
    sig = make_sinusoid(1.0, OMEGA, 0.1)
    wave = sample_waveform(signal_callable(sig), 0.0, 0.1, OMEGA, points_per_nyquist=8)
    assert wave.step == pytest.approx(math.pi / OMEGA / 8)
    assert wave.end <= 0.1 + 1e-12
    assert np.allclose(wave.values, np.sin(OMEGA * wave.times))


def test_relative_error():
    reference = DenseWaveform(start=0.0, step=0.01, samples=np.sin(np.linspace(0, 3, 301)).tolist())
    half = DenseWaveform(start=0.0, step=0.01, samples=(0.5 * reference.values).tolist())
    assert relative_error(reference, reference) == 0.0
    assert relative_error(reference, half) == pytest.approx(50.0)


def test_relative_error_rejects_bad_inputs():
    reference = DenseWaveform(start=0.0, step=0.01, samples=[1.0, 2.0, 3.0])
    shifted = DenseWaveform(start=0.005, step=0.01, samples=[1.0, 2.0, 3.0])
    zero = DenseWaveform(start=0.0, step=0.01, samples=[0.0, 0.0, 0.0])
    with pytest.raises(ShapeError):
        relative_error(reference, shifted)
    with pytest.raises(DomainError):
        relative_error(zero, reference)
    assert l2_norm(zero) == 0.0
