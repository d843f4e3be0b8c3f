"""Тесты синтеза chirp-сигналов"""

import math

import numpy as np
import pytest

from chirp.errors import ChirpDomainError
from chirp.waveform import (
    ChirpDirection,
    ChirpFamily,
    ChirpSet,
    chirp_phase,
    frequency_extent,
    gen_chirp,
    gen_delayed_chirp,
    gen_stream,
    instantaneous_frequency,
    stream_symbol_index,
    tf_trace,
)


def test_chirp_set_derived_quantities(linear_set):
    assert linear_set.bandwidth == 20.0
    assert linear_set.samples_per_symbol == 80
    assert linear_set.sample_rate == 80.0
    assert linear_set.sample_interval == pytest.approx(1 / 80, rel=1e-15)


def test_chirp_set_validation():
    with pytest.raises(ChirpDomainError):
        ChirpSet(n_signals=0, symbol_duration=1.0)
    with pytest.raises(ChirpDomainError):
        ChirpSet(n_signals=10, symbol_duration=-1.0)
    with pytest.raises(ChirpDomainError):
        ChirpSet(n_signals=10, symbol_duration=1.0, oversampling=0)
    with pytest.raises(ChirpDomainError):
        ChirpSet(n_signals=10, symbol_duration=1.0, nonlinearity_gain=-0.1)
    with pytest.raises(ChirpDomainError):
        ChirpSet(n_signals=10, symbol_duration=1.0, family="cubic")


def test_family_accepts_string():
    chirp_set = ChirpSet(n_signals=4, symbol_duration=1.0, family="Quartic")
    assert chirp_set.family is ChirpFamily.QUARTIC


def test_user_coefficient_spans_unit_interval(linear_set):
    assert linear_set.user_coefficient(0) == pytest.approx(-1.0)
    assert linear_set.user_coefficient(9) == pytest.approx(1.0)
    assert ChirpSet(n_signals=1, symbol_duration=1.0).user_coefficient(0) == 0.0


def test_first_sample_of_user_zero(linear_set):
    sample = gen_chirp(linear_set, 0).samples[0]
    assert sample.real == pytest.approx(math.cos(math.pi / 4), abs=1e-12)
    assert sample.imag == pytest.approx(math.sin(math.pi / 4), abs=1e-12)


def test_phase_at_origin_for_user_three(linear_set):
    phase = chirp_phase(linear_set, 3, 0.0)
    assert phase == pytest.approx(math.pi / 4 + 0.9 * math.pi, abs=1e-12)
    sample = gen_chirp(linear_set, 3).samples[0]
    assert abs(sample - np.exp(1j * (math.pi / 4 + 0.9 * math.pi))) < 1e-12


def test_linear_phase_matches_closed_form(linear_set):
    period = linear_set.symbol_duration
    n = linear_set.n_signals
    t = np.arange(linear_set.samples_per_symbol) * period / linear_set.samples_per_symbol
    for m in range(n):
        expected = math.pi / 4 + math.pi * n / period ** 2 * (t + m * period / n) ** 2
        actual = chirp_phase(linear_set, m, t / period)
        assert np.max(np.abs(actual - expected)) < 1e-12


@pytest.mark.parametrize("family", [ChirpFamily.LINEAR, ChirpFamily.QUARTIC])
@pytest.mark.parametrize("direction", [ChirpDirection.UP, ChirpDirection.DOWN])
def test_constant_envelope(family, direction):
    chirp_set = ChirpSet(n_signals=10, symbol_duration=1e-5, family=family)
    for m in range(chirp_set.n_signals):
        samples = gen_chirp(chirp_set, m, direction).samples
        assert np.max(np.abs(np.abs(samples) - 1)) < 1e-12


def test_user_index_out_of_range(linear_set):
    with pytest.raises(ChirpDomainError):
        gen_chirp(linear_set, 10)
    with pytest.raises(ChirpDomainError):
        gen_chirp(linear_set, -1)


def test_up_and_down_phases_sum_to_half_pi(linear_set):
    grid = linear_set.normalized_grid()
    total = chirp_phase(linear_set, 0, grid, 1) + chirp_phase(linear_set, 0, grid, -1)
    np.testing.assert_allclose(total, math.pi / 2, atol=1e-12)


def test_quartic_converges_to_linear():
    linear = ChirpSet(n_signals=10, symbol_duration=1.0)
    quartic = ChirpSet(n_signals=10, symbol_duration=1.0, family=ChirpFamily.QUARTIC, nonlinearity_gain=1e-8)
    for m in range(10):
        difference = gen_chirp(quartic, m).samples - gen_chirp(linear, m).samples
        assert np.max(np.abs(difference)) < 1e-6


def test_quartic_with_zero_gain_is_linear():
    linear = ChirpSet(n_signals=10, symbol_duration=1.0)
    quartic = ChirpSet(n_signals=10, symbol_duration=1.0, family=ChirpFamily.QUARTIC, nonlinearity_gain=0.0)
    for m in range(10):
        assert np.array_equal(gen_chirp(quartic, m).samples, gen_chirp(linear, m).samples)


def test_linear_zero_offset_orthogonality(linear_set):
    signals = [gen_chirp(linear_set, m).samples for m in range(10)]
    for m in range(10):
        for n in range(10):
            if m != n:
                value = abs(np.vdot(signals[n], signals[m])) / len(signals[m])
                assert value < 1e-3


def test_instantaneous_frequency_linear_random_points():
    chirp_set = ChirpSet(n_signals=10, symbol_duration=1e-5)
    rng = np.random.default_rng(1)
    period = chirp_set.symbol_duration
    for _ in range(1000):
        m = int(rng.integers(0, 10))
        t = float(rng.uniform(0, period))
        expected = 10 / period ** 2 * t + m / period
        assert instantaneous_frequency(chirp_set, m, t) == pytest.approx(expected, rel=1e-9)


def test_instantaneous_frequency_band_edges(linear_set):
    assert instantaneous_frequency(linear_set, 0, 0.0) == 0.0
    almost_end = 1.0 - 1e-12
    assert instantaneous_frequency(linear_set, 0, almost_end) == pytest.approx(10.0, abs=1e-9)
    assert instantaneous_frequency(linear_set, 9, almost_end) == pytest.approx(19.0, abs=1e-9)


def test_instantaneous_frequency_domain(linear_set):
    with pytest.raises(ChirpDomainError):
        instantaneous_frequency(linear_set, 0, 1.0)
    with pytest.raises(ChirpDomainError):
        instantaneous_frequency(linear_set, 0, -1e-9)


def test_instantaneous_frequency_quartic_zero_gain(linear_set):
    quartic = ChirpSet(n_signals=10, symbol_duration=1.0, family=ChirpFamily.QUARTIC, nonlinearity_gain=0.0)
    for m in range(10):
        for t in (0.0, 0.13, 0.5, 0.97):
            assert instantaneous_frequency(quartic, m, t) == instantaneous_frequency(linear_set, m, t)


def test_quartic_frequency_matches_phase_derivative(quartic_set):
    # Производная фазы / 2π численно совпадает с аналитической частотой
    step = 1e-7
    for m in (0, 3, 9):
        for t in (0.1, 0.25, 0.6):
            phase_plus = chirp_phase(quartic_set, m, t + step)
            phase_minus = chirp_phase(quartic_set, m, t - step)
            numeric = (phase_plus - phase_minus) / (2 * step) / (2 * math.pi)
            assert instantaneous_frequency(quartic_set, m, t) == pytest.approx(numeric, rel=1e-6)


def test_linear_trace_is_affine(linear_set):
    trace = tf_trace(linear_set, 4, 64)
    steps = np.diff(trace.frequencies)
    np.testing.assert_allclose(steps, steps[0], rtol=1e-9)
    assert np.all(np.diff(trace.times) > 0)
    assert trace.times[-1] < linear_set.symbol_duration


def test_traces_start_at_user_offset(linear_set):
    for m in range(10):
        assert tf_trace(linear_set, m, 16).frequencies[0] == pytest.approx(m / linear_set.symbol_duration)


def test_quartic_trace_deviates_off_centre(linear_set, quartic_set):
    # Отклонение частоты ненулевое при T/4; при T/2 производная формы равна нулю,
    # а отклонение фазы максимально
    for m in range(10):
        quartic = tf_trace(quartic_set, m, 4).frequencies
        linear = tf_trace(linear_set, m, 4).frequencies
        assert abs(quartic[1] - linear[1]) > 0
        assert quartic[2] == pytest.approx(linear[2], abs=1e-9)
        phase_gap = chirp_phase(quartic_set, m, 0.5) - chirp_phase(linear_set, m, 0.5)
        assert abs(phase_gap) > 0


def test_tf_trace_needs_two_points(linear_set):
    with pytest.raises(ChirpDomainError):
        tf_trace(linear_set, 0, 1)


def test_frequency_containment(quartic_set):
    low, high = frequency_extent(quartic_set)
    bandwidth = quartic_set.bandwidth
    # Аналитический экстремум при γ = 1.5: [-1.052B, 1.713B]
    assert low == pytest.approx(-1.052 * bandwidth, abs=0.005 * bandwidth)
    assert high == pytest.approx(1.713 * bandwidth, abs=0.005 * bandwidth)
    assert high - low < quartic_set.sample_rate


def test_linear_band_is_contained(linear_set):
    low, high = frequency_extent(linear_set)
    assert low >= 0.0
    assert high <= linear_set.bandwidth


def test_zero_delay_equals_undelayed_chirp(linear_set, quartic_set):
    for chirp_set in (linear_set, quartic_set):
        for direction in ChirpDirection:
            delayed = gen_delayed_chirp(chirp_set, 3, 0.0, direction)
            assert np.array_equal(delayed.samples, gen_chirp(chirp_set, 3, direction).samples)


def test_delayed_chirp_piecewise_evaluation(quartic_set):
    eps = 0.37
    delayed = gen_delayed_chirp(quartic_set, 2, eps, ChirpDirection.UP, ChirpDirection.DOWN)
    expected = []
    for t in quartic_set.normalized_grid():
        if t >= eps:
            expected.append(np.exp(1j * chirp_phase(quartic_set, 2, t - eps, 1)))
        else:
            expected.append(np.exp(1j * chirp_phase(quartic_set, 2, t - eps + 1.0, -1)))
    np.testing.assert_allclose(delayed.samples, expected, atol=1e-9)


def test_delayed_chirp_unit_magnitude(quartic_set):
    for eps in (0.01, 0.333, 0.9):
        samples = gen_delayed_chirp(quartic_set, 5, eps, ChirpDirection.DOWN, ChirpDirection.UP).samples
        assert np.max(np.abs(np.abs(samples) - 1)) < 1e-12


def test_delayed_chirp_delay_domain(linear_set):
    with pytest.raises(ChirpDomainError):
        gen_delayed_chirp(linear_set, 0, 1.0)
    with pytest.raises(ChirpDomainError):
        gen_delayed_chirp(linear_set, 0, -1e-9)


def test_delayed_user_zero_matches_dense_integral(fine_linear_set):
    eps = 0.1
    delayed = gen_delayed_chirp(fine_linear_set, 0, eps)
    reference = gen_chirp(fine_linear_set, 0)
    discrete = np.vdot(reference.samples, delayed.samples) * reference.sample_interval

    t = (np.arange(400_000) + 0.5) / 400_000
    shifted = np.where(t >= eps, t - eps, t - eps + 1.0)
    integrand = np.exp(1j * (chirp_phase(fine_linear_set, 0, shifted) - chirp_phase(fine_linear_set, 0, t)))
    dense = integrand.mean()
    assert abs(abs(discrete) - abs(dense)) < 1e-2


def test_stream_covers_only_given_symbols(linear_set):
    grid = linear_set.normalized_grid()
    with pytest.raises(ChirpDomainError):
        gen_stream(linear_set, 0, grid, 1.5, np.array([1, 1]))
    samples = gen_stream(linear_set, 0, grid, 1.5, np.array([1, -1, 1]))
    assert samples.shape == grid.shape


def test_stream_symbol_index():
    x = np.array([0.0, 0.1, 0.5, 0.9])
    assert stream_symbol_index(x, 0.3, 2).tolist() == [-1, -1, 0, 0]
    assert stream_symbol_index(x, 0.0, 1).tolist() == [0, 0, 0, 0]
    assert stream_symbol_index(x, 1.4, 3).tolist() == [-2, -2, -1, -1]
    with pytest.raises(ChirpDomainError):
        stream_symbol_index(x, 0.3, 1)
    with pytest.raises(ChirpDomainError):
        stream_symbol_index(x, 1.4, 2)
