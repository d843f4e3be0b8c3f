"""Общие фикстуры тестов"""

import numpy as np
import pytest

from channel.profiles import builtin_profile
from chirp.waveform import ChirpFamily, ChirpSet


@pytest.fixture
def linear_set():
    """N = 10, T = 1 с, OSF = 4"""
    return ChirpSet(n_signals=10, symbol_duration=1.0)


@pytest.fixture
def quartic_set():
    return ChirpSet(n_signals=10, symbol_duration=1.0, family=ChirpFamily.QUARTIC)


@pytest.fixture
def fine_linear_set():
    """OSF = 16 для проверок симметрии и численных оракулов"""
    return ChirpSet(n_signals=10, symbol_duration=1.0, oversampling=16)


@pytest.fixture
def ag_set():
    """T = 10 мкс, N = 10: полоса 2 МГц, шаг дискретизации 125 нс"""
    return ChirpSet(n_signals=10, symbol_duration=10e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def mean_profile():
    return builtin_profile("mean")


@pytest.fixture
def worst_profile():
    return builtin_profile("worst")
