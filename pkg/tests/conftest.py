"""Shared fixtures for the test suite."""

import math

import numpy as np
import pytest

from bellsurvey.qcore import (
    PAULI,
    DichotomicPair,
    ObservableMatrix,
    basis_state,
    ghz_state,
    pauli_pair,
    uniform_settings,
)

SQRT_HALF = 1 / math.sqrt(2)


@pytest.fixture
def rng():
    """Deterministic RNG for reproducible tests."""
    return np.random.default_rng(42)


@pytest.fixture
def pauli():
    return PAULI


@pytest.fixture
def bell_state():
    """(|00> + |11>) / sqrt 2"""
    return ghz_state(SQRT_HALF, SQRT_HALF, 2)


@pytest.fixture
def ghz3():
    return ghz_state(SQRT_HALF, SQRT_HALF, 3)


@pytest.fixture
def xy_settings():
    """Pauli x / Pauli y at every site, as a function of N"""
    return lambda n_sites: uniform_settings(pauli_pair('x', 'y'), n_sites)


@pytest.fixture
def z_pair():
    """A0 = A1 = diag(1, -1)"""
    return DichotomicPair(ObservableMatrix(PAULI['z']), ObservableMatrix(PAULI['z']))


@pytest.fixture
def zero_state():
    return lambda n_sites: basis_state(2, [0] * n_sites)
