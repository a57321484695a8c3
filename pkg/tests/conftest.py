"""Shared helpers for the test suite.

Everything random is seeded through numpy's Generator so runs are
reproducible; oracles here are written independently of the library
internals (explicit loops, no shared kernels).
"""

import cmath

import numpy as np
import pytest

from circext import (
    CovarianceSequence,
    DiscreteGrid,
    SpectrumSamples,
    SymmetricPseudoPolynomial,
    covariance_moments,
)


def make_rng(seed):
    return np.random.default_rng(seed)


def random_hermitian_tail(rng, n, scale=1.0):
    """n complex coefficients with decaying magnitudes."""
    decay = scale / (1.0 + np.arange(n))
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * decay


def random_positive_symbol(rng, n, grid, floor=0.2):
    """A degree-n symbol strictly positive at every node of grid.

    The trigonometric tail is drawn at random and the constant term is
    raised until the minimum node value equals floor times the mean.
    """
    tail = random_hermitian_tail(rng, n)
    angles = grid.angles
    trig = np.zeros(grid.size)
    for k in range(1, n + 1):
        trig += 2.0 * (tail[k - 1] * np.exp(-1j * k * angles)).real
    p0 = float(floor - trig.min() + rng.random())
    return SymmetricPseudoPolynomial(np.concatenate(([p0], tail)))


def random_feasible_covariances(rng, n, grid, low=0.2, high=2.0):
    """Covariances of a strictly positive random spectrum on grid.

    Feasible by construction: the drawn node values are an interior
    witness for the cone at this grid size.
    """
    values = low + (high - low) * rng.random(grid.size)
    return covariance_moments(SpectrumSamples(grid, values), n)


def dft_loop(grid, coefficients):
    """O(N^2) transform oracle: G_j = sum_k g_k zeta_j^{-k}, explicit loops."""
    size = grid.size
    out = np.zeros(size, dtype=complex)
    for pos_j in range(size):
        j = pos_j - (grid.N - 1)
        total = 0.0 + 0.0j
        for pos_k in range(size):
            k = pos_k - (grid.N - 1)
            total += coefficients[pos_k] * cmath.exp(-1j * cmath.pi * j * k / grid.N)
        out[pos_j] = total
    return out


def central_difference(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function of a real vector."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def symbol_norm(p):
    return float(np.max(np.abs(p.coeffs)))


def symbol_distance(a, b):
    """max |a_k - b_k| over the union of coefficient windows."""
    n = max(a.degree, b.degree)
    ca = np.zeros(n + 1, dtype=complex)
    cb = np.zeros(n + 1, dtype=complex)
    ca[: a.degree + 1] = a.coeffs
    cb[: b.degree + 1] = b.coeffs
    return float(np.max(np.abs(ca - cb)))


@pytest.fixture
def rng():
    return make_rng(20260822)
