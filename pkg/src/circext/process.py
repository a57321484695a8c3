"""Sampling of periodic processes and moment estimation from realizations.

A spectrum Phi on the grid defines a stationary Gaussian process on the 2N
cyclic time points whose covariance circulant has symbol Phi.  Draws are made
in the spectral domain, where the transform coordinates are independent with
variance 2N Phi_j, and mapped back by the inverse transform; the resulting
realizations carry the target covariance exactly, not asymptotically.

Uniform variates come from numpy's default generator and are mapped to
normals by an explicit Box-Muller step.  Keeping the normal transform in the
library (rather than using the generator's own) pins the exact draw sequence
for a given seed, so golden outputs stay stable across numpy versions.
"""

from __future__ import annotations

import numpy as np

from .grid import DiscreteGrid, Signal, SpectrumSamples, dft, idft, is_hermitian_even
from .kernels import moment_vector
from .moments import CepstralSequence, CovarianceSequence

MIN_SMOOTHING_COUNT = 8
REAL_TOL = 1e-10


def _standard_normals(rng, size):
    # Box-Muller on (1-u) in (0,1]; two independent streams per row
    u = rng.random((size, 2))
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    return radius * np.cos(2.0 * np.pi * u[:, 1]), radius * np.sin(2.0 * np.pi * u[:, 1])


def _check_spectrum(phi: SpectrumSamples) -> np.ndarray:
    vals = phi.real_values()
    bad = np.nonzero(vals < 0.0)[0]
    if bad.size:
        j = int(phi.grid.indices[bad[0]])
        raise ValueError(f"spectrum sample at node j={j} is {vals[bad[0]]!r}, negative")
    return vals


def _spectral_draws(phi: SpectrumSamples, count, rng, real_valued):
    """Independent transform-domain draws with E|yhat_j|^2 = 2N Phi_j."""
    grid = phi.grid
    vals = _check_spectrum(phi)
    scale = np.sqrt(grid.size * vals)
    if real_valued and not is_hermitian_even(grid, vals, REAL_TOL):
        raise ValueError("a real-valued process needs an even spectrum")
    out = np.empty((count, grid.size), dtype=complex)
    half = grid.position(0), grid.position(grid.N)
    for r in range(count):
        z1, z2 = _standard_normals(rng, grid.size)
        if not real_valued:
            out[r] = scale * (z1 + 1j * z2) / np.sqrt(2.0)
            continue
        row = np.empty(grid.size, dtype=complex)
        for j in range(1, grid.N):
            pos = grid.position(j)
            row[pos] = scale[pos] * (z1[pos] + 1j * z2[pos]) / np.sqrt(2.0)
            row[grid.position(-j)] = np.conj(row[pos])
        for pos in half:    # self-paired frequencies take real draws
            row[pos] = scale[pos] * z1[pos]
        out[r] = row
    return out


def sample_realizations(
    phi: SpectrumSamples,
    count: int,
    seed: int | None = None,
    real_valued: bool = False,
) -> np.ndarray:
    """Draw `count` realizations of the process with spectrum phi.

    Returns an array of shape (count, 2N); rows are time-domain sample paths.
    With real_valued=True the transform draws are constrained to Hermitian
    symmetry (requires an even spectrum) and the rows come out real.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    grid = phi.grid
    rng = np.random.default_rng(seed)
    draws = _spectral_draws(phi, count, rng, real_valued)
    out = np.empty((count, grid.size), dtype=float if real_valued else complex)
    for r in range(count):
        y = idft(SpectrumSamples(grid, draws[r])).values
        out[r] = y.real if real_valued else y
    return out


def periodogram(y: np.ndarray, grid: DiscreteGrid) -> SpectrumSamples:
    """Sample spectrum |transform of y|^2 / 2N of one realization.

    Its node integral recovers the sample variance of y, and its k-th moment
    equals the cyclic sample covariance at lag k.
    """
    y = np.asarray(y)
    if y.shape != (grid.size,):
        raise ValueError(f"expected one realization of shape ({grid.size},)")
    spec = dft(Signal(grid, y.astype(complex)))
    vals = np.abs(spec.values) ** 2 / grid.size
    return SpectrumSamples(grid, vals, hermitian_even=is_hermitian_even(grid, vals))


def estimate_covariances(
    realizations: np.ndarray, grid: DiscreteGrid, n: int
) -> CovarianceSequence:
    """Cyclic sample covariances up to lag n, averaged over realizations.

    chat_k = mean over rows of (1/2N) sum_t y(t+k) conj(y(t)), with the time
    index wrapping.  Raises through CovarianceSequence when the estimate is
    degenerate (for instance all-zero input).
    """
    y = np.atleast_2d(np.asarray(realizations))
    if y.shape[0] == 0:
        raise ValueError("need at least one realization")
    if y.shape[1] != grid.size:
        raise ValueError(f"realizations must have {grid.size} time points per row")
    if not 0 <= n <= grid.N:
        raise ValueError(f"need 0 <= n <= N, got n={n}")
    acc = np.zeros(n + 1, dtype=complex)
    for row in y:
        for k in range(n + 1):
            acc[k] += np.sum(np.roll(row, -k) * np.conj(row)) / grid.size
    acc /= y.shape[0]
    return CovarianceSequence(np.concatenate(([acc[0].real], acc[1:])))


def estimate_cepstra(
    realizations: np.ndarray,
    grid: DiscreteGrid,
    n: int,
    smoothing: bool = True,
) -> CepstralSequence:
    """Cepstral coefficients mhat_1 ... mhat_n from realizations.

    With smoothing (default) the periodograms are ensemble-averaged before
    the logarithm, which needs at least 8 realizations to keep the log
    moments stable.  smoothing=False takes the log realization by
    realization and averages afterwards; that variant is unbiased only
    up to the Euler-Mascheroni offset in the constant term and fails
    outright whenever a single periodogram touches zero, so it is kept
    for diagnostics rather than production use.
    """
    y = np.atleast_2d(np.asarray(realizations))
    if y.shape[0] == 0:
        raise ValueError("need at least one realization")
    if y.shape[1] != grid.size:
        raise ValueError(f"realizations must have {grid.size} time points per row")
    if not 1 <= n <= grid.N:
        raise ValueError(f"need 1 <= n <= N, got n={n}")
    if smoothing and y.shape[0] < MIN_SMOOTHING_COUNT:
        raise ValueError(
            f"smoothed estimation needs at least {MIN_SMOOTHING_COUNT} "
            f"realizations, got {y.shape[0]}"
        )
    specs = np.stack([periodogram(row, grid).real_values() for row in y])
    if smoothing:
        mean_spec = specs.mean(axis=0)
        if mean_spec.min() <= 0.0:
            raise ValueError("averaged periodogram touches zero; cannot take logs")
        log_spec = np.log(mean_spec)
    else:
        if specs.min() <= 0.0:
            raise ValueError("a periodogram touches zero; cannot take logs")
        log_spec = np.log(specs).mean(axis=0)
    m = moment_vector(grid.angles, log_spec, n)[1:]
    return CepstralSequence(m)


def conjugacy_check(phi: SpectrumSamples, count: int, seed: int | None = None) -> float:
    """Monte Carlo distance from the whitening identity E[e(t) conj(y(s))] = I.

    The conjugate process divides each transform draw by its spectrum sample.
    Exact pairing of the draws makes the cross moment the identity matrix in
    expectation; the return value is the sup-norm deviation of the estimate,
    which shrinks like one over the square root of count.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    grid = phi.grid
    vals = _check_spectrum(phi)
    if vals.min() <= 0.0:
        j = int(grid.indices[int(np.argmin(vals))])
        raise ValueError(f"whitening needs a strictly positive spectrum (node j={j})")
    rng = np.random.default_rng(seed)
    draws = _spectral_draws(phi, count, rng, real_valued=False)
    cross = np.zeros((grid.size, grid.size), dtype=complex)
    for r in range(count):
        y = idft(SpectrumSamples(grid, draws[r])).values
        e = idft(SpectrumSamples(grid, draws[r] / vals)).values
        cross += np.outer(e, np.conj(y))
    cross /= count
    return float(np.max(np.abs(cross - np.eye(grid.size))))
