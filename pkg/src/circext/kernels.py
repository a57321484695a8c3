"""Shared numerical helpers for symbol evaluation and moment extraction.

Everything here works on raw arrays; the typed wrappers live in the module
that owns the corresponding contract.
"""

from __future__ import annotations

import numpy as np


def trig_basis(angles: np.ndarray, n: int, include_constant: bool = True) -> np.ndarray:
    """Rows spanning real symmetric pseudo-polynomials of degree <= n.

    Row layout: [1 (optional), 2cos(k*t) for k=1..n, 2sin(k*t) for k=1..n].
    A coefficient vector v against these rows realizes the symbol with
    p_0 = v[0], p_k = v[k] + i*v[n+k], evaluated on the grid.
    """
    rows = [np.ones_like(angles)] if include_constant else []
    for k in range(1, n + 1):
        rows.append(2.0 * np.cos(k * angles))
    for k in range(1, n + 1):
        rows.append(2.0 * np.sin(k * angles))
    return np.array(rows) if rows else np.zeros((0, angles.size))


def moment_vector(angles: np.ndarray, values: np.ndarray, kmax: int) -> np.ndarray:
    """Coefficients (1/2N) sum_j e^{ik theta_j} v_j for k = 0 ... kmax."""
    phases = np.exp(1j * np.outer(np.arange(kmax + 1), angles))
    return (phases * values).mean(axis=1)


def coeffs_to_real(coeffs: np.ndarray) -> np.ndarray:
    """Flatten hermitian coefficients (p_0 ... p_n) to [p0, Re p_k..., Im p_k...]."""
    c = np.asarray(coeffs, dtype=complex)
    n = c.size - 1
    return np.concatenate(([c[0].real], c[1:].real, c[1:].imag)) if n > 0 else np.array([c[0].real])


def real_to_coeffs(v: np.ndarray) -> np.ndarray:
    """Inverse of coeffs_to_real."""
    v = np.asarray(v, dtype=float)
    n = (v.size - 1) // 2
    out = np.zeros(n + 1, dtype=complex)
    out[0] = v[0]
    if n > 0:
        out[1:] = v[1 : n + 1] + 1j * v[n + 1 :]
    return out
