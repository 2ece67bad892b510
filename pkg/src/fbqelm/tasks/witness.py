"""Two-qubit entanglement witness ``W = I/2 - |Phi+><Phi+|``."""
from __future__ import annotations

import numpy as np

PHI_PLUS = np.array([1, 0, 0, 1], complex) / np.sqrt(2)
WITNESS = 0.5 * np.eye(4) - np.outer(PHI_PLUS, PHI_PLUS.conj())


def density_from_vector(c) -> np.ndarray:
    """Pure-state density matrix ``c c^dagger`` from a (normalised) vector."""
    c = np.asarray(c, complex)
    return np.outer(c, c.conj())


def witness_value(rho) -> float:
    """Expectation ``Tr(W rho)``; negative values certify entanglement."""
    rho = np.asarray(rho, complex)
    if rho.shape == (4,):
        rho = density_from_vector(rho)
    if rho.shape != (4, 4):
        raise ValueError("witness needs a two-qubit (4x4) density matrix or 4-vector")
    return float(np.real(np.trace(WITNESS @ rho)))


def witness_explicit(family: str, coefficients) -> float:
    """Closed-form witness for the two synthesised state families.

    SP: ``coefficients = alpha`` for ``sqrt(1 - |alpha|^2)|00> + alpha|11>``,
    giving ``-|alpha| sqrt(1 - |alpha|^2) cos(arg alpha)``.
    DP: ``coefficients = (a00, a01, a10, a11)`` normalised, giving
    ``(|a01|^2 + |a10|^2)/2 - |a00 a11| cos(arg a00 - arg a11)``.
    """
    if family == "SP":
        a = complex(np.asarray(coefficients).ravel()[0]) if np.ndim(coefficients) else complex(coefficients)
        if abs(a) > 1 + 1e-12:
            raise ValueError("unnormalised SP coefficient: |alpha| must not exceed 1")
        m = min(abs(a), 1.0)
        return float(-m * np.sqrt(1 - m * m) * np.cos(np.angle(a)))
    if family == "DP":
        a = np.asarray(coefficients, complex)
        if a.shape != (4,) or abs(np.sum(np.abs(a) ** 2) - 1) > 1e-12:
            raise ValueError("unnormalised DP coefficients: need four amplitudes with unit norm")
        a00, a01, a10, a11 = a
        return float((abs(a01) ** 2 + abs(a10) ** 2) / 2
                     - abs(a00 * a11) * np.cos(np.angle(a00) - np.angle(a11)))
    raise ValueError(f"unknown family {family!r}")


def sp_vector(alpha) -> np.ndarray:
    """Normalised SP vector ``sqrt(1 - |alpha|^2)|00> + alpha|11>``."""
    alpha = complex(alpha)
    return np.array([np.sqrt(max(0.0, 1 - abs(alpha) ** 2)), 0, 0, alpha], complex)
