"""Two-setting, d-outcome Bell correlator with its classical and quantum bounds.

Both parties measure Fourier-type bases. Party A's setting ``x`` has
projectors ``|a>_x = d^{-1/2} sum_k exp(2 pi i k (a - theta_x)/d)|k>`` and
party B's setting ``y`` has ``|b>_y = d^{-1/2} sum_k exp(2 pi i k (xi_y - b)/d)|k>``
with ``theta = (1/4, 3/4)`` and ``xi = (1/2, 1)``.
"""
from __future__ import annotations

import numpy as np

THETA = {1: 0.25, 2: 0.75}
XI = {1: 0.5, 2: 1.0}


def satwap_projectors(d: int, setting: int, party: str) -> np.ndarray:
    """Rows are the ``d`` orthonormal measurement vectors of one setting."""
    if d < 1 or setting not in (1, 2) or party not in ("A", "B"):
        raise ValueError("need d >= 1, setting in {1, 2} and party in {'A', 'B'}")
    k = np.arange(d)
    out = np.arange(d)[:, None]
    if party == "A":
        phase = k[None, :] * (out - THETA[setting])
    else:
        phase = k[None, :] * (XI[setting] - out)
    return np.exp(2j * np.pi * phase / d) / np.sqrt(d)


def _amplitude_matrix(state, d: int) -> np.ndarray:
    """Accept a d x d amplitude matrix, a d^2 vector or a d^2 x d^2 density matrix."""
    s = np.asarray(state, complex)
    if s.shape == (d, d) or s.shape == (d * d,):
        return s.reshape(d, d)
    if s.shape == (d * d, d * d):
        return s
    raise ValueError(f"state shape {s.shape} incompatible with local dimension {d}")


def joint_probabilities(state, d: int, x: int, y: int) -> np.ndarray:
    """``P[a, b]`` for settings ``(x, y)``."""
    s = _amplitude_matrix(state, d)
    A = satwap_projectors(d, x, "A")
    B = satwap_projectors(d, y, "B")
    if s.shape == (d, d):
        return np.abs(A.conj() @ s @ B.conj().T) ** 2
    # density matrix: P(a,b) = <ab| rho |ab>
    ket = np.einsum("ak,bj->abkj", A, B).reshape(d, d, d * d)
    return np.real(np.einsum("abi,ij,abj->ab", ket.conj(), s, ket))


def _coefficients(d: int):
    w = np.exp(2j * np.pi / d)
    l = np.arange(1, d)
    a = w ** ((2 * l - d) / 8) / np.sqrt(2)
    return w, l, a


def _real(value, d):
    if abs(value.imag) > 1e-10 * max(1.0, d):
        raise ArithmeticError(f"correlator has imaginary residue {value.imag:.3e}")
    return float(value.real)


def satwap_value(state, d: int) -> float:
    """``I_d`` from generalised correlators over joint outcome probabilities.

    ``<A_x^l B_y^{d-l}> = sum_{a,b} omega^{l a + (d - l) b} P_xy(a, b)``.
    """
    if d == 1:
        return 0.0
    w, ls, coef = _coefficients(d)
    P = {(x, y): joint_probabilities(state, d, x, y) for x in (1, 2) for y in (1, 2)}
    out = np.arange(d)
    total = 0j
    for l, a_l in zip(ls, coef):
        phase = w ** (l * out[:, None] + (d - l) * out[None, :])
        corr = {key: np.sum(phase * p) for key, p in P.items()}
        total += (a_l * corr[1, 1] + np.conj(a_l) * w ** l * corr[1, 2]
                  + a_l * corr[2, 2] + np.conj(a_l) * corr[2, 1])
    return _real(total, d)


def bell_operator(d: int) -> np.ndarray:
    """The ``d^2 x d^2`` operator whose expectation is ``I_d``.

    Built from unitary observables ``A_x = sum_a omega^a |a><a|_x`` and
    their powers, without going through outcome probabilities.
    """
    w, ls, coef = _coefficients(d)

    def observable(x, party):
        V = satwap_projectors(d, x, party)
        return V.T @ np.diag(w ** np.arange(d)) @ V.conj()

    A = {x: observable(x, "A") for x in (1, 2)}
    B = {y: observable(y, "B") for y in (1, 2)}
    mp = np.linalg.matrix_power
    op = np.zeros((d * d, d * d), complex)
    for l, a_l in zip(ls, coef):
        op += a_l * np.kron(mp(A[1], l), mp(B[1], d - l))
        op += np.conj(a_l) * w ** l * np.kron(mp(A[1], l), mp(B[2], d - l))
        op += a_l * np.kron(mp(A[2], l), mp(B[2], d - l))
        op += np.conj(a_l) * np.kron(mp(A[2], l), mp(B[1], d - l))
    return op


def satwap_value_operator(state, d: int) -> float:
    """``I_d`` as the expectation of :func:`bell_operator` (independent route)."""
    if d == 1:
        return 0.0
    s = _amplitude_matrix(state, d)
    op = bell_operator(d)
    if s.shape == (d, d):
        v = s.reshape(-1)
        return _real(v.conj() @ op @ v, d)
    return _real(np.trace(op @ s), d)


def satwap_classical_bound(d) -> float:
    """Local-hidden-variable bound ``C_d``; ``C_1 = 0`` by convention."""
    d = np.asarray(d, float)
    if np.any(d < 1):
        raise ValueError("dimension must be >= 1")
    c = 0.5 * (3 / np.tan(np.pi / (4 * d)) - 1 / np.tan(3 * np.pi / (4 * d))) - 2
    c = np.where(d == 1, 0.0, c)
    return float(c) if c.ndim == 0 else c


def tsirelson_bound(d) -> float:
    """Maximal quantum value ``Q_d = 2 (d - 1)``."""
    if np.any(np.asarray(d) < 1):
        raise ValueError("dimension must be >= 1")
    return 2.0 * (np.asarray(d) - 1) if np.ndim(d) else 2.0 * (d - 1)


def qudit_satwap_label(alphas) -> tuple[float, int]:
    """``(I_d, d)`` for ``sum_j alpha_j |jj>`` restricted to its nonzero terms."""
    a = np.asarray(alphas, complex)
    support = np.flatnonzero(a != 0)
    if support.size == 0:
        raise ValueError("vacuum state: all qudit coefficients are zero")
    d = support.size
    M = np.diag(a[support]) / np.linalg.norm(a[support])
    return satwap_value(M, d), d
