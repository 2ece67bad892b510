"""Hamiltonian learning: labels, rank-1 parametrisation and maximum likelihood.

A 2x2 nonlinear Hamiltonian ``H`` generates the pair state
``|Psi> ~ sum_qp H_qp |qp>``. Its density matrix is ``rho = c c^dagger`` with
``c = vec(H) / ||vec(H)||``. The readout learns six real entries of ``rho``;
a pure state consistent with them is recovered by particle swarm search over
a six-parameter family of unit vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..lattice import DEFAULT_WINDOW, QUBIT_BINS, QUDIT_BINS, BinWindow
from ..synthesis import BiphotonAmplitude
from .pso import PsoConfig, PsoResult, pso_minimize

LABEL_NAMES = ("rho_00", "rho_11", "rho_22", "re_rho_12", "re_rho_02", "re_rho_03")
TWO_PI = 2 * np.pi
PARAM_LOWER = np.zeros(6)
PARAM_UPPER = np.array([1.0, TWO_PI, np.pi / 2, TWO_PI, np.pi / 2, TWO_PI])
PERIODIC = np.array([False, True, False, True, False, True])


def check_density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the array."""
    rho = np.asarray(rho, complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > 1e-12 * max(1.0, np.abs(rho).max()):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > 1e-12 * rho.shape[0]:
        raise ValueError("density matrix trace differs from one")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def hamiltonian_to_state(H, window: BinWindow = DEFAULT_WINDOW):
    """Pair state and density matrix generated by an ``N x N`` Hamiltonian.

    Row index ``q`` is the signal bin and column ``p`` the idler bin. A 2x2
    ``H`` lives on the qubit bins {0, 1}; 3x3 and 4x4 use the qudit bins.
    """
    H = np.asarray(H, complex)
    N = H.shape[0]
    if H.shape != (N, N) or not 2 <= N <= 4:
        raise ValueError("Hamiltonian must be square with size 2, 3 or 4")
    norm = np.linalg.norm(H)
    if not norm > 0:
        raise ValueError("zero Hamiltonian generates no pairs")
    bins = QUBIT_BINS if N == 2 else QUDIT_BINS[:N]
    idx = [window.index(b) for b in bins]
    S = np.zeros((window.dim, window.dim), complex)
    S[np.ix_(idx, idx)] = H / norm
    c = H.reshape(-1) / norm
    return BiphotonAmplitude(S, window, normalized=True), np.outer(c, c.conj())


def labels_from_rho(rho) -> np.ndarray:
    """``(rho_00, rho_11, rho_22, Re rho_12, Re rho_02, Re rho_03)``."""
    rho = np.asarray(rho, complex)
    if rho.shape != (4, 4):
        raise ValueError("labels are defined for 4x4 density matrices")
    return np.array([rho[0, 0].real, rho[1, 1].real, rho[2, 2].real,
                     rho[1, 2].real, rho[0, 2].real, rho[0, 3].real])


def labels_from_vector(c) -> np.ndarray:
    """Labels of ``c c^dagger`` for one vector or a stack ``(..., 4)``."""
    c = np.asarray(c, complex)
    return np.stack([np.abs(c[..., 0]) ** 2, np.abs(c[..., 1]) ** 2, np.abs(c[..., 2]) ** 2,
                     np.real(c[..., 1] * np.conj(c[..., 2])), np.real(c[..., 0] * np.conj(c[..., 2])),
                     np.real(c[..., 0] * np.conj(c[..., 3]))], axis=-1)


def params_to_vector(q) -> np.ndarray:
    """Unit vector ``c`` for parameters ``q`` (shape ``(6,)`` or ``(n, 6)``).

    ``c1 = q0``, ``c2 = s e^{i q1} cos q2``,
    ``c3 = s e^{i(q1+q3)} sin q2 cos q4``, ``c4 = s e^{i(q4+q5)} sin q2 sin q4``
    with ``s = sqrt(1 - q0^2)``. The unit norm is asserted on every call.
    """
    q = np.asarray(q, float)
    q0, q1, q2, q3, q4, q5 = np.moveaxis(q, -1, 0)
    s = np.sqrt(np.clip(1 - q0 * q0, 0.0, None))
    c = np.stack([q0.astype(complex),
                  s * np.exp(1j * q1) * np.cos(q2),
                  s * np.exp(1j * (q1 + q3)) * np.sin(q2) * np.cos(q4),
                  s * np.exp(1j * (q4 + q5)) * np.sin(q2) * np.sin(q4)], axis=-1)
    dev = np.abs(np.sum(np.abs(c) ** 2, axis=-1) - 1)
    if np.any(dev > 1e-12):
        raise ArithmeticError(f"parametrised vector lost unit norm (deviation {dev.max():.2e})")
    return c


def params_to_rho(q) -> np.ndarray:
    """Rank-1 density matrix ``c c^dagger`` for in-range parameters ``q``."""
    q = np.asarray(q, float)
    if q.shape != (6,):
        raise ValueError("expected six parameters")
    if np.any(q < PARAM_LOWER) or np.any(q > PARAM_UPPER):
        raise ValueError("parameters out of range: q0 in [0,1], q2,q4 in [0,pi/2], q1,q3,q5 in [0,2pi)")
    c = params_to_vector(q)
    rho = np.outer(c, c.conj())
    check_density_matrix(rho)
    if abs(np.linalg.matrix_rank(rho, tol=1e-10) - 1) != 0:
        raise ArithmeticError("parametrised density matrix is not rank one")
    return rho


def label_cost(y) -> callable:
    """Vectorised squared label mismatch ``||y - y(q)||^2`` over particle stacks."""
    y = np.asarray(y, float)

    def cost(Q):
        return np.sum((labels_from_vector(params_to_vector(Q)) - y) ** 2, axis=-1)

    return cost


@dataclass
class MleResult:
    q: np.ndarray
    rho: np.ndarray
    residual: float
    pso: PsoResult


def mle_rank1_fit(y, cfg: PsoConfig = PsoConfig(), rng: np.random.Generator | None = None,
                  polish: bool = True) -> MleResult:
    """Pure state whose labels best match ``y`` (least squares).

    The swarm performs the global search; with ``polish=True`` a bounded
    quasi-Newton run from the swarm optimum tightens the residual and is
    kept only if it improves on it.
    """
    y = np.asarray(y, float)
    if y.shape != (6,) or not np.all(np.isfinite(y)):
        raise ValueError("need six finite labels")
    cost = label_cost(y)
    res = pso_minimize(cost, PARAM_LOWER, PARAM_UPPER, cfg, periodic=PERIODIC, rng=rng)
    q, fun = res.x.copy(), res.fun
    if polish:
        bounds = [(None, None) if p else (lo, hi) for p, lo, hi in zip(PERIODIC, PARAM_LOWER, PARAM_UPPER)]
        local = minimize(lambda x: float(cost(x)), q, method="L-BFGS-B", bounds=bounds,
                         options={"ftol": 1e-15, "gtol": 1e-12})
        if local.fun < fun:
            q, fun = local.x.copy(), float(local.fun)
    for k in (1, 3, 5):
        q[k] = np.mod(q[k], TWO_PI)
    return MleResult(q, params_to_rho(q), float(fun), res)


def label_equivalent_vectors(c) -> np.ndarray:
    """The eight pure states sharing the labels of ``c`` (shape ``(8, 4)``).

    The labels fix the moduli and the cosines of three phase differences,
    so each difference is known only up to sign. Rows enumerate those sign
    choices; the first row is ``c`` itself up to global phase.
    """
    c = np.asarray(c, complex)
    phases = np.angle(c) - np.angle(c[0]) if abs(c[0]) > 0 else np.angle(c)
    mods = np.abs(c)
    out = []
    for s2 in (1, -1):
        for s3 in (1, -1):
            for s1 in (1, -1):
                p2 = s2 * phases[2]
                p = np.array([0.0, p2 + s1 * (phases[1] - phases[2]), p2, s3 * phases[3]])
                out.append(mods * np.exp(1j * p))
    return np.array(out)


def ambiguity_resolved_fidelity(rho, c_true) -> float:
    """Best fidelity of ``rho`` against any label-equivalent partner of ``c_true``."""
    rho = np.asarray(rho, complex)
    return float(max(np.real(v.conj() @ rho @ v) for v in label_equivalent_vectors(c_true)))
