"""Regression scores, pattern and state fidelities, witness classification."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import CorrelationPattern


@dataclass(frozen=True)
class ScoreReport:
    """MSE, NMSE and R^2; multi-task headline values average the per-task ones."""

    mse: float
    nmse: float
    r2: float
    per_task: tuple = field(default=())

    def to_dict(self) -> dict:
        return {"mse": self.mse, "nmse": self.nmse, "r2": self.r2,
                "per_task": [dict(zip(("mse", "nmse", "r2"), t)) for t in self.per_task]}


def mse_nmse(pred, true) -> tuple[float, float]:
    """Mean squared error and its ratio to the variance of ``true``."""
    pred = np.asarray(pred, float)
    true = np.asarray(true, float)
    if pred.shape != true.shape or true.size < 2:
        raise ValueError("need equal-length inputs with at least two samples")
    mse = float(np.mean((pred - true) ** 2))
    var = float(np.var(true))
    if not var > 0:
        raise ValueError("nmse undefined: true labels have zero variance")
    return mse, mse / var


def r2_score(pred, true) -> float:
    mse, nmse = mse_nmse(pred, true)
    return 1.0 - nmse


def score_report(pred, true) -> ScoreReport:
    """Scores for one task ``(n,)`` or several ``(n, tasks)``."""
    pred = np.asarray(pred, float)
    true = np.asarray(true, float)
    if pred.shape != true.shape:
        raise ValueError("prediction and truth shapes differ")
    if true.ndim == 1:
        mse, nmse = mse_nmse(pred, true)
        return ScoreReport(mse, nmse, 1 - nmse)
    rows = [mse_nmse(pred[:, m], true[:, m]) for m in range(true.shape[1])]
    per_task = tuple((m, n, 1 - n) for m, n in rows)
    mse = float(np.mean([t[0] for t in per_task]))
    nmse = float(np.mean([t[1] for t in per_task]))
    return ScoreReport(mse, nmse, 1 - nmse, per_task)


def _values(p):
    return p.values if isinstance(p, CorrelationPattern) else np.asarray(p, float)


def pattern_fidelity(A, B, kind: str = "frobenius") -> float:
    """Similarity of two nonnegative patterns in [0, 1].

    ``frobenius``: normalised Frobenius inner product. ``bhattacharyya``:
    classical fidelity ``(sum sqrt(p q))^2`` of the patterns normalised to
    unit sum.
    """
    a, b = _values(A), _values(B)
    if a.shape != b.shape:
        raise ValueError("patterns have different shapes")
    if kind == "frobenius":
        # rescale first so the norms cannot underflow
        ma, mb = np.abs(a).max(), np.abs(b).max()
        if not (ma > 0 and mb > 0):
            raise ValueError("zero pattern")
        a, b = a / ma, b / mb
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if not (na > 0 and nb > 0):
            raise ValueError("zero pattern")
        return float(np.clip(np.sum(a * b) / (na * nb), 0.0, 1.0))
    if kind == "bhattacharyya":
        sa, sb = a.sum(), b.sum()
        if not (sa > 0 and sb > 0):
            raise ValueError("zero pattern")
        return float(np.clip(np.sum(np.sqrt(a / sa * b / sb)) ** 2, 0.0, 1.0))
    raise ValueError(f"unknown pattern fidelity {kind!r}")


def _psd_sqrt(rho, tol=1e-8):
    vals, vecs = np.linalg.eigh(rho)
    if vals.min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T


def uhlmann_fidelity(rho, sigma) -> float:
    """``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``; vectors are treated as pure states."""
    rho = np.asarray(rho, complex)
    sigma = np.asarray(sigma, complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if sigma.ndim == 1:
        sigma = np.outer(sigma, sigma.conj())
    if rho.shape != sigma.shape:
        raise ValueError("density matrices have different shapes")
    for m in (rho, sigma):
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise ValueError("density matrix is not Hermitian")
    sr = _psd_sqrt(rho)
    _psd_sqrt(sigma)
    inner = sr @ sigma @ sr
    ev = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0, None)
    return float(np.clip(np.sum(np.sqrt(ev)) ** 2, 0.0, 1.0))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts for the ``W < threshold`` (entangled) classification."""

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def entangled_accuracy(self) -> float:
        n = self.tp + self.fn
        return self.tp / n if n else float("nan")

    @property
    def false_positive_rate(self) -> float:
        n = self.fp + self.tn
        return self.fp / n if n else float("nan")

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def witness_confusion(pred_W, true_W, threshold: float = 0.0, separable=None):
    """Confusion matrix, entangled-class accuracy and separable false-positive rate.

    ``separable`` optionally flags states known to be separable; without it
    the false-positive rate is taken over all states with ``true_W >= threshold``.
    """
    pred_W = np.asarray(pred_W, float)
    true_W = np.asarray(true_W, float)
    if pred_W.shape != true_W.shape:
        raise ValueError("prediction and truth lengths differ")
    pe, te = pred_W < threshold, true_W < threshold
    cm = ConfusionMatrix(int(np.sum(pe & te)), int(np.sum(~pe & ~te)), int(np.sum(pe & ~te)),
                         int(np.sum(~pe & te)))
    if separable is None:
        fpr = cm.false_positive_rate
    else:
        sep = np.asarray(separable, bool)
        fpr = float(np.mean(pe[sep])) if sep.any() else float("nan")
    return cm, cm.entangled_accuracy, fpr
