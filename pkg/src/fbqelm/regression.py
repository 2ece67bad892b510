"""Linear readout: feature preprocessing, Elastic Net and cross-validation.

The penalised objective follows the usual Elastic-Net convention,

    1/(2N) ||y - X w - b||^2 + alpha * (l1_ratio ||w||_1 + (1 - l1_ratio)/2 ||w||^2),

solved by cyclic coordinate descent. Intercepts are always fitted and never
penalised. The multi-task variant replaces ``||w||_1`` with the sum of
row norms of ``W`` so that tasks share a support.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _cd

KKT_TOL = 1e-8
MAX_SWEEPS = 100_000


class ConvergenceError(RuntimeError):
    """Coordinate descent exhausted its sweep budget before meeting the KKT tolerance."""

    def __init__(self, msg, sweeps=None, kkt=None, alpha=None, l1_ratio=None):
        super().__init__(msg)
        self.sweeps, self.kkt, self.alpha, self.l1_ratio = sweeps, kkt, alpha, l1_ratio


@dataclass(frozen=True)
class PreprocessSpec:
    variance_threshold: float = 0.0
    standardize: bool = True

    def __post_init__(self):
        if self.variance_threshold < 0:
            raise ValueError("variance threshold must be nonnegative")


def _log_grid(lo, hi, n):
    return tuple(float(a) for a in np.logspace(np.log10(lo), np.log10(hi), n))


@dataclass(frozen=True)
class ElasticNetGrid:
    """Hyperparameter grid searched by k-fold cross-validation (R^2 metric)."""

    l1_ratios: tuple = (0.1, 0.5, 0.7)
    alphas: tuple = _log_grid(1e-5, 10.0, 100)
    folds: int = 9
    metric: str = "r2"

    def __post_init__(self):
        object.__setattr__(self, "l1_ratios", tuple(float(r) for r in self.l1_ratios))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.l1_ratios or not self.alphas:
            raise ValueError("grid lists must be nonempty")
        if any(not 0 <= r <= 1 for r in self.l1_ratios):
            raise ValueError("l1_ratio values must lie in [0, 1]")
        if any(not a > 0 for a in self.alphas):
            raise ValueError("alphas must be positive")
        if self.folds < 2:
            raise ValueError("need at least two folds")
        if self.metric != "r2":
            raise ValueError("only the R^2 metric is supported")

    @classmethod
    def witness(cls) -> "ElasticNetGrid":
        return cls((0.1, 0.5, 0.7), _log_grid(1e-5, 10.0, 100), 9)

    @classmethod
    def satwap(cls) -> "ElasticNetGrid":
        return cls((0.0, 0.05, 0.1, 0.5, 0.7, 1.0), _log_grid(1e-9, 1e-3, 100), 4)

    @classmethod
    def hamiltonian(cls) -> "ElasticNetGrid":
        return cls((0.01, 0.05, 0.1, 0.25, 0.5, 0.9, 1.0), _log_grid(1e-6, 1.0, 50), 5)


@dataclass
class TrainedReadout:
    """Frozen preprocessing plus affine readout ``Y = Z W^T + b``.

    ``weights`` has shape (tasks, kept features) and acts on standardised
    kept features ``Z = (X[:, mask] - means) / scales``.
    """

    weights: np.ndarray
    intercepts: np.ndarray
    feature_mask: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    alpha: float
    l1_ratio: float
    cv_score: float = float("nan")
    cv_table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, float))
        self.intercepts = np.atleast_1d(np.asarray(self.intercepts, float))
        self.feature_mask = np.asarray(self.feature_mask, bool)
        if self.weights.shape[1] != self.feature_mask.sum():
            raise ValueError("weight columns must match the number of kept features")
        if np.any(np.asarray(self.feature_scales) <= 0):
            raise ValueError("feature scales must be positive")

    @property
    def n_tasks(self) -> int:
        return self.weights.shape[0]

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercepts": self.intercepts.tolist(),
            "feature_mask": self.feature_mask.astype(int).tolist(),
            "feature_means": np.asarray(self.feature_means).tolist(),
            "feature_scales": np.asarray(self.feature_scales).tolist(),
            "alpha": self.alpha,
            "l1_ratio": self.l1_ratio,
            "cv_score": self.cv_score,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedReadout":
        return cls(np.array(d["weights"]), np.array(d["intercepts"]), np.array(d["feature_mask"], bool),
                   np.array(d["feature_means"]), np.array(d["feature_scales"]), d["alpha"], d["l1_ratio"],
                   d.get("cv_score", float("nan")))


def variance_select(X, threshold: float = 0.0) -> np.ndarray:
    """Mask of columns whose (population) variance exceeds ``threshold``.

    With ``threshold = 0`` every column is kept, constant ones included.
    """
    X = np.asarray(X, float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("variance selection needs at least two samples")
    if threshold == 0:
        return np.ones(X.shape[1], bool)
    mask = X.var(axis=0) > threshold
    if not mask.any():
        raise ValueError("threshold too high: no feature survives variance selection")
    return mask


def standardize(X):
    """Centre columns to mean 0 and scale them to unit population variance."""
    X = np.asarray(X, float)
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    if np.any(scales <= 1e-300):
        raise ValueError("zero scale: cannot standardise a constant column")
    return (X - means) / scales, means, scales


@dataclass
class FitResult:
    coef: np.ndarray
    intercept: np.ndarray | float
    sweeps: int
    kkt: float
    objective_trace: np.ndarray = field(repr=False)


def _prepare(X, Y):
    X = np.ascontiguousarray(X, float)
    Y = np.asarray(Y, float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("inputs must be finite")
    if X.shape[0] != Y.shape[0]:
        raise ValueError("X and y have different sample counts")
    N = X.shape[0]
    xm, ym = X.mean(axis=0), Y.mean(axis=0)
    Xc = X - xm
    G = np.ascontiguousarray(Xc.T @ Xc / N)
    q = np.ascontiguousarray(Xc.T @ (Y - ym) / N)
    return G, q, xm, ym


def _penalties(alpha, l1_ratio):
    if alpha < 0 or not 0 <= l1_ratio <= 1:
        raise ValueError("need alpha >= 0 and l1_ratio in [0, 1]")
    return alpha * l1_ratio, alpha * (1 - l1_ratio)


def _check(sweeps, kkt, monotone, max_sweeps, tol, alpha, l1_ratio):
    if not monotone:
        raise RuntimeError(f"objective increased during coordinate descent (alpha={alpha}, l1_ratio={l1_ratio})")
    if not kkt <= tol:
        raise ConvergenceError(
            f"coordinate descent did not converge in {max_sweeps} sweeps: "
            f"KKT residual {kkt:.3e} > {tol:.1e} (alpha={alpha:.3e}, l1_ratio={l1_ratio})",
            sweeps, kkt, alpha, l1_ratio)


SWEEP_BLOCK = 50


def _objective(G, q, w, l1, l2):
    pen = np.sum(np.abs(w)) if w.ndim == 1 else np.sum(np.linalg.norm(w, axis=1))
    return 0.5 * np.sum(w * (G @ w)) - np.sum(q * w) + l1 * pen + 0.5 * l2 * np.sum(w * w)


def _gram_kkt(G, q, w, l1, l2):
    g = G @ w - q + l2 * w
    if w.ndim == 1:
        v = np.where(w > 0, np.abs(g + l1), np.where(w < 0, np.abs(g - l1), np.maximum(0, np.abs(g) - l1)))
        return float(v.max())
    norms = np.linalg.norm(w, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    active = np.linalg.norm(g + l1 * w / safe[:, None], axis=1)
    return float(np.where(norms > 0, active, np.maximum(0, np.linalg.norm(g, axis=1) - l1)).max())


def _face_newton(G, q, w, l1, l2, trace, tol=KKT_TOL, max_steps=200):
    """Move towards the minimum of the current sign pattern (single task).

    Inside one orthant the objective is quadratic with Hessian
    ``H = G_AA + l2 I`` and gradient ``g = H w_A - q_A + l1 sign(w_A)``.
    The range-space part of ``g`` gets a Newton step; a component in the
    null space of ``H`` means the face has no interior minimum, and the
    objective falls linearly along it until a coefficient reaches zero.
    Steps are cut at the first sign change, that coefficient is dropped,
    and a step that fails to lower the objective ends the finisher.
    """
    f0 = _objective(G, q, w, l1, l2)
    for _ in range(max_steps):
        active = np.flatnonzero(w)
        if active.size == 0:
            return w
        sign = np.sign(w[active])
        H = G[np.ix_(active, active)] + l2 * np.eye(active.size)
        g = H @ w[active] - q[active] + l1 * sign
        if np.abs(g).max() <= 0.1 * tol:
            return w
        lam, V = np.linalg.eigh(H)
        rng_ = lam > 1e-12 * max(lam.max(), 1e-300)
        c = V.T @ g
        if np.linalg.norm(c[~rng_]) > np.linalg.norm(c[rng_]):
            d = -V[:, ~rng_] @ c[~rng_]
            t_full = np.inf
        else:
            d = -V[:, rng_] @ (c[rng_] / lam[rng_])
            t_full = 1.0
        cross = sign * d < 0
        ratios = -w[active][cross] / d[cross]
        t_cross = ratios.min() if cross.any() else np.inf
        if not np.isfinite(min(t_full, t_cross)):
            return w
        cand = w.copy()
        if t_cross < t_full:
            cand[active] += t_cross * d
            cand[active[np.flatnonzero(cross)[np.argmin(ratios)]]] = 0.0
        else:
            cand[active] += d
        f1 = _objective(G, q, cand, l1, l2)
        if f1 > f0:
            return w
        w[:] = cand
        f0 = f1
        trace.append(f1)
    return w


def _active_set_finish(G, q, w, l1, l2, trace, tol=KKT_TOL, max_rounds=None):
    """Alternate face minimisation with greedy activation of one coordinate.

    After the face step, the zero coefficient whose subgradient condition
    fails worst is set by an exact coordinate update, and the face step is
    repeated. Stops at the KKT tolerance, when only active coordinates
    remain in violation, or after ``max_rounds``.
    """
    max_rounds = 4 * w.size if max_rounds is None else max_rounds
    for _ in range(max_rounds):
        w = _face_newton(G, q, w, l1, l2, trace, tol)
        g = G @ w - q + l2 * w
        viol = np.where(w == 0, np.abs(g) - l1, -np.inf)
        j = int(np.argmax(viol))
        if _gram_kkt(G, q, w, l1, l2) <= tol or not viol[j] > 0.1 * tol:
            return w
        w[j] = -np.sign(g[j]) * (abs(g[j]) - l1) / (G[j, j] + l2)
        trace.append(_objective(G, q, w, l1, l2))
    return w


def _row_newton(G, Q, W, l1, l2, trace, tol, max_steps=100):
    """Damped Newton on the nonzero rows of a multi-task solution.

    The row-norm penalty is smooth only away from zero, so each step first
    applies exact block updates that zero rows whose block minimiser is
    zero, and activates the zero row whose optimality condition fails
    worst. Both moves are block-coordinate minimisations and cannot raise
    the objective.
    """
    M = W.shape[1]
    f0 = _objective(G, Q, W, l1, l2)
    for _ in range(max_steps):
        GW = G @ W
        for k in np.flatnonzero(np.linalg.norm(W, axis=1) > 0):
            if np.linalg.norm(Q[k] - GW[k] + G[k, k] * W[k]) <= l1:
                GW -= np.outer(G[:, k], W[k])
                W[k] = 0.0
        zero = np.flatnonzero(np.linalg.norm(W, axis=1) == 0)
        if zero.size:
            Z = Q[zero] - GW[zero]
            nz = np.linalg.norm(Z, axis=1)
            k = int(np.argmax(nz))
            if nz[k] > l1 + 0.1 * tol:
                j = zero[k]
                W[j] = (1 - l1 / nz[k]) / (G[j, j] + l2) * Z[k]
                GW += np.outer(G[:, j], W[j])
        f = _objective(G, Q, W, l1, l2)
        if f < f0:
            trace.append(f)
            f0 = f
        norms = np.linalg.norm(W, axis=1)
        active = np.flatnonzero(norms > 0)
        if active.size == 0:
            return W
        WA, n = W[active], norms[active]
        grad = ((GW - Q + l2 * W)[active] + l1 * WA / n[:, None]).ravel()
        if np.abs(grad).max() <= 0.1 * tol:
            return W
        H = np.kron(G[np.ix_(active, active)], np.eye(M)) + l2 * np.eye(active.size * M)
        for k, (row, nk) in enumerate(zip(WA, n)):
            sl = slice(k * M, (k + 1) * M)
            H[sl, sl] += l1 * (np.eye(M) / nk - np.outer(row, row) / nk ** 3)
        d = -np.linalg.lstsq(H, grad, rcond=None)[0]
        slope = grad @ d
        if not slope < 0:
            return W
        t = 1.0
        for _ in range(60):
            cand = W.copy()
            cand[active] += t * d.reshape(-1, M)
            f1 = _objective(G, Q, cand, l1, l2)
            if f1 <= f0 + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            return W
        W[:] = cand
        f0 = f1
        trace.append(f1)
    return W


def _solve_gram(G, q, alpha, l1_ratio, w0=None, tol=KKT_TOL, max_sweeps=MAX_SWEEPS):
    """Cyclic coordinate descent with a Newton finisher on the active set.

    Blocks of CD sweeps settle which coefficients are nonzero; between
    blocks a Newton step on the active set removes the slow linear tail
    that CD shows on nearly collinear features. The objective is recorded
    after every sweep and every Newton step and must never increase.
    """
    l1, l2 = _penalties(alpha, l1_ratio)
    single = q.ndim == 1
    kernel = _cd.enet_gram_cd if single else _cd.multitask_gram_cd
    w = np.zeros(q.shape) if w0 is None else np.array(w0, float)
    q = np.ascontiguousarray(q)
    sweeps, kkt = 0, np.inf
    trace = [_objective(G, q, w, l1, l2)]
    while sweeps < max_sweeps:
        block = min(SWEEP_BLOCK, max_sweeps - sweeps)
        n, kkt, tr, _ = kernel(G, q, w, l1, l2, tol, block)
        sweeps += n
        trace.extend(tr[1:])
        if kkt <= tol:
            break
        extra = []
        if single:
            w = _active_set_finish(G, q, w, l1, l2, extra, tol)
        else:
            w = _row_newton(G, q, w, l1, l2, extra, tol)
        trace.extend(extra)
        kkt = _gram_kkt(G, q, w, l1, l2)
        if kkt <= tol:
            break
    trace = np.asarray(trace)
    # rounding in the objective grows with the size of its terms, not of the sum
    aw = np.abs(w)
    scale = max(1.0, float(np.sum(aw * (np.abs(G) @ aw)) + np.sum(np.abs(q) * aw)), float(np.abs(trace).max()))
    monotone = bool(np.all(np.diff(trace) <= 1e-12 * scale))
    _check(sweeps, kkt, monotone, max_sweeps, tol, alpha, l1_ratio)
    return w, sweeps, kkt, trace


def elastic_net_fit(X, y, alpha: float, l1_ratio: float, *, w0=None, tol: float = KKT_TOL,
                    max_sweeps: int = MAX_SWEEPS) -> FitResult:
    """Single-task Elastic Net by cyclic coordinate descent.

    Returns coefficients, intercept and convergence diagnostics. Raises
    :class:`ConvergenceError` if the KKT residual stays above ``tol``.
    """
    y = np.asarray(y, float)
    if y.ndim != 1:
        raise ValueError("y must be one-dimensional; use multitask_fit for several targets")
    G, q, xm, ym = _prepare(X, y)
    w, sweeps, kkt, trace = _solve_gram(G, q, alpha, l1_ratio, w0, tol, max_sweeps)
    return FitResult(w, float(ym - xm @ w), sweeps, kkt, trace)


def multitask_fit(X, Y, alpha: float, l1_ratio: float, *, independent: bool = False, w0=None,
                  tol: float = KKT_TOL, max_sweeps: int = MAX_SWEEPS) -> FitResult:
    """Multi-task Elastic Net with a shared-support (row-wise l2,1) penalty.

    ``coef`` has shape (features, tasks). With ``independent=True`` every
    task is fitted separately with the single-task penalty instead.
    """
    Y = np.asarray(Y, float)
    if Y.ndim != 2:
        raise ValueError("Y must be two-dimensional (samples, tasks)")
    G, Q, xm, ym = _prepare(X, Y)
    if independent:
        cols, sweeps, kkt, traces = [], 0, 0.0, []
        for m in range(Q.shape[1]):
            w, s, k, tr = _solve_gram(G, np.ascontiguousarray(Q[:, m]), alpha, l1_ratio,
                                      None if w0 is None else w0[:, m], tol, max_sweeps)
            cols.append(w)
            sweeps, kkt = max(sweeps, s), max(kkt, k)
            traces.append(tr)
        W = np.column_stack(cols)
        trace = traces[0]
    else:
        W, sweeps, kkt, trace = _solve_gram(G, Q, alpha, l1_ratio, w0, tol, max_sweeps)
    return FitResult(W, ym - xm @ W, sweeps, kkt, trace)


def kkt_residual(X, y, coef, intercept, alpha: float, l1_ratio: float) -> float:
    """Largest subgradient violation of the (multi-task) Elastic-Net optimality conditions."""
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    W = np.asarray(coef, float)
    N = X.shape[0]
    l1, l2 = _penalties(alpha, l1_ratio)
    R = y - X @ W - intercept
    grad = -X.T @ R / N + l2 * W
    if W.ndim == 1:
        v = np.where(W > 0, np.abs(grad + l1), np.where(W < 0, np.abs(grad - l1),
                                                           np.maximum(0, np.abs(grad) - l1)))
        return float(v.max())
    norms = np.linalg.norm(W, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    active = np.linalg.norm(grad + l1 * W / safe[:, None], axis=1)
    inactive = np.maximum(0, np.linalg.norm(grad, axis=1) - l1)
    return float(np.where(norms > 0, active, inactive).max())


def _r2_columns(y_true, y_pred):
    ss_res = np.sum((y_true - y_pred) ** 2, axis=0)
    ss_tot = np.sum((y_true - y_true.mean(axis=0)) ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = 1 - ss_res / ss_tot
    return np.where(ss_tot > 0, r2, np.nan)


def fold_indices(X, Y, folds: int, rng: np.random.Generator) -> list:
    """Contiguous folds over a seeded permutation of canonically ordered rows.

    Rows are first sorted lexicographically by their content, so the folds
    (and everything downstream) do not depend on the input sample order.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float).reshape(X.shape[0], -1)
    keys = np.column_stack([X, Y])
    canon = np.lexsort(keys.T[::-1])
    order = canon[rng.permutation(X.shape[0])]
    return np.array_split(order, folds)


def _path(G, q, alphas_desc, l1_ratio, tol, max_sweeps):
    """Warm-started solutions along a decreasing alpha path; None where CD fails."""
    out = []
    w = None
    for a in alphas_desc:
        try:
            w, *_ = _solve_gram(G, q, a, l1_ratio, w, tol, max_sweeps)
            out.append(w.copy())
        except ConvergenceError:
            out.append(None)
            w = None
    return out


def cross_validate(X, Y, grid: ElasticNetGrid = ElasticNetGrid(), rng: np.random.Generator | int = 0,
                   preprocess: PreprocessSpec = PreprocessSpec(), *, independent: bool = False,
                   tol: float = KKT_TOL, max_sweeps: int = MAX_SWEEPS) -> TrainedReadout:
    """Select ``(alpha, l1_ratio)`` by k-fold mean validation R^2 and refit on all data.

    Preprocessing statistics are fitted once on the full training matrix.
    Ties are broken toward the larger alpha. Grid points whose fit does not
    converge score NaN.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    single = Y.ndim == 1
    Y2 = Y[:, None] if single else Y
    N = X.shape[0]
    if N < grid.folds:
        raise ValueError("fewer samples than folds")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

    mask = variance_select(X, preprocess.variance_threshold)
    Z = X[:, mask]
    if preprocess.standardize:
        Z, means, scales = standardize(Z)
    else:
        means, scales = np.zeros(Z.shape[1]), np.ones(Z.shape[1])

    folds = fold_indices(Z, Y2, grid.folds, rng)
    alphas_desc = np.sort(np.asarray(grid.alphas))[::-1]
    scores = np.zeros((len(grid.l1_ratios), len(alphas_desc)))
    for f_idx, val in enumerate(folds):
        train = np.setdiff1d(np.arange(N), val)
        G, q, xm, ym = _prepare(Z[train], Y2[train] if not single else Y2[train, 0])
        for r_idx, ratio in enumerate(grid.l1_ratios):
            for a_idx, w in enumerate(_path_dispatch(G, q, alphas_desc, ratio, independent, tol, max_sweeps)):
                if w is None:
                    scores[r_idx, a_idx] = np.nan
                    continue
                W = w[:, None] if single else w
                pred = (Z[val] - xm) @ W + np.atleast_1d(ym)
                scores[r_idx, a_idx] += np.mean(_r2_columns(Y2[val], pred)) / len(folds)
    if np.all(np.isnan(scores)):
        raise ValueError("cross-validation failed: every grid point scored NaN")

    best = np.nanmax(scores)
    r_best, a_best = None, None
    # alphas are descending, so the first hit within the tie tolerance is the largest alpha
    for a_idx in range(len(alphas_desc)):
        for r_idx in range(len(grid.l1_ratios)):
            if scores[r_idx, a_idx] >= best - 1e-12:
                r_best, a_best = r_idx, a_idx
                break
        if r_best is not None:
            break
    alpha, ratio = float(alphas_desc[a_best]), grid.l1_ratios[r_best]

    # refit along the same path so the final solve is warm-started
    G, q, xm, ym = _prepare(Z, Y2[:, 0] if single else Y2)
    path = _path_dispatch(G, q, alphas_desc[: a_best + 1], ratio, independent, tol, max_sweeps)
    w = path[-1]
    if w is None:
        w, *_ = _solve_dispatch(G, q, alpha, ratio, None, independent, tol, max_sweeps)
    W = w[:, None] if single else w
    intercepts = np.atleast_1d(ym) - xm @ W
    table = np.column_stack([np.repeat(grid.l1_ratios, len(alphas_desc)),
                             np.tile(alphas_desc, len(grid.l1_ratios)), scores.ravel()])
    return TrainedReadout(W.T, intercepts, mask, means, scales, alpha, ratio, float(best), table)


def _solve_dispatch(G, q, alpha, ratio, w0, independent, tol, max_sweeps):
    if q.ndim == 2 and independent:
        cols = [_solve_gram(G, np.ascontiguousarray(q[:, m]), alpha, ratio,
                            None if w0 is None else w0[:, m], tol, max_sweeps)[0] for m in range(q.shape[1])]
        return (np.column_stack(cols),)
    return _solve_gram(G, q, alpha, ratio, w0, tol, max_sweeps)


def _path_dispatch(G, q, alphas_desc, ratio, independent, tol, max_sweeps):
    if q.ndim == 2 and independent:
        cols = [_path(G, np.ascontiguousarray(q[:, m]), alphas_desc, ratio, tol, max_sweeps)
                for m in range(q.shape[1])]
        return [None if any(c[i] is None for c in cols) else np.column_stack([c[i] for c in cols])
                for i in range(len(alphas_desc))]
    return _path(G, q, alphas_desc, ratio, tol, max_sweeps)


def predict(model: TrainedReadout, X_raw) -> np.ndarray:
    """Apply frozen mask, standardisation and the affine readout.

    Returns shape (samples,) for single-task models and (samples, tasks)
    otherwise.
    """
    X = np.atleast_2d(np.asarray(X_raw, float))
    if X.shape[1] != model.feature_mask.size:
        raise ValueError(f"expected {model.feature_mask.size} raw features, got {X.shape[1]}")
    Z = (X[:, model.feature_mask] - model.feature_means) / model.feature_scales
    Y = Z @ model.weights.T + model.intercepts
    return Y[:, 0] if model.n_tasks == 1 else Y
