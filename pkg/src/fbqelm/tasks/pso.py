"""Box-constrained particle swarm optimisation with restarts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PsoConfig:
    """Swarm size, update coefficients and budget.

    ``patience`` stops a restart early once the swarm best has not improved
    by more than ``ftol`` for that many iterations; ``patience = 0`` always
    spends the full budget.
    """

    particles: int = 64
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    iterations: int = 2000
    restarts: int = 4
    seed: int = 0
    patience: int = 200
    ftol: float = 1e-14

    def __post_init__(self):
        if self.particles < 2 or self.iterations < 1 or self.restarts < 1:
            raise ValueError("need >= 2 particles, >= 1 iteration and >= 1 restart")


@dataclass
class PsoResult:
    x: np.ndarray
    fun: float
    evaluations: int
    history: np.ndarray  # best cost after each restart


def pso_minimize(cost, lower, upper, cfg: PsoConfig = PsoConfig(), *, vectorized: bool = True,
                 periodic=None, rng: np.random.Generator | None = None) -> PsoResult:
    """Minimise ``cost`` over the box ``[lower, upper]``.

    With ``vectorized=True`` the cost receives a ``(particles, dim)`` array and
    returns ``(particles,)`` values. Positions are clipped to the box, except
    coordinates flagged in the boolean mask ``periodic``, which wrap around.
    Velocities are clipped to the box width.
    """
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    if lower.shape != upper.shape or np.any(upper < lower):
        raise ValueError("invalid box bounds")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    span = upper - lower
    wrap = np.zeros(lower.size, bool) if periodic is None else np.asarray(periodic, bool)
    f = cost if vectorized else (lambda P: np.array([cost(p) for p in P]))
    P, n = cfg.particles, lower.size
    best_x, best_f = None, np.inf
    history, evals = [], 0
    for _ in range(cfg.restarts):
        x = lower + rng.random((P, n)) * span
        v = (rng.random((P, n)) - 0.5) * span
        fx = np.asarray(f(x), float)
        evals += P
        pbest, pbest_f = x.copy(), fx.copy()
        g = int(np.nanargmin(pbest_f)) if np.any(np.isfinite(pbest_f)) else 0
        gbest, gbest_f = pbest[g].copy(), pbest_f[g]
        stall = 0
        for _ in range(cfg.iterations):
            r1, r2 = rng.random((P, n)), rng.random((P, n))
            v = cfg.inertia * v + cfg.cognitive * r1 * (pbest - x) + cfg.social * r2 * (gbest - x)
            v = np.clip(v, -span, span)
            x = x + v
            x = np.where(wrap, lower + np.mod(x - lower, np.where(span > 0, span, 1.0)), np.clip(x, lower, upper))
            fx = np.asarray(f(x), float)
            evals += P
            better = fx < pbest_f
            pbest[better], pbest_f[better] = x[better], fx[better]
            g = int(np.argmin(np.where(np.isfinite(pbest_f), pbest_f, np.inf)))
            if pbest_f[g] < gbest_f - cfg.ftol:
                stall = 0
            else:
                stall += 1
            if pbest_f[g] < gbest_f:
                gbest, gbest_f = pbest[g].copy(), pbest_f[g]
            if cfg.patience and stall >= cfg.patience:
                break
        history.append(gbest_f)
        if gbest_f < best_f:
            best_x, best_f = gbest, gbest_f
    if best_x is None or not np.isfinite(best_f):
        raise ArithmeticError("particle swarm budget exhausted without a finite cost")
    return PsoResult(best_x, float(best_f), evals, np.array(history))
