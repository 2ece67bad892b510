"""Spontaneous and stimulated output patterns, measurement noise and SNR.

The spontaneous pattern is the coincidence probability of the evolved pair,
``C = |U_s S U_i^T|^2``. The stimulated pattern is the signal intensity
generated when idler mode ``j`` is seeded by a coherent beam that has been
sent backwards through the idler chain ``U_tilde``,
``I[:, j] = |alpha_j|^2 |U_s S conj(U_tilde)|^2[:, j]``. When
``U_tilde = U_i^dagger`` the two patterns are proportional, which is what
lets a classical measurement train the readout used on quantum data.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lattice import BinWindow, CorrelationPattern
from .reservoir import ReservoirMap
from .synthesis import BiphotonAmplitude

# Calibrated so that bright bins of dual-pump qubit patterns sit near
# 16 dB (coincidences) and 35 dB (stimulated) above their noise.
DEFAULT_TOTAL_PAIRS = 3.3e4
DEFAULT_STIMULATED_POWER = 6.2e4  # pW summed over the measured grid
DEFAULT_OSA_FLOOR = 1.0  # pW
DEFAULT_ACCIDENTAL_FRACTION = 0.05


@dataclass(frozen=True)
class NoiseModel:
    """Finite-statistics and detector-floor parameters.

    ``total_pairs`` is the expected number of detected pairs per coincidence
    pattern. ``accidental_fraction`` adds uncorrelated coincidences spread
    uniformly over the grid. ``osa_floor`` is the spectrum-analyser noise
    level in the same units as ``stimulated_power`` (pW).
    """

    total_pairs: float = DEFAULT_TOTAL_PAIRS
    accidental_fraction: float = DEFAULT_ACCIDENTAL_FRACTION
    osa_floor: float = DEFAULT_OSA_FLOOR
    stimulated_power: float = DEFAULT_STIMULATED_POWER
    rng_seed: int = 0

    def __post_init__(self):
        if not self.total_pairs > 0:
            raise ValueError("total_pairs must be positive")
        if not 0 <= self.accidental_fraction < 1:
            raise ValueError("accidental_fraction must lie in [0, 1)")
        if self.osa_floor < 0 or not self.stimulated_power > 0:
            raise ValueError("osa_floor must be >= 0 and stimulated_power > 0")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)


@dataclass(frozen=True)
class CountsPattern:
    """Integer coincidence counts with the exposure that produced them."""

    counts: np.ndarray
    window: BinWindow
    total_pairs: float
    accidental_mean: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.counts)
        if not np.issubdtype(c.dtype, np.integer):
            raise ValueError("counts must be integer valued")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        if c.shape != (self.window.dim, self.window.dim):
            raise ValueError("counts shape does not match window")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def net(self) -> np.ndarray:
        """Accidentals-subtracted counts (may be slightly negative)."""
        return self.counts - self.accidental_mean

    def net_pattern(self) -> CorrelationPattern:
        """Accidentals-subtracted counts clipped at zero, as a pattern."""
        return CorrelationPattern(np.clip(self.net(), 0, None), self.window)


def _restrict(values: np.ndarray, full: BinWindow, window: BinWindow | None) -> CorrelationPattern:
    pattern = CorrelationPattern(values, full)
    return pattern if window is None or window == full else pattern.restrict(window)


def spontaneous_pattern(state: BiphotonAmplitude, rmap: ReservoirMap, window: BinWindow | None = None,
                        pair_probability: float = 0.0) -> CorrelationPattern:
    """Coincidence probabilities ``|U_s S U_i^T|^2`` on the measured bins.

    ``pair_probability > 0`` adds the multi-pair background
    ``p <n_s,k><n_i,j>`` that the low-gain limit neglects.
    """
    if state.window != rmap.window:
        raise ValueError("state and reservoir windows differ")
    A = rmap.signal.matrix @ state.amplitudes
    C = np.abs(A @ rmap.idler.matrix.T) ** 2
    if pair_probability > 0:
        n_s = np.sum(np.abs(A) ** 2, axis=1)
        n_i = np.sum(np.abs(rmap.idler.matrix @ state.amplitudes.T) ** 2, axis=1)
        C = C + pair_probability * np.outer(n_s, n_i)
    return _restrict(C, state.window, window)


def stimulated_pattern(state: BiphotonAmplitude, rmap: ReservoirMap, seed_chain: np.ndarray,
                       seed_power=1.0, window: BinWindow | None = None) -> CorrelationPattern:
    """Signal intensity when idler mode ``j`` is seeded through ``seed_chain``.

    Column ``j`` is the signal spectrum produced by seeding mode ``j`` alone
    with power ``seed_power[j]``; the pattern is assembled column by column.
    """
    D = state.window.dim
    if state.window != rmap.window or np.shape(seed_chain) != (D, D):
        raise ValueError("seed chain, state and reservoir must share one window")
    power = np.broadcast_to(np.asarray(seed_power, dtype=float), (D,))
    if np.any(power < 0):
        raise ValueError("seed power must be nonnegative")
    if not np.any(power > 0):
        raise ValueError("seed power is zero on every mode")
    field_out = rmap.signal.matrix @ state.amplitudes @ np.conj(seed_chain)
    I = np.abs(field_out) ** 2 * power[None, :]
    return _restrict(I, state.window, window)


def sample_coincidences(pattern: CorrelationPattern, noise: NoiseModel,
                        rng: np.random.Generator | None = None) -> CountsPattern:
    """Poisson counts with mean ``N p_kj + N f / Q^2`` per bin."""
    p = pattern.values
    if p.sum() > 1 + 1e-9:
        raise ValueError("coincidence pattern must be a (sub-)probability distribution")
    rng = noise.rng() if rng is None else rng
    q2 = p.size
    acc = noise.total_pairs * noise.accidental_fraction / q2
    counts = rng.poisson(noise.total_pairs * p + acc)
    return CountsPattern(counts.astype(np.int64), pattern.window, noise.total_pairs, acc)


def scale_to_power(pattern: CorrelationPattern, noise: NoiseModel) -> CorrelationPattern:
    """Rescale a stimulated pattern so the grid carries ``stimulated_power`` in total."""
    total = pattern.total
    if not total > 0:
        raise ValueError("degenerate pattern: zero stimulated power")
    return pattern.scaled(noise.stimulated_power / total)


def add_osa_noise(pattern: CorrelationPattern, noise: NoiseModel,
                  rng: np.random.Generator | None = None) -> CorrelationPattern:
    """Add a folded-Gaussian floor ``|N(0, osa_floor)|`` to every intensity."""
    if noise.osa_floor == 0:
        return pattern
    rng = noise.rng() if rng is None else rng
    floor = np.abs(rng.normal(0.0, noise.osa_floor, pattern.values.shape))
    return CorrelationPattern(pattern.values + floor, pattern.window)


@dataclass(frozen=True)
class SnrReport:
    """Per-bin SNR (dB) of the brightest bins, sorted descending by signal."""

    mode: str
    bins: tuple  # (signal bin, idler bin) pairs
    snr_db: np.ndarray = field(repr=False)

    @property
    def mean_db(self) -> float:
        return float(np.mean(self.snr_db))


def _bright_bins(signal: np.ndarray, fraction: float) -> np.ndarray:
    flat = signal.ravel()
    order = np.argsort(-flat, kind="stable")
    order = order[flat[order] > 0]
    if order.size == 0:
        raise ValueError("no positive signal to report")
    cum = np.cumsum(flat[order])
    n = int(np.searchsorted(cum, fraction * cum[-1] * (1 - 1e-12))) + 1
    return order[:n]


def snr_report(source: CountsPattern | CorrelationPattern, mode: str = "coincidence",
               noise: NoiseModel | None = None, fraction: float = 0.9) -> SnrReport:
    """SNR in dB of the bins carrying ``fraction`` of the cumulative signal.

    Coincidences: ``C_net / sqrt(C_tot)``. Stimulated: ``I / osa_floor``.
    """
    if mode == "coincidence":
        if not isinstance(source, CountsPattern):
            raise TypeError("coincidence SNR needs a CountsPattern")
        tot = source.counts.astype(float)
        net = source.net()
        idx = _bright_bins(np.clip(net, 0, None), fraction)
        keep = []
        for i in idx:
            if tot.flat[i] <= 0:
                warnings.warn(f"skipping bin {i}: zero total counts", RuntimeWarning, stacklevel=2)
                continue
            keep.append(i)
        idx = np.asarray(keep, dtype=int)
        snr = net.flat[idx] / np.sqrt(tot.flat[idx])
    elif mode == "stimulated":
        if noise is None or not noise.osa_floor > 0:
            raise ValueError("stimulated SNR needs a NoiseModel with a positive osa_floor")
        values = source.values
        idx = _bright_bins(values, fraction)
        snr = values.flat[idx] / noise.osa_floor
    else:
        raise ValueError(f"unknown SNR mode {mode!r}")
    Q = source.window.dim
    bins = tuple((int(source.window.lo + i // Q), int(source.window.lo + i % Q)) for i in idx)
    return SnrReport(mode, bins, 10 * np.log10(snr))
