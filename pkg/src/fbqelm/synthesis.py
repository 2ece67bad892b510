"""Biphoton state families and waveshaper weighting.

States are stored as complex amplitude matrices ``S[k, j]`` over
(signal bin, idler bin) of a :class:`~fbqelm.lattice.BinWindow`.
Two-photon qubit states use bins {0, 1}; qudit states use the diagonal of
bins {-1, 0, 1, 2}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .lattice import DEFAULT_WINDOW, QUBIT_BINS, QUDIT_BINS, BinWindow

Family = Literal["SP", "DP", "QUDIT"]

_NORM_TOL = 1e-12


def _as_complex(a) -> np.ndarray:
    return np.array(a, dtype=complex)


@dataclass(frozen=True)
class WaveshaperWeights:
    """Complex per-bin transmission of the programmable filter on each arm."""

    signal: np.ndarray
    idler: np.ndarray
    window: BinWindow = field(default=DEFAULT_WINDOW)

    def __post_init__(self):
        s, i = _as_complex(self.signal), _as_complex(self.idler)
        if s.shape != (self.window.dim,) or i.shape != (self.window.dim,):
            raise ValueError("weights must have one entry per window bin")
        if np.any(np.abs(s) > 1 + 1e-12) or np.any(np.abs(i) > 1 + 1e-12):
            raise ValueError("waveshaper weights must satisfy |g| <= 1 (passive element)")
        s.setflags(write=False)
        i.setflags(write=False)
        object.__setattr__(self, "signal", s)
        object.__setattr__(self, "idler", i)

    @classmethod
    def identity(cls, window: BinWindow = DEFAULT_WINDOW) -> "WaveshaperWeights":
        ones = np.ones(window.dim, complex)
        return cls(ones, ones, window)

    @classmethod
    def from_qubit(cls, g, window: BinWindow = DEFAULT_WINDOW) -> "WaveshaperWeights":
        """Place ``g = (g_s0, g_s1, g_i0, g_i1)`` on bins {0, 1}; block the rest."""
        g = _as_complex(g)
        if g.shape != (4,):
            raise ValueError("qubit weights need four entries (g_s0, g_s1, g_i0, g_i1)")
        s = np.zeros(window.dim, complex)
        i = np.zeros(window.dim, complex)
        for k, n in enumerate(QUBIT_BINS):
            s[window.index(n)] = g[k]
            i[window.index(n)] = g[2 + k]
        return cls(s, i, window)


@dataclass(frozen=True)
class BiphotonAmplitude:
    """Joint spectral amplitude on a bin window (rows signal, columns idler)."""

    amplitudes: np.ndarray
    window: BinWindow = field(default=DEFAULT_WINDOW)
    normalized: bool = False

    def __post_init__(self):
        a = _as_complex(self.amplitudes)
        if a.shape != (self.window.dim, self.window.dim):
            raise ValueError(f"amplitude shape {a.shape} does not match window dim {self.window.dim}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        if self.normalized and abs(np.sum(np.abs(a) ** 2) - 1) > _NORM_TOL:
            raise ValueError("amplitudes flagged normalized but do not have unit norm")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def probability(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def normalize(self) -> "BiphotonAmplitude":
        p = self.probability
        if not p > 0:
            raise ValueError("vacuum state: cannot normalize an all-zero amplitude")
        return BiphotonAmplitude(self.amplitudes / np.sqrt(p), self.window, True)

    def canonical(self) -> "BiphotonAmplitude":
        """Remove the global phase so the first nonzero amplitude is real-positive."""
        flat = self.amplitudes.ravel()
        mags = np.abs(flat)
        if not mags.max() > 0:
            return self
        first = np.flatnonzero(mags > 1e-15 * mags.max())[0]
        phase = flat[first] / mags[first]
        out = self.amplitudes * np.conj(phase)
        # snap the pivot so it is exactly real
        out.flat[first] = mags[first]
        return BiphotonAmplitude(out, self.window, self.normalized)

    def block(self, bins) -> np.ndarray:
        """Amplitude sub-matrix on the given logical bins (same bins on both arms)."""
        idx = [self.window.index(n) for n in bins]
        return self.amplitudes[np.ix_(idx, idx)]

    def qubit_vector(self) -> np.ndarray:
        """Coefficients on (|00>, |01>, |10>, |11>) of the logical qubit bins."""
        return self.block(QUBIT_BINS).ravel()

    def with_window(self, window: BinWindow) -> "BiphotonAmplitude":
        """Embed into (or crop to) another window; cropping must not drop amplitude."""
        out = np.zeros((window.dim, window.dim), complex)
        lo, hi = max(window.lo, self.window.lo), min(window.hi, self.window.hi)
        if lo <= hi:
            src = slice(lo - self.window.lo, hi - self.window.lo + 1)
            dst = slice(lo - window.lo, hi - window.lo + 1)
            out[dst, dst] = self.amplitudes[src, src]
        if abs(np.sum(np.abs(out) ** 2) - self.probability) > 1e-14:
            raise ValueError("target window drops part of the state support")
        return BiphotonAmplitude(out, window, self.normalized)


def _finish(S: np.ndarray, window: BinWindow, normalize: bool) -> BiphotonAmplitude:
    if not np.any(S != 0):
        raise ValueError("vacuum state: every amplitude term is zero")
    state = BiphotonAmplitude(S, window)
    if normalize:
        state = state.normalize()
    return state.canonical()


def sp_state(g, window: BinWindow = DEFAULT_WINDOW, normalize: bool = True) -> BiphotonAmplitude:
    """Single-pump state ``g_s0 g_i0 |00> + g_s1 g_i1 |11>`` (normalized)."""
    g = _as_complex(g)
    S = np.zeros((window.dim, window.dim), complex)
    i0, i1 = window.index(0), window.index(1)
    S[i0, i0] = g[0] * g[2]
    S[i1, i1] = g[1] * g[3]
    return _finish(S, window, normalize)


def dp_state(g, window: BinWindow = DEFAULT_WINDOW, normalize: bool = True) -> BiphotonAmplitude:
    """Dual-pump state with weights ``(2 g_s0 g_i0, g_s0 g_i1, g_s1 g_i0, 2 g_s1 g_i1)``.

    The degenerate |00> and |11> terms carry twice the amplitude of the
    cross terms because two pump photons of the same colour contribute.
    """
    gs0, gs1, gi0, gi1 = _as_complex(g)
    S = np.zeros((window.dim, window.dim), complex)
    i0, i1 = window.index(0), window.index(1)
    S[i0, i0] = 2 * gs0 * gi0
    S[i0, i1] = gs0 * gi1
    S[i1, i0] = gs1 * gi0
    S[i1, i1] = 2 * gs1 * gi1
    return _finish(S, window, normalize)


def qudit_state(alphas, window: BinWindow = DEFAULT_WINDOW, normalize: bool = True) -> BiphotonAmplitude:
    """Diagonal state ``sum_j alpha_j |jj>`` with logical index j on bin ``j - 1``."""
    a = _as_complex(alphas)
    if a.ndim != 1 or not 2 <= a.size <= 4:
        raise ValueError("qudit coefficient vector must have length 2, 3 or 4")
    S = np.zeros((window.dim, window.dim), complex)
    for j, aj in enumerate(a):
        k = window.index(QUDIT_BINS[j])
        S[k, k] = aj
    return _finish(S, window, normalize)


def sp_source(window: BinWindow = DEFAULT_WINDOW) -> np.ndarray:
    """Unshaped single-pump amplitude on the logical bins (diagonal ones)."""
    S = np.zeros((window.dim, window.dim), complex)
    for n in QUBIT_BINS:
        S[window.index(n), window.index(n)] = 1
    return S


def dp_source(window: BinWindow = DEFAULT_WINDOW) -> np.ndarray:
    """Unshaped dual-pump amplitude ``[[2, 1], [1, 2]]`` on bins {0, 1}."""
    S = np.zeros((window.dim, window.dim), complex)
    i0, i1 = window.index(0), window.index(1)
    S[np.ix_([i0, i1], [i0, i1])] = [[2, 1], [1, 2]]
    return S


def qudit_source(d: int = 4, window: BinWindow = DEFAULT_WINDOW) -> np.ndarray:
    """Unshaped diagonal comb source over the first ``d`` qudit bins."""
    S = np.zeros((window.dim, window.dim), complex)
    for n in QUDIT_BINS[:d]:
        S[window.index(n), window.index(n)] = 1
    return S


def qudit_weights(alphas, window: BinWindow = DEFAULT_WINDOW) -> WaveshaperWeights:
    """Waveshaper setting that carves ``sum_j alpha_j |jj>`` out of the comb source.

    The coefficients are written on the signal arm; the idler arm passes the
    qudit bins with unit transmission and blocks everything else.
    """
    a = _as_complex(alphas)
    scale = np.max(np.abs(a))
    if not scale > 0:
        raise ValueError("vacuum state: all qudit coefficients are zero")
    s = np.zeros(window.dim, complex)
    i = np.zeros(window.dim, complex)
    for j, aj in enumerate(a):
        k = window.index(QUDIT_BINS[j])
        s[k] = aj / scale
        i[k] = 1
    return WaveshaperWeights(s, i, window)


def apply_waveshaper(state: BiphotonAmplitude, w: WaveshaperWeights, renormalize: bool = True) -> BiphotonAmplitude:
    """Filter both arms: ``S -> D_s S D_i^T`` with diagonal ``D``."""
    if state.window != w.window:
        raise ValueError("state and waveshaper windows differ")
    S = w.signal[:, None] * state.amplitudes * w.idler[None, :]
    if not np.any(S != 0):
        raise ValueError("fully blocked state: the waveshaper removes every amplitude")
    out = BiphotonAmplitude(S, state.window)
    return out.normalize() if renormalize else out


@dataclass(frozen=True)
class StateFamilySpec:
    """Recipe for random states: family, qudit dimension and separable share."""

    family: Family = "DP"
    dim: int = 4
    separable_fraction: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.family not in ("SP", "DP", "QUDIT"):
            raise ValueError(f"unknown state family {self.family!r}")
        if self.family == "QUDIT" and self.dim not in (1, 2, 3, 4):
            raise ValueError("qudit Schmidt rank must be between 1 and 4")
        if not 0 <= self.separable_fraction <= 1:
            raise ValueError("separable_fraction must lie in [0, 1]")


def random_coefficients(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` complex numbers with modulus ~ U[0, 1] and phase ~ U[-pi, pi]."""
    mod = rng.uniform(0.0, 1.0, n)
    phase = rng.uniform(-np.pi, np.pi, n)
    return mod * np.exp(1j * phase)


def sample_weights(spec: StateFamilySpec, rng: np.random.Generator) -> np.ndarray:
    """Draw waveshaper weights (SP, DP) or qudit coefficients (QUDIT).

    SP and DP return ``(g_s0, g_s1, g_i0, g_i1)``. QUDIT returns a length-4
    coefficient vector with exactly ``spec.dim`` nonzero entries at random
    positions. With probability ``separable_fraction`` a separable variant is
    drawn: one SP product or one DP weight is zeroed, or a single qudit term
    survives.
    """
    separable = spec.separable_fraction > 0 and rng.random() < spec.separable_fraction
    while True:
        if spec.family == "QUDIT":
            rank = 1 if separable else spec.dim
            c = np.zeros(4, complex)
            support = np.sort(rng.choice(4, size=rank, replace=False))
            c[support] = random_coefficients(rank, rng)
            if np.all(c[support] != 0):
                return c
            continue
        g = random_coefficients(4, rng)
        if separable:
            if spec.family == "SP":
                # drop one of the two products by blocking its signal bin
                g[rng.integers(2)] = 0
            else:
                g[rng.integers(4)] = 0
        if spec.family == "SP" and g[0] * g[2] == 0 and g[1] * g[3] == 0:
            continue
        if not np.any(g != 0):
            continue
        return g
