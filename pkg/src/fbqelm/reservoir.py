"""Electro-optic phase-modulator reservoir.

A sinusoidally driven phase modulator maps bin ``j`` to bin ``j + n`` with
amplitude ``J_n(depth) exp(i n phase)``. On a finite window the matrix is
used as-is, so it is sub-unitary near the edges: light scattered outside the
measured bins is lost, as in the experiment.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import jv

from .lattice import DEFAULT_WINDOW, BinWindow
from .synthesis import BiphotonAmplitude, WaveshaperWeights


@dataclass(frozen=True)
class EomConfig:
    """Drive settings of one modulator.

    ``extra_tones`` holds ``(harmonic, depth, phase)`` triples for additional
    RF tones at integer multiples of the bin spacing. A tone at harmonic
    ``L`` couples bin ``j`` to ``j + L m``; combined with the fundamental this
    gives lattice connectivity beyond nearest-neighbour hopping.
    """

    depth: float = 1.4
    phase: float = 0.0
    window: BinWindow = field(default=DEFAULT_WINDOW)
    extra_tones: tuple = ()

    def __post_init__(self):
        if not self.depth >= 0:
            raise ValueError("modulation depth must be nonnegative")
        if self.window.dim < 2:
            raise ValueError("modulator window needs at least two bins")
        for harmonic, depth, _ in self.extra_tones:
            if int(harmonic) != harmonic or harmonic < 1 or depth < 0:
                raise ValueError("extra tones need a positive integer harmonic and nonnegative depth")

    def shifted(self, dphase: float) -> "EomConfig":
        """Same drive with every RF tone's phase advanced by ``dphase`` radians."""
        tones = tuple((h, d, p + dphase) for h, d, p in self.extra_tones)
        return replace(self, phase=self.phase + dphase, extra_tones=tones)


def _offset_coefficients(cfg: EomConfig, offsets: np.ndarray) -> np.ndarray:
    """Amplitude for a shift of ``offsets`` bins on the infinite lattice."""
    m = offsets.astype(float)
    coeff = jv(m, cfg.depth) * np.exp(1j * m * cfg.phase)
    for harmonic, depth, phase in cfg.extra_tones:
        # convolve with the harmonic tone's own Bessel comb
        span = int(np.max(np.abs(offsets))) // harmonic + 30
        n = np.arange(-span, span + 1)
        tone = jv(n, depth) * np.exp(1j * n * phase)
        base = offsets[..., None] - harmonic * n
        coeff = np.sum(jv(base, cfg.depth) * np.exp(1j * base * cfg.phase) * tone, axis=-1)
    return coeff


@dataclass(frozen=True)
class EomUnitary:
    """Windowed transfer matrix ``U[k, j]`` from input bin ``j`` to output bin ``k``."""

    matrix: np.ndarray
    config: EomConfig

    @property
    def window(self) -> BinWindow:
        return self.config.window

    @property
    def dagger(self) -> np.ndarray:
        return self.matrix.conj().T


def eom_unitary(cfg: EomConfig = EomConfig()) -> EomUnitary:
    """Bessel-series transfer matrix of a phase modulator on ``cfg.window``."""
    n = cfg.window.bins
    offsets = n[:, None] - n[None, :]
    if cfg.extra_tones:
        U = _offset_coefficients(cfg, offsets)
    else:
        U = jv(offsets, cfg.depth) * np.exp(1j * offsets * cfg.phase)
    U.setflags(write=False)
    return EomUnitary(U, cfg)


@dataclass(frozen=True)
class ReservoirMap:
    """Independent modulators on the signal and idler arms."""

    signal: EomUnitary
    idler: EomUnitary

    def __post_init__(self):
        if self.signal.window != self.idler.window:
            raise ValueError("signal and idler modulators must share a bin window")

    @property
    def window(self) -> BinWindow:
        return self.signal.window

    @classmethod
    def symmetric(cls, cfg: EomConfig = EomConfig()) -> "ReservoirMap":
        u = eom_unitary(cfg)
        return cls(u, u)

    @classmethod
    def from_settings(cls, depth: float = 1.4, phase_signal: float = 0.0, phase_idler: float = 0.0,
                      window: BinWindow = DEFAULT_WINDOW) -> "ReservoirMap":
        return cls(eom_unitary(EomConfig(depth, phase_signal, window)),
                   eom_unitary(EomConfig(depth, phase_idler, window)))


def reservoir_evolve(state: BiphotonAmplitude, rmap: ReservoirMap) -> BiphotonAmplitude:
    """Apply ``U_s (x) U_i``: in matrix form ``S -> U_s S U_i^T``."""
    if state.window != rmap.window:
        raise ValueError(f"state window {state.window} does not match reservoir window {rmap.window}")
    out = rmap.signal.matrix @ state.amplitudes @ rmap.idler.matrix.T
    return BiphotonAmplitude(out, state.window)


def conjugated_seed_chain(idler: EomUnitary, weights: WaveshaperWeights | np.ndarray | None = None) -> np.ndarray:
    """Back-propagated idler chain used to shape the stimulating seed.

    The forward idler path is the waveshaper followed by the modulator,
    ``U_i = U_eom(theta) diag(g)``. Its adjoint is realised physically by
    conjugating the weights and delaying the RF drive by pi:
    ``diag(g*) U_eom(theta + pi)``, which equals ``U_i^dagger`` exactly.
    """
    back = eom_unitary(idler.config.shifted(np.pi)).matrix
    if weights is None:
        return back.copy()
    g = weights.idler if isinstance(weights, WaveshaperWeights) else np.asarray(weights, complex)
    if g.shape != (idler.window.dim,):
        raise ValueError("idler weights do not match the modulator window")
    return np.conj(g)[:, None] * back
