"""Frequency-bin index conventions, wavelength grid, windows and patterns.

Bins are labelled by integers ``n``. Signal photons sit at
``signal_base + n * delta`` and idler photons at ``idler_base - n * delta``,
so a pair ``(n, n)`` always sums to the same optical frequency budget.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Band = Literal["signal", "idler"]


@dataclass(frozen=True)
class BinWindow:
    """Contiguous, inclusive range of frequency-bin indices ``lo..hi``."""

    lo: int = -3
    hi: int = 4

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise ValueError("bin window bounds must be integers")
        if self.lo > self.hi:
            raise ValueError(f"empty bin window lo={self.lo} > hi={self.hi}")

    @property
    def dim(self) -> int:
        return self.hi - self.lo + 1

    @property
    def bins(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __contains__(self, n) -> bool:
        return self.lo <= n <= self.hi

    def index(self, n: int) -> int:
        """Array index of bin ``n`` inside this window."""
        if n not in self:
            raise IndexError(f"bin {n} outside window [{self.lo}, {self.hi}]")
        return n - self.lo

    def contains_window(self, other: "BinWindow") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def sub_slice(self, other: "BinWindow") -> slice:
        """Slice selecting ``other`` from arrays laid out on this window."""
        if not self.contains_window(other):
            raise ValueError(f"{other} is not contained in {self}")
        return slice(other.lo - self.lo, other.hi - self.lo + 1)


DEFAULT_WINDOW = BinWindow(-3, 4)
QUBIT_WINDOW = BinWindow(-2, 3)
# qudit logical index j lives on bin QUDIT_BINS[j]
QUDIT_BINS = (-1, 0, 1, 2)
QUBIT_BINS = (0, 1)


@dataclass(frozen=True)
class WavelengthGrid:
    """Linear wavelength grid of the signal and idler combs (nm)."""

    signal_base: float = 1561.43
    idler_base: float = 1551.72
    delta: float = 0.16

    def wavelength(self, band: Band, n) -> float | np.ndarray:
        if band == "signal":
            return self.signal_base + np.asarray(n) * self.delta
        if band == "idler":
            return self.idler_base - np.asarray(n) * self.delta
        raise ValueError(f"unknown band {band!r}")


def bin_wavelength(band: Band, n, grid: WavelengthGrid = WavelengthGrid()):
    """Wavelength in nm of bin ``n`` in the given band."""
    wl = grid.wavelength(band, n)
    return float(wl) if np.ndim(wl) == 0 else wl


def measurement_window(task: Literal["qubit", "qudit"]) -> BinWindow:
    """Bins read out for a task.

    Qubit experiments measure a 6x6 grid centred on the logical bins {0, 1};
    qudit experiments read the full 8-bin window.
    """
    if task == "qubit":
        return QUBIT_WINDOW
    if task == "qudit":
        return DEFAULT_WINDOW
    raise ValueError(f"unknown task kind {task!r}")


@dataclass(frozen=True)
class CorrelationPattern:
    """Nonnegative ``Q x Q`` grid of coincidence probabilities or intensities.

    Rows index signal bins and columns index idler bins of ``window``.
    """

    values: np.ndarray
    window: BinWindow = field(default=DEFAULT_WINDOW)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.window.dim, self.window.dim):
            raise ValueError(f"pattern shape {v.shape} does not match window dim {self.window.dim}")
        if not np.all(np.isfinite(v)):
            raise ValueError("pattern has non-finite entries")
        if np.any(v < 0):
            raise ValueError("pattern has negative entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def restrict(self, window: BinWindow) -> "CorrelationPattern":
        sl = self.window.sub_slice(window)
        return CorrelationPattern(self.values[sl, sl], window)

    def scaled(self, c: float) -> "CorrelationPattern":
        return CorrelationPattern(self.values * c, self.window)


def normalize_and_vectorize(pattern: CorrelationPattern | np.ndarray) -> np.ndarray:
    """Row-major flatten a pattern and rescale it to unit Euclidean norm."""
    v = pattern.values if isinstance(pattern, CorrelationPattern) else np.asarray(pattern, dtype=float)
    v = v.ravel()
    norm = np.linalg.norm(v)
    if not norm > 0:
        raise ValueError("degenerate pattern: no positive entries")
    return v / norm
