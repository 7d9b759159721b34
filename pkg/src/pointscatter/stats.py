"""Nearest-neighbor spacing statistics.

Spectra are unfolded to unit mean spacing, binned into ``P(S)`` and compared
with the two reference laws

    Poisson:  P(S) = exp(-S)
    GOE:      P(S) = (pi S / 2) exp(-pi S**2 / 4)     (Wigner surmise)

through the Kolmogorov-Smirnov distance.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .billiard import BilliardSpec, avg_density
from .errors import DomainError, SampleSizeError

__all__ = [
    "SpacingSample",
    "SpacingHistogram",
    "unfold",
    "histogram",
    "reference_pdf",
    "reference_cdf",
    "ks_distance",
    "summarize",
    "MIN_LEVELS",
]

MIN_LEVELS = 50
UNFOLDING_METHODS = ("analytic_weyl", "local_window")


@dataclass(frozen=True, eq=False)
class SpacingSample:
    spacings: np.ndarray
    source_window: tuple
    unfolding_method: str
    window_width: int | None = None
    mean_spacing_raw: float = float("nan")

    def __len__(self):
        return self.spacings.size

    @property
    def n_levels(self) -> int:
        return self.spacings.size + 1


@dataclass(frozen=True, eq=False)
class SpacingHistogram:
    bin_width: float
    s_max: float
    densities: np.ndarray
    sample_count: int

    @property
    def edges(self) -> np.ndarray:
        return _edges(self.bin_width, self.s_max, self.densities.size)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return (e[:-1] + e[1:]) / 2

    @property
    def in_range_fraction(self) -> float:
        return float(np.sum(self.densities) * self.bin_width)

    def to_csv(self, fh=None):
        """Write ``bin_left,bin_right,density`` rows."""
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "density"])
        e = self.edges
        for a, b, p in zip(e[:-1], e[1:], self.densities):
            writer.writerow([f"{a:.17g}", f"{b:.17g}", f"{p:.17g}"])
        return out.getvalue() if fh is None else None

    def to_gnuplot(self, fh=None):
        """Two whitespace-separated columns (bin center, density) for ``plot ... with boxes``."""
        out = io.StringIO() if fh is None else fh
        out.write(f"# P(S) histogram, bin width {self.bin_width:.17g}, {self.sample_count} spacings\n")
        for c, p in zip(self.centers, self.densities):
            out.write(f"{c:.17g} {p:.17g}\n")
        return out.getvalue() if fh is None else None


def _edges(bin_width, s_max, n_bins):
    e = bin_width * np.arange(n_bins + 1)
    e[-1] = s_max
    return e


def _levels_of(spectrum, include_transparent):
    """Sorted level list and index window from a spectrum or a plain array."""
    if hasattr(spectrum, "roots"):
        roots = spectrum.roots
        if not include_transparent:
            roots = [r for r in roots if not r.transparent]
        levels = np.array([r.omega for r in roots], dtype=float)
        window = tuple(spectrum.window)
    else:
        levels = np.asarray(spectrum, dtype=float).ravel()
        window = (1, levels.size)
    return np.sort(levels), window


def unfold(spectrum, spec: BilliardSpec | None = None, method: str = "analytic_weyl",
           width: int = 51, include_transparent: bool = True) -> SpacingSample:
    """Nearest-neighbor spacings rescaled to unit mean.

    Parameters
    ----------
    spectrum : PerturbedSpectrum or array_like
        Levels to unfold.
    spec : BilliardSpec
        Needed for ``analytic_weyl``: spacings are multiplied by the smooth
        (parity-filtered) density at their midpoints.
    method : {"analytic_weyl", "local_window"}
        ``local_window`` divides each spacing by the mean raw spacing over
        ``width`` neighboring spacings, then normalizes the sample mean to one.
    include_transparent : bool
        Keep levels that do not couple to the scatterer.  They are part of
        the spectrum whenever the parity filter has not already removed them.
    """
    if method not in UNFOLDING_METHODS:
        raise DomainError(f"unknown unfolding method {method!r}")
    levels, window = _levels_of(spectrum, include_transparent)
    if levels.size < MIN_LEVELS:
        raise SampleSizeError(f"{levels.size} levels; unfolding needs at least {MIN_LEVELS}")
    raw = np.diff(levels)
    if np.any(raw <= 0):
        raise DomainError("spectrum contains degenerate levels; spacings must be positive")

    if method == "analytic_weyl":
        if spec is None:
            raise DomainError("analytic_weyl unfolding needs the billiard spec")
        s = raw * avg_density(spec, (levels[1:] + levels[:-1]) / 2)
        width = None
    else:
        width = int(width)
        if width < 1 or width % 2 == 0:
            raise DomainError("local window width must be a positive odd integer")
        m = raw.size
        w = min(width, m)
        csum = np.concatenate([[0.0], np.cumsum(raw)])
        start = np.clip(np.arange(m) - w // 2, 0, m - w)
        local = (csum[start + w] - csum[start]) / w
        s = raw / local
        s = s / s.mean()
    return SpacingSample(s, window, method, width, float(raw.mean()))


def histogram(sample: SpacingSample, bin_width: float = 0.1, s_max: float = 3.0) -> SpacingHistogram:
    """Density histogram on ``[0, s_max]``; bars integrate to the in-range fraction.

    The last bin is closed, so a spacing equal to ``s_max`` is in range.
    """
    if not bin_width > 0 or not s_max > 0:
        raise DomainError("bin_width and s_max must be positive")
    n_bins = int(round(s_max / bin_width))
    if n_bins < 1 or abs(n_bins * bin_width - s_max) > 1e-9 * s_max:
        raise DomainError("s_max must be a whole number of bins")
    edges = _edges(bin_width, s_max, n_bins)
    s = np.asarray(sample.spacings)
    counts, _ = np.histogram(s, bins=edges)
    n = max(s.size, 1)
    return SpacingHistogram(float(bin_width), float(s_max), counts / (n * bin_width), int(s.size))


def _check_kind(kind):
    if kind not in ("poisson", "goe"):
        raise DomainError(f"reference must be 'poisson' or 'goe', got {kind!r}")


def reference_pdf(kind: str, S):
    _check_kind(kind)
    S = np.asarray(S, dtype=float)
    if np.any(S < 0):
        raise DomainError("spacing must be non-negative")
    if kind == "poisson":
        out = np.exp(-S)
    else:
        out = np.pi * S / 2 * np.exp(-np.pi * S**2 / 4)
    return float(out) if out.ndim == 0 else out


def reference_cdf(kind: str, S):
    _check_kind(kind)
    S = np.asarray(S, dtype=float)
    if np.any(S < 0):
        raise DomainError("spacing must be non-negative")
    if kind == "poisson":
        out = -np.expm1(-S)
    else:
        out = -np.expm1(-np.pi * S**2 / 4)
    return float(out) if out.ndim == 0 else out


def ks_distance(sample, kind: str) -> float:
    """Sup distance between the empirical CDF of the spacings and a reference CDF."""
    s = np.sort(np.asarray(getattr(sample, "spacings", sample), dtype=float))
    if s.size == 0:
        raise SampleSizeError("empty spacing sample")
    F = reference_cdf(kind, s)
    n = s.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def summarize(sample: SpacingSample) -> dict:
    return {
        "n_levels": sample.n_levels,
        "mean_spacing_raw": sample.mean_spacing_raw,
        "ks_poisson": ks_distance(sample, "poisson"),
        "ks_goe": ks_distance(sample, "goe"),
    }
