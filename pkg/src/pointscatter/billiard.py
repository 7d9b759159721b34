"""Unperturbed rectangular billiards with Dirichlet walls.

Units have hbar = 1.  A box with side lengths ``l_i`` has levels

    E_n = pi**2 / (2 M) * sum_i (n_i / l_i)**2,      n_i = 1, 2, ...

with normalized eigenfunctions ``prod_i sqrt(2/l_i) sin(n_i pi x_i / l_i)``.
Only the squared eigenfunction at the scatterer (the *weight*) enters the
secular equation, so a :class:`LevelSet` stores energies, weights and
quantum numbers.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CapacityError, DomainError, EmptyLevelSetError

__all__ = [
    "BilliardSpec",
    "LevelSet",
    "enumerate_levels",
    "eigenfunction_weight",
    "avg_density",
    "counting_function",
    "density_prefactor",
    "DEGENERACY_RTOL",
]

#: Levels closer than this relative gap are treated as one pole.
DEGENERACY_RTOL = 1e-12
MAX_MODES = 10**8

_PARITY_CHOICES = ("all", "odd")


@dataclass(frozen=True)
class BilliardSpec:
    """Geometry, mass and scatterer location of a box billiard.

    Parameters
    ----------
    side_lengths : sequence of float
        One positive length per axis; ``len(side_lengths)`` is the dimension.
    mass : float
        Particle mass ``M``.
    scatterer_position : sequence of float, optional
        Location of the point scatterer.  Defaults to the box center.
    parity_filter : str or sequence of str
        ``"odd"`` keeps only odd quantum numbers along an axis (the modes that
        are even about the center), ``"all"`` keeps every mode.  A single
        string applies to every axis.  ``"odd"`` is only allowed on axes where
        the scatterer sits exactly at the center, because otherwise the
        discarded modes would couple to it.
    """

    side_lengths: tuple
    mass: float = 0.5
    scatterer_position: tuple | None = None
    parity_filter: tuple | str = "all"

    def __post_init__(self):
        sides = tuple(float(s) for s in np.atleast_1d(self.side_lengths))
        d = len(sides)
        if d not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {d}")
        if not all(np.isfinite(s) and s > 0 for s in sides):
            raise DomainError(f"side lengths must be positive, got {sides}")
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise DomainError(f"mass must be positive, got {self.mass}")

        if self.scatterer_position is None:
            x0 = tuple(s / 2 for s in sides)
        else:
            x0 = tuple(float(x) for x in np.atleast_1d(self.scatterer_position))
        if len(x0) != d:
            raise DomainError(
                f"scatterer_position has {len(x0)} coordinates for a {d}-dimensional box"
            )
        for x, s in zip(x0, sides):
            if not 0.0 < x < s:
                raise DomainError(f"scatterer_position {x0} is not strictly inside the box")

        parity = self.parity_filter
        if isinstance(parity, str):
            parity = (parity,) * d
        parity = tuple(parity)
        if len(parity) != d or any(p not in _PARITY_CHOICES for p in parity):
            raise DomainError(f"parity_filter must be 'all'/'odd' per axis, got {self.parity_filter!r}")
        for p, x, s in zip(parity, x0, sides):
            if p == "odd" and abs(x / s - 0.5) > 1e-12:
                raise DomainError(
                    "parity_filter 'odd' requires the scatterer at the box center on that axis"
                )

        object.__setattr__(self, "side_lengths", sides)
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "scatterer_position", x0)
        object.__setattr__(self, "parity_filter", parity)

    @property
    def dimension(self) -> int:
        return len(self.side_lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.side_lengths))

    @property
    def symmetry_factor(self) -> float:
        """Fraction of the full Weyl density kept by the parity filter."""
        return 0.5 ** sum(p == "odd" for p in self.parity_filter)

    @property
    def mean_weight(self) -> float:
        # sin^2 averages to 1/2 over all modes, and is identically 1 for odd
        # modes at the center.
        return float(
            np.prod([(2.0 if p == "odd" else 1.0) / s
                     for p, s in zip(self.parity_filter, self.side_lengths)])
        )

    def scaled(self, factor: float) -> "BilliardSpec":
        """Same box with every length multiplied by ``factor``."""
        return BilliardSpec(
            tuple(s * factor for s in self.side_lengths),
            self.mass,
            tuple(x * factor for x in self.scatterer_position),
            self.parity_filter,
        )


def _sin_pi(t):
    """sin(pi t), exact at integers and half-integers."""
    r = np.mod(np.asarray(t, dtype=float), 2.0)
    out = np.sin(np.pi * r)
    out = np.where((r == 0.0) | (r == 1.0), 0.0, out)
    out = np.where(r == 0.5, 1.0, out)
    return np.where(r == 1.5, -1.0, out)


def _weights(spec: BilliardSpec, modes: np.ndarray) -> np.ndarray:
    modes = np.atleast_2d(modes)
    w = np.ones(modes.shape[0])
    for i, (x, s) in enumerate(zip(spec.scatterer_position, spec.side_lengths)):
        w = w * (2.0 / s) * _sin_pi(modes[:, i] * (x / s)) ** 2
    return w


def _eigenfunctions(spec: BilliardSpec, modes: np.ndarray, x) -> np.ndarray:
    modes = np.atleast_2d(modes)
    phi = np.ones(modes.shape[0])
    for i, s in enumerate(spec.side_lengths):
        phi = phi * np.sqrt(2.0 / s) * _sin_pi(modes[:, i] * (float(x[i]) / s))
    return phi


def eigenfunction_weight(spec: BilliardSpec, mode) -> float:
    """Squared normalized eigenfunction of ``mode`` at the scatterer."""
    mode = np.asarray(mode, dtype=np.int64)
    if mode.shape != (spec.dimension,) or np.any(mode < 1):
        raise DomainError(f"mode must be {spec.dimension} integers >= 1, got {mode.tolist()}")
    return float(_weights(spec, mode[None, :])[0])


def density_prefactor(dimension: int, mass: float, volume: float) -> float:
    """Coefficient ``c`` in ``rho_av(E) = c * E**(d/2 - 1)``."""
    if dimension == 1:
        return np.sqrt(mass) * volume / (np.sqrt(2.0) * np.pi)
    if dimension == 2:
        return mass * volume / (2.0 * np.pi)
    if dimension == 3:
        return mass**1.5 * volume / (np.sqrt(2.0) * np.pi**2)
    raise DomainError(f"dimension must be 1, 2 or 3, got {dimension}")


def avg_density(spec: BilliardSpec, omega):
    """Smooth (Weyl) level density, reduced by the parity filter."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("avg_density requires omega > 0")
    d = spec.dimension
    c = density_prefactor(d, spec.mass, spec.volume) * spec.symmetry_factor
    out = c * omega ** (d / 2 - 1)
    return float(out) if out.ndim == 0 else out


def counting_function(spec: BilliardSpec, omega):
    """Integral of :func:`avg_density` from 0 to ``omega``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("counting_function requires omega >= 0")
    d = spec.dimension
    c = density_prefactor(d, spec.mass, spec.volume) * spec.symmetry_factor
    out = c * omega ** (d / 2) / (d / 2)
    return float(out) if out.ndim == 0 else out


def _readonly(a):
    a = np.array(a)
    a.flags.writeable = False
    return a


def _merge_degenerate(energies, weights, rtol=DEGENERACY_RTOL):
    """Collapse clusters of near-equal coupled levels onto their first member.

    Returns the new weights and the ``coupled`` mask.  Only one combination of
    a degenerate cluster feels the scatterer; it carries the summed weight and
    the orthogonal members stay behind as zero-weight levels.
    """
    weights = np.array(weights, dtype=float)
    coupled = weights > 0
    idx = np.flatnonzero(coupled)
    if idx.size > 1:
        e = energies[idx]
        new_cluster = np.empty(idx.size, dtype=bool)
        new_cluster[0] = True
        new_cluster[1:] = np.diff(e) > rtol * np.abs(e[1:])
        heads = np.flatnonzero(new_cluster)
        sums = np.add.reduceat(weights[idx], heads)
        weights[idx] = 0.0
        weights[idx[heads]] = sums
        coupled[:] = False
        coupled[idx[heads]] = True
    return weights, coupled


@dataclass(frozen=True, eq=False)
class LevelSet:
    """Sorted unperturbed levels with their weights at the scatterer.

    ``coupled`` marks the levels that act as poles of the secular equation.
    Uncoupled (transparent) levels are kept so that the full spectrum can be
    reassembled; they are eigenvalues of the perturbed problem as well.
    """

    energies: np.ndarray
    weights: np.ndarray
    coupled: np.ndarray
    e_max: float
    dimension: int
    mass: float
    volume: float
    mean_weight: float
    symmetry_factor: float = 1.0
    modes: np.ndarray | None = None
    spec: BilliardSpec | None = field(default=None, repr=False)

    @classmethod
    def from_arrays(cls, energies, weights, *, dimension=1, mass=0.5, volume=1.0,
                    mean_weight=None, symmetry_factor=1.0, e_max=None, modes=None,
                    spec=None):
        """Build a level set from raw arrays (useful for toy problems)."""
        energies = np.asarray(energies, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if energies.ndim != 1 or energies.shape != weights.shape:
            raise DomainError("energies and weights must be 1-d arrays of equal length")
        if energies.size == 0:
            raise EmptyLevelSetError("level set is empty")
        if np.any(np.diff(energies) < 0):
            raise DomainError("energies must be sorted ascending")
        if np.any(weights < 0):
            raise DomainError("weights must be non-negative")
        weights, coupled = _merge_degenerate(energies, weights)
        if mean_weight is None:
            mean_weight = float(np.mean(weights[coupled])) if coupled.any() else 0.0
        return cls(
            energies=_readonly(energies),
            weights=_readonly(weights),
            coupled=_readonly(coupled),
            e_max=float(energies[-1] if e_max is None else e_max),
            dimension=int(dimension),
            mass=float(mass),
            volume=float(volume),
            mean_weight=float(mean_weight),
            symmetry_factor=float(symmetry_factor),
            modes=None if modes is None else _readonly(np.asarray(modes, dtype=np.int64)),
            spec=spec,
        )

    def __len__(self):
        return self.energies.size

    @property
    def transparent(self) -> np.ndarray:
        return ~self.coupled

    @cached_property
    def pole_index(self) -> np.ndarray:
        """Positions (0-based) of the coupled levels."""
        return np.flatnonzero(self.coupled)

    @cached_property
    def pole_energies(self) -> np.ndarray:
        return _readonly(self.energies[self.coupled])

    @cached_property
    def pole_weights(self) -> np.ndarray:
        return _readonly(self.weights[self.coupled])

    def count_below(self, omega: float) -> int:
        return int(np.searchsorted(self.energies, omega, side="right"))

    def to_csv(self, fh=None) -> str | None:
        """Write ``index,energy,weight,n1[,n2[,n3]]`` rows (1-based index).

        Returns the text when ``fh`` is None.
        """
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        header = ["index", "energy", "weight"]
        if self.modes is not None:
            header += [f"n{i + 1}" for i in range(self.modes.shape[1])]
        writer.writerow(header)
        for i in range(len(self)):
            row = [i + 1, f"{self.energies[i]:.17g}", f"{self.weights[i]:.17g}"]
            if self.modes is not None:
                row += [int(n) for n in self.modes[i]]
            writer.writerow(row)
        return out.getvalue() if fh is None else None


def enumerate_levels(spec: BilliardSpec, e_max: float, max_modes: int = MAX_MODES) -> LevelSet:
    """All modes of ``spec`` with energy <= ``e_max`` passing the parity filter.

    Raises
    ------
    EmptyLevelSetError
        If the cutoff is below the lowest admissible level.
    CapacityError
        If the expected number of modes exceeds ``max_modes``.
    """
    e_max = float(e_max)
    d = spec.dimension
    unit = np.pi**2 / (2.0 * spec.mass)
    if e_max > 0 and counting_function(spec, e_max) > max_modes:
        raise CapacityError(
            f"about {counting_function(spec, e_max):.3g} modes below {e_max:g} "
            f"exceeds the limit of {max_modes}"
        )
    k = np.sqrt(2.0 * spec.mass * max(e_max, 0.0)) / np.pi

    axis_n = []
    axis_e = []
    for s, p in zip(spec.side_lengths, spec.parity_filter):
        n_hi = int(np.floor(s * k)) + 1
        n = np.arange(1, n_hi + 1, 2 if p == "odd" else 1, dtype=np.int64)
        e = unit * (n / s) ** 2
        keep = e <= e_max
        axis_n.append(n[keep])
        axis_e.append(e[keep])
    if any(n.size == 0 for n in axis_n):
        raise EmptyLevelSetError(f"no level of the box lies below e_max={e_max:g}")

    # Sweep the first axis; the rest is a small dense grid per slice.
    rest_e = np.zeros(1)
    rest_n = np.zeros((1, 0), dtype=np.int64)
    for n, e in zip(axis_n[1:], axis_e[1:]):
        rest_e = (rest_e[:, None] + e[None, :]).ravel()
        rest_n = np.concatenate(
            [np.repeat(rest_n, n.size, axis=0), np.tile(n, rest_n.shape[0])[:, None]], axis=1
        )
    order = np.argsort(rest_e, kind="stable")
    rest_e, rest_n = rest_e[order], rest_n[order]

    chunks_e, chunks_n = [], []
    for n0, e0 in zip(axis_n[0], axis_e[0]):
        m = int(np.searchsorted(rest_e, e_max - e0, side="right"))
        if m == 0:
            continue
        energies = e0 + rest_e[:m]
        ok = energies <= e_max
        chunks_e.append(energies[ok])
        chunks_n.append(np.column_stack([np.full(ok.sum(), n0), rest_n[:m][ok]]))
    if not chunks_e:
        raise EmptyLevelSetError(f"no level of the box lies below e_max={e_max:g}")
    energies = np.concatenate(chunks_e)
    modes = np.concatenate(chunks_n)

    keys = [modes[:, i] for i in reversed(range(d))] + [energies]
    order = np.lexsort(keys)
    energies, modes = energies[order], modes[order]
    weights = _weights(spec, modes)

    return LevelSet.from_arrays(
        energies,
        weights,
        dimension=d,
        mass=spec.mass,
        volume=spec.volume,
        mean_weight=spec.mean_weight,
        symmetry_factor=spec.symmetry_factor,
        e_max=e_max,
        modes=modes,
        spec=spec,
    )
