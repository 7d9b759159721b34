"""Secular functions of a box with one point scatterer.

For a level set ``(E_n, w_n)`` the bare and renormalized secular functions are

    G_bare(omega)  = sum_n w_n / (omega - E_n)                    (d = 1 only)
    G(omega)       = sum_n w_n [1/(omega - E_n) + E_n/(E_n**2 + Lam**2)]

Levels above the cutoff ``e_cut`` are replaced by the mean weight times the
Weyl density, integrated in closed form (``tail_mode="analytic"``).  Queries
are restricted to ``omega < e_cut / 2`` so that the neglected fluctuations of
the tail stay small.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._numerics import compensated_sum
from .bands import upper_tail, upper_tail_domega
from .billiard import (
    LevelSet,
    _eigenfunctions,
    avg_density,
    counting_function,
    density_prefactor,
    enumerate_levels,
)
from .errors import DimensionError, DomainError, PoleProximityError, TruncationError

__all__ = [
    "GreensContext",
    "g_bare",
    "g_renorm",
    "g_derivative",
    "coupling_shift_1d",
    "wavefunction_value",
    "wavefunction_coefficients",
    "cutoff_for",
    "context_for_window",
    "POLE_RTOL",
]

#: Minimum distance to a pole, relative to the local level spacing.
POLE_RTOL = 1e-13
# Largest temporary (rows x poles) materialized at once.
_BLOCK = 1 << 21
#: Minimum number of mean level spacings enumerated above the highest query.
#: Fluctuations of the retained sum about the tail integral fall off roughly
#: as 1/CUTOFF_MIN_SPACINGS; 800 keeps doubling the cutoff below 1e-3 of the
#: band width for centred scatterers.
CUTOFF_MIN_SPACINGS = 800


@dataclass(frozen=True, eq=False)
class GreensContext:
    """A level set together with the renormalization scale and tail policy."""

    levels: LevelSet
    mass_scale: float = 1.0
    tail_mode: str = "analytic"

    def __post_init__(self):
        if self.tail_mode not in ("none", "analytic"):
            raise DomainError(f"tail_mode must be 'none' or 'analytic', got {self.tail_mode!r}")
        if not (np.isfinite(self.mass_scale) and self.mass_scale > 0):
            raise DomainError(f"mass scale must be positive, got {self.mass_scale}")
        if self.tail_mode == "analytic" and not self.levels.mean_weight > 0:
            raise DomainError("analytic tail needs a positive mean weight")
        object.__setattr__(self, "mass_scale", float(self.mass_scale))

    @property
    def dimension(self) -> int:
        return self.levels.dimension

    @property
    def e_cut(self) -> float:
        return self.levels.e_max

    @property
    def poles(self):
        return self.levels.pole_energies, self.levels.pole_weights

    @cached_property
    def tail_weight(self) -> float:
        """Mean weight times the filtered Weyl prefactor."""
        lv = self.levels
        return lv.mean_weight * density_prefactor(lv.dimension, lv.mass, lv.volume) * lv.symmetry_factor

    @cached_property
    def subtraction_sum(self) -> float:
        """``sum_n w_n E_n / (E_n**2 + Lam**2)`` over the retained poles."""
        e, w = self.poles
        return math.fsum((w * e / (e * e + self.mass_scale**2)).tolist())

    def _tail_kinds(self, renormalized):
        d = self.dimension
        if d == 1:
            return ("bare_d1", "sub_d1") if renormalized else ("bare_d1",)
        return (f"renorm_d{d}",)

    def tail(self, omega, renormalized=True):
        omega = np.asarray(omega, dtype=float)
        if self.tail_mode == "none":
            return np.zeros_like(omega)
        total = sum(upper_tail(k, self.e_cut, omega, self.mass_scale)
                    for k in self._tail_kinds(renormalized))
        return self.tail_weight * total

    def tail_derivative(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.tail_mode == "none":
            return np.zeros_like(omega)
        kind = self._tail_kinds(False)[0]
        return self.tail_weight * upper_tail_domega(kind, self.e_cut, omega)

    def constant_offset(self, renormalized=True) -> float:
        """Part of the secular function that does not depend on ``omega``.

        For d = 1 this is the whole difference between the renormalized and
        bare functions: the subtraction sum plus its tail.
        """
        if not renormalized:
            return 0.0
        c = self.subtraction_sum
        if self.dimension == 1 and self.tail_mode == "analytic":
            c += self.tail_weight * float(upper_tail("sub_d1", self.e_cut, 1.0, self.mass_scale))
        return c


def pole_sum(ctx: GreensContext, omega, power=1, compensated=True):
    """``sum_n w_n / (omega - E_n)**power`` over the coupled levels, vectorized in omega."""
    omega = np.asarray(omega, dtype=float)
    flat = omega.ravel()
    e, w = ctx.poles
    out = np.empty(flat.size)
    step = max(1, _BLOCK // max(e.size, 1))
    for i in range(0, flat.size, step):
        diff = flat[i:i + step, None] - e[None, :]
        terms = w / diff if power == 1 else w / (diff * diff)
        out[i:i + step] = compensated_sum(terms, axis=1) if compensated else terms.sum(axis=1)
    return out.reshape(omega.shape)


def _check_query(ctx: GreensContext, omega):
    omega = np.asarray(omega, dtype=float)
    if ctx.tail_mode == "analytic":
        if np.any(omega <= 0):
            raise DomainError("secular functions with an analytic tail need omega > 0")
        if np.any(omega >= ctx.e_cut / 2):
            raise TruncationError(
                f"omega={np.max(omega):.6g} is beyond e_cut/2={ctx.e_cut / 2:.6g}; "
                "enumerate levels to a higher cutoff"
            )
    e = ctx.poles[0]
    if e.size:
        k = np.clip(np.searchsorted(e, omega), 1, max(e.size - 1, 1))
        if e.size == 1:
            nearest = np.full(omega.shape, e[0])
            spacing = np.full(omega.shape, max(abs(e[0]), 1.0))
        else:
            left, right = e[k - 1], e[k]
            nearest = np.where(np.abs(omega - left) <= np.abs(omega - right), left, right)
            spacing = right - left
        if np.any(np.abs(omega - nearest) <= POLE_RTOL * spacing):
            raise PoleProximityError(f"omega={omega} coincides with an unperturbed level")
    return omega


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def g_bare(ctx: GreensContext, omega):
    """Bare secular function (d = 1 only; the series diverges for d >= 2)."""
    if ctx.dimension != 1:
        raise DimensionError("the bare secular series diverges for d >= 2; use g_renorm")
    omega = _check_query(ctx, omega)
    return _scalar(pole_sum(ctx, omega) + ctx.tail(omega, renormalized=False))


def g_renorm(ctx: GreensContext, omega):
    """Renormalized secular function; strictly decreasing between poles."""
    omega = _check_query(ctx, omega)
    value = pole_sum(ctx, omega) + ctx.subtraction_sum + ctx.tail(omega, renormalized=True)
    return _scalar(value)


def g_derivative(ctx: GreensContext, omega):
    """Derivative of the secular function (identical for bare and renormalized)."""
    omega = _check_query(ctx, omega)
    return _scalar(-pole_sum(ctx, omega, power=2) + ctx.tail_derivative(omega))


def coupling_shift_1d(ctx: GreensContext, v_theta_inv: float) -> float:
    """Bare inverse coupling equivalent to a renormalized one in d = 1."""
    if ctx.dimension != 1:
        raise DimensionError("coupling shift only exists in d = 1")
    return float(v_theta_inv) - ctx.constant_offset(renormalized=True)


def _require_modes(ctx):
    lv = ctx.levels
    if lv.spec is None or lv.modes is None:
        raise DomainError("wavefunctions need a level set built from a BilliardSpec")
    return lv.spec, lv.modes


def wavefunction_coefficients(ctx: GreensContext, omega_n: float) -> np.ndarray:
    """Expansion coefficients of the (unnormalized) perturbed eigenfunction.

    ``psi(x) = sum_m c_m phi_m(x)`` with ``c_m = phi_m(x0) / (omega_n - E_m)``
    for every level of the truncated set.
    """
    spec, modes = _require_modes(ctx)
    _check_query(ctx, omega_n)
    phi0 = _eigenfunctions(spec, modes, spec.scatterer_position)
    diff = float(omega_n) - ctx.levels.energies
    # Uncoupled levels (phi0 == 0) may sit exactly at omega_n.
    return np.divide(phi0, diff, out=np.zeros_like(phi0), where=phi0 != 0)


def wavefunction_value(ctx: GreensContext, omega_n: float, x) -> float:
    """Unnormalized perturbed eigenfunction at the point ``x``."""
    spec, modes = _require_modes(ctx)
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dimension,) or np.any(x <= 0) or np.any(x >= np.asarray(spec.side_lengths)):
        raise DomainError(f"point {x.tolist()} is not inside the box")
    c = wavefunction_coefficients(ctx, omega_n)
    return float(compensated_sum(c * _eigenfunctions(spec, modes, x)))


def cutoff_for(spec, omega_max: float) -> float:
    """Truncation energy that admits queries up to ``omega_max``.

    ``max(2 omega_max, omega_max + CUTOFF_MIN_SPACINGS mean spacings)``,
    nudged up so that ``omega_max`` stays strictly below ``e_cut / 2``.
    """
    spacing = 1.0 / avg_density(spec, omega_max)
    return max(2.0 * omega_max, omega_max + CUTOFF_MIN_SPACINGS * spacing) * (1.0 + 1e-9)


def context_for_window(spec, n_hi: int, mass_scale: float = 1.0) -> GreensContext:
    """Enumerate enough levels to solve every root up to index ``n_hi``."""
    # Invert the Weyl count for a first guess, then grow until the bracket of
    # root n_hi (the next coupled level above level n_hi) is enumerated.
    d = spec.dimension
    target = n_hi + 1
    e_probe = (target * 1.2 + 20) / counting_function(spec, 1.0)
    e_probe = e_probe ** (2.0 / d)
    while True:
        probe = enumerate_levels(spec, e_probe)
        later = probe.pole_index[probe.pole_index >= n_hi]
        if len(probe) >= target and later.size:
            omega_max = float(probe.energies[later[0]])
            break
        e_probe *= 1.5
    e_cut = cutoff_for(spec, omega_max)
    return GreensContext(enumerate_levels(spec, e_cut), mass_scale)
