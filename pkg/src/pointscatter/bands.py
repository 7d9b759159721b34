"""Strong-coupling bands from the smoothed secular function.

Replacing the weights by their mean and the level sum by the Weyl density
turns the secular function into a principal-value integral ``g(omega)``.  A
scatterer noticeably distorts the states near ``omega`` only when the inverse
coupling lies within ``width_delta(omega) / 2`` of ``g(omega)``:

====  ==========================  ==============================
 d     center g(omega)             width Delta(omega)
====  ==========================  ==============================
 1     0                           pi sqrt(M) / sqrt(2 omega)
 2     M / (2 pi) ln(omega/Lam)    pi M / 2
 3     -M**1.5 sqrt(Lam) / (2 pi)  M**1.5 sqrt(omega / 2)
====  ==========================  ==============================

The band edge is an order-of-magnitude estimate; :meth:`StrongBand.contains`
treats it as a sharp predicate.

The module also holds the elementary antiderivatives of the integrands, used
both here and for the analytic tail of the truncated level sums in
:mod:`pointscatter.greens`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import extrapolate_to_zero
from .billiard import density_prefactor
from .errors import DimensionError, DomainError, NumericalResolutionError

__all__ = [
    "StrongBand",
    "g_smooth",
    "width_delta",
    "strong_band",
    "g_smooth_via_pv",
    "antiderivative",
    "upper_tail",
    "upper_tail_domega",
    "KERNELS",
]

#: Integrand kinds.  Each is ``kernel(E, omega) * E**alpha``:
#: ``bare_d1``   1/(omega-E) * E**-1/2
#: ``sub_d1``    E/(E**2+Lam**2) * E**-1/2
#: ``renorm_d2`` (1/(omega-E) + E/(E**2+Lam**2))
#: ``renorm_d3`` (1/(omega-E) + E/(E**2+Lam**2)) * E**1/2
KERNELS = ("bare_d1", "sub_d1", "renorm_d2", "renorm_d3")


def _check_dim(d):
    if d not in (1, 2, 3):
        raise DimensionError(f"dimension must be 1, 2 or 3, got {d}")


def _log_ratio(a, b):
    """ln|(a + b) / (a - b)| for a, b >= 0, accurate when a and b differ a lot."""
    lo = np.minimum(a, b)
    return np.log1p(2.0 * lo / np.abs(a - b))


def antiderivative(kind, E, omega, mass_scale=1.0):
    """Elementary antiderivative in ``E`` of the integrand ``kind``."""
    E = np.asarray(E, dtype=float)
    omega = np.asarray(omega, dtype=float)
    lam = float(mass_scale)
    if kind == "bare_d1":
        return _log_ratio(np.sqrt(omega), np.sqrt(E)) / np.sqrt(omega)
    if kind == "sub_d1":
        a = np.sqrt(lam)
        t = np.sqrt(E)
        q = np.sqrt(2.0) * a * t
        log_part = -np.log1p(2.0 * q / (E - q + lam))
        atan_part = np.arctan(q / a**2 + 1.0) + np.arctan(q / a**2 - 1.0)
        return (log_part / 2.0 + atan_part) / (np.sqrt(2.0) * a)
    if kind == "renorm_d2":
        return -np.log(np.abs(omega - E) / np.hypot(E, lam))
    if kind == "renorm_d3":
        r = np.sqrt(2.0 * lam * E)
        half = np.sqrt(lam / 2.0)
        x = np.sqrt(2.0 * E / lam)
        return (
            np.sqrt(omega) * _log_ratio(np.sqrt(omega), np.sqrt(E))
            - 0.5 * half * np.log1p(2.0 * r / (E - r + lam))
            - half * (np.arctan(x + 1.0) + np.arctan(x - 1.0))
        )
    raise DomainError(f"unknown integrand kind {kind!r}")


def _at_infinity(kind, mass_scale):
    if kind == "sub_d1":
        return np.pi / np.sqrt(2.0 * mass_scale)
    if kind == "renorm_d3":
        return -np.pi * np.sqrt(mass_scale / 2.0)
    return 0.0


def upper_tail(kind, e_cut, omega, mass_scale=1.0):
    """Integral of ``kind`` from ``e_cut`` to infinity (requires ``e_cut > omega``)."""
    e_cut = float(e_cut)
    omega = np.asarray(omega, dtype=float)
    lam = float(mass_scale)
    if kind == "renorm_d2":
        return np.log((e_cut - omega) / np.hypot(e_cut, lam))
    if kind == "bare_d1":
        return -antiderivative(kind, e_cut, omega, lam)
    # The arctan pair tends to pi; subtract it analytically.
    x = np.sqrt(2.0 * e_cut / lam)
    atan_rest = np.arctan(1.0 / (x + 1.0)) + np.arctan(1.0 / (x - 1.0)) if x > 1 else None
    if atan_rest is None:
        return _at_infinity(kind, lam) - antiderivative(kind, e_cut, omega, lam)
    r = np.sqrt(2.0 * lam * e_cut)
    log_term = np.log1p(2.0 * r / (e_cut - r + lam))
    if kind == "sub_d1":
        a = np.sqrt(lam)
        return (log_term / 2.0 + atan_rest) / (np.sqrt(2.0) * a)
    if kind == "renorm_d3":
        half = np.sqrt(lam / 2.0)
        return (
            -np.sqrt(omega) * _log_ratio(np.sqrt(omega), np.sqrt(e_cut))
            + 0.5 * half * log_term
            - half * atan_rest
        )
    raise DomainError(f"unknown integrand kind {kind!r}")


def upper_tail_domega(kind, e_cut, omega):
    """Derivative in ``omega`` of :func:`upper_tail` (the subtraction part drops out)."""
    e_cut = float(e_cut)
    omega = np.asarray(omega, dtype=float)
    if kind == "sub_d1":
        return np.zeros_like(omega)
    if kind == "renorm_d2":
        return -1.0 / (e_cut - omega)
    L = _log_ratio(np.sqrt(omega), np.sqrt(e_cut))
    if kind == "bare_d1":
        return L / (2.0 * omega**1.5) - np.sqrt(e_cut) / (omega * (e_cut - omega))
    if kind == "renorm_d3":
        return -L / (2.0 * np.sqrt(omega)) - np.sqrt(e_cut) / (e_cut - omega)
    raise DomainError(f"unknown integrand kind {kind!r}")


def g_smooth(d, M, mass_scale, omega):
    """Closed-form smooth secular function (the optimal inverse coupling)."""
    _check_dim(d)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("g_smooth requires omega > 0")
    if d >= 2 and not mass_scale > 0:
        raise DomainError("mass scale must be positive")
    if d == 1:
        out = np.zeros_like(omega)
    elif d == 2:
        out = M / (2.0 * np.pi) * np.log(omega / mass_scale)
    else:
        out = np.full_like(omega, -(M**1.5) * np.sqrt(mass_scale) / (2.0 * np.pi))
    return float(out) if out.ndim == 0 else out


def width_delta(d, M, omega):
    """Typical range of the linearized secular function across one spacing."""
    _check_dim(d)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("width_delta requires omega > 0")
    if d == 1:
        out = np.pi * np.sqrt(M) / (np.sqrt(2.0) * np.sqrt(omega))
    elif d == 2:
        out = np.full_like(omega, np.pi * M / 2.0)
    else:
        out = M**1.5 * np.sqrt(omega) / np.sqrt(2.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StrongBand:
    dimension: int
    center: float
    half_width: float
    omega: float

    def contains(self, v_inverse) -> bool:
        return bool(abs(v_inverse - self.center) <= self.half_width)

    @property
    def interval(self):
        return (self.center - self.half_width, self.center + self.half_width)


def strong_band(d, M, mass_scale, omega) -> StrongBand:
    return StrongBand(
        dimension=d,
        center=g_smooth(d, M, mass_scale, float(omega)),
        half_width=width_delta(d, M, float(omega)) / 2.0,
        omega=float(omega),
    )


_PV_KIND = {1: "bare_d1", 2: "renorm_d2", 3: "renorm_d3"}


def g_smooth_via_pv(d, M, volume, mass_scale, omega, mean_weight, eps=None):
    """Smooth secular function as an explicit principal-value limit.

    The integral over ``(0, omega - eps) + (omega + eps, inf)`` is assembled
    from the antiderivatives and extrapolated to ``eps -> 0``.  With
    ``mean_weight = 1 / volume`` it reproduces :func:`g_smooth`.
    """
    _check_dim(d)
    omega = float(omega)
    if omega <= 0:
        raise DomainError("g_smooth_via_pv requires omega > 0")
    kind = _PV_KIND[d]
    lam = float(mass_scale)
    if eps is None:
        eps = omega * 0.05 * 0.5 ** np.arange(6)
    eps = np.asarray(eps, dtype=float)

    def excised(e):
        inner = antiderivative(kind, omega - e, omega, lam) - antiderivative(kind, 0.0, omega, lam)
        outer = _at_infinity(kind, lam) - antiderivative(kind, omega + e, omega, lam)
        return float(inner + outer)

    values = [excised(e) for e in eps]
    pv, err = extrapolate_to_zero(eps, values)
    if not np.isfinite(pv) or err > 1e-7 * max(1.0, abs(pv)):
        raise NumericalResolutionError(f"principal value did not converge (error estimate {err:.3g})")
    return mean_weight * density_prefactor(d, M, volume) * pv
