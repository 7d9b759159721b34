"""Independent reference computations for testing.

Nothing here calls into :mod:`pointscatter.greens` or
:mod:`pointscatter.solver`; the point is to check those modules by a
different route.

* :func:`rank_one_eigensolve` diagonalizes ``diag(E) + v u u^T`` densely.  Its
  eigenvalues are the roots of the finite secular equation
  ``sum_n u_n**2 / (omega - E_n) = 1/v``.
* :func:`pv_quadrature` computes the smoothed secular function as a
  principal-value integral by adaptive quadrature with a symmetric excision
  around the pole, extrapolated to zero excision width.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from ._numerics import extrapolate_to_zero
from .errors import CapacityError, DomainError, NumericalResolutionError

__all__ = ["TruncatedProblem", "rank_one_eigensolve", "pv_quadrature", "ORACLE_MAX_N"]

ORACLE_MAX_N = 2000


@dataclass(frozen=True, eq=False)
class TruncatedProblem:
    energies: np.ndarray
    weights: np.ndarray
    coupling_inverse: float

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if e.ndim != 1 or e.shape != w.shape or e.size == 0:
            raise DomainError("energies and weights must be non-empty 1-d arrays of equal length")
        if e.size > ORACLE_MAX_N:
            raise CapacityError(f"oracle handles at most {ORACLE_MAX_N} levels, got {e.size}")
        if np.any(np.diff(e) <= 0):
            raise DomainError("energies must be strictly increasing")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "coupling_inverse", float(self.coupling_inverse))


def rank_one_eigensolve(p: TruncatedProblem) -> np.ndarray:
    """All eigenvalues of ``diag(E) + v u u^T`` with ``u = sqrt(w)``, ``v = 1/coupling_inverse``."""
    if p.coupling_inverse == 0:
        raise DomainError("coupling_inverse = 0 means infinite coupling; no finite matrix")
    v = 1.0 / p.coupling_inverse
    u = np.sqrt(p.weights)
    a = np.diag(p.energies) + v * np.outer(u, u)
    return np.sort(linalg.eigvalsh(a))


def _integrand(kind, mass, volume, mass_scale):
    """Kernel times the Weyl density times the mean weight 1/volume."""
    if kind == "bare_d1":
        c = np.sqrt(mass) / (np.sqrt(2.0) * np.pi)
        return lambda E, om: c / (np.sqrt(E) * (om - E))
    lam2 = mass_scale**2

    def kernel(E, om):
        # 1/(om - E) + E/(E**2 + lam**2) over a common denominator.
        return (E * om + lam2) / ((om - E) * (E * E + lam2))

    if kind == "renorm_d2":
        c = mass / (2.0 * np.pi)
        return lambda E, om: c * kernel(E, om)
    if kind == "renorm_d3":
        c = mass**1.5 / (np.sqrt(2.0) * np.pi**2)
        return lambda E, om: c * np.sqrt(E) * kernel(E, om)
    raise DomainError(f"unknown integrand kind {kind!r}")


def pv_quadrature(integrand_kind, M, volume, mass_scale, omega, eps_sequence=None):
    """Principal value of the smoothed secular integral by excision and extrapolation.

    ``volume`` cancels between the density and the mean weight; it is kept in
    the signature for symmetry with the closed forms.
    """
    omega = float(omega)
    if omega <= 0:
        raise DomainError("pv_quadrature requires omega > 0")
    if integrand_kind != "bare_d1" and not mass_scale > 0:
        raise DomainError("mass scale must be positive")
    f = _integrand(integrand_kind, M, volume, mass_scale)
    if eps_sequence is None:
        eps_sequence = omega * 0.2 * 0.5 ** np.arange(6)
    eps = np.asarray(eps_sequence, dtype=float)
    if np.any(np.diff(eps) >= 0) or np.any(eps <= 0) or eps[0] >= omega:
        raise DomainError("eps_sequence must decrease, stay positive and below omega")

    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=500)

    def piece(a, b):
        if integrand_kind == "bare_d1" and a == 0.0:
            # E = t**2 removes the endpoint singularity.
            val, _ = integrate.quad(lambda t: 2.0 * t * f(t * t, omega), 0.0, np.sqrt(b), **opts)
        else:
            val, _ = integrate.quad(lambda E: f(E, omega), a, b, **opts)
        return val

    far, _ = integrate.quad(lambda E: f(E, omega), 2.0 * omega, np.inf, **opts)
    values = [piece(0.0, omega - e) + piece(omega + e, 2.0 * omega) + far for e in eps]
    pv, err = extrapolate_to_zero(eps, values)
    if not np.isfinite(pv) or err > 1e-7 * max(1.0, abs(pv)):
        raise NumericalResolutionError(f"excision extrapolation did not converge (error {err:.3g})")
    return float(pv)
