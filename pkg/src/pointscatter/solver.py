"""Roots of the secular equation ``G(omega) = 1/v``.

Between two consecutive coupled levels the secular function decreases
monotonically from +inf to -inf, so every interval holds exactly one
perturbed level.  Roots are found by bisection on the open interval, which
never needs the (infinite) endpoint values and cannot lose the bracket.

Level indices are 1-based positions in the :class:`LevelSet`.  The root with
index ``n`` lies above level ``n`` and below the next coupled level.  An
uncoupled level is returned unchanged and flagged ``transparent``.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, NumericalResolutionError, TruncationError
from ._numerics import compensated_sum
from .greens import _BLOCK, POLE_RTOL, GreensContext, pole_sum

__all__ = [
    "CouplingConfig",
    "Root",
    "PerturbedSpectrum",
    "solve_interval",
    "solve_spectrum",
    "DEFAULT_TOL",
]

#: Residual tolerance, in units of the width of the bracketing interval.
DEFAULT_TOL = 1e-9
WIDTH_RTOL = 1e-12
_MAX_ITER = 200


@dataclass(frozen=True)
class CouplingConfig:
    """Inverse coupling in either the bare (d = 1) or renormalized scheme."""

    scheme: str
    inverse: float
    mass_scale: float = 1.0

    def __post_init__(self):
        if self.scheme not in ("bare", "renormalized"):
            raise DomainError(f"unknown coupling scheme {self.scheme!r}")
        if not np.isfinite(self.inverse):
            raise DomainError("inverse coupling must be finite")
        if self.scheme == "renormalized" and not self.mass_scale > 0:
            raise DomainError("mass scale must be positive")

    @classmethod
    def bare(cls, v_inverse):
        return cls("bare", float(v_inverse))

    @classmethod
    def renormalized(cls, v_theta_inverse, mass_scale=1.0):
        return cls("renormalized", float(v_theta_inverse), float(mass_scale))


@dataclass(frozen=True)
class Root:
    index: int
    omega: float
    residual: float
    bracket: tuple
    transparent: bool = False


@dataclass(frozen=True, eq=False)
class PerturbedSpectrum:
    roots: tuple
    window: tuple
    tol: float
    coupling: CouplingConfig | None = None

    def __len__(self):
        return len(self.roots)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([r.omega for r in self.roots])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.roots])

    @property
    def brackets(self) -> np.ndarray:
        return np.array([r.bracket for r in self.roots], dtype=float).reshape(-1, 2)

    @property
    def transparent(self) -> np.ndarray:
        return np.array([r.transparent for r in self.roots], dtype=bool)

    def to_csv(self, fh=None):
        """Write ``index,omega,residual,E_left,E_right`` rows."""
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["index", "omega", "residual", "E_left", "E_right"])
        for r in self.roots:
            writer.writerow([r.index] + [f"{v:.17g}" for v in (r.omega, r.residual, *r.bracket)])
        return out.getvalue() if fh is None else None


def _target(ctx: GreensContext, coupling: CouplingConfig):
    """Split ``G(omega) - 1/v`` into the pole sum and an omega-smooth remainder."""
    if coupling.scheme == "bare":
        if ctx.dimension != 1:
            raise DimensionError("bare coupling is only defined in d = 1")
        renorm = False
    else:
        if ctx.mass_scale != coupling.mass_scale:
            raise DomainError(
                f"coupling mass scale {coupling.mass_scale} differs from context {ctx.mass_scale}"
            )
        renorm = True
    const = ctx.constant_offset(renormalized=renorm) - coupling.inverse
    if ctx.dimension == 1:
        # d = 1 keeps the constant part of the tail in ``const``.
        def smooth(om):
            return const + ctx.tail(om, renormalized=False)
    else:
        def smooth(om):
            return const + ctx.tail(om, renormalized=renorm)
    return smooth


def _offset_sum(ctx, origin, delta, compensated):
    """``sum_m w_m / ((origin - E_m) + delta)`` row by row.

    Measuring omega from a pole keeps the two dominant terms exact even when
    the bracketing levels are nearly degenerate.
    """
    e, w = ctx.poles
    out = np.empty(delta.size)
    step = max(1, _BLOCK // max(e.size, 1))
    for i in range(0, delta.size, step):
        diff = (origin[i:i + step, None] - e[None, :]) + delta[i:i + step, None]
        terms = w / diff
        out[i:i + step] = compensated_sum(terms, axis=1) if compensated else terms.sum(axis=1)
    return out


def _bisect(ctx, smooth, left, right, tol_abs):
    """Vectorized bisection on ``(left, right)`` where f(left+) = +inf, f(right-) = -inf.

    Returns the origin pole, the signed offset of the root from it, and the
    residual evaluated with compensated summation.
    """
    gap = right - left
    half = gap / 2.0
    f_mid = _offset_sum(ctx, left, half, False) + smooth(left + half)
    # Root in the upper half is measured from the right pole.
    upper = f_mid > 0
    origin = np.where(upper, right, left)
    lo = np.where(upper, -half, 0.0)
    hi = np.where(upper, 0.0, half)
    best = np.where(upper, -half, half)
    best_f = np.abs(f_mid)
    active = np.flatnonzero(f_mid != 0.0)
    for _ in range(_MAX_ITER):
        if active.size == 0:
            break
        a, b = lo[active], hi[active]
        mid = a + (b - a) / 2.0
        # Plain pairwise sums while bracketing; the reported residual is
        # recomputed with compensated summation below.
        f = _offset_sum(ctx, origin[active], mid, False) + smooth(origin[active] + mid)
        better = np.abs(f) < best_f[active]
        best[active[better]] = mid[better]
        best_f[active[better]] = np.abs(f[better])
        width_ok = (b - a) <= WIDTH_RTOL * np.abs(origin[active])
        # Margin for the difference between plain and compensated sums.
        done = ((np.abs(f) <= 0.25 * tol_abs[active]) & width_ok) | (f == 0.0)
        # Bracket exhausted at floating point resolution.
        done |= (mid <= a) | (mid >= b)
        go_right = f > 0
        lo[active[go_right]] = mid[go_right]
        hi[active[~go_right]] = mid[~go_right]
        active = active[~done]
    residual = _offset_sum(ctx, origin, best, True) + smooth(origin + best)
    return origin, best, residual


def _brackets(ctx: GreensContext, indices, include_ground):
    lv = ctx.levels
    poles = lv.pole_index
    rows = []
    for n in indices:
        if n == 0:
            if not include_ground:
                raise DomainError("index 0 is the sub-ground root; pass include_ground=True")
            if poles.size == 0:
                raise DomainError("no coupled level")
            rows.append((0, 0.0, float(lv.energies[poles[0]]), False))
            continue
        if not 1 <= n <= len(lv):
            raise DomainError(f"level index {n} outside 1..{len(lv)}")
        e_left = float(lv.energies[n - 1])
        if not lv.coupled[n - 1]:
            rows.append((n, e_left, e_left, True))
            continue
        k = np.searchsorted(poles, n - 1, side="right")
        if k >= poles.size:
            raise TruncationError(f"level {n} is the last coupled level below the cutoff")
        rows.append((n, e_left, float(lv.energies[poles[k]]), False))
    return rows


def _solve(ctx, coupling, indices, tol, include_ground=False, workers=1):
    smooth = _target(ctx, coupling)
    rows = _brackets(ctx, indices, include_ground)
    solve_rows = [r for r in rows if not r[3]]
    if ctx.tail_mode == "analytic" and solve_rows:
        top = max(r[2] for r in solve_rows)
        if top >= ctx.e_cut / 2:
            raise TruncationError(
                f"bracket up to {top:.6g} exceeds e_cut/2={ctx.e_cut / 2:.6g}; raise the cutoff"
            )
    results = {}
    ground = [r for r in solve_rows if r[0] == 0]
    if ground:
        # Root below the first pole exists only if G(0+) > 1/v.
        e1 = ground[0][2]
        eps = 1e-12 * e1
        f0 = float(pole_sum(ctx, np.array([eps]))[0] + smooth(np.array([eps]))[0])
        solve_rows = [r for r in solve_rows if r[0] != 0]
        if f0 > 0:
            solve_rows.insert(0, (0, eps, e1, False))
    if solve_rows:
        lo = np.array([r[1] for r in solve_rows])
        hi = np.array([r[2] for r in solve_rows])
        tol_abs = tol * (hi - lo)
        chunks = np.array_split(np.arange(lo.size), max(1, min(workers, lo.size)))

        def run(idx):
            return _bisect(ctx, smooth, lo[idx], hi[idx], tol_abs[idx])

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, chunks))
        else:
            parts = [run(c) for c in chunks]
        origin = np.concatenate([p[0] for p in parts])
        offset = np.concatenate([p[1] for p in parts])
        resid = np.concatenate([p[2] for p in parts])
        omegas = origin + offset
        bad = np.abs(resid) > tol_abs
        # A root indistinguishable from a level cannot be reported as interlacing.
        bad |= (omegas <= lo) | (omegas >= hi) | (np.abs(offset) <= POLE_RTOL * np.abs(origin))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise NumericalResolutionError(
                f"root {solve_rows[i][0]}: residual {resid[i]:.3g} (tolerance {tol_abs[i]:.3g}) "
                f"at offset {offset[i]:.3g} from the level at {origin[i]:.17g}; "
                "the root cannot be resolved in double precision"
            )
        for r, om, res in zip(solve_rows, omegas, resid):
            results[r[0]] = Root(r[0], float(om), float(res), (r[1] if r[0] else 0.0, r[2]))
    out = []
    for n, left, right, transparent in rows:
        if transparent:
            out.append(Root(n, left, 0.0, (left, right), True))
        elif n in results:
            out.append(results[n])
    return out


def solve_interval(ctx: GreensContext, coupling: CouplingConfig, n: int, tol: float = DEFAULT_TOL) -> Root:
    """Perturbed level above unperturbed level ``n`` (1-based)."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    roots = _solve(ctx, coupling, [int(n)], tol, include_ground=(n == 0))
    if not roots:
        raise DomainError("no root below the first level for this coupling")
    return roots[0]


def solve_spectrum(ctx: GreensContext, coupling: CouplingConfig, window, tol: float = DEFAULT_TOL,
                   include_ground: bool = False, workers: int = 1) -> PerturbedSpectrum:
    """All perturbed levels with indices ``n_lo..n_hi`` (inclusive).

    ``tol`` bounds ``|G(omega) - 1/v|`` relative to the width of each bracket.
    ``include_ground`` adds the root below the lowest level (index 0) when it
    exists.  Results do not depend on ``workers``.
    """
    n_lo, n_hi = (int(v) for v in window)
    if not 1 <= n_lo <= n_hi:
        raise DomainError(f"invalid window {window}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    indices = list(range(n_lo, n_hi + 1))
    if include_ground:
        indices.insert(0, 0)
    roots = _solve(ctx, coupling, indices, tol, include_ground, workers)
    return PerturbedSpectrum(tuple(roots), (n_lo, n_hi), tol, coupling)
