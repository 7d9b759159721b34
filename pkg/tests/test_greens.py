import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscatter import (
    BilliardSpec,
    DimensionError,
    GreensContext,
    LevelSet,
    PoleProximityError,
    TruncationError,
    context_for_window,
    coupling_shift_1d,
    enumerate_levels,
    g_bare,
    g_derivative,
    g_renorm,
    wavefunction_value,
)
from pointscatter.bands import g_smooth, width_delta
from pointscatter.billiard import avg_density, counting_function
from pointscatter.greens import cutoff_for, wavefunction_coefficients

LINE = BilliardSpec((1.0,), 0.5, (0.5,))
RECT = BilliardSpec((1.0, 1.3), 0.5, (0.31, 0.77))


@pytest.fixture(scope="module")
def line_ctx():
    return GreensContext(enumerate_levels(LINE, np.pi**2 * 400**2))


@pytest.fixture(scope="module")
def line_generic():
    spec = BilliardSpec((1.0,), 0.5, (0.3,))
    return GreensContext(enumerate_levels(spec, np.pi**2 * 2000**2))


@functools.cache
def _rect_ctx():
    return GreensContext(enumerate_levels(RECT, 16000.0))


@pytest.fixture
def rect_ctx():
    return _rect_ctx()


def toy(energies, weights, **kw):
    return GreensContext(LevelSet.from_arrays(energies, weights, **kw), tail_mode="none")


def test_bare_near_first_pole(line_ctx):
    e1 = np.pi**2
    assert g_bare(line_ctx, e1 + 1e-6) == pytest.approx(2 / 1e-6, rel=1e-4)


def test_bare_midpoint_is_small(line_ctx):
    # E_2 does not couple at the center, so E_1 and E_3 are neighboring poles.
    om = (np.pi**2 + 9 * np.pi**2) / 2
    assert abs(g_bare(line_ctx, om)) < width_delta(1, 0.5, om) / 2


def test_bare_needs_one_dimension(rect_ctx):
    with pytest.raises(DimensionError):
        g_bare(rect_ctx, 100.0)


def test_fig1_midpoint_value(fig1_ctx):
    e = fig1_ctx.levels.pole_energies
    k = np.searchsorted(e, 8304.0)
    om = (e[k - 1] + e[k]) / 2
    assert abs(g_renorm(fig1_ctx, om) - g_smooth(3, 0.5, 1.0, om)) < 11.4
    assert g_smooth(3, 0.5, 1.0, om) == pytest.approx(-0.05627, abs=1e-5)


def test_shift_identity(line_generic):
    ctx = line_generic
    e = ctx.levels.pole_energies
    mids = ((e[:-1] + e[1:]) / 2)
    mids = mids[mids < ctx.e_cut / 2][:: max(1, mids.size // 100)][:100]
    diff = np.array([g_renorm(ctx, om) - g_bare(ctx, om) for om in mids])
    assert np.ptp(diff) < 1e-10
    assert diff[0] == pytest.approx(-coupling_shift_1d(ctx, 0.0), abs=1e-10)


def _cutoff_change(spec, n, factors=(1, 2)):
    om = (n / counting_function(spec, 1.0)) ** (2 / spec.dimension)
    base = cutoff_for(spec, om)
    ctxs = [GreensContext(enumerate_levels(spec, f * base)) for f in factors]
    e = ctxs[0].levels.pole_energies
    k = np.searchsorted(e, om)
    om = (e[k - 2] + e[k - 1]) / 2
    values = [g_renorm(c, om) for c in ctxs]
    return np.abs(np.diff(values)) / width_delta(spec.dimension, spec.mass, om)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(0.7, 1.4), st.floats(0.7, 1.4), st.floats(0.7, 1.4),
       st.sampled_from([50, 100, 300, 1000]))
def test_doubling_cutoff_changes_little(d, a, b, c, n):
    spec = BilliardSpec((a, b, c)[:d], parity_filter="odd")
    assert np.all(_cutoff_change(spec, n, (1, 2, 4)) < 1e-3)


def _generic_specs(count=20):
    rng = np.random.default_rng(5)
    for _ in range(count):
        d = int(rng.integers(2, 4))
        sides = rng.uniform(0.7, 1.4, d)
        yield BilliardSpec(tuple(sides), 0.5, tuple(sides * rng.uniform(0.1, 0.9, d)))


def _worst_generic_change():
    return max(_cutoff_change(s, n, (1, 2, 4)).max() for s in _generic_specs() for n in (50, 100, 300))


def test_doubling_cutoff_generic_position():
    # Off-center weights fluctuate mode by mode; the mean-weight tail only
    # captures their average, so the bound is looser here.
    assert _worst_generic_change() < 5e-3
    assert np.all(_cutoff_change(RECT, 300, (1, 2, 4)) < 5e-3)


@pytest.mark.xfail(strict=True, reason="off-center weights fluctuate mode by mode above the "
                   "cutoff; the mean-weight tail leaves changes slightly above 1e-3 of the band width")
def test_doubling_cutoff_generic_position_full_bound():
    assert _worst_generic_change() < 1e-3


def test_truncation_guard(rect_ctx):
    with pytest.raises(TruncationError):
        g_renorm(rect_ctx, rect_ctx.e_cut / 2)
    g_renorm(toy([1.0, 2.0], [1.0, 1.0]), 50.0)


def test_pole_guard(rect_ctx):
    e = rect_ctx.levels.pole_energies[10]
    with pytest.raises(PoleProximityError):
        g_renorm(rect_ctx, e)
    with pytest.raises(PoleProximityError):
        g_derivative(rect_ctx, e * (1 + 1e-17))


def test_derivative_single_pole():
    assert g_derivative(toy([1.0], [1.0]), 2.0) == pytest.approx(-1.0, rel=1e-15)


def test_derivative_matches_finite_difference(rect_ctx):
    e = rect_ctx.levels.pole_energies
    spacing = 1 / avg_density(RECT, 2000.0)
    checked = 0
    for k in range(300, 400):
        a, b = e[k], e[k + 1]
        om = a + 0.37 * (b - a)
        if min(om - a, b - om) < 0.1 * spacing:
            continue
        h = 1e-4 * min(om - a, b - om)
        fd = (g_renorm(rect_ctx, om + h) - g_renorm(rect_ctx, om - h)) / (2 * h)
        assert fd == pytest.approx(g_derivative(rect_ctx, om), rel=1e-6)
        checked += 1
    assert checked > 20


def test_derivative_negative(rect_ctx):
    e = rect_ctx.levels.pole_energies[:500]
    om = (e[:-1] + e[1:]) / 2
    assert np.all(g_derivative(rect_ctx, om) < 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 600), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_decreasing_between_poles(k, t1, t2):
    rect_ctx = _rect_ctx()
    e = rect_ctx.levels.pole_energies
    a, b = e[k], e[k + 1]
    lo, hi = sorted((t1, t2))
    if hi - lo < 1e-6:
        return
    assert g_renorm(rect_ctx, a + lo * (b - a)) > g_renorm(rect_ctx, a + hi * (b - a))


def test_pole_divergence(rect_ctx):
    e = rect_ctx.levels.pole_energies[40]
    for eps in (1e-4, 1e-7, 1e-10):
        assert g_renorm(rect_ctx, e + eps) > 1e-2 / eps
        assert g_renorm(rect_ctx, e - eps) < -1e-2 / eps


def test_coupling_shift_examples(line_generic):
    ctx = line_generic
    assert coupling_shift_1d(ctx, ctx.constant_offset()) == 0.0
    assert coupling_shift_1d(toy([1.0], [1.0]), 1.0) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(DimensionError):
        coupling_shift_1d(GreensContext(enumerate_levels(RECT, 500.0)), 0.0)


def test_wavefunction_reflection_symmetry():
    spec = BilliardSpec((1.0, 1.0), parity_filter="odd")
    ctx = GreensContext(enumerate_levels(spec, 4000.0))
    e = ctx.levels.pole_energies
    om = (e[5] + e[6]) / 2
    for x in [(0.2, 0.35), (0.61, 0.9)]:
        mirror = (1 - x[0], 1 - x[1])
        assert wavefunction_value(ctx, om, mirror) == pytest.approx(wavefunction_value(ctx, om, x), rel=1e-12)
        swapped = (1 - x[0], x[1])
        assert wavefunction_value(ctx, om, swapped) == pytest.approx(wavefunction_value(ctx, om, x), rel=1e-12)


def test_wavefunction_vanishes_at_wall():
    ctx = GreensContext(enumerate_levels(RECT, 3000.0))
    e = ctx.levels.pole_energies
    om = (e[3] + e[4]) / 2
    inside = abs(wavefunction_value(ctx, om, (0.4, 0.6)))
    near_wall = abs(wavefunction_value(ctx, om, (1e-9, 0.6)))
    assert near_wall < 1e-6 * inside


def test_wavefunction_near_pole_is_unperturbed_mode():
    ctx = GreensContext(enumerate_levels(RECT, 3000.0))
    lv = ctx.levels
    m = lv.pole_index[7]
    om = lv.energies[m] + 1e-6 * (lv.energies[m + 1] - lv.energies[m])
    c = wavefunction_coefficients(ctx, om)
    assert abs(c[m]) / np.linalg.norm(c) > 0.99


def test_context_for_window_covers_bracket(fig1_ctx, fig1):
    lv = fig1_ctx.levels
    n_hi = fig1.window[1]
    assert len(lv) > n_hi
    assert lv.energies[n_hi] < fig1_ctx.e_cut / 2
    ctx = context_for_window(RECT, 50)
    assert ctx.levels.energies[50] < ctx.e_cut / 2
