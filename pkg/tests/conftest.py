import numpy as np
import pytest

from pointscatter import context_for_window, load_preset, solve_spectrum

_ACCEPTANCE_LINES = []


def record_acceptance(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    _ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[0].split("-")[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig1():
    return load_preset("fig1")


@pytest.fixture(scope="session")
def fig1_ctx(fig1):
    return context_for_window(fig1.billiard, fig1.window[1], fig1.mass_scale)


@pytest.fixture(scope="session")
def fig1_spectra(fig1, fig1_ctx):
    """Solved fig1 windows, keyed by inverse coupling; filled on first use."""
    cache = {}

    def get(v):
        if v not in cache:
            cache[v] = solve_spectrum(fig1_ctx, fig1.coupling(v), fig1.window, tol=fig1.tolerance)
        return cache[v]

    return get


@pytest.fixture(scope="session")
def fig1_midpoints(fig1, fig1_ctx):
    """Midpoints between consecutive coupled levels spanning the fig1 window."""
    lv = fig1_ctx.levels
    n_lo, n_hi = fig1.window
    e = lv.energies[n_lo - 1:n_hi + 1]
    return (e[:-1] + e[1:]) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per criterion for the terminal summary."""
    return record_acceptance
