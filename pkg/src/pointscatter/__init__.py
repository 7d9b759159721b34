"""Exact spectra of rectangular billiards with a single point scatterer.

Typical use::

    from pointscatter import BilliardSpec, CouplingConfig, context_for_window
    from pointscatter import solve_spectrum, unfold, summarize

    spec = BilliardSpec((1.047, 1.186, 0.8049), mass=0.5, parity_filter="odd")
    ctx = context_for_window(spec, 3100)
    spectrum = solve_spectrum(ctx, CouplingConfig.renormalized(0.0), (100, 3100))
    print(summarize(unfold(spectrum, spec)))

Modules
-------
billiard   unperturbed levels, weights and Weyl densities
greens     secular functions with the analytic truncation tail
solver     roots of the secular equation by bracketed bisection
bands      closed-form smooth secular function and strong-coupling band
stats      unfolding, spacing histograms and KS distances
verify     independent dense-matrix and quadrature references
scenario   JSON-configured end-to-end runs
cli        command-line front-end
"""
from .bands import StrongBand, g_smooth, strong_band, width_delta
from .billiard import (
    BilliardSpec,
    LevelSet,
    avg_density,
    counting_function,
    eigenfunction_weight,
    enumerate_levels,
)
from .errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    DomainError,
    EmptyLevelSetError,
    NumericalResolutionError,
    PointScatterError,
    PoleProximityError,
    SampleSizeError,
    TruncationError,
)
from .greens import (
    GreensContext,
    context_for_window,
    coupling_shift_1d,
    cutoff_for,
    g_bare,
    g_derivative,
    g_renorm,
    wavefunction_value,
)
from .scenario import ScenarioConfig, load_preset, parse_config, run_scenario
from .solver import CouplingConfig, PerturbedSpectrum, Root, solve_interval, solve_spectrum
from .stats import SpacingHistogram, SpacingSample, histogram, ks_distance, summarize, unfold

__version__ = "0.1.0"
