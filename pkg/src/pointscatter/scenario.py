"""Config-driven end-to-end runs: levels -> roots -> statistics -> bands.

A scenario is a JSON document::

    {
      "billiard": {"dimension": 3, "side_lengths": [1.047, 1.186, 0.8049],
                   "mass": 0.5, "scatterer_position": "center",
                   "parity_filter": "odd"},
      "coupling": {"scheme": "renormalized", "mass_scale": 1.0,
                   "inverse": [0, 10, 30]},
      "window": [100, 3100],
      "unfolding": {"method": "analytic_weyl", "width": 51},
      "histogram": {"bin_width": 0.1, "s_max": 3.0},
      "output_dir": "fig1_output",
      "tolerance": 1e-9,
      "workers": 1
    }

Only ``billiard.dimension``, ``billiard.side_lengths``, ``coupling.inverse``
and ``window`` are required.  Unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .bands import g_smooth, strong_band, width_delta
from .billiard import BilliardSpec
from .errors import ConfigError, DomainError
from .greens import context_for_window
from .solver import CouplingConfig, solve_spectrum
from .stats import MIN_LEVELS, UNFOLDING_METHODS, histogram, summarize, unfold

__all__ = ["ScenarioConfig", "parse_config", "load_preset", "run_scenario", "PRESETS"]

log = logging.getLogger(__name__)

PRESETS = ("fig1",)
_TOP_KEYS = {"billiard", "coupling", "window", "unfolding", "histogram", "output_dir",
             "tolerance", "workers"}
_BILLIARD_KEYS = {"dimension", "side_lengths", "mass", "scatterer_position", "parity_filter"}
_COUPLING_KEYS = {"scheme", "mass_scale", "inverse"}
_UNFOLDING_KEYS = {"method", "width"}
_HISTOGRAM_KEYS = {"bin_width", "s_max"}


@dataclass(frozen=True)
class ScenarioConfig:
    billiard: BilliardSpec
    couplings: tuple
    window: tuple
    scheme: str = "renormalized"
    mass_scale: float = 1.0
    unfolding: str = "analytic_weyl"
    unfolding_width: int = 51
    bin_width: float = 0.1
    s_max: float = 3.0
    output_dir: str = "output"
    tolerance: float = 1e-9
    workers: int = 1

    def coupling(self, v_inverse) -> CouplingConfig:
        if self.scheme == "bare":
            return CouplingConfig.bare(v_inverse)
        return CouplingConfig.renormalized(v_inverse, self.mass_scale)

    def to_dict(self) -> dict:
        b = self.billiard
        return {
            "billiard": {
                "dimension": b.dimension,
                "side_lengths": list(b.side_lengths),
                "mass": b.mass,
                "scatterer_position": list(b.scatterer_position),
                "parity_filter": list(b.parity_filter),
            },
            "coupling": {"scheme": self.scheme, "mass_scale": self.mass_scale,
                         "inverse": list(self.couplings)},
            "window": list(self.window),
            "unfolding": {"method": self.unfolding, "width": self.unfolding_width},
            "histogram": {"bin_width": self.bin_width, "s_max": self.s_max},
            "output_dir": self.output_dir,
            "tolerance": self.tolerance,
            "workers": self.workers,
        }


def _section(doc, key, allowed, required=False):
    if key not in doc:
        if required:
            raise ConfigError(key, "missing required section")
        return {}
    sec = doc[key]
    if not isinstance(sec, dict):
        raise ConfigError(key, "must be an object")
    for k in sec:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}", "unknown field")
    return sec


def _number(value, key, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if not np.isfinite(value):
        raise ConfigError(key, "must be finite")
    if positive and not value > 0:
        raise ConfigError(key, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _parse_billiard(sec):
    if "dimension" not in sec:
        raise ConfigError("billiard.dimension", "missing required field")
    d = _number(sec["dimension"], "billiard.dimension", integer=True)
    if d not in (1, 2, 3):
        raise ConfigError("billiard.dimension", f"must be 1, 2 or 3, got {d}")
    if "side_lengths" not in sec:
        raise ConfigError("billiard.side_lengths", "missing required field")
    sides = sec["side_lengths"]
    if not isinstance(sides, list) or len(sides) != d:
        raise ConfigError("billiard.side_lengths", f"expected a list of {d} lengths")
    sides = [_number(s, "billiard.side_lengths", positive=True) for s in sides]
    mass = _number(sec.get("mass", 0.5), "billiard.mass", positive=True)

    pos = sec.get("scatterer_position", "center")
    if pos == "center" or pos is None:
        pos = [s / 2 for s in sides]
    if not isinstance(pos, list) or len(pos) != d:
        raise ConfigError("billiard.scatterer_position", f"expected 'center' or {d} coordinates")
    pos = [_number(x, "billiard.scatterer_position") for x in pos]
    if not all(0 < x < s for x, s in zip(pos, sides)):
        raise ConfigError("billiard.scatterer_position", "must lie strictly inside the box")

    parity = sec.get("parity_filter", "all")
    try:
        return BilliardSpec(tuple(sides), mass, tuple(pos), parity if isinstance(parity, str) else tuple(parity))
    except DomainError as exc:
        raise ConfigError("billiard.parity_filter", str(exc)) from None


def parse_config(text: str) -> ScenarioConfig:
    """Validate a JSON scenario; errors name the offending key."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "top level must be an object")
    for k in doc:
        if k not in _TOP_KEYS:
            raise ConfigError(k, "unknown field")

    spec = _parse_billiard(_section(doc, "billiard", _BILLIARD_KEYS, required=True))

    coup = _section(doc, "coupling", _COUPLING_KEYS, required=True)
    scheme = coup.get("scheme", "renormalized")
    if scheme not in ("bare", "renormalized"):
        raise ConfigError("coupling.scheme", f"must be 'bare' or 'renormalized', got {scheme!r}")
    if scheme == "bare" and spec.dimension != 1:
        raise ConfigError("coupling.scheme", "bare coupling is only defined for dimension 1")
    mass_scale = _number(coup.get("mass_scale", 1.0), "coupling.mass_scale", positive=True)
    if "inverse" not in coup:
        raise ConfigError("coupling.inverse", "missing required field")
    inv = coup["inverse"]
    inv = inv if isinstance(inv, list) else [inv]
    if not inv:
        raise ConfigError("coupling.inverse", "empty sweep")
    inv = tuple(_number(v, "coupling.inverse") for v in inv)

    if "window" not in doc:
        raise ConfigError("window", "missing required field")
    win = doc["window"]
    if not isinstance(win, list) or len(win) != 2:
        raise ConfigError("window", "expected [n_lo, n_hi]")
    n_lo, n_hi = (_number(v, "window", integer=True) for v in win)
    if not 1 <= n_lo <= n_hi:
        raise ConfigError("window", f"need 1 <= n_lo <= n_hi, got {win}")

    unf = _section(doc, "unfolding", _UNFOLDING_KEYS)
    method = unf.get("method", "analytic_weyl")
    if method not in UNFOLDING_METHODS:
        raise ConfigError("unfolding.method", f"must be one of {UNFOLDING_METHODS}")
    width = _number(unf.get("width", 51), "unfolding.width", positive=True, integer=True)
    if width % 2 == 0:
        raise ConfigError("unfolding.width", "must be odd")

    hist = _section(doc, "histogram", _HISTOGRAM_KEYS)
    bin_width = _number(hist.get("bin_width", 0.1), "histogram.bin_width", positive=True)
    s_max = _number(hist.get("s_max", 3.0), "histogram.s_max", positive=True)
    n_bins = round(s_max / bin_width)
    if n_bins < 1 or abs(n_bins * bin_width - s_max) > 1e-9 * s_max:
        raise ConfigError("histogram.s_max", "must be a whole number of bins")

    out = doc.get("output_dir", "output")
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir", "must be a non-empty string")
    tol = _number(doc.get("tolerance", 1e-9), "tolerance", positive=True)
    workers = _number(doc.get("workers", 1), "workers", positive=True, integer=True)

    return ScenarioConfig(spec, inv, (n_lo, n_hi), scheme, mass_scale, method, width,
                          bin_width, s_max, out, tol, workers)


def load_preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {PRESETS}")
    text = resources.files("pointscatter.presets").joinpath(f"{name}.json").read_text()
    return parse_config(text)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _tag(v: float) -> str:
    return "v" + repr(float(v))


def _dedupe(values):
    seen = []
    dropped = []
    for v in values:
        if v in seen:
            dropped.append(v)
        else:
            seen.append(v)
    return tuple(seen), dropped


def bands_csv(d, M, mass_scale, omegas) -> str:
    lines = ["omega,center,half_width"]
    for om in omegas:
        c = g_smooth(d, M, mass_scale, om)
        h = width_delta(d, M, om) / 2
        lines.append(f"{om:.17g},{c:.17g},{h:.17g}")
    return "\n".join(lines) + "\n"


def run_scenario(config: ScenarioConfig, output_dir=None) -> dict:
    """Run the full pipeline and write every artifact.

    Returns the manifest (also written as ``manifest.json``), listing each
    output with its SHA-256 digest.  Identical configs give byte-identical
    files.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    spec = config.billiard
    n_lo, n_hi = config.window
    warnings = []
    couplings, dropped = _dedupe(config.couplings)
    if dropped:
        msg = f"duplicate coupling values dropped: {dropped}"
        log.warning(msg)
        warnings.append(msg)
    n_roots = n_hi - n_lo + 1
    if n_roots < MIN_LEVELS:
        msg = f"window has {n_roots} levels, below the statistics minimum of {MIN_LEVELS}"
        log.warning(msg)
        warnings.append(msg)

    ctx = context_for_window(spec, n_hi, config.mass_scale)
    files = {}

    def emit(name, text):
        _atomic_write(out / name, text)
        files[name] = text.encode()

    emit("levels.csv", ctx.levels.to_csv())

    e = ctx.levels.energies
    grid = np.linspace(e[n_lo - 1], e[n_hi], 101)
    emit("bands.csv", bands_csv(spec.dimension, spec.mass, config.mass_scale, grid))

    runs = []
    for v in couplings:
        tag = _tag(v)
        spectrum = solve_spectrum(ctx, config.coupling(v), config.window,
                                  tol=config.tolerance, workers=config.workers)
        emit(f"spectrum_{tag}.csv", spectrum.to_csv())
        summary = {"coupling_inverse": v, "scheme": config.scheme, "window": [n_lo, n_hi],
                   "unfolding": config.unfolding}
        omegas = spectrum.omegas
        mid = float(np.median(omegas))
        band = strong_band(spec.dimension, spec.mass, config.mass_scale, mid)
        summary.update({"band_omega": mid, "band_center": band.center,
                        "band_half_width": band.half_width, "in_strong_band": band.contains(v)})
        if len(spectrum) >= MIN_LEVELS:
            sample = unfold(spectrum, spec, config.unfolding, config.unfolding_width)
            hist = histogram(sample, config.bin_width, config.s_max)
            emit(f"histogram_{tag}.csv", hist.to_csv())
            emit(f"histogram_{tag}.dat", hist.to_gnuplot())
            summary.update(summarize(sample))
            summary["below_statistics_minimum"] = False
        else:
            summary.update({"n_levels": len(spectrum), "below_statistics_minimum": True})
        emit(f"summary_{tag}.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
        runs.append(summary)

    manifest = {
        "config": config.to_dict(),
        "files": [
            {"path": name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()}
            for name, data in sorted(files.items())
        ],
        "warnings": warnings,
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    manifest["runs"] = runs
    manifest["output_dir"] = str(out)
    return manifest
