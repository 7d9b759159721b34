"""Command-line entry point: ``pointscatter {levels,solve,stats,bands,run}``.

Every subcommand reads a scenario from ``--config FILE`` or ``--preset NAME``;
``--coupling-inv``, ``--window`` and ``--bins`` override the matching keys.
Failures exit with the category code of the error class (see
:mod:`pointscatter.errors`); I/O failures exit with 11.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import errors
from .greens import context_for_window
from .scenario import PRESETS, ScenarioConfig, bands_csv, load_preset, parse_config, run_scenario
from .solver import solve_spectrum
from .stats import histogram, summarize, unfold

EXIT_IO = 11


def _common(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario JSON file")
    src.add_argument("--preset", choices=PRESETS, help="shipped scenario")
    p.add_argument("--coupling-inv", type=float, nargs="+", metavar="V",
                   help="inverse coupling value(s), overriding coupling.inverse")
    p.add_argument("--window", type=int, nargs=2, metavar=("N_LO", "N_HI"),
                   help="level index window, overriding window")
    p.add_argument("--bins", type=float, nargs=2, metavar=("BIN_WIDTH", "S_MAX"),
                   help="histogram binning, overriding histogram")
    p.add_argument("--workers", type=int, help="solver threads")
    p.add_argument("-o", "--output", type=Path, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pointscatter",
                                 description="Spectra of rectangular billiards with a point scatterer.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("levels", help="unperturbed levels up to the window's solve cutoff (CSV)")
    _common(p)
    p = sub.add_parser("solve", help="perturbed levels for one coupling (CSV)")
    _common(p)
    p = sub.add_parser("stats", help="spacing summary (JSON) and optional histogram CSV")
    _common(p)
    p.add_argument("--histogram", type=Path, help="also write the histogram CSV here")
    p = sub.add_parser("bands", help="strong-coupling band over an omega grid (CSV)")
    _common(p)
    p.add_argument("--omega", type=float, nargs=3, metavar=("MIN", "MAX", "NUM"),
                   help="linear grid; default spans the window's energy range")
    p = sub.add_parser("run", help="full scenario with manifest")
    _common(p)
    p.add_argument("--output-dir", type=Path, help="overrides output_dir")
    return ap


def _load(args) -> ScenarioConfig:
    if args.preset:
        cfg = load_preset(args.preset)
    else:
        cfg = parse_config(args.config.read_text())
    # Re-validate overrides through the same parser as the file.
    doc = cfg.to_dict()
    if args.coupling_inv is not None:
        doc["coupling"]["inverse"] = list(args.coupling_inv)
    if args.window is not None:
        doc["window"] = list(args.window)
    if args.bins is not None:
        doc["histogram"] = {"bin_width": args.bins[0], "s_max": args.bins[1]}
    if args.workers is not None:
        doc["workers"] = args.workers
    return parse_config(json.dumps(doc))


def _emit(args, text):
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)


def _single_coupling(cfg):
    if len(cfg.couplings) != 1:
        raise errors.ConfigError("coupling.inverse",
                                 f"this subcommand takes one value, got {len(cfg.couplings)}; "
                                 "use --coupling-inv")
    return cfg.coupling(cfg.couplings[0])


def _spectrum(cfg):
    ctx = context_for_window(cfg.billiard, cfg.window[1], cfg.mass_scale)
    return ctx, solve_spectrum(ctx, _single_coupling(cfg), cfg.window,
                               tol=cfg.tolerance, workers=cfg.workers)


def _run(args) -> int:
    cfg = _load(args)
    spec = cfg.billiard
    if args.command == "levels":
        ctx = context_for_window(spec, cfg.window[1], cfg.mass_scale)
        _emit(args, ctx.levels.to_csv())
    elif args.command == "solve":
        _, spectrum = _spectrum(cfg)
        _emit(args, spectrum.to_csv())
    elif args.command == "stats":
        _, spectrum = _spectrum(cfg)
        sample = unfold(spectrum, spec, cfg.unfolding, cfg.unfolding_width)
        if args.histogram is not None:
            args.histogram.write_text(histogram(sample, cfg.bin_width, cfg.s_max).to_csv())
        summary = {"coupling_inverse": cfg.couplings[0], "unfolding": cfg.unfolding,
                   "window": list(cfg.window), **summarize(sample)}
        _emit(args, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    elif args.command == "bands":
        if args.omega is not None:
            lo, hi, num = args.omega
            if int(num) != num or num < 1:
                raise errors.ConfigError("--omega", "NUM must be a positive integer")
            grid = np.linspace(lo, hi, int(num))
        else:
            e = context_for_window(spec, cfg.window[1], cfg.mass_scale).levels.energies
            grid = np.linspace(e[cfg.window[0] - 1], e[cfg.window[1]], 101)
        _emit(args, bands_csv(spec.dimension, spec.mass, cfg.mass_scale, grid))
    elif args.command == "run":
        if args.output_dir is not None:
            cfg = dataclasses.replace(cfg, output_dir=str(args.output_dir))
        manifest = run_scenario(cfg)
        for r in manifest["runs"]:
            line = f"v_inv={r['coupling_inverse']:g}"
            if not r["below_statistics_minimum"]:
                line += f"  ks_poisson={r['ks_poisson']:.4f}  ks_goe={r['ks_goe']:.4f}"
            print(line)
        print(Path(manifest["output_dir"]) / "manifest.json")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return _run(args)
    except errors.PointScatterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
