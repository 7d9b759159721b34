"""Spacing statistics of the odd-parity box as the coupling is switched on.

Solves levels 100..3100 at inverse couplings 0, 10 and 30, then prints the
KS distances and a coarse text histogram for each. Takes about 20 s.

    python3 demos/fig1_sweep.py
"""
import numpy as np

from pointscatter import context_for_window, histogram, ks_distance, load_preset, solve_spectrum, unfold
from pointscatter.bands import strong_band
from pointscatter.stats import reference_pdf

cfg = load_preset("fig1")
ctx = context_for_window(cfg.billiard, cfg.window[1], cfg.mass_scale)
print(f"{len(ctx.levels)} levels below e_cut = {ctx.e_cut:.1f}")

for v in cfg.couplings:
    spectrum = solve_spectrum(ctx, cfg.coupling(v), cfg.window)
    sample = unfold(spectrum, cfg.billiard)
    band = strong_band(3, cfg.billiard.mass, cfg.mass_scale, float(np.median(spectrum.omegas)))
    print(f"\n1/v = {v:g}  (strong band at the median level: {band.contains(v)})")
    print(f"  KS vs Poisson {ks_distance(sample, 'poisson'):.4f}   KS vs GOE {ks_distance(sample, 'goe'):.4f}")
    h = histogram(sample, 0.25, 3.0)
    for left, p in zip(h.edges[:-1], h.densities):
        mid = left + 0.125
        bar = "#" * int(round(40 * p))
        print(f"  {mid:4.2f} {p:5.3f} {bar:<40} P={reference_pdf('poisson', mid):.3f} GOE={reference_pdf('goe', mid):.3f}")
