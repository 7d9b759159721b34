"""Where the scatterer is strong: centre and half-width of the band in d = 1, 2, 3.

    python3 demos/band_diagram.py
"""
import numpy as np

from pointscatter.bands import strong_band

for d in (1, 2, 3):
    print(f"d = {d}")
    for om in np.geomspace(1.0, 1e4, 5):
        b = strong_band(d, 0.5, 1.0, om)
        lo, hi = b.interval
        print(f"  omega {om:9.1f}   centre {b.center:+.5f}   band [{lo:+10.4f}, {hi:+10.4f}]")
