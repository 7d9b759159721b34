"""In one dimension the renormalized coupling is a constant shift of the bare one.

Both couplings give the same roots once the shift is applied, and the
difference of the two secular functions does not depend on omega.

    python3 demos/one_dimensional_routes.py
"""
import numpy as np

from pointscatter import (
    BilliardSpec,
    CouplingConfig,
    GreensContext,
    coupling_shift_1d,
    enumerate_levels,
    g_bare,
    g_renorm,
    solve_spectrum,
)

spec = BilliardSpec((1.0,), 0.5, (0.3,))
ctx = GreensContext(enumerate_levels(spec, np.pi**2 * 2000.5**2))
v = 3.0
shift = coupling_shift_1d(ctx, v)
print(f"renormalized 1/v = {v}  ->  bare 1/v = {shift:.12f}")

for om in (15.0, 2000.0, 1.5e6):
    print(f"  omega {om:>9}: g_renorm - g_bare = {g_renorm(ctx, om) - g_bare(ctx, om):.15f}")

window = (1, 20)
a = solve_spectrum(ctx, CouplingConfig.renormalized(v), window).omegas
b = solve_spectrum(ctx, CouplingConfig.bare(shift), window).omegas
for n, (x, y) in enumerate(zip(a, b), start=1):
    print(f"  {n:3d}  {x:16.10f}  {y:16.10f}")
