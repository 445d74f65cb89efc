"""W-volume of conformal pairs on the square torus.

For g1 = e^{2u} g0 the W-volume is -1/4 times the integral of
u (K0 dA0 + K1 dA1).  On a torus it is a cocycle, it does not see constant
rescalings of either metric, and for a flat g0 with an area-preserving u it
equals minus a quarter of the Dirichlet energy of u.

    python3 demos/wvolume_torus.py
"""

import numpy as np

from epstein_kit import wvolume as wv

rng = np.random.default_rng(1)
g0 = wv.torus_metric(wv.random_trig(rng, amplitude=0.2))
u = wv.random_trig(rng, amplitude=0.2)
v = wv.random_trig(rng, amplitude=0.2)

print(f"W(g0, e^(2u) g0)            = {wv.w_pair(g0, u):+.12f}")
print(f"cocycle defect              = {wv.w_cocycle_check(g0, u, v):.2e}")
print(f"scaling defect (t=.3,s=-.2) = {wv.w_scaling_check(g0, u, 0.3, -0.2):.2e}")
print(f"antisymmetry defect         = {wv.w_antisymmetry_check(g0, u):.2e}")
# W is quadratic in u, so the central difference is exact and the defect stays at round-off
for h in (1e-2, 5e-3, 2.5e-3):
    print(f"dW defect at h = {h:.4f}     = {wv.dw_conformal_check(g0, v, h):.2e}")

flat = wv.torus_metric(n=128)
ua = wv.area_preserving(u, flat, n=256)
w, energy = wv.wmax_gap(flat, ua)
print(f"flat g0, equal areas: W = {w:+.12f}, -||grad u||^2 / 4 = {energy:+.12f}")
