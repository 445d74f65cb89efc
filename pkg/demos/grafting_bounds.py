"""Grafting bounds on the W-volume of a projective structure.

For a structure with bending length L, L2 norm phi2 and sup norm phiinf of
its Schwarzian, the W-volume between the hyperbolic and Thurston metrics is
bounded above by L/4 and below by an expression in (L, phi2, phiinf).  The
two bounds are compatible exactly when phi2 <= (1 + phiinf) sqrt(L).

    python3 demos/grafting_bounds.py
"""

import numpy as np

from epstein_kit import wvolume as wv

d = wv.GraftingData(chi=-2, L=1.0, phi2=0.5, phiinf=0.5)
lower, upper, T = wv.graft_bounds(d)
print(f"chi=-2, L=1, phi2=0.5, phiinf=0.5: T={T:.6f} lower={lower:+.6f} upper={upper:+.6f}")

print("\n   t     a_dual_h    a_proj  a_dual_proj  valid")
for t, a_h, a_p, a_dp, _, valid, _, _ in wv.graft_table(d, 2.0, 8):
    print(f"{t:5.2f}  {a_h:10.5f}  {a_p:8.5f}  {a_dp:10.5f}  {'yes' if valid else 'no'}")

print("\nlargest admissible phi2 (1 + phiinf) sqrt(L):")
for L, pinf in ((1.0, 1.5), (4.0, 0.0), (2.0, 0.75)):
    top = wv.newbound_max(L, pinf)
    lo, up, _ = wv.graft_bounds(wv.GraftingData(-2, L, top, pinf))
    print(f"  L={L:g} phiinf={pinf:g}: phi2 <= {top:.6f}; bounds there {lo:+.6f} <= {up:+.6f}")

mismatch, violations = wv.lattice_check(n=50)
print(f"\n50^3 lattice: {mismatch} disagreements with the closed-form criterion, {violations} crossings")
