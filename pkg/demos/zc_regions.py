"""Which exponents c make z^c pass the univalence criterion?

On the upper half plane z^c has a cone-like Schwarzian, so the pointwise
criterion reduces to an inequality in the polar angle.  For the hyperbolic
metric the admissible set is the lemniscate-bounded region |c^2 - 1| <= 1;
for the metric with doubled angular profile it is |c^2 - 2| <= 2.  Both lie
inside the disk |c - 1| <= 1 where z^c is actually univalent.

    python3 demos/zc_regions.py [output-dir]
"""

import sys
from pathlib import Path

import numpy as np

from epstein_kit import univalence as uv

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo-output")
out.mkdir(exist_ok=True)

for profile, target in (("hyperbolic", 1.0), ("double-log-sin", 2.0)):
    c, mask = uv.region_scan(profile, n_re=200, n_im=200)
    exact = np.abs(c**2 - target) <= target
    cell = 2.2 / 200
    print(f"{profile:>15s}: {mask.mean():.3%} of the scan window satisfies the criterion; "
          f"{int(np.sum(mask != exact))} cells differ from |c^2 - {target:g}| <= {target:g} "
          f"(cell size {cell:.3f})")
    print(f"{'':>15s}  all admissible c have |c - 1| <= 1: {bool(np.all(uv.zc_univalent(c[mask])))}")
    uv.write_region_csv(out / f"region_{profile}.csv", c, mask)
    uv.write_region_svg(out / f"region_{profile}.svg", c, mask)

# The actual univalence region is strictly larger: c = 1.9 is univalent but fails both criteria.
c = 1.9
print(f"c = {c}: univalent {bool(uv.zc_univalent(c))}, hyperbolic criterion "
      f"{uv.zc_pointwise(c, 'hyperbolic', uv.theta_grid())}")
