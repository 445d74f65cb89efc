"""Epstein surfaces of the hyperbolic half plane and its rescalings.

The hyperbolic metric on the upper half plane, viewed as a metric at
infinity, produces the vertical totally geodesic plane over the real axis.
Scaling the metric by e^{2t} pushes the surface out to the equidistant
surface at distance t.  The script prints the worst deviation for a few t
and writes an OBJ mesh for each.

    python3 demos/plane_equidistants.py [output-dir]
"""

import sys
from pathlib import Path

import numpy as np

from epstein_kit import epstein as ep
from epstein_kit import field as fld

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo-output")
out.mkdir(exist_ok=True)

m = fld.catalog("hyperbolic-uhp")
chart = m.chart.with_resolution(32, 32)
for t in (0.0, 0.5, 1.0, 2.0):
    mesh = ep.epstein_mesh(m.scaled(t), chart=chart, model="uhs")
    v = mesh.vertices.reshape(-1, 3)
    # signed distance from (x, y, h) to the plane y = 0 is asinh(y / h)
    dist = np.arcsinh(v[:, 1] / v[:, 2])
    print(f"t = {t:3.1f}: distance to plane in [{dist.min():.10f}, {dist.max():.10f}]")
    mesh.write_obj(out / f"equidistant_t{t:.1f}.obj")

# The forward Gauss map sends each surface point back to the chart point it came from.
z = chart.points().ravel()
zp, zm = ep.gauss_maps(ep.epstein_points(m.scaled(1.0), z))
print("max |z_plus - z| =", float(np.max(np.abs(zp - z))))
print("max |z_minus - conj(z)| =", float(np.max(np.abs(zm - np.conj(z)))))
