"""W-volume of conformal metric pairs on the torus, and the grafting bounds.

For ``g1 = e^{2u} g0`` the W-volume of the pair is

    W(g0, g1) = -1/4 * integral of u (K0 dA0 + K1 dA1).

On the flat square torus ``[0, 1)^2`` this is computed by the trapezoid
rule, which is spectrally accurate for the trigonometric polynomials used
as test data.  The torus has Euler characteristic zero, so the scaling law
has no correction term; the negative-characteristic content lives in the
closed-form grafting layer at the bottom of the module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import duality as dl
from . import field as fld


# ---------------------------------------------------------------- periodic data


class TrigPolynomial(fld.ScalarField):
    """sum of a cos(2 pi (kx x + ky y) + phase) plus a constant.

    Partials are exact: each derivative multiplies by ``2 pi k`` and shifts
    the phase by a quarter turn.
    """

    max_order = 3

    def __init__(self, terms=(), constant=0.0):
        self.terms = tuple((float(a), int(kx), int(ky), float(ph)) for a, kx, ky, ph in terms)
        self.constant = float(constant)

    def partials(self, z, order=2):
        self._check_order(order)
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        out = {}
        for i, j in fld._multi_indices(order):
            acc = np.full(z.shape, self.constant if i == j == 0 else 0.0)
            for a, kx, ky, ph in self.terms:
                scale = a * (2 * np.pi * kx) ** i * (2 * np.pi * ky) ** j
                if scale:
                    acc = acc + scale * np.cos(2 * np.pi * (kx * x + ky * y) + ph + (i + j) * np.pi / 2)
            out[(i, j)] = acc
        return out

    def shifted(self, c):
        return TrigPolynomial(self.terms, self.constant + c)

    def scaled(self, s):
        return TrigPolynomial([(s * a, kx, ky, ph) for a, kx, ky, ph in self.terms], s * self.constant)

    def __add__(self, other):
        if isinstance(other, TrigPolynomial):
            return TrigPolynomial(self.terms + other.terms, self.constant + other.constant)
        if isinstance(other, (int, float)):
            return self.shifted(float(other))
        return super().__add__(other)

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __repr__(self):
        return f"TrigPolynomial({len(self.terms)} terms, constant={self.constant})"


def random_trig(rng, degree=3, amplitude=0.1, constant=0.0):
    """Random trigonometric polynomial with frequencies up to ``degree``."""
    terms = []
    for kx in range(-degree, degree + 1):
        for ky in range(0, degree + 1):
            if (ky == 0 and kx <= 0):
                continue
            terms.append((amplitude * rng.normal() / (1 + kx * kx + ky * ky), kx, ky, rng.uniform(0, 2 * np.pi)))
    return TrigPolynomial(terms, constant)


def torus_metric(phi=None, n=64, name="torus"):
    """Conformal metric e^{2 phi} on the unit square torus."""
    phi = TrigPolynomial() if phi is None else phi
    return fld.MetricField(fld.as_field(phi), fld.Chart.torus(n), name, "plane", False, None)


def sup_norm(u, n=256):
    return float(np.max(np.abs(fld.as_field(u)(fld.Chart.torus(n).points()))))


def area_preserving(u, g0, n=None):
    """Shift ``u`` by a constant so that e^{2u} g0 has the same area as g0."""
    chart = g0.chart if n is None else g0.chart.with_resolution(n, n)
    a0 = fld.quadrature(g0, 1.0, chart)
    a1 = fld.quadrature(g0, lambda z: np.exp(2 * fld.as_field(u)(z)), chart)
    shift = -0.5 * np.log(a1 / a0)
    return u.shifted(shift) if isinstance(u, TrigPolynomial) else fld.as_field(u) + fld.Constant(shift)


# ---------------------------------------------------------------- W-volume


def _grid(g0, n):
    if not g0.is_periodic:
        raise ValueError("W-volume quadrature needs a torus metric")
    return g0.chart if n is None else g0.chart.with_resolution(n, n)


def w_pair(g0, u, n=None):
    """W(g0, e^{2u} g0) by the trapezoid rule on the torus grid."""
    chart = _grid(g0, n)
    z = chart.points()
    u = fld.as_field(u)
    g1 = fld.conformal_change(g0, u)
    uz = u(z)
    omega = fld.curvature(g0, z) * g0.density(z) + fld.curvature(g1, z) * g1.density(z)
    integrand = -0.25 * uz * omega * chart.weights()
    if not np.all(np.isfinite(integrand)):
        raise fld.QuadratureError("non-finite W-volume integrand")
    return float(np.sum(integrand.ravel()))


def w_pair_extrapolated(g0, u, n=128):
    """Richardson value from grids n and 2n, with both raw values."""
    coarse, fine = w_pair(g0, u, n), w_pair(g0, u, 2 * n)
    return fld.richardson(coarse, fine), coarse, fine


def w_scaling_check(g0, u, t, s, n=None):
    """Defect of W(g0, g1) = W(e^{2t} g0, e^{2s} g1) on the torus."""
    u = fld.as_field(u)
    return abs(w_pair(g0, u, n) - w_pair(g0.scaled(t), u + fld.Constant(s - t), n))


def w_cocycle_check(g0, u01, u12, n=None):
    """Defect of W(g0, g1) + W(g1, g2) = W(g0, g2)."""
    u01, u12 = fld.as_field(u01), fld.as_field(u12)
    g1 = fld.conformal_change(g0, u01)
    return abs(w_pair(g0, u01, n) + w_pair(g1, u12, n) - w_pair(g0, u01 + u12, n))


def w_antisymmetry_check(g0, u, n=None):
    u = fld.as_field(u)
    g1 = fld.conformal_change(g0, u)
    return abs(w_pair(g0, u, n) + w_pair(g1, -u, n))


def dw_predicted(g0, v, n=None):
    """1/4 integral of dK(v) dA with dK(v) = -2 v K - Lap v."""
    chart = _grid(g0, n)
    z = chart.points()
    v = fld.as_field(v)
    dk = -2 * v(z) * fld.curvature(g0, z) - fld.laplacian(g0, v, z)
    return 0.25 * float(np.sum((dk * g0.density(z) * chart.weights()).ravel()))


def dw_conformal_check(g0, v, h, n=None):
    """|central difference of W along h v - predicted derivative|."""
    v = fld.as_field(v)
    fd = (w_pair(g0, v * h, n) - w_pair(g0, v * -h, n)) / (2 * h)
    return abs(fd - dw_predicted(g0, v, n))


def wmax_gap(g0, u, n=None):
    """(W, -1/4 ||grad u||^2) for a flat g0; equal for area-preserving u."""
    chart = _grid(g0, n)
    z = chart.points()
    grad = fld.gradient_norm_sq(g0, u, z) * g0.density(z)
    bound = -0.25 * float(np.sum((grad * chart.weights()).ravel()))
    return w_pair(g0, u, n), bound


def mean_curvature_integral_check(S, m, n=None):
    """(integral of H dA_g, 1/2 area(m) - area(g)) for the dual surface of (S, m).

    ``H`` is the mean of the principal curvatures of the dual pair; the
    torus has Euler characteristic zero so no constant term appears.
    """
    chart = _grid(m, n)
    z = chart.points().ravel()
    hat = dl.projective_pair(S, m, z)
    pair = dl.to_dual(hat)
    k1, k2 = np.moveaxis(dl.principal_curvatures(pair.g, pair.B), -1, 0)
    da_g = np.sqrt(np.linalg.det(pair.g))
    w = chart.weights().ravel()
    lhs = float(np.sum(0.5 * (k1 + k2) * da_g * w))
    rhs = 0.5 * float(np.sum(m.density(z) * w)) - float(np.sum(da_g * w))
    return lhs, rhs


# ---------------------------------------------------------------- grafting layer


@dataclass(frozen=True)
class GraftingData:
    chi: int
    L: float
    phi2: float
    phiinf: float

    def __post_init__(self):
        if self.chi >= 0:
            raise ValueError("grafting data needs negative Euler characteristic")
        if min(self.L, self.phi2, self.phiinf) < 0:
            raise ValueError("L, phi2 and phiinf must be non-negative")


def graft_areas(d, t):
    """(a_dual_h, a_proj, a_dual_proj, a_conf_gap, valid) at time t.

    ``valid`` records whether t exceeds 1/2 log(1 + 2 phiinf), where the
    hyperbolic dual area formula applies.
    """
    c2 = np.cosh(t) ** 2
    a_dual_h = -2 * np.pi * d.chi * c2 - np.exp(-2 * t) * d.phi2**2
    a_proj = -2 * np.pi * d.chi + d.L
    a_dual_proj = -2 * np.pi * d.chi * c2 + d.L * np.sinh(t) * np.cosh(t)
    a_conf_gap = np.exp(2 * t) * d.L
    valid = t > 0.5 * np.log1p(2 * d.phiinf)
    return a_dual_h, a_proj, a_dual_proj, a_conf_gap, valid


def graft_bounds(d):
    """(lower, upper, T) for W(g_h, g_Sigma).

    With E = e^{2T} = 1 + 2 phiinf the lower bound is
    phi2^2 / (2E) - L (E + 1/E) / 8; the upper bound is L / 4.
    """
    e = 1 + 2 * d.phiinf
    lower = d.phi2**2 / (2 * e) - d.L * (e + 1 / e) / 8
    return lower, d.L / 4, 0.5 * np.log(e)


def newbound_max(L, phiinf):
    """Largest phi2 compatible with lower <= upper: (1 + phiinf) sqrt(L)."""
    if L < 0 or phiinf < 0:
        raise ValueError("L and phiinf must be non-negative")
    return (1 + phiinf) * np.sqrt(L)


def graft_table(d, tmax, steps):
    """Rows (t, a_dual_h, a_proj, a_dual_proj, a_conf_gap, valid, lower, upper)."""
    lower, upper, _ = graft_bounds(d)
    rows = []
    for t in np.linspace(0.0, tmax, steps + 1):
        a = graft_areas(d, t)
        rows.append((float(t), *map(float, a[:4]), int(a[4]), lower, upper))
    return rows


def lattice_check(n=50, L_max=4.0, phiinf_max=3.0, phi2_max=None):
    """Compare lower <= upper with phi2^2 <= L (E + 1)^2 / 4 on an n^3 lattice.

    Returns ``(mismatches, admissible_violations)``: the number of lattice
    points where the two conditions disagree (outside a 1e-12 relative
    band), and the number of points with phi2 <= newbound_max where the
    bounds cross.
    """
    L = np.linspace(0, L_max, n)[:, None, None]
    pinf = np.linspace(0, phiinf_max, n)[None, :, None]
    top = phi2_max if phi2_max is not None else 1.5 * (1 + phiinf_max) * np.sqrt(L_max)
    p2 = np.linspace(0, top, n)[None, None, :]
    e = 1 + 2 * pinf
    lower = p2**2 / (2 * e) - L * (e + 1 / e) / 8
    upper = L / 4
    gap = upper - lower
    crit = L * (e + 1) ** 2 / 4 - p2**2
    band = 1e-12 * (1 + np.abs(L * (e + 1) ** 2))
    decided = np.abs(crit) > band
    mismatches = int(np.sum(decided & ((gap >= 0) != (crit >= 0))))
    admissible = p2 <= (1 + pinf) * np.sqrt(L)
    violations = int(np.sum(admissible & (gap < -band)))
    return mismatches, violations
