"""Invariant suites behind ``epstein-kit verify`` and the acceptance tests.

Each check returns a :class:`CheckResult` with the measured defect, the
tolerance it is held to and the wall time.  Checks are grouped by module;
:data:`SUITES` maps a suite name to its ordered list of checks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import duality as dl
from . import epstein as ep
from . import field as fld
from . import schwarzian as sz
from . import tensor2 as t2
from . import univalence as uv
from . import wvolume as wv

SEED = 20240601


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    seconds: float = 0.0
    detail: str = ""
    extra: dict = dc_field(default_factory=dict)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<44s} value={self.value:.3e} tol={self.tol:.1e} ({self.seconds:.2f}s) {self.detail}"

    def as_dict(self):
        # no timings, so summaries are identical across runs
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed,
                "detail": self.detail}


def _timed(name, tol, fn, time_limit=None):
    t0 = time.perf_counter()
    value, detail = fn()
    dt = time.perf_counter() - t0
    ok = bool(np.isfinite(value) and value <= tol)
    if time_limit is not None and dt > time_limit:
        ok = False
        detail = f"{detail} slower than {time_limit}s".strip()
    return CheckResult(name, float(value), tol, ok, dt, detail)


def _rng(offset=0):
    return np.random.default_rng(SEED + offset)


IDENTITY = sz.ProjectiveStructure.identity()


def _random_disk(rng, n, radius=0.95):
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def check_metrics():
    """Catalog metrics paired with a structure and a safe scaling.

    The spherical metric with the identity structure has a shape operator
    equal to minus the identity, and the unscaled torus bump has a shape
    eigenvalue crossing -1, so both are scaled before forming duals.
    """
    out = []
    for name in fld.CATALOG_NAMES:
        m = fld.catalog(name, profile="double-log-sin") if name == "power-cone" else fld.catalog(name)
        S = sz.ProjectiveStructure.power(1.2) if name == "power-cone" else IDENTITY
        if name == "spherical":
            m = m.scaled(1.0)
        if name == "torus-bump":
            m = m.scaled(dl.convexity_time(S, m)[0] + 0.3)
        out.append((name, S, m))
    return out


# ---------------------------------------------------------------- tensor2


def _random_instance(rng):
    """Random (g, P, dg, dP) with g positive and P g-self-adjoint, |det P| > 0.1."""
    while True:
        a = rng.normal(size=(2, 2))
        g = a @ a.T + 0.5 * np.eye(2)
        s = rng.normal(size=(2, 2))
        p = np.linalg.solve(g, s + s.T)
        if abs(np.linalg.det(p)) > 0.1:
            break
    d = rng.normal(size=(2, 2))
    return g, p, d + d.T, rng.normal(size=(2, 2))


def variation_exact():
    rng = _rng(1)
    worst = 0.0
    for _ in range(1000):
        worst = max(worst, float(t2.variation_duality_residual(*_random_instance(rng))))
    return worst, "1000 instances"


def _unit_instance(rng):
    """Like :func:`_random_instance` with |eigenvalues| of P and g in [0.5, 2]."""
    def rotation():
        a = rng.uniform(0, 2 * np.pi)
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])

    r = rotation()
    g = r @ np.diag(rng.uniform(0.5, 2, 2)) @ r.T
    L = np.linalg.cholesky(g)
    q = rotation()
    lam = rng.uniform(0.5, 2, 2) * rng.choice([-1, 1], 2)
    p = np.linalg.solve(L.T, q @ np.diag(lam) @ q.T @ L.T)
    d = rng.normal(size=(2, 2))
    return g, p, d + d.T, rng.normal(size=(2, 2))


def variation_fd(h=1e-5):
    rng = _rng(2)
    worst = 0.0
    for _ in range(1000):
        g, p, dg, dp = _unit_instance(rng)

        def hat(s):
            ps = p + s * dp
            return t2.pullback(ps, g + s * dg), np.linalg.inv(ps)

        (gp, pp), (gm, pm) = hat(h), hat(-h)
        worst = max(worst, float(t2.variation_duality_residual(
            g, p, dg, dp, dg_hat=(gp - gm) / (2 * h), dp_hat=(pp - pm) / (2 * h))))
    return worst, "1000 unit-scale instances, step 1e-5"


def pairing_normalization():
    dz2 = np.array([[1, 1j], [1j, -1]])
    dzdzb = np.array([[0.5, -0.5j], [-0.5j, -0.5]])
    return abs(complex(t2.pairing(dz2, dzdzb, np.eye(2))) - 1), "<dz^2, d/dz (x) dzbar> = 1"


# ---------------------------------------------------------------- schwarzian


def os_vanishing():
    z = _random_disk(_rng(3), 1000)
    m = fld.catalog("hyperbolic-disk")
    return float(np.max(np.abs(sz.os_q_euclidean(m, z)))), "1000 points in the disk"


def _bridge_maps():
    return [sz.moebius_map(1, 2, 0.5, 3), sz.power_map(1.7 + 0.3j), sz.exp_map(0.8 - 0.4j)]


def schwarzian_bridge():
    rng = _rng(4)
    z = rng.uniform(0.2, 1.5, 1000) + 1j * rng.uniform(0.2, 1.5, 1000)
    worst = 0.0
    euc = fld.catalog("euclidean")
    for f in _bridge_maps():
        u = sz.LogAbsDerivative(f)
        lhs = sz.os_q(euc, u, z)
        rhs = 0.5 * sz.schwarzian_derivative(f, z)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs)))))
    return worst, "Moebius, z^c, exp"


def schwarzian_cocycle():
    rng = _rng(5)
    z = rng.uniform(0.2, 1.5, 1000) + 1j * rng.uniform(0.2, 1.5, 1000)
    f, g = sz.power_map(1.3 + 0.2j), sz.exp_map(0.7)
    comp = sz.Composite(f, g)
    g0, g1, _, _ = g.jets(z)
    lhs = sz.schwarzian_derivative(comp, z)
    rhs = sz.schwarzian_derivative(f, g0) * g1**2 + sz.schwarzian_derivative(g, z)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs)))), "S(f o g) chain rule"


def shape_eigenvalues():
    worst = 0.0
    for _, S, m in check_metrics():
        z = m.chart.points().ravel()
        if m.domain == "disk":
            z = z[np.abs(z) < 0.98]
        numeric = np.linalg.eigvals(sz.shape_operator_hat(S, m, z))
        numeric = np.sort(numeric.real, axis=-1)
        closed = sz.shape_eigenvalues(S, m, z)
        worst = max(worst, float(np.max(np.abs(numeric - closed) / np.maximum(1, np.abs(closed)))))
    return worst, "all catalog metrics, full grid"


def hyperbolic_holomorphy():
    worst = 0.0
    for name in ("hyperbolic-disk", "hyperbolic-uhp"):
        m = fld.catalog(name)
        z = m.chart.points().ravel()
        for S in (IDENTITY, sz.ProjectiveStructure.exp(0.5)):
            worst = max(worst, float(np.max(np.abs(sz.q_sigma_zbar(S, m, z)))))
    return worst, "Q is holomorphic for K = -1"


# ---------------------------------------------------------------- duality


def duality_gc(resolution=(17, 16)):
    worst_p = worst_h = 0.0
    names = []
    for name, S, m in check_metrics():
        z = m.chart.with_resolution(*resolution).points().ravel()
        if m.domain == "disk":
            z = z[np.abs(z) < 0.98]
        g, B = dl.dual_fields(S, m)
        gp, cp = dl.gc_residuals(m, lambda w: sz.shape_operator_hat(S, m, w), "projective", z)
        gh, ch = dl.gc_residuals(g, B, "hyperbolic", z, domain=m.domain)
        worst_p = max(worst_p, float(np.max(np.abs(gp))), float(np.max(np.abs(cp))))
        worst_h = max(worst_h, float(np.max(np.abs(gh))), float(np.max(np.abs(ch))))
        names.append(name)
    return max(worst_p, worst_h), f"projective {worst_p:.1e}, hyperbolic {worst_h:.1e}"


def flow_law():
    rng = _rng(6)
    worst = 0.0
    count = 0
    while count < 1000:
        a = rng.normal(size=(2, 2))
        g = a @ a.T + 0.5 * np.eye(2)
        s = rng.normal(size=(2, 2))
        B = np.linalg.solve(g, s + s.T)
        t = rng.uniform(-2, 2)
        lam = dl.principal_curvatures(g, B)
        # singular where tanh t = -1/lambda
        if np.any(np.abs(1 + np.tanh(t) * lam) < 1e-2 * np.maximum(1, np.abs(lam))):
            continue
        acal, ccal = dl.flow_maps(B, t)
        numeric = np.sort(np.linalg.eigvals(np.linalg.solve(acal, ccal)).real)
        formula = np.sort(dl.flow_eigenvalue(lam, t))
        worst = max(worst, float(np.max(np.abs(numeric - formula) / np.maximum(1, np.abs(formula)))))
        count += 1
    return worst, "1000 random (B, t)"


# ---------------------------------------------------------------- epstein


def epstein_plane():
    m = fld.catalog("hyperbolic-uhp")
    chart = m.chart.with_resolution(64, 64)
    worst = 0.0
    for t in (0.0, 0.5, 1.0, 2.0):
        mesh = ep.epstein_mesh(m.scaled(t), chart=chart, model="uhs")
        v = mesh.vertices.reshape(-1, 3)
        if not mesh.valid.all():
            return np.inf, f"invalid vertices at t={t}"
        # signed distance to the vertical plane x2 = 0 is asinh(x2 / x3)
        worst = max(worst, float(np.max(np.abs(np.arcsinh(v[:, 1] / v[:, 2]) - t))))
    return worst, "t in {0, 0.5, 1, 2}, 64x64"


def bonnet_metrics():
    hd = fld.catalog("hyperbolic-disk")
    tb = fld.catalog("torus-bump")
    tbd = fld.MetricField(tb.phi, fld.Chart.disk(0, 0.8, 32, 32), "torus-bump-disk", "plane")
    tbd = tbd.scaled(dl.convexity_time(IDENTITY, tbd)[0] + 0.3)
    return [hd, tbd]


def envelope_vs_bonnet():
    z = fld.Chart.disk(0, 0.8, 32, 32).points().ravel()
    paths = np.stack([np.zeros_like(z), z], -1)
    worst = 0.0
    for m in bonnet_metrics():
        for t in (0.0, 0.7):
            r = ep.bonnet_integrate(m, IDENTITY, paths, t, resolution=32)
            ref = ep.epstein_points(m, z, IDENTITY).flowed(t).p
            worst = max(worst, float(np.max(ep.hyperboloid_distance(r, ref))))
    return worst, "hyperbolic disk and torus bump on a disk, 32x32"


def gauss_map_identity():
    worst = 0.0
    for _, S, m in check_metrics():
        z = m.chart.points().ravel()
        j = ep.epstein_points(m, z, S)
        zp, _ = ep.gauss_maps(j)
        ok = j.valid
        if np.any(ok):
            # the forward Gauss map is the developing map of the structure
            f = S.f(z[ok])
            worst = max(worst, float(np.max(np.abs(zp[ok] - f) / np.maximum(1, np.abs(f)))))
    return worst, "all catalog metrics, valid points"


# ---------------------------------------------------------------- univalence


def _boundary_misses(c, mask, predicate_margin, cell):
    """Count cells where the mask differs from the exact region by more than a cell."""
    return int(np.sum((mask != (predicate_margin >= 0)) & (np.abs(predicate_margin) > cell)))


def zc_regions():
    out = []
    details = []
    for h, target in (("hyperbolic", 1.0), ("double-log-sin", 2.0)):
        c, mask = uv.region_scan(h)
        cell = np.hypot(2.2 / 400, 2.2 / 400)
        # distance to |c^2 - t| = t, to first order, is (t - |c^2 - t|) / |2c|
        margin = (target - np.abs(c**2 - target)) / np.abs(2 * c)
        miss = _boundary_misses(c, mask, margin, cell)
        outside = mask & (np.abs(c - 1) > 1 + cell)
        out.append(miss + int(np.sum(outside)))
        details.append(f"{h}: {miss} boundary misses, {int(np.sum(outside))} outside |c-1|<=1")
    return float(sum(out)), "; ".join(details)


def beltrami_bound(c=np.sqrt(1.5)):
    S = sz.ProjectiveStructure(sz.Composite(sz.power_map(c), sz.cayley_map()), "power o cayley")
    m = fld.catalog("hyperbolic-disk")
    z = uv.annulus_points(n=128)
    mu, jac = uv.beltrami_fd(lambda w: uv.qc_extension(S, m, w), z)
    ratio = uv.criterion_ratio(S, m, 1 / np.conj(z))
    excess = float(np.max(np.abs(mu) - ratio))
    return max(excess, 0.0), f"|c^2-1| = {abs(c * c - 1):.3g}, max|mu| = {np.max(np.abs(mu)):.4f}"


# ---------------------------------------------------------------- wvolume


def _torus_data(seed=7):
    rng = _rng(seed)
    return wv.torus_metric(wv.random_trig(rng, 3, 0.3)), wv.random_trig(rng, 3, 0.3), wv.random_trig(rng, 3, 0.3)


def w_cocycle():
    g0, u, v = _torus_data()
    big = u.scaled(1 / wv.sup_norm(u))
    return max(wv.w_cocycle_check(g0, u, v), wv.w_cocycle_check(g0, big, v, 256)), "small and sup-norm-1 u"


def w_scaling():
    g0, u, _ = _torus_data()
    return wv.w_scaling_check(g0, u, 0.3, -0.2), "t = 0.3, s = -0.2"


DW_FLOOR = 1e-12


def w_dw():
    """Central differences in h with the halving test.

    W is exactly quadratic along conformal rays, so the truncation term
    vanishes and the defect sits at round-off.  The check asserts the
    defect is below C h^2 + DW_FLOOR at h and at h/2.
    """
    g0, _, v = _torus_data()
    h = 1e-3
    d1, d2 = wv.dw_conformal_check(g0, v, h), wv.dw_conformal_check(g0, v, h / 2)
    bound = 1e-5 * (h / 1e-3) ** 2
    ok = d1 <= bound + DW_FLOOR and d2 <= bound / 4 + DW_FLOOR
    return (max(d1, d2) if ok else np.inf), f"defects {d1:.1e} (h), {d2:.1e} (h/2)"


def w_wmax():
    flat = wv.torus_metric(n=128)
    _, u, _ = _torus_data()
    ua = wv.area_preserving(u, flat, 256)
    w_c, b_c = wv.wmax_gap(flat, ua, 128)
    w_f, b_f = wv.wmax_gap(flat, ua, 256)
    w = fld.richardson(w_c, w_f)
    b = fld.richardson(b_c, b_f)
    return abs(w - b), f"W = {w:.10f}, bound = {b:.10f} (Richardson 128/256)"


def graft_layer():
    d = wv.GraftingData(-2, 1.0, 0.5, 0.5)
    lower, upper, _ = wv.graft_bounds(d)
    errs = [abs(lower + 0.25), abs(upper - 0.25), abs(wv.newbound_max(1.0, 1.5) - 2.5)]
    mismatches, violations = wv.lattice_check(50)
    exact = lower == -0.25 and upper == 0.25 and wv.newbound_max(1.0, 1.5) == 2.5
    value = max(errs) + mismatches + violations + (0 if exact else 1)
    return value, f"lower={lower}, upper={upper}, lattice mismatches={mismatches}, violations={violations}"


# ---------------------------------------------------------------- registry

ACCEPTANCE = [
    ("1 Osgood-Stowe vanishing", 1e-10, os_vanishing, 1.0),
    ("2 Schwarzian bridge", 1e-9, schwarzian_bridge, None),
    ("3 shape operator eigenvalues", 1e-10, shape_eigenvalues, None),
    ("4 duality Gauss-Codazzi", 1e-7, duality_gc, None),
    ("5 normal flow eigenvalues", 1e-10, flow_law, None),
    ("6 Epstein plane and equidistants", 1e-8, epstein_plane, 5.0),
    ("7 envelope equals Bonnet", 1e-6, envelope_vs_bonnet, None),
    ("8 Gauss map identity", 1e-8, gauss_map_identity, None),
    ("9 z^c univalence regions", 0.0, zc_regions, None),
    ("10 Beltrami bound", 1e-3, beltrami_bound, None),
    ("11a W cocycle", 1e-7, w_cocycle, 10.0),
    ("11b W scaling invariance", 1e-8, w_scaling, 10.0),
    ("11c dW second-order defect", 1e-5, w_dw, 10.0),
    ("11d W maximum equality", 1e-6, w_wmax, 10.0),
    ("12a variational duality, exact", 1e-9, variation_exact, None),
    ("12b variational duality, differences", 1e-5, variation_fd, None),
    ("13 grafting bounds", 0.0, graft_layer, None),
]

SUITES = {
    "tensor2": [
        ("pairing normalization", 1e-15, pairing_normalization, None),
        ("variational duality, exact", 1e-9, variation_exact, None),
        ("variational duality, differences", 1e-5, variation_fd, None),
    ],
    "schwarzian": [
        ("Osgood-Stowe vanishing", 1e-10, os_vanishing, 1.0),
        ("Schwarzian bridge", 1e-9, schwarzian_bridge, None),
        ("Schwarzian cocycle", 1e-9, schwarzian_cocycle, None),
        ("shape operator eigenvalues", 1e-10, shape_eigenvalues, None),
        ("hyperbolic holomorphy", 1e-9, hyperbolic_holomorphy, None),
    ],
    "duality": [
        ("duality Gauss-Codazzi", 1e-7, duality_gc, None),
        ("normal flow eigenvalues", 1e-10, flow_law, None),
    ],
    "epstein": [
        ("Epstein plane and equidistants", 1e-8, epstein_plane, 5.0),
        ("envelope equals Bonnet", 1e-6, envelope_vs_bonnet, None),
        ("Gauss map identity", 1e-8, gauss_map_identity, None),
    ],
    "univalence": [
        ("z^c univalence regions", 0.0, zc_regions, None),
        ("Beltrami bound", 1e-3, beltrami_bound, None),
    ],
    "wvolume": [
        ("W cocycle", 1e-7, w_cocycle, 10.0),
        ("W scaling invariance", 1e-8, w_scaling, 10.0),
        ("dW second-order defect", 1e-5, w_dw, 10.0),
        ("W maximum equality", 1e-6, w_wmax, 10.0),
        ("grafting bounds", 0.0, graft_layer, None),
    ],
}


def run_check(entry):
    name, tol, fn, limit = entry
    try:
        return _timed(name, tol, fn, limit)
    except Exception as exc:  # a crashing check is a failing check
        return CheckResult(name, float("inf"), tol, False, 0.0, f"{type(exc).__name__}: {exc}")


def run_suite(name):
    if name == "acceptance":
        entries = ACCEPTANCE
    elif name == "all":
        entries = [e for s in SUITES.values() for e in s]
    elif name in SUITES:
        entries = SUITES[name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all', 'acceptance']}")
    return [run_check(e) for e in entries]
