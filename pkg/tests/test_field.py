import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epstein_kit import field as fld
from epstein_kit.wvolume import TrigPolynomial


def test_catalog_curvatures():
    assert fld.curvature(fld.catalog("euclidean"), np.array([0.2 + 0.4j]))[0] == 0
    assert fld.curvature(fld.catalog("hyperbolic-disk"), 0.3 + 0.1j) == pytest.approx(-1, abs=1e-14)
    assert fld.curvature(fld.catalog("hyperbolic-uhp"), 0.3 + 0.7j) == pytest.approx(-1, abs=1e-14)
    assert fld.curvature(fld.catalog("spherical"), 0.5 + 0j) == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("name", ["hyperbolic-disk", "hyperbolic-uhp", "spherical", "torus-bump"])
def test_curvature_on_grid(name):
    m = fld.catalog(name)
    z = m.chart.points()
    k = fld.curvature(m, z)
    if m.constant_curvature is not None:
        assert np.abs(k - m.constant_curvature).max() < 1e-10
    assert np.all(np.isfinite(k))


def test_jet_reality():
    j = fld.catalog("torus-bump").jet(np.array([0.3 + 0.6j]), 3)
    assert np.isrealobj(j.zzbar)
    assert j.zbar == pytest.approx(np.conj(j.z))
    assert j.zzz is not None and j.zzzbar is not None


def test_outside_domain_rejected():
    with pytest.raises(fld.OutsideChartError):
        fld.catalog("hyperbolic-disk").jet(1.2 + 0j)
    with pytest.raises(fld.OutsideChartError):
        fld.catalog("hyperbolic-uhp").density(np.array([0.5 - 0.1j]))


def test_laplacian_and_gradient():
    e = fld.catalog("euclidean")
    z = np.array([0.1 + 0.2j, -0.4 + 0.3j])
    assert np.allclose(fld.laplacian(e, fld.Constant(3.0), z), 0)
    assert np.allclose(fld.gradient_norm_sq(e, fld.Constant(3.0), z), 0)
    assert np.allclose(fld.laplacian(e, "x**2 + y**2", z), 4)
    assert np.allclose(fld.gradient_norm_sq(e, "x**2 + y**2", z), 4 * np.abs(z) ** 2)


def test_green_identity_on_torus():
    m = fld.catalog("torus-bump").scaled(0.0)
    flat = fld.MetricField(fld.Constant(0.0), fld.Chart.torus(64), "flat-torus")
    for metric in (flat, m):
        u = fld.as_field("sin(2*pi*x)")
        a = fld.quadrature(metric, lambda z: u(z) * fld.laplacian(metric, u, z))
        b = fld.quadrature(metric, lambda z: fld.gradient_norm_sq(metric, u, z))
        assert a + b == pytest.approx(0, abs=1e-12)


def test_quadrature_examples():
    e = fld.MetricField(fld.Constant(0.0), fld.Chart.rectangle(0, 1, 0, 1, 11, 11))
    assert fld.quadrature(e) == pytest.approx(1, abs=1e-15)
    tb = fld.catalog("torus-bump")
    assert abs(fld.quadrature(tb, lambda z: fld.curvature(tb, z))) < 1e-6


def test_spherical_area_extrapolates_to_4pi():
    m = fld.catalog("spherical")
    vals = [fld.quadrature(m, 1.0, fld.Chart.disk(0, r, nr=100 * r, ntheta=16)) for r in (20, 40)]
    # the tail outside radius R is 4 pi / (1 + R^2), i.e. O(R^-2)
    area = fld.richardson(vals[0], vals[1], order=2)
    assert area == pytest.approx(4 * np.pi, abs=1e-3)


def test_quadrature_reports_nan_location():
    e = fld.catalog("euclidean")
    with pytest.raises(fld.QuadratureError, match="grid index"):
        fld.quadrature(e, lambda z: np.where(np.abs(z) < 0.1, np.nan, 1.0))


def test_quadrature_invariant_under_transposition():
    m = fld.MetricField(fld.as_field("0.3*sin(x)*cos(2*y) + 0.1*x"), fld.Chart.rectangle(-1, 1, 0, 2, 41, 33))
    m_t = fld.MetricField(fld.as_field("0.3*sin(y)*cos(2*x) + 0.1*y"), m.chart.transposed())
    assert fld.quadrature(m) == pytest.approx(fld.quadrature(m_t), abs=1e-12)


def test_conformal_change_examples():
    e = fld.catalog("euclidean")
    z = np.array([0.1 + 0.2j, -0.5 + 0.1j])
    assert fld.conformal_change(e, 0.0).phi(z) == pytest.approx(e.phi(z))
    hyp = fld.conformal_change(e, "log(2/(1 - x**2 - y**2))")
    assert np.allclose(fld.curvature(hyp, z), -1)
    sph = fld.catalog("spherical")
    assert np.allclose(fld.curvature(sph.scaled(0.4), z), np.exp(-0.8))


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.integers(1, 3))
def test_curvature_transformation_law(a, b, k):
    m = fld.catalog("torus-bump")
    u = TrigPolynomial([(a, k, 0, 0.0), (b, 1, k, -np.pi / 2)])
    z = m.chart.with_resolution(7, 7).points()
    lhs = fld.curvature(fld.conformal_change(m, u), z)
    rhs = np.exp(-2 * u(z)) * (fld.curvature(m, z) - fld.laplacian(m, u, z))
    assert np.abs(lhs - rhs).max() < 1e-9


def test_grid_jets_match_analytic():
    expr = "0.2*cos(2*pi*x) + 0.1*sin(2*pi*(x + 2*y))"
    exact = fld.as_field(expr)
    grid = fld.GridField.sample(exact, (0, 1, 0, 1), 128, 128, periodic=True)
    z = np.array([0.31 + 0.47j, 0.77 + 0.05j])
    pe, pg = exact.partials(z, 2), grid.partials(z, 2)
    for key in pe:
        assert np.abs(pe[key] - pg[key]).max() < 1e-6 * (1 + np.abs(pe[key]).max()) * 10 ** key[0] * 10 ** key[1]
    m_e = fld.MetricField(exact, fld.Chart.torus(16))
    m_g = fld.MetricField(grid, fld.Chart.torus(16))
    k_e = fld.curvature(m_e, z)
    assert np.abs(k_e - fld.curvature(m_g, z)).max() < 1e-5 * np.abs(k_e).max()


def test_grid_field_on_rectangle_interior():
    exact = fld.catalog("hyperbolic-uhp").phi
    grid = fld.GridField.sample(exact, (-1, 1, 0.5, 2.0), 161, 121)
    z = np.array([0.1 + 1.0j, -0.3 + 1.4j])
    assert np.allclose(grid.partials(z, 2)[(0, 2)], exact.partials(z, 2)[(0, 2)], rtol=1e-6)


def test_missing_jet():
    from epstein_kit.schwarzian import LogAbsDerivative, identity_map

    with pytest.raises(fld.MissingJetError):
        fld.jet(LogAbsDerivative(identity_map()), 0.5j, 3)


def test_grid_csv_round_trip(tmp_path):
    vals = np.arange(12, dtype=float).reshape(3, 4) / 7
    fld.write_grid_csv(tmp_path / "phi.csv", vals, (0, 1, 0, 1), periodic=True)
    g = fld.read_grid_csv(tmp_path / "phi.csv")
    assert np.array_equal(g.values, vals) and g.periodic


def test_metric_config(tmp_path):
    path = tmp_path / "m.toml"
    path.write_text('[metric]\nname = "hyperbolic-uhp"\nscale = 0.5\n')
    m = fld.metric_from_config(fld.read_config(path)["metric"])
    assert fld.curvature(m, 0.2 + 1j) == pytest.approx(-np.exp(-1))
    with pytest.raises(fld.ConfigError):
        fld.metric_from_config({"name": "euclidean", "colour": "red"})
    with pytest.raises(fld.ConfigError):
        fld.metric_from_config({"profile": "hyperbolic"})
