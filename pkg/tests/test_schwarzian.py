import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epstein_kit import field as fld
from epstein_kit import schwarzian as sz
from epstein_kit.wvolume import TrigPolynomial

I = sz.ProjectiveStructure.identity()
UHP_POINTS = np.array([0.3 + 0.7j, -0.4 + 1.1j, 0.05 + 0.2j])


def test_os_q_examples():
    e = fld.catalog("euclidean")
    z = np.array([0.2 + 0.1j, -0.3 + 0.5j])
    assert np.allclose(sz.os_q(e, fld.Constant(2.0), z), 0)
    assert np.abs(sz.os_q(e, "log(2/(1 - x**2 - y**2))", z)).max() < 1e-14
    assert np.allclose(sz.os_q(e, "x", z), -0.25)


def test_schwarzian_examples():
    z = UHP_POINTS
    assert np.abs(sz.schwarzian_derivative(sz.moebius_map(2, 1, 1, 3), z)).max() < 1e-14
    c = 1.3 + 0.4j
    expected = (1 - c**2) / (2 * z**2)
    assert np.allclose(sz.schwarzian_derivative(sz.power_map(c), z), expected, rtol=1e-14)


@pytest.mark.parametrize("f", [sz.moebius_map(1, 2, 0.5, 3), sz.power_map(1.7), sz.exp_map(0.8 - 0.4j)])
def test_schwarzian_bridge(f):
    z = UHP_POINTS
    lhs = sz.os_q(fld.catalog("euclidean"), sz.LogAbsDerivative(f), z)
    assert np.allclose(lhs, 0.5 * sz.schwarzian_derivative(f, z), atol=1e-10)


def test_critical_point_rejected():
    with pytest.raises(sz.CriticalPointError):
        sz.schwarzian_derivative(sz.power_map(2), np.array([0j]))


def test_q_sigma_examples():
    hd = fld.catalog("hyperbolic-disk")
    z = np.array([0.2 + 0.3j, -0.6j])
    assert np.abs(sz.q_sigma(I, hd, z)).max() < 1e-14
    tb = fld.catalog("torus-bump")
    w = np.array([0.2 + 0.3j, 0.7 + 0.1j])
    assert np.allclose(sz.q_sigma(I, tb.scaled(0.7), w), sz.q_sigma(I, tb, w))


@pytest.mark.parametrize("profile", ["hyperbolic", "double-log-sin"])
def test_power_cone_formula(profile):
    c = 1.4 + 0.2j
    m = fld.catalog("power-cone", profile=profile)
    z = UHP_POINTS
    theta = np.angle(z)
    _, h1, h2 = fld.angular_profile(profile).derivatives(theta, 2)
    expected = (h1**2 - h2 + c**2) / (4 * z**2)
    assert np.allclose(sz.q_sigma(sz.ProjectiveStructure.power(c), m, z), expected, rtol=1e-12)


def test_shape_operator_examples():
    z = np.array([0.1 + 0.2j, -0.4 + 0.1j])
    assert np.allclose(sz.shape_operator_hat(I, fld.catalog("hyperbolic-disk"), z), np.eye(2))
    assert np.allclose(sz.shape_operator_hat(I, fld.catalog("spherical"), z), -np.eye(2))
    tb = fld.catalog("torus-bump")
    b = sz.shape_operator_hat(I, tb, z)
    assert np.allclose(sz.shape_operator_hat(I, tb.scaled(0.3), z), np.exp(-0.6) * b)


@pytest.mark.parametrize("name", ["torus-bump", "hyperbolic-uhp", "spherical"])
def test_gauss_equation_and_eigenvalues(name):
    m = fld.catalog(name)
    S = sz.ProjectiveStructure.power(1.3) if name == "hyperbolic-uhp" else sz.ProjectiveStructure.exp(0.4)
    z = m.chart.points().ravel()
    b = sz.shape_operator_hat(S, m, z)
    assert np.abs(np.trace(b, axis1=-2, axis2=-1) + 2 * fld.curvature(m, z)).max() < 1e-10
    ev = np.sort(np.linalg.eigvals(b).real, axis=-1)
    assert np.allclose(ev, sz.shape_eigenvalues(S, m, z), atol=1e-10)


def test_norm_q_examples():
    z = np.array([1j])
    assert sz.norm_q(I, fld.catalog("hyperbolic-disk"), np.array([0.3j]))[0] < 1e-14
    c = 1.5
    # Q = (c^2 - 1) / (4 z^2) at z = i with unit density
    assert sz.norm_q(sz.ProjectiveStructure.power(c), fld.catalog("hyperbolic-uhp"), z)[0] == pytest.approx(
        abs(1 - c**2) / 4)
    tb = fld.catalog("torus-bump")
    w = np.array([0.3 + 0.4j])
    assert sz.norm_q(I, tb.scaled(0.5), w) == pytest.approx(np.exp(-1) * sz.norm_q(I, tb, w))


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_os_cocycle(a, b, x, y):
    g0 = fld.catalog("torus-bump")
    u01 = TrigPolynomial([(a, 1, 1, 0.2)])
    u12 = TrigPolynomial([(b, 0, 2, -0.7), (0.5 * a, 2, 1, 0.0)])
    g1 = fld.conformal_change(g0, u01)
    z = np.array([complex(x, y)])
    lhs = sz.os_q(g0, u01, z) + sz.os_q(g1, u12, z)
    assert np.allclose(lhs, sz.os_q(g0, u01 + u12, z), atol=1e-9)


def test_holomorphy_for_constant_curvature():
    for name in ("hyperbolic-disk", "hyperbolic-uhp", "spherical"):
        m = fld.catalog(name)
        z = m.chart.points().ravel()
        assert np.abs(sz.q_sigma_zbar(I, m, z)).max() < 1e-6
    tb = fld.catalog("torus-bump")
    assert np.abs(sz.q_sigma_zbar(I, tb, tb.chart.points())).max() > 1e-2


def test_codazzi_residuals():
    hd = fld.catalog("hyperbolic-disk")
    z = np.array([0.1 + 0.2j, -0.5 + 0.3j])
    k_hd = sz.curvature_field(hd)
    assert np.abs(sz.codazzi_residual(sz.QuadDiffField.from_structure(I, hd, 2.0), k_hd, hd, z)).max() < 1e-12
    holo = sz.QuadDiffField(lambda w: w**2 + 1)
    assert np.abs(sz.codazzi_residual(holo, fld.Constant(1.5), hd, z)).max() < 1e-10

    tb = fld.catalog("torus-bump")
    w = np.array([0.2 + 0.3j, 0.65 + 0.8j])
    k_tb = sz.curvature_field(tb)
    # the second fundamental form splits as 2Q dz^2 + conj - K g
    assert np.abs(sz.codazzi_residual(sz.QuadDiffField.from_structure(I, tb, 2.0), k_tb, tb, w)).max() < 1e-10
    assert np.abs(sz.codazzi_residual(sz.QuadDiffField.from_structure(I, tb), k_tb, tb, w)).min() > 1e-2
    # finite-difference holomorphy defect of 2Q against -K_z e^{2 phi} / 2
    fd = sz.fd_zbar(lambda v: 2 * sz.q_sigma(I, tb, v), w, 1e-3)
    expected = -0.5 * fld.curvature_z(tb, w) * tb.density(w)
    assert np.abs(fd - expected).max() < 1e-5


def test_quad_diff_csv(tmp_path):
    hd = fld.catalog("hyperbolic-disk")
    q = sz.QuadDiffField.from_structure(sz.ProjectiveStructure.exp(1.0), hd)
    q.to_csv(tmp_path / "q.csv", hd, np.array([0.1j, 0.2]))
    lines = (tmp_path / "q.csv").read_text().splitlines()
    assert lines[1] == "x,y,re_q,im_q,norm_q" and len(lines) == 4


def test_phi_l2_norm():
    hd = fld.catalog("hyperbolic-disk")
    assert sz.phi_l2_norm_sq(I, hd) < 1e-25
    S = sz.ProjectiveStructure.exp(0.5)
    small = fld.Chart.disk(0, 0.5, 32, 32)
    # Sf = -k^2/2 for exp(k z), so |Q| = k^2/4; integrand |Q|^2 e^{-2 phi} dx dy
    r = np.linspace(0, 0.5, 2001)
    exact = np.trapezoid(2 * np.pi * r * 0.0625**2 * ((1 - r**2) / 2) ** 2, r)
    assert sz.phi_l2_norm_sq(S, hd, small) == pytest.approx(exact, rel=1e-3)
