import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epstein_kit import field as fld
from epstein_kit import schwarzian as sz
from epstein_kit import univalence as uv

I = sz.ProjectiveStructure.identity()


def test_identity_on_disk_is_qc_zero():
    r = uv.classify(I, fld.catalog("hyperbolic-disk"))
    assert r.classification == "qc-extension"
    assert r.k < 1e-12
    assert "qc-extension" in str(r)


@pytest.mark.parametrize(
    "c2, expected",
    [
        (2.0, "univalent-with-continuous-extension"),
        (1.9, "qc-extension"),
        (2.1, "no-conclusion"),
    ],
)
def test_power_on_uhp_thresholds(c2, expected):
    S = sz.ProjectiveStructure.power(np.sqrt(c2))
    r = uv.classify(S, fld.catalog("hyperbolic-uhp"))
    assert r.classification == expected
    # 4||Q|| / (-K) = |c^2 - 1| everywhere on the half plane
    assert r.sup_ratio == pytest.approx(abs(c2 - 1), rel=1e-9)
    if expected == "qc-extension":
        assert r.k == pytest.approx(0.9)


def test_ratio_is_scale_invariant():
    S = sz.ProjectiveStructure.power(1.3)
    m = fld.catalog("hyperbolic-uhp")
    z = m.chart.with_resolution(7, 7).points().ravel()
    base = uv.criterion_ratio(S, m, z)
    for s in (0.5, 2.0):
        assert np.allclose(uv.criterion_ratio(S, m.scaled(s), z), base, rtol=1e-12)


def test_classify_errors():
    with pytest.raises(uv.CriterionUnavailableError):
        uv.classify(I, fld.catalog("spherical"))
    e = fld.catalog("euclidean")
    flat_complete = fld.MetricField(e.phi, e.chart, "flat", "plane", True, 0.0)
    with pytest.raises(uv.CriterionUnavailableError):
        uv.classify(I, flat_complete, require_qc=True)
    # the strict inequality fails where both sides vanish
    r = uv.classify(I, flat_complete)
    assert r.classification == "univalent-with-continuous-extension"


def test_zc_pointwise_examples():
    theta = uv.theta_grid()
    assert uv.zc_pointwise(np.sqrt(2), "hyperbolic", theta)
    assert uv.zc_pointwise(2.0, "double-log-sin", theta)
    assert not uv.zc_pointwise(2.01, "double-log-sin", theta)
    # h'^2 - h'' = -1 identically for the hyperbolic profile
    s = uv.zc_slack(1.0, "hyperbolic", theta)
    _, h1, h2 = fld.angular_profile("hyperbolic").derivatives(theta, 2)
    assert np.allclose(s, h2 - 0.0)
    assert np.allclose(h1**2 - h2, -1)


def test_theta_grid():
    t = uv.theta_grid()
    assert t.size >= 512 and t.min() > 0 and t.max() < np.pi
    assert np.pi / 2 in t


@pytest.mark.parametrize("profile, target", [("hyperbolic", 1.0), ("double-log-sin", 2.0)])
def test_region_scan_matches_closed_form(profile, target):
    c, mask = uv.region_scan(profile, n_re=120, n_im=120)
    exact = np.abs(c**2 - target) <= target
    cell = np.hypot(2.2 / 120, 2.2 / 120)
    margin = (target - np.abs(c**2 - target)) / np.abs(2 * c)
    assert not np.any((mask != exact) & (np.abs(margin) > cell))
    # both criteria imply actual univalence of z^c
    assert np.all(uv.zc_univalent(c[mask]))


def test_zc_univalent():
    assert uv.zc_univalent(1.0) and uv.zc_univalent(2.0) and uv.zc_univalent(1 + 1j)
    assert not uv.zc_univalent(2.01) and not uv.zc_univalent(1 + 1.01j)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 2.2), st.floats(-1.1, 1.1))
def test_zc_univalent_is_disk(x, y):
    c = complex(x, y)
    if abs(abs(c - 1) - 1) > 1e-6:
        assert bool(uv.zc_univalent(c)) == (abs(c - 1) <= 1)


def test_region_files(tmp_path):
    c, mask = uv.region_scan("hyperbolic", n_re=40, n_im=40)
    uv.write_region_csv(tmp_path / "r.csv", c, mask)
    rows = [l for l in (tmp_path / "r.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "re_c,im_c,satisfied"
    assert len(rows) == 1 + 1600
    assert {r.rsplit(",", 1)[1] for r in rows[1:]} == {"0", "1"}
    uv.write_region_svg(tmp_path / "r.svg", c, mask)
    svg = (tmp_path / "r.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg
    outline = uv.region_outline(c, mask)
    pts = np.concatenate(outline)
    w = pts[:, 0] + 1j * pts[:, 1]
    assert np.max(np.abs(np.abs(w**2 - 1) - 1)) < 0.2


def test_qc_extension_identity_and_moebius():
    hd = fld.catalog("hyperbolic-disk")
    z = uv.annulus_points(1.1, 2.5, 8).ravel()
    assert np.allclose(uv.qc_extension(I, hd, z), z)
    S = sz.ProjectiveStructure.moebius(1, 0.3j, 0.2, 1)
    assert np.allclose(uv.qc_extension(S, hd, z), S.f(z), atol=1e-8)
    with pytest.raises(ValueError):
        uv.qc_extension(I, hd, np.array([0.5]))


def test_extension_is_continuous_across_circle():
    hd = fld.catalog("hyperbolic-disk")
    S = sz.ProjectiveStructure.exp(0.5)
    theta = np.linspace(0, 2 * np.pi, 9)
    inner = uv.extended_map(S, hd, (1 - 1e-4) * np.exp(1j * theta))
    outer = uv.extended_map(S, hd, (1 + 1e-4) * np.exp(1j * theta))
    assert np.max(np.abs(inner - outer)) < 1e-3


def test_beltrami_bound():
    hd = fld.catalog("hyperbolic-disk")
    S = sz.ProjectiveStructure.exp(0.8)
    z = uv.annulus_points(1.05, 3.0, 24).ravel()
    mu, jac = uv.beltrami_fd(lambda w: uv.qc_extension(S, hd, w), z)
    bound = uv.criterion_ratio(S, hd, 1 / np.conj(z))
    assert np.all(jac > 0)
    assert np.all(np.abs(mu) <= bound + 1e-3)
    assert np.max(np.abs(mu)) > 0.01


def test_beltrami_of_holomorphic_map():
    mu, jac = uv.beltrami_fd(lambda w: w**2, np.array([1 + 1j, 2.0]))
    assert np.allclose(mu, 0, atol=1e-8)
    assert np.allclose(jac, np.abs(2 * np.array([1 + 1j, 2.0])) ** 2)


def test_reflection_identity():
    hd = fld.catalog("hyperbolic-disk")
    H = uv.Reflection(I, hd, nr=24, ntheta=48)
    w = np.array([0.3 + 0.2j, 1.7j, -2.0])
    assert np.allclose(H(w), 1 / np.conj(w), atol=1e-8)
    circle = np.exp(1j * np.array([0.3, 2.0]))
    assert np.allclose(H(circle), circle, atol=1e-8)


def test_reflection_is_involution():
    hd = fld.catalog("hyperbolic-disk")
    S = sz.ProjectiveStructure.exp(0.5)
    H = uv.Reflection(S, hd, nr=32, ntheta=64)
    w = S.f(np.array([0.3 + 0.2j, -0.5j]))
    assert np.allclose(H(H(w)), w, atol=1e-7)
    edge = S.f(np.exp(1j * np.array([0.5, 3.0])))
    # the inversion lands on either side of the circle, within the boundary collar
    assert np.allclose(H(edge), edge, atol=2 * uv.BOUNDARY_COLLAR * np.max(np.abs(edge)))
    with pytest.raises(uv.InversionError):
        H(np.array([1e6 + 0j]))
