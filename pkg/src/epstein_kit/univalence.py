"""Univalence and quasiconformal-extension criteria.

The pointwise quantity is the ratio ``4 ||Q(Sigma, m)|| / (-K(m))``.  On a
complete metric of a disk or half plane:

* ratio <= 1 everywhere: the developing map is univalent and extends
  continuously to the boundary;
* ratio < 1 everywhere: the extension is a homeomorphism;
* ratio <= k < 1 with K < 0: a k-quasiconformal extension exists, given by
  ``f_ext(z) = h(1/conj(z))`` where ``h`` is the backward Gauss map of the
  Epstein surface.

Nothing here certifies injectivity on its own; the functions report
whether the criteria hold on a grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import epstein as ep
from . import field as fld
from . import schwarzian as sz
from .io import atomic_write_text, write_csv

SLACK = 1e-9
# Just outside the unit circle the reflected point 1/conj(z) is so close to
# the ideal boundary that the envelope solve loses rank; there the extension
# is replaced by its boundary value f(z/|z|).
BOUNDARY_COLLAR = 1e-4
THETA_POINTS = 513


class CriterionUnavailableError(ValueError):
    """The requested criterion needs K < 0 (or a complete metric)."""


class InversionError(ValueError):
    """Numerical inversion of the extended map failed."""


@dataclass(frozen=True)
class CriterionReport:
    sup_ratio: float
    classification: str
    k: float | None
    witness: complex

    def __str__(self):
        tail = f"(k={self.k:.6g})" if self.k is not None else ""
        return f"{self.classification}{tail} sup_ratio={self.sup_ratio:.6g} at z={self.witness}"


def criterion_ratio(S, m, z):
    """4 ||Q|| / (-K); infinite where K >= 0 and Q != 0, zero where both vanish."""
    k = fld.curvature(m, z)
    n4 = 4 * sz.norm_q(S, m, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(k < 0, n4 / -k, np.where(n4 > 0, np.inf, 0.0))
    return r


def classify(S, m, chart=None, require_qc=False):
    """Classify a structure against the univalence criteria on a grid."""
    if not m.complete:
        raise CriterionUnavailableError(f"{m.name} is not flagged complete")
    z = (chart or m.chart).points().ravel()
    k = fld.curvature(m, z)
    if require_qc and np.any(k >= 0):
        raise CriterionUnavailableError("K >= 0 on the grid; quasiconformal case unavailable")
    ratio = criterion_ratio(S, m, z)
    i = int(np.argmax(ratio))
    sup = float(ratio[i])
    n4 = 4 * sz.norm_q(S, m, z)
    weak = bool(np.all(n4 <= -k + SLACK))
    strict = bool(np.all(n4 < -k)) and sup < 1
    if strict and np.all(k < 0):
        return CriterionReport(sup, "qc-extension", sup, complex(z[i]))
    if strict:
        return CriterionReport(sup, "homeomorphic-extension", None, complex(z[i]))
    if weak:
        return CriterionReport(sup, "univalent-with-continuous-extension", None, complex(z[i]))
    return CriterionReport(sup, "no-conclusion", None, complex(z[i]))


# ---------------------------------------------------------------- z^c example


def zc_slack(c, h, theta):
    """h''(theta) - |h'(theta)^2 + c^2 - h''(theta)|; criterion holds where >= 0."""
    prof = fld.angular_profile(h)
    _, h1, h2 = prof.derivatives(theta, 2)
    return h2 - np.abs(h1**2 + np.asarray(c) ** 2 - h2)


def zc_pointwise(c, h, theta):
    return bool(np.all(zc_slack(c, h, theta) >= -SLACK))


def theta_grid(n=THETA_POINTS):
    """Midpoint grid on (0, pi); odd ``n`` puts a node at pi/2."""
    return np.pi * (np.arange(n) + 0.5) / n


def region_scan(h, re_range=(0.0, 2.2), im_range=(-1.1, 1.1), n_re=400, n_im=400, n_theta=THETA_POINTS):
    """Mask of c values for which the criterion holds at every grid angle.

    Returns ``(c_grid, mask)`` with shape ``(n_im, n_re)``.  Cell centers
    are used so that ``Re c = 0`` is never sampled.
    """
    re = re_range[0] + (re_range[1] - re_range[0]) * (np.arange(n_re) + 0.5) / n_re
    im = im_range[0] + (im_range[1] - im_range[0]) * (np.arange(n_im) + 0.5) / n_im
    c = re[None, :] + 1j * im[:, None]
    prof = fld.angular_profile(h)
    theta = theta_grid(n_theta)
    _, h1, h2 = prof.derivatives(theta, 2)
    base = h1**2 - h2
    mask = np.ones(c.shape, bool)
    c2 = c**2
    for k in range(theta.size):
        mask &= h2[k] - np.abs(base[k] + c2) >= -SLACK
    return c, mask


def zc_univalent(c):
    """Exact univalence test for z^c on the upper half plane.

    ``log`` maps the half plane onto the strip 0 < Im w < pi; ``exp(c w)``
    is injective there iff the rotated strip contains no pair of points
    differing by 2 pi i, which works out to ``2 Re c >= |c|^2``
    (equivalently ``|c - 1| <= 1``).
    """
    c = np.asarray(c, dtype=complex)
    return 2 * c.real >= np.abs(c) ** 2 - SLACK


def write_region_csv(path, c, mask):
    rows = zip(c.real.ravel(), c.imag.ravel(), mask.ravel().astype(int))
    write_csv(path, ["re_c", "im_c", "satisfied"], rows)


def region_outline(c, mask):
    """Boundary polylines of the mask in c coordinates."""
    from skimage import measure

    if not mask.any() or mask.all():
        return []
    padded = np.pad(mask.astype(float), 1)
    re = c[0, :].real
    im = c[:, 0].imag
    dre, dim = re[1] - re[0], im[1] - im[0]
    out = []
    for line in measure.find_contours(padded, 0.5):
        rows, cols = line[:, 0] - 1, line[:, 1] - 1
        out.append(np.column_stack([re[0] + cols * dre, im[0] + rows * dim]))
    return out


def write_region_svg(path, c, mask, size=400):
    """Plain SVG with one polyline per boundary component (y axis up)."""
    re = c[0, :].real
    im = c[:, 0].imag
    x0, x1, y0, y1 = re[0], re[-1], im[0], im[-1]
    sx = size / (x1 - x0)
    sy = size / (y1 - y0)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    for line in region_outline(c, mask):
        pts = " ".join(f"{(x - x0) * sx:.3f},{(y1 - y) * sy:.3f}" for x, y in line)
        parts.append(f'<polyline fill="none" stroke="black" stroke-width="1" points="{pts}"/>')
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")


# ---------------------------------------------------------------- extension


def qc_extension(S, m, z):
    """f_ext(z) = z_minus(1/conj(z)) for |z| > 1."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) <= 1):
        raise ValueError("qc_extension is defined outside the closed unit disk")
    w = 1 / np.conj(z)
    jets = ep.epstein_points(m, w, S)
    if not np.all(jets.valid):
        raise ep.EnvelopeDegenerateError("envelope failed at some reflected points")
    return ep.gauss_maps(jets)[1]


def extended_map(S, m, z):
    """f on the closed disk, f_ext outside."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, complex)
    r = np.abs(z)
    inside = r <= 1
    collar = ~inside & (r <= 1 + BOUNDARY_COLLAR)
    outside = r > 1 + BOUNDARY_COLLAR
    if np.any(inside):
        out[inside] = S.f(z[inside])
    if np.any(collar):
        out[collar] = S.f(z[collar] / r[collar])
    if np.any(outside):
        out[outside] = qc_extension(S, m, z[outside])
    return out


def beltrami_fd(fn, z, h=1e-5):
    """Beltrami coefficient f_zbar / f_z by central differences."""
    z = np.asarray(z, dtype=complex)
    fx = (fn(z + h) - fn(z - h)) / (2 * h)
    fy = (fn(z + 1j * h) - fn(z - 1j * h)) / (2 * h)
    fz = 0.5 * (fx - 1j * fy)
    fzb = 0.5 * (fx + 1j * fy)
    return fzb / fz, np.abs(fz) ** 2 - np.abs(fzb) ** 2


def annulus_points(r0=1.05, r1=3.0, n=128):
    r = np.linspace(r0, r1, n)
    theta = 2 * np.pi * np.arange(n) / n
    return r[:, None] * np.exp(1j * theta[None, :])


class Reflection:
    """The quasiconformal reflection H = F o C o F^{-1}, C(z) = 1/conj(z).

    ``F`` is :func:`extended_map`.  Inversion is by nearest-node search on a
    polar grid followed by a local root solve.
    """

    def __init__(self, S, m, r_max=4.0, nr=96, ntheta=192, tol=1e-10):
        self.S, self.m, self.tol = S, m, tol
        r = np.concatenate([np.linspace(0.02, 0.98, nr // 2), np.linspace(1.02, r_max, nr // 2)])
        theta = 2 * np.pi * np.arange(ntheta) / ntheta
        self.nodes = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
        self.values = extended_map(S, m, self.nodes)

    def forward(self, z):
        return extended_map(self.S, self.m, z)

    def inverse(self, w):
        w = complex(w)
        start = self.nodes[int(np.argmin(np.abs(self.values - w)))]

        def resid(v):
            z = complex(v[0], v[1])
            d = complex(self.forward(np.array([z]))[0]) - w
            return [d.real, d.imag]

        try:
            sol = optimize.root(resid, [start.real, start.imag], tol=1e-13)
            z = complex(sol.x[0], sol.x[1])
            miss = abs(complex(self.forward(np.array([z]))[0]) - w)
        except (ep.EnvelopeDegenerateError, ep.NoSurfaceError, ValueError) as exc:
            raise InversionError(f"could not invert the extended map at {w}: {exc}") from exc
        if miss > 1e-8 * max(1.0, abs(w)):
            raise InversionError(f"could not invert the extended map at {w}")
        return z

    def __call__(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        out = np.empty(w.shape, complex)
        for i, wi in enumerate(w.ravel()):
            z = self.inverse(wi)
            out.ravel()[i] = self.forward(np.array([1 / np.conj(z)]))[0]
        return out


def qc_reflection(S, m, z, **kwargs):
    return Reflection(S, m, **kwargs)(z)
