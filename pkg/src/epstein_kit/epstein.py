"""Epstein surfaces in the hyperboloid model of hyperbolic 3-space.

Points of R^{3,1} are arrays with last axis of length 4 and the form
``<x, y> = x1 y1 + x2 y2 + x3 y3 - x4 y4``.  A conformal metric on a chart
together with a developing map ``f`` gives a family of horospheres; the
Epstein surface is their envelope.

The same surface is also produced by integrating the Bonnet flat
connection of the dual pair (g, B); :func:`bonnet_integrate` does this
with a fixed-step RK4 scheme and serves as an independent check on the
envelope solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import duality as dl
from . import field as fld
from . import schwarzian as sz
from .io import atomic_write_text, write_csv

log = logging.getLogger(__name__)

ETA = np.array([1.0, 1.0, 1.0, -1.0])
BASEPOINT = np.array([0.0, 0.0, 0.0, 1.0])


class EnvelopeDegenerateError(ValueError):
    """The envelope system is degenerate (the surface collapses)."""


class NoSurfaceError(ValueError):
    """The envelope line misses the future sheet of the hyperboloid."""


class BonnetError(ValueError):
    """Parallel transport failed: non-finite state or violated precondition."""


class NotOnHyperboloidError(ValueError):
    """A model map received a point off the hyperboloid."""


def mdot(a, b):
    """Minkowski inner product along the last axis."""
    return np.sum(np.asarray(a) * ETA * np.asarray(b), axis=-1)


# ---------------------------------------------------------------- null lift


def _sphere_lift(w):
    """N(w) = (2 Re w, 2 Im w, |w|^2 - 1, |w|^2 + 1); null, x4 = 1 + |w|^2."""
    r2 = np.abs(w) ** 2
    return np.stack([2 * w.real, 2 * w.imag, r2 - 1, r2 + 1], axis=-1)


def _sphere_lift_d(w, dw):
    """Derivative of N along the tangent vector ``dw``."""
    d2 = 2 * (np.conj(w) * dw).real
    return np.stack([2 * dw.real, 2 * dw.imag, d2, d2], axis=-1)


def null_lift(m, z, S=None):
    """The null lift xi(z) and its partials xi_x, xi_y.

    ``xi = e^{phi} |f'|^{-1} (1 + |f|^2)/2 * nu(f)`` where ``nu`` is the
    light-cone point over ``f(z)`` with fourth coordinate 1; with the
    identity structure this is ``lambda(z) nu(z)``,
    ``lambda = e^{phi}(1 + |z|^2)/2``.
    """
    S = S or sz.ProjectiveStructure.identity()
    z = np.asarray(z, dtype=complex)
    j = m.jet(z, 1)
    w, f1, f2, _ = S.jets(z)
    r = f2 / f1
    rho = j.value - np.log(np.abs(f1))
    rho_x = j.x - r.real
    rho_y = j.y + r.imag
    scale = 0.5 * np.exp(rho)[..., None]
    N = _sphere_lift(w)
    xi = scale * N
    xi_x = scale * (rho_x[..., None] * N + _sphere_lift_d(w, f1))
    xi_y = scale * (rho_y[..., None] * N + _sphere_lift_d(w, 1j * f1))
    return xi, xi_x, xi_y


# ---------------------------------------------------------------- envelope


@dataclass(frozen=True)
class EpsteinJet:
    """Surface data at chart points; arrays are batched over ``z``."""

    z: np.ndarray
    p: np.ndarray
    n: np.ndarray
    g: np.ndarray
    B: np.ndarray
    xi: np.ndarray
    valid: np.ndarray

    def flowed(self, t):
        """Geodesic flow by ``t`` along the normal (cosh t p + sinh t n)."""
        c, s = np.cosh(t), np.sinh(t)
        p = c * self.p + s * self.n
        n = s * self.p + c * self.n
        return EpsteinJet(self.z, p, n, self.g, self.B, self.xi, self.valid)


def _envelope_point(xi, xi_x, xi_y, rtol=1e-10):
    """Solve <p,xi> = -1, <p,xi_x> = <p,xi_y> = 0, <p,p> = -1, x4 > 0.

    Returns ``(p, status)`` with status 0 = ok, 1 = degenerate, 2 = no root.
    """
    M = np.stack([xi, xi_x, xi_y], axis=-2) * ETA
    b = np.zeros(M.shape[:-2] + (3,))
    b[..., 0] = -1.0
    u, sv, vt = np.linalg.svd(M)
    degenerate = sv[..., 2] <= rtol * sv[..., 0]
    sv_safe = np.where(degenerate[..., None], 1.0, sv)
    p0 = np.einsum("...ji,...j->...i", vt[..., :3, :], np.einsum("...ji,...j->...i", u, b) / sv_safe)
    d = vt[..., 3, :]
    # <p0 + s d, p0 + s d> = -1  ->  a s^2 + 2 bq s + c = 0
    a = mdot(d, d)
    bq = mdot(p0, d)
    c = mdot(p0, p0) + 1
    linear = np.abs(a) <= 1e-9 * np.maximum(np.abs(bq), 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_lin = -c / (2 * bq)
        disc = bq**2 - a * c
        sq = np.sqrt(np.maximum(disc, 0))
        r1 = (-bq + sq) / a
        r2 = (-bq - sq) / a
        # two genuine roots: prefer the one nearest the linearized root, keeping x4 > 0
        p_r1 = p0 + r1[..., None] * d
        p_r2 = p0 + r2[..., None] * d
    ok1 = p_r1[..., 3] > 0
    ok2 = p_r2[..., 3] > 0
    pick1 = ok1 & (~ok2 | (np.abs(r1 - s_lin) <= np.abs(r2 - s_lin)))
    s_quad = np.where(pick1, r1, r2)
    quad = ~linear
    if np.any(quad & ok1 & ok2 & (disc > 0)):
        log.info("envelope: two admissible roots at %d points", int(np.sum(quad & ok1 & ok2 & (disc > 0))))
    s = np.where(linear, s_lin, s_quad)
    p = p0 + s[..., None] * d
    status = np.zeros(p.shape[:-1], dtype=int)
    bad = ~np.all(np.isfinite(p), axis=-1) | (p[..., 3] <= 0) | (quad & (disc < 0))
    status[bad] = 2
    status[degenerate] = 1
    return p, status


def epstein_points(m, z, S=None):
    """Envelope solve at many points; failures are flagged in ``valid``."""
    S = S or sz.ProjectiveStructure.identity()
    z = np.asarray(z, dtype=complex)
    xi, xi_x, xi_y = null_lift(m, z, S)
    p, status = _envelope_point(xi, xi_x, xi_y)
    hat = dl.projective_pair(S, m, z)
    ev = np.linalg.eigvalsh(0.5 * (hat.B + np.swapaxes(hat.B, -1, -2)))
    dual_ok = np.all(np.abs(ev + 1) > dl.EIGEN_TOL, axis=-1)
    valid = (status == 0) & dual_ok
    g = np.full(z.shape + (2, 2), np.nan)
    B = np.full(z.shape + (2, 2), np.nan)
    if np.any(valid):
        pair = dl.to_dual(dl.FundamentalPair(hat.g[valid], hat.B[valid]))
        g[valid], B[valid] = pair.g, pair.B
    p = np.where(valid[..., None], p, np.nan)
    n = xi - p
    return EpsteinJet(z, p, n, g, B, xi, valid)


def epstein_point(m, z, S=None):
    """Envelope solve at a single point; raises on failure."""
    S = S or sz.ProjectiveStructure.identity()
    z = np.asarray(z, dtype=complex)
    xi, xi_x, xi_y = null_lift(m, z, S)
    p, status = _envelope_point(xi, xi_x, xi_y)
    if np.any(status == 1):
        raise EnvelopeDegenerateError(f"lift derivatives are dependent at z = {z}")
    if np.any(status == 2):
        raise NoSurfaceError(f"no future hyperboloid point on the envelope line at z = {z}")
    try:
        pair = dl.dual_pair(S, m, z)
    except dl.DegenerateDualError as exc:
        raise EnvelopeDegenerateError(
            f"surface collapses at z = {z}: projective shape operator has eigenvalue {exc.eigenvalue}"
        ) from exc
    return EpsteinJet(z, p, xi - p, pair.g, pair.B, xi, np.ones(z.shape, bool))


def gauss_maps(j):
    """Boundary endpoints of the normal geodesic: (z_plus, z_minus)."""
    return _to_boundary(j.p + j.n), _to_boundary(j.p - j.n)


def _to_boundary(v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = v[..., :3] / v[..., 3:4]
        w = (s[..., 0] + 1j * s[..., 1]) / (1 - s[..., 2])
    at_inf = (np.abs(v[..., 3]) < 1e-300) | (np.abs(1 - s[..., 2]) < 1e-14)
    return np.where(at_inf, complex(np.inf, 0), w)


def visual_metric_density(p, w):
    """Density of the visual metric from ``p`` on the Riemann sphere chart."""
    return 4.0 / mdot(p, _sphere_lift(np.asarray(w, dtype=complex))) ** 2


# ---------------------------------------------------------------- model maps


def _check_hyperboloid(p, tol=1e-8):
    p = np.asarray(p, dtype=float)
    q = mdot(p, p)
    if np.any(np.abs(q + 1) > tol * np.maximum(1.0, p[..., 3] ** 2)) or np.any(p[..., 3] <= 0):
        raise NotOnHyperboloidError("point is not on the future hyperboloid")
    return p


def to_ball(p):
    """Poincare ball coordinates b = (x1, x2, x3) / (1 + x4)."""
    p = _check_hyperboloid(p)
    return p[..., :3] / (1 + p[..., 3:4])


def from_ball(b):
    b = np.asarray(b, dtype=float)
    r2 = np.sum(b * b, axis=-1, keepdims=True)
    return np.concatenate([2 * b, 1 + r2], axis=-1) / (1 - r2)


def to_uhs(p):
    """Upper half-space coordinates (u, v, h).

    The boundary point over ``w`` in the chart (light-cone direction
    ``N(w)``) goes to ``(Re w, Im w, 0)`` and the basepoint
    ``(0, 0, 0, 1)`` goes to ``(0, 0, 1)``.
    """
    p = _check_hyperboloid(p)
    s = p[..., 3] - p[..., 2]
    return np.stack([p[..., 0] / s, p[..., 1] / s, 1 / s], axis=-1)


def from_uhs(x):
    x = np.asarray(x, dtype=float)
    u, v, h = x[..., 0], x[..., 1], x[..., 2]
    r2 = u * u + v * v + h * h
    return np.stack([u / h, v / h, (r2 - 1) / (2 * h), (r2 + 1) / (2 * h)], axis=-1)


def hyperboloid_distance(p, q):
    """Distance 2 asinh(|p - q| / 2), stable for nearby points."""
    diff = np.asarray(p) - np.asarray(q)
    return 2 * np.arcsinh(0.5 * np.sqrt(np.maximum(mdot(diff, diff), 0.0)))


def ball_distance(a, b):
    a, b = np.asarray(a), np.asarray(b)
    num = 2 * np.sum((a - b) ** 2, axis=-1)
    den = (1 - np.sum(a * a, axis=-1)) * (1 - np.sum(b * b, axis=-1))
    return np.arccosh(1 + num / den)


def uhs_distance(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.arccosh(1 + np.sum((a - b) ** 2, axis=-1) / (2 * a[..., 2] * b[..., 2]))


# ---------------------------------------------------------------- Bonnet transport


def _connection_matrix(m, S, z, y):
    """Coefficient matrix M with dX/dtau = M X in coordinates (W1, W2, alpha, beta).

    ``W = A Z`` with ``A = (Id + Bhat)/2`` turns the connection of the dual
    pair into one on the conformal metric m, whose Levi-Civita connection
    is explicit.
    """
    j = m.jet(z, 1)
    Bh = sz.shape_operator_hat(S, m, z)
    lam = np.exp(2 * j.value)
    Y = np.stack([y.real, y.imag], axis=-1) * np.ones(z.shape + (1,))
    P = np.stack([j.x, j.y], axis=-1)
    yp = np.sum(Y * P, axis=-1)
    eye = np.eye(2)
    gamma = yp[..., None, None] * eye + Y[..., :, None] * P[..., None, :] - P[..., :, None] * Y[..., None, :]
    minus = np.einsum("...ij,...j->...i", eye - Bh, Y)
    plus = np.einsum("...ij,...j->...i", eye + Bh, Y)
    M = np.zeros(z.shape + (4, 4))
    M[..., :2, :2] = -gamma
    M[..., :2, 2] = -0.5 * minus
    M[..., :2, 3] = -0.5 * plus
    M[..., 2, :2] = 0.5 * lam[..., None] * minus
    M[..., 3, :2] = -0.5 * lam[..., None] * plus
    return M


def bundle_gram(m, z):
    """Inner product of the bundle at ``z``: diag(e^{2phi}, e^{2phi}, 1, -1)."""
    lam = m.density(z)
    G = np.zeros(np.shape(z) + (4, 4))
    G[..., 0, 0] = G[..., 1, 1] = lam
    G[..., 2, 2] = 1.0
    G[..., 3, 3] = -1.0
    return G


def transport_frame(m, S, paths, steps):
    """Parallel-transport the standard frame along polylines.

    ``paths`` has shape ``(..., k)`` of complex vertices; every segment is
    split into ``steps`` RK4 steps.  Returns the frame matrices at the end
    of each path, shape ``(..., 4, 4)``, columns being the transported
    basis vectors.
    """
    paths = np.asarray(paths, dtype=complex)
    shape = paths.shape[:-1]
    X = np.broadcast_to(np.eye(4), shape + (4, 4)).copy()
    for k in range(paths.shape[-1] - 1):
        a, b = paths[..., k], paths[..., k + 1]
        y = b - a
        h = 1.0 / steps
        for i in range(steps):
            tau = i * h
            M1 = _connection_matrix(m, S, a + tau * y, y)
            Mh = _connection_matrix(m, S, a + (tau + 0.5 * h) * y, y)
            M2 = _connection_matrix(m, S, a + (tau + h) * y, y)
            k1 = M1 @ X
            k2 = Mh @ (X + 0.5 * h * k1)
            k3 = Mh @ (X + 0.5 * h * k2)
            k4 = M2 @ (X + h * k3)
            X = X + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(X)):
            raise BonnetError("non-finite state during transport")
    return X


def basepoint_frame(m, z0, S=None, aligned=True):
    """Map from bundle coordinates at ``z0`` into R^{3,1}.

    With ``aligned=True`` the columns are ``(xi_x, xi_y, n, p)`` of the
    envelope at ``z0``, so transported results are directly comparable with
    :func:`epstein_point`.  Otherwise an orthonormal frame sending the
    section (0, 0, 0, 1) to the basepoint (0, 0, 0, 1) is used.
    """
    if not aligned:
        e = np.exp(float(m.phi(complex(z0))))
        return np.diag([e, e, 1.0, 1.0])
    j = epstein_point(m, complex(z0), S)
    xi, xi_x, xi_y = null_lift(m, complex(z0), S)
    return np.stack([xi_x, xi_y, j.n, j.p], axis=-1)


def bonnet_integrate(m, S, path, t=0.0, frame=None, resolution=32, check=True):
    """Integrate the Bonnet connection along ``path`` and return a point of R^{3,1}.

    ``path`` is a polyline of chart points starting at the basepoint (shape
    ``(k,)`` or ``(..., k)`` for several paths sharing a vertex count).
    The section ``s_t = (0, sinh t, cosh t)`` at the endpoint is expressed in
    the transported frame and mapped through ``frame`` (see
    :func:`basepoint_frame`; default is the aligned envelope frame).  Each
    segment uses ``max(64, 8 * resolution)`` RK4 steps.
    """
    S = S or sz.ProjectiveStructure.identity()
    path = np.asarray(path, dtype=complex)
    if path.ndim == 0:
        path = path[None]
    z0 = path[(0,) * (path.ndim - 1) + (0,)]
    if check:
        verts = np.ravel(path)
        gauss, codazzi = dl.gc_residuals(
            m, lambda w: sz.shape_operator_hat(S, m, w), "projective", verts
        )
        worst = float(max(np.max(np.abs(gauss)), np.max(np.abs(codazzi))))
        if worst > 1e-6:
            raise BonnetError(f"Gauss-Codazzi residual {worst:.3g} exceeds 1e-6 along the path")
    if frame is None:
        frame = basepoint_frame(m, z0, S)
    steps = max(64, 8 * int(resolution))
    if path.shape[-1] == 1:
        X = np.broadcast_to(np.eye(4), path.shape[:-1] + (4, 4))
    else:
        X = transport_frame(m, S, path, steps)
    s = np.array([0.0, 0.0, np.sinh(t), np.cosh(t)])
    coeffs = np.linalg.solve(X, np.broadcast_to(s, X.shape[:-1])[..., None])[..., 0]
    return np.einsum("ij,...j->...i", frame, coeffs)


# ---------------------------------------------------------------- meshes


@dataclass
class Mesh:
    """Grid-shaped surface mesh; invalid vertices are holes."""

    vertices: np.ndarray        # (ny, nx, 3), NaN at holes
    valid: np.ndarray           # (ny, nx)
    faces: np.ndarray           # (F, 3) indices into the flattened grid
    curvature: np.ndarray       # (ny, nx, 4): lambda1, lambda2, K, H
    model: str
    report: str = ""

    def write_obj(self, path):
        """Write valid vertices (row-major grid order) and faces, 1-based."""
        flat = self.vertices.reshape(-1, 3)
        keep = np.flatnonzero(self.valid.ravel())
        new_index = np.full(flat.shape[0], -1)
        new_index[keep] = np.arange(1, keep.size + 1)
        lines = [f"# epstein-kit mesh, model={self.model}"]
        lines += [f"v {x!r} {y!r} {w!r}" for x, y, w in flat[keep].tolist()]
        lines += ["f {} {} {}".format(*new_index[f]) for f in self.faces]
        atomic_write_text(path, "\n".join(lines) + "\n")

    def write_curvature_csv(self, path):
        flat = self.curvature.reshape(-1, 4)
        keep = np.flatnonzero(self.valid.ravel())
        rows = [(int(i), *flat[i].tolist()) for i in keep]
        write_csv(path, ["vertex", "lambda1", "lambda2", "K", "H"], rows)


def epstein_mesh(m, S=None, chart=None, model="ball"):
    """Triangulated Epstein surface over the chart grid.

    Per-vertex data are the principal curvatures of the dual pair, the
    Gaussian curvature ``det B - 1`` and the mean curvature ``Tr B / 2``.
    """
    if model not in ("ball", "uhs"):
        raise ValueError(f"unknown model {model!r}")
    chart = chart or m.chart
    z = chart.points()
    jets = epstein_points(m, z, S)
    valid = jets.valid.copy()
    verts = np.full(z.shape + (3,), np.nan)
    curv = np.full(z.shape + (4,), np.nan)
    if np.any(valid):
        p = jets.p[valid]
        verts[valid] = to_ball(p) if model == "ball" else to_uhs(p)
        lam = dl.principal_curvatures(jets.g[valid], jets.B[valid])
        curv[valid] = np.column_stack([lam[:, 0], lam[:, 1], lam[:, 0] * lam[:, 1] - 1, 0.5 * lam.sum(1)])
    ny, nx = z.shape
    idx = np.arange(ny * nx).reshape(ny, nx)
    a, b, c, d = idx[:-1, :-1], idx[:-1, 1:], idx[1:, :-1], idx[1:, 1:]
    tris = np.concatenate([np.stack([a, b, d], -1).reshape(-1, 3), np.stack([a, d, c], -1).reshape(-1, 3)])
    order = np.argsort(tris[:, 0] * 2 + (np.arange(len(tris)) >= len(tris) // 2), kind="stable")
    tris = tris[order]
    vflat = valid.ravel()
    faces = tris[np.all(vflat[tris], axis=1)]
    n_bad = int(np.sum(~valid))
    report = f"{n_bad} of {valid.size} vertices failed (envelope degenerate or no surface)" if n_bad else ""
    return Mesh(verts, valid, faces, curv, model, report)
