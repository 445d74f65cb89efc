"""Dual fundamental pairs, Gauss-Codazzi residuals and the normal flow.

A fundamental pair ``(g, B)`` is a metric with a g-self-adjoint shape
operator; arrays carry batch dimensions ``(..., 2, 2)``.  The projective
pair ``(ghat, Bhat)`` and the hyperbolic pair ``(g, B)`` are exchanged by

    g = 1/4 (Id + Bhat)* ghat,     B = (Id + Bhat)^{-1} (Id - Bhat),
    ghat = (Id + B)* g,            Bhat = (Id + B)^{-1} (Id - B).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import field as fld
from . import schwarzian as sz
from .io import write_csv
from .tensor2 import complexify, identity_like, pullback, trace, transpose

EIGEN_TOL = 1e-8
SYMMETRY_TOL = 1e-8
COND_LIMIT = 1e12
FD_STEP = 2e-3


class DegenerateDualError(ValueError):
    """Id + B (or Id + Bhat) is singular: an eigenvalue equals -1."""

    def __init__(self, eigenvalue, message=None):
        self.eigenvalue = eigenvalue
        super().__init__(message or f"eigenvalue {eigenvalue!r} is too close to -1")


class SingularTimeError(ValueError):
    """The normal-flow map A_t is (numerically) singular."""


class AsymmetricPairError(ValueError):
    """g.B is far from symmetric."""


@dataclass(frozen=True)
class FundamentalPair:
    g: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        B = np.asarray(self.B, dtype=float)
        g, B = np.broadcast_arrays(g, B)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "B", B)

    def eigenvalues(self):
        """Principal curvatures, ascending (real since B is g-self-adjoint)."""
        return principal_curvatures(self.g, self.B)

    def symmetrized(self):
        return FundamentalPair(*enforce_symmetry(self.g, self.B))


@dataclass(frozen=True)
class FlowState:
    t: float
    pair: FundamentalPair


def enforce_symmetry(g, B, tol=SYMMETRY_TOL):
    """Replace B by g^{-1} sym(g B); reject asymmetry above ``tol``."""
    s = transpose(B) @ g
    asym = np.max(np.abs(s - transpose(s)), axis=(-2, -1))
    scale = np.maximum(np.max(np.abs(s), axis=(-2, -1)), 1.0)
    if np.any(asym > tol * scale):
        raise AsymmetricPairError(f"g.B asymmetry {float(np.max(asym / scale)):.3g} exceeds {tol}")
    s = 0.5 * (s + transpose(s))
    return g, np.linalg.solve(g, s)


def principal_curvatures(g, B):
    """Eigenvalues of a g-self-adjoint B via the symmetric problem."""
    # similar to L^T B L^{-T} with g = L L^T, which is symmetric
    L = np.linalg.cholesky(g)
    m = transpose(L) @ B @ np.linalg.inv(transpose(L))
    return np.linalg.eigvalsh(0.5 * (m + transpose(m)))


def _check_not_minus_one(B, g):
    ev = principal_curvatures(g, B)
    close = np.abs(ev + 1) < EIGEN_TOL
    if np.any(close):
        raise DegenerateDualError(float(ev[close].ravel()[0]))


def _exchange(g, B, scale):
    g, B = enforce_symmetry(g, B)
    _check_not_minus_one(B, g)
    ident = identity_like(B)
    a = ident + B
    g_new = scale * pullback(a, g)
    B_new = np.linalg.solve(a, ident - B)
    return enforce_symmetry(g_new, B_new)


def to_dual(hat):
    """(ghat, Bhat) -> (g, B)."""
    return FundamentalPair(*_exchange(hat.g, hat.B, 0.25))


def from_dual(pair):
    """(g, B) -> (ghat, Bhat)."""
    return FundamentalPair(*_exchange(pair.g, pair.B, 1.0))


def projective_pair(S, m, z):
    """The pair (m, Bhat(S, m)) at chart points ``z``."""
    z = np.asarray(z, dtype=complex)
    return FundamentalPair(m.matrix(z), sz.shape_operator_hat(S, m, z))


def dual_pair(S, m, z):
    return to_dual(projective_pair(S, m, z))


# ---------------------------------------------------------------- normal flow


def flow_maps(B, t):
    ident = identity_like(B)
    return np.cosh(t) * ident + np.sinh(t) * B, np.sinh(t) * ident + np.cosh(t) * B


def normal_flow(pair, t):
    """Move the pair a distance ``t`` along the normal."""
    a, c = flow_maps(pair.B, t)
    cond = np.linalg.cond(a)
    if np.any(~np.isfinite(cond) | (cond > COND_LIMIT)):
        raise SingularTimeError(f"A_t is singular at t = {t}")
    g_t = pullback(a, pair.g)
    B_t = np.linalg.solve(a, c)
    return FlowState(float(t), FundamentalPair(*enforce_symmetry(g_t, B_t)))


def flow_eigenvalue(lam, t):
    """lambda(t) = (tanh t + lambda) / (1 + tanh t lambda)."""
    th = np.tanh(t)
    return (th + lam) / (1 + th * lam)


def flow_trace(pair, ts):
    """Rows (t, lambda1, lambda2, det g_t) along the flow of a single pair."""
    rows = []
    for t in ts:
        st = normal_flow(pair, t)
        l1, l2 = st.pair.eigenvalues()
        rows.append((float(t), float(l1), float(l2), float(np.linalg.det(st.pair.g))))
    return rows


def write_flow_trace(path, rows):
    write_csv(path, ["t", "lambda1", "lambda2", "det_g"], rows)


def convexity_time(S, m, chart=None):
    """t0 = 1/2 log sup(|K| + 4 ||Q||) over the chart grid.

    Returns ``(t0, witness)`` where ``witness`` is the grid point where the
    supremum is attained.
    """
    z = (chart or m.chart).points().ravel()
    if z.size == 0:
        raise ValueError("empty grid")
    vals = np.abs(fld.curvature(m, z)) + 4 * sz.norm_q(S, m, z)
    i = int(np.argmax(vals))
    t0 = 0.5 * float(np.log(vals[i])) if vals[i] > 0 else -np.inf
    return t0, complex(z[i])


# ---------------------------------------------------------------- residuals


def _fd(fn, z, h, direction):
    """6th-order central derivative of ``fn`` along ``direction`` (1 or 1j)."""
    h = np.broadcast_to(np.asarray(h, dtype=float), np.shape(z))
    s = h * direction
    num = (45 * (fn(z + s) - fn(z - s)) - 9 * (fn(z + 2 * s) - fn(z - 2 * s))
           + (fn(z + 3 * s) - fn(z - 3 * s)))
    return num / (60 * h.reshape(h.shape + (1,) * (np.ndim(num) - h.ndim)))


def christoffel(gfield, z, h=FD_STEP):
    """Christoffel symbols Gamma[..., k, i, j] of a metric field by differences."""
    g = gfield(z)
    dg = np.stack([_fd(gfield, z, h, 1), _fd(gfield, z, h, 1j)], axis=-3)  # [..., l, i, j] = d_l g_ij
    ginv = np.linalg.inv(g)
    # Gamma_kij = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij)
    t = (np.einsum("...ilj->...lij", dg) + np.einsum("...jli->...lij", dg) - dg)
    return 0.5 * np.einsum("...kl,...lij->...kij", ginv, t)


def metric_curvature(gfield, z, h=FD_STEP):
    """Gaussian curvature of a general metric field via R_{1212}."""
    def gamma(w):
        return christoffel(gfield, w, h)

    G = gamma(z)
    dGx = _fd(gamma, z, h, 1)
    dGy = _fd(gamma, z, h, 1j)
    # R^k_{l i j} with i=x, j=y, l=y: d_x G^k_{y y} - d_y G^k_{x y} + G^k_{x m} G^m_{y y} - G^k_{y m} G^m_{x y}
    r = (dGx[..., :, 1, 1] - dGy[..., :, 0, 1]
         + np.einsum("...km,...m->...k", G[..., :, 0, :], G[..., :, 1, 1])
         - np.einsum("...km,...m->...k", G[..., :, 1, :], G[..., :, 0, 1]))
    g = gfield(z)
    r1212 = np.einsum("...k,...k->...", g[..., 0, :], r)
    return r1212 / np.linalg.det(g)


def codazzi_vector(gfield, bfield, z, h=FD_STEP):
    """(nabla_x B) e_y - (nabla_y B) e_x as a complex number x + i y."""
    G = christoffel(gfield, z, h)
    B = bfield(z)
    dBx = _fd(bfield, z, h, 1)
    dBy = _fd(bfield, z, h, 1j)
    v = (dBx[..., :, 1] - dBy[..., :, 0]
         + np.einsum("...kj,...j->...k", G[..., :, 0, :], B[..., :, 1])
         - np.einsum("...kj,...j->...k", G[..., :, 1, :], B[..., :, 0]))
    return v[..., 0] + 1j * v[..., 1]


def boundary_step(domain, z, h0=FD_STEP):
    """Difference step shrunk near the edge of a disk or UHP domain."""
    z = np.asarray(z, dtype=complex)
    if domain == "disk":
        return h0 * np.minimum(1.0, 1.0 - np.abs(z))
    if domain == "uhp":
        return h0 * np.minimum(1.0, z.imag)
    return np.full(z.shape, h0)


def gc_residuals(m, bfield, picture, z, h=None, domain=None):
    """Gauss and Codazzi residuals of a shape-operator field.

    ``picture="projective"``: ``m`` is a conformal :class:`MetricField`;
    returns ``(Tr B + 2K, 2 r_zbar + s_z e^{2 phi})`` where the tensor
    ``m.B`` is written ``r dz^2 + conj - s m``.

    ``picture="hyperbolic"``: ``m`` is a callable returning metric
    matrices (or a MetricField); returns ``(det B - K - 1, codazzi)`` with
    the Codazzi defect ``(nabla_x B) e_y - (nabla_y B) e_x`` packed as a
    complex number.  Curvature and Christoffel symbols come from 6th-order
    differences with step ``h``; by default the step is FD_STEP shrunk in
    proportion to the distance from the edge of ``domain`` (taken from
    ``m`` when it is a MetricField).
    """
    z = np.asarray(z, dtype=complex)
    if domain is None:
        domain = m.domain if isinstance(m, fld.MetricField) else "plane"
    if h is None:
        h = boundary_step(domain, z)
    if picture == "projective":
        B = bfield(z)
        gauss = trace(B) + 2 * fld.curvature(m, z)

        def parts(w):
            lam = m.density(w)
            T = transpose(bfield(w)) @ m.matrix(w)
            q, sigma = complexify(T)
            return q, -sigma / lam

        r_zbar = 0.5 * (_fd(lambda w: parts(w)[0], z, h, 1) + 1j * _fd(lambda w: parts(w)[0], z, h, 1j))
        s_x = _fd(lambda w: parts(w)[1], z, h, 1)
        s_y = _fd(lambda w: parts(w)[1], z, h, 1j)
        codazzi = 2 * r_zbar + 0.5 * (s_x - 1j * s_y) * m.density(z)
        return gauss, codazzi
    if picture == "hyperbolic":
        gfield = m.matrix if isinstance(m, fld.MetricField) else m
        gauss = np.linalg.det(bfield(z)) - metric_curvature(gfield, z, h) - 1
        return gauss, codazzi_vector(gfield, bfield, z, h)
    raise ValueError(f"unknown picture {picture!r}")


def dual_fields(S, m):
    """Callables z -> g(z) and z -> B(z) for the dual of (m, Bhat)."""
    def g(z):
        return dual_pair(S, m, z).g

    def B(z):
        return dual_pair(S, m, z).B

    return g, B


def dual_forms_check(pair, hat, k_hat=None):
    """Residuals of the two area-form identities between dual pairs.

    ``K(g) dA_g = eps K(ghat) dA_ghat`` and
    ``H(g) dA_g = eps/4 (1 - det Bhat) dA_ghat`` with ``H = Tr B / 2``,
    ``K(g) = det B - 1`` and ``eps = sgn det(Id + B)``.  When ``k_hat`` is
    not given the projective Gauss equation ``K(ghat) = -Tr(Bhat)/2`` is
    used.
    """
    ident = identity_like(pair.B)
    eps = np.sign(np.linalg.det(ident + pair.B))
    da = np.sqrt(np.linalg.det(pair.g))
    da_hat = np.sqrt(np.linalg.det(hat.g))
    if k_hat is None:
        k_hat = -0.5 * trace(hat.B)
    k = np.linalg.det(pair.B) - 1
    r1 = k * da - eps * k_hat * da_hat
    r2 = 0.5 * trace(pair.B) * da - 0.25 * eps * (1 - np.linalg.det(hat.B)) * da_hat
    return r1, r2
