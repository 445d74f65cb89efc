"""Pointwise 2x2 tensor algebra on the tangent plane.

Storage is always the real basis (d/dx, d/dy).  Arrays may carry leading
batch dimensions: a stack of endomorphisms has shape ``(..., 2, 2)``.

Conventions
-----------
* A symmetric bilinear form ``T`` is the matrix ``T[i, j] = T(e_i, e_j)``.
* An endomorphism ``E`` acts on column vectors, ``E @ v``.
* ``(T.E)(X, Y) = T(E X, Y)`` has matrix ``E.T @ T``.
* The pullback ``A* g`` has matrix ``A.T @ g @ A``.
"""

from __future__ import annotations

import numpy as np

# change of basis from (d/dz, d/dzbar) to (d/dx, d/dy)
BASIS_CHANGE = np.array([[0.5, 0.5], [-0.5j, 0.5j]])

CONFORMAL_RTOL = 1e-12


class NonConformalMetricError(ValueError):
    """Raised when a metric that must be a positive multiple of Id is not."""


class DegeneratePairError(ValueError):
    """Raised when an endomorphism that must be invertible is singular."""


def identity_like(a):
    a = np.asarray(a)
    return np.broadcast_to(np.eye(2), a.shape[:-2] + (2, 2)).copy()


def transpose(a):
    return np.swapaxes(a, -1, -2)


def trace(a):
    return np.trace(a, axis1=-2, axis2=-1)


def traceless(e):
    """Traceless part E - (tr E / 2) Id."""
    e = np.asarray(e)
    return e - 0.5 * trace(e)[..., None, None] * np.eye(2)


def to_complex_basis(t):
    """Matrix of a bilinear form in the basis (d/dz, d/dzbar)."""
    return transpose(BASIS_CHANGE) @ np.asarray(t) @ BASIS_CHANGE


def pullback(a, g):
    return transpose(a) @ g @ a


def dot_form(t, e):
    """The bilinear form (T.E)(X, Y) = T(E X, Y)."""
    return transpose(e) @ t


def complexify(t):
    """Split a symmetric form into ``Re(q dz^2)`` and trace parts.

    Returns ``(q, sigma)`` with ``T = 2 Re(q dz^2) + sigma * Id``.

    >>> complexify(np.diag([1.0, -1.0]))
    ((0.5+0j), 0.0)
    """
    t = np.asarray(t, dtype=float)
    sigma = 0.5 * (t[..., 0, 0] + t[..., 1, 1])
    q = 0.5 * ((t[..., 0, 0] - sigma) - 1j * t[..., 0, 1])
    if np.ndim(q) == 0:
        return complex(q), float(sigma)
    return q, sigma


def decomplexify(q, sigma):
    """Inverse of :func:`complexify`."""
    q = np.asarray(q, dtype=complex)
    sigma = np.asarray(sigma, dtype=float)
    out = np.empty(np.broadcast(q, sigma).shape + (2, 2))
    out[..., 0, 0] = sigma + 2 * q.real
    out[..., 1, 1] = sigma - 2 * q.real
    out[..., 0, 1] = -2 * q.imag
    out[..., 1, 0] = -2 * q.imag
    return out


def conformal_factor(g, rtol=CONFORMAL_RTOL):
    """Return ``lam`` when ``g = lam * Id`` with ``lam > 0``, else raise."""
    g = np.asarray(g, dtype=float)
    scale = np.max(np.abs(g), axis=(-2, -1))
    bound = rtol * np.maximum(scale, np.finfo(float).tiny)
    bad = (
        (np.abs(g[..., 0, 1]) > bound)
        | (np.abs(g[..., 1, 0]) > bound)
        | (np.abs(g[..., 0, 0] - g[..., 1, 1]) > bound)
        | ~(g[..., 0, 0] > 0)
    )
    if np.any(bad):
        raise NonConformalMetricError("metric is not a positive multiple of the identity")
    return g[..., 0, 0]


def area_form(g):
    """Area density of a conformal metric w.r.t. dx^dy (equals lambda)."""
    return conformal_factor(g)


def _pairing(t, e, g):
    # 1/2 Tr_g(T.E) dA_g for an arbitrary positive g
    ginv = np.linalg.inv(g)
    dens = np.sqrt(np.linalg.det(g))
    return 0.5 * trace(ginv @ dot_form(t, e)) * dens


def pairing(t, e, g):
    """The pairing <T, E>_g = 1/2 Tr_g(T.E) dA_g as a density of dx^dy.

    ``g`` must be conformal.  The value does not depend on the conformal
    representative, and complex (C-bilinear) inputs are accepted so that
    e.g. ``<dz^2, d/dz (x) dzbar> = 1`` can be checked directly.
    """
    lam = conformal_factor(g)
    val = 0.5 * np.sum(np.asarray(e) * np.asarray(t), axis=(-2, -1))
    return val * np.ones_like(lam)


def strain(g, dg):
    """Solve ``dg = 2 g.eta`` for the strain ``eta`` and its Beltrami part.

    Returns ``(eta, nu)`` where ``nu`` is the coefficient of
    ``d/dz (x) dzbar`` in the traceless part of ``eta``.
    """
    g = np.asarray(g, dtype=float)
    conformal_factor(g)
    # (g.eta) has matrix eta^T g, so eta^T = dg g^{-1} / 2
    eta = transpose(0.5 * np.asarray(dg, dtype=float) @ np.linalg.inv(g))
    e0 = traceless(eta)
    nu = 0.5 * (e0[..., 0, 0] - e0[..., 1, 1]) + 0.5j * (e0[..., 0, 1] + e0[..., 1, 0])
    return eta, nu


def beltrami_endomorphism(nu):
    """Real matrix of ``nu d/dz (x) dzbar + conj``."""
    nu = np.asarray(nu, dtype=complex)
    out = np.empty(nu.shape + (2, 2))
    out[..., 0, 0] = nu.real
    out[..., 1, 1] = -nu.real
    out[..., 0, 1] = nu.imag
    out[..., 1, 0] = nu.imag
    return out


def variation_duality_residual(g, p, dg, dp, dg_hat=None, dp_hat=None):
    """Defect of the variational duality identity at one point.

    With ``ghat = P* g`` and ``Phat = P^{-1}``::

        <ghat, dPhat>_ghat + <dghat, Phat_0>_ghat
            = -sgn(det P) (<g, dP>_g + <dg, P_0>_g)

    Pairings here use the general trace ``Tr_g`` so ``g`` need not be
    conformal.  ``dg_hat`` and ``dp_hat`` may be supplied (for instance
    from finite differences); otherwise the exact derivatives are used.
    """
    g = np.asarray(g, dtype=float)
    p = np.asarray(p, dtype=float)
    dg = np.asarray(dg, dtype=float)
    dp = np.asarray(dp, dtype=float)
    det = np.linalg.det(p)
    if np.any(np.abs(det) < 1e-14 * np.max(np.abs(p)) ** 2):
        raise DegeneratePairError("P is singular")
    pinv = np.linalg.inv(p)
    g_hat = pullback(p, g)
    if dp_hat is None:
        dp_hat = -pinv @ dp @ pinv
    if dg_hat is None:
        dg_hat = transpose(dp) @ g @ p + pullback(p, dg) + transpose(p) @ g @ dp
    lhs = _pairing(g_hat, dp_hat, g_hat) + _pairing(dg_hat, traceless(pinv), g_hat)
    rhs = -np.sign(det) * (_pairing(g, dp, g) + _pairing(dg, traceless(p), g))
    return np.abs(lhs - rhs)
