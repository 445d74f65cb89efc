"""Osgood-Stowe differentials, Schwarzian tensors and the projective shape operator.

All tensors are expressed in a chart.  A quadratic differential ``q dz^2``
is stored by its coefficient ``q``; the associated real symmetric tensor
is ``q dz^2 + conj(q) dzbar^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import field as fld
from .io import write_csv


class CriticalPointError(ValueError):
    """The developing map has vanishing derivative at a requested point."""


# ---------------------------------------------------------------- holomorphic jets


class HolomorphicMap:
    """A holomorphic map given by its 3-jet ``(f, f', f'', f''')``."""

    name = "map"

    def jets(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.jets(z)[0]

    def then(self, outer):
        """The composition ``outer o self``."""
        return Composite(outer, self)


class _FunctionJets(HolomorphicMap):
    def __init__(self, fn, name):
        self._fn = fn
        self.name = name

    def jets(self, z):
        z = np.asarray(z, dtype=complex)
        return tuple(np.broadcast_to(v, z.shape).astype(complex) for v in self._fn(z))


def identity_map():
    return _FunctionJets(lambda z: (z, np.ones_like(z), np.zeros_like(z), np.zeros_like(z)), "identity")


def power_map(c):
    """z^c with the principal branch (arg z in (-pi, pi])."""
    c = complex(c)

    def fn(z):
        if np.any(z == 0):
            raise CriticalPointError("z^c has no derivative jet at 0")
        logz = np.log(z)
        return (
            np.exp(c * logz),
            c * np.exp((c - 1) * logz),
            c * (c - 1) * np.exp((c - 2) * logz),
            c * (c - 1) * (c - 2) * np.exp((c - 3) * logz),
        )

    return _FunctionJets(fn, f"power({c})")


def moebius_map(a, b, c, d):
    """(a z + b) / (c z + d)."""
    a, b, c, d = (complex(v) for v in (a, b, c, d))
    det = a * d - b * c
    if det == 0:
        raise ValueError("degenerate Moebius coefficients")

    def fn(z):
        w = c * z + d
        return ((a * z + b) / w, det / w**2, -2 * c * det / w**3, 6 * c**2 * det / w**4)

    return _FunctionJets(fn, f"moebius({a},{b},{c},{d})")


def exp_map(k=1.0):
    k = complex(k)

    def fn(z):
        e = np.exp(k * z)
        return (e, k * e, k**2 * e, k**3 * e)

    return _FunctionJets(fn, f"exp({k})")


def cayley_map():
    """The disk-to-UHP map i (1 + z) / (1 - z)."""
    return moebius_map(1j, 1j, -1, 1)


class Composite(HolomorphicMap):
    """``outer o inner`` with the 3-jet chain rule."""

    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner
        self.name = f"{outer.name}o{inner.name}"

    def jets(self, z):
        g0, g1, g2, g3 = self.inner.jets(z)
        f0, f1, f2, f3 = self.outer.jets(g0)
        return (
            f0,
            f1 * g1,
            f2 * g1**2 + f1 * g2,
            f3 * g1**3 + 3 * f2 * g1 * g2 + f1 * g3,
        )


@dataclass(frozen=True)
class ProjectiveStructure:
    """A projective structure given by a developing map on a chart."""

    f: HolomorphicMap
    name: str = "structure"

    @classmethod
    def identity(cls):
        return cls(identity_map(), "identity")

    @classmethod
    def power(cls, c):
        return cls(power_map(c), f"power({complex(c)})")

    @classmethod
    def moebius(cls, a, b, c, d):
        return cls(moebius_map(a, b, c, d), "moebius")

    @classmethod
    def exp(cls, k=1.0):
        return cls(exp_map(k), "exp")

    def jets(self, z):
        return self.f.jets(z)


class LogAbsDerivative(fld.ScalarField):
    """The harmonic function ``u = log|f'| = 1/2 log|f'|^2``.

    Its 2-jet follows from the 3-jet of ``f``: ``u_z = f''/(2 f')``.
    """

    max_order = 2

    def __init__(self, f):
        self.f = f

    def partials(self, z, order=2):
        self._check_order(order)
        f0, f1, f2, f3 = self.f.jets(z)
        w1 = 0.5 * f2 / f1
        w2 = 0.5 * (f3 / f1 - (f2 / f1) ** 2)
        out = {(0, 0): np.log(np.abs(f1))}
        if order >= 1:
            out[(1, 0)] = 2 * w1.real
            out[(0, 1)] = -2 * w1.imag
        if order >= 2:
            out[(2, 0)] = 2 * w2.real
            out[(0, 2)] = -2 * w2.real
            out[(1, 1)] = -2 * w2.imag
        return out


# ---------------------------------------------------------------- Osgood-Stowe


def os_q(base, u, z):
    """Q(u; g_phi) = u_zz - 2 phi_z u_z - u_z^2 for the metric e^{2u} base."""
    jb = base.jet(z, 1)
    ju = fld.jet(u, z, 2)
    return ju.zz - 2 * jb.z * ju.z - ju.z**2


def os_q_euclidean(m, z):
    """Q(g_euc, m) = phi_zz - phi_z^2."""
    j = m.jet(z, 2)
    return j.zz - j.z**2


def schwarzian_derivative(f, z):
    """Sf = f'''/f' - 3/2 (f''/f')^2."""
    f = f.f if isinstance(f, ProjectiveStructure) else f
    _, f1, f2, f3 = f.jets(z)
    if np.any((f1 == 0) | ~np.isfinite(f1)):
        raise CriticalPointError("f' vanishes or is undefined")
    r = f2 / f1
    return f3 / f1 - 1.5 * r**2


def q_sigma(S, m, z):
    """Schwarzian tensor Q(Sigma, m) = Q(g_euc, m) - Sf/2."""
    return os_q_euclidean(m, z) - 0.5 * schwarzian_derivative(S.f, z)


def q_sigma_zbar(S, m, z):
    """Analytic z-bar derivative of Q(Sigma, m); Sf drops out."""
    j = m.jet(z, 3)
    return j.zzzbar - 2 * j.z * j.zzbar


def norm_q(S, m, z):
    """||Q|| = |Q| e^{-2 phi}."""
    return np.abs(q_sigma(S, m, z)) * np.exp(-2 * m.phi(z))


def quad_tensor(q):
    """Real matrix of q dz^2 + conj(q) dzbar^2."""
    q = np.asarray(q, dtype=complex)
    out = np.empty(q.shape + (2, 2))
    out[..., 0, 0] = 2 * q.real
    out[..., 1, 1] = -2 * q.real
    out[..., 0, 1] = -2 * q.imag
    out[..., 1, 0] = -2 * q.imag
    return out


def shape_operator_hat(S, m, z):
    """Projective shape operator: m.B = 2 OS(Sigma, m) - K(m) m."""
    z = np.asarray(z, dtype=complex)
    q = q_sigma(S, m, z)
    k = fld.curvature(m, z)
    lam = np.exp(2 * m.phi(z))
    return 2 * quad_tensor(q) / lam[..., None, None] - k[..., None, None] * np.eye(2)


def shape_eigenvalues(S, m, z):
    """The closed-form eigenvalues -K -/+ 4 ||Q||, ascending."""
    k = fld.curvature(m, z)
    n = norm_q(S, m, z)
    return np.stack([-k - 4 * n, -k + 4 * n], axis=-1)


def codazzi_residual(r, s_field, m, z, h=1e-3):
    """2 r_zbar + s_z e^{2 phi} for the tensor r dz^2 + conj - s g.

    ``r`` is a :class:`QuadDiffField` or callable; ``s_field`` a scalar
    field.  Zero iff the corresponding endomorphism is Codazzi for ``m``.
    """
    r = r if isinstance(r, QuadDiffField) else QuadDiffField(r)
    ps = fld.as_field(s_field).partials(z, 1)
    s_z = 0.5 * (ps[(1, 0)] - 1j * ps[(0, 1)])
    return 2 * r.zbar(z, h) + s_z * m.density(z)


def curvature_field(m):
    """The curvature of ``m`` as a scalar field with a 1-jet."""
    return _CurvatureField(m)


class _CurvatureField(fld.ScalarField):
    max_order = 1

    def __init__(self, m):
        self.m = m

    def partials(self, z, order=1):
        self._check_order(order)
        out = {(0, 0): fld.curvature(self.m, z)}
        if order >= 1:
            kz = fld.curvature_z(self.m, z)
            out[(1, 0)] = 2 * kz.real
            out[(0, 1)] = -2 * kz.imag
        return out


def fd_zbar(fn, z, h=1e-3):
    """4th-order central difference for d/dzbar = (d/dx + i d/dy)/2."""
    z = np.asarray(z, dtype=complex)

    def d(step):
        return (fn(z - 2 * step) - 8 * fn(z - step) + 8 * fn(z + step) - fn(z + 2 * step)) / (12 * h)

    return 0.5 * (d(h) + 1j * d(1j * h))


class QuadDiffField:
    """Quadratic differential q dz^2 with an optional analytic z-bar derivative."""

    def __init__(self, q, q_zbar=None):
        self.q = q
        self.q_zbar = q_zbar

    def __call__(self, z):
        return self.q(z)

    def zbar(self, z, h=1e-3):
        if self.q_zbar is not None:
            return self.q_zbar(z)
        return fd_zbar(self.q, z, h)

    @classmethod
    def from_structure(cls, S, m, scale=1.0):
        return cls(lambda z: scale * q_sigma(S, m, z), lambda z: scale * q_sigma_zbar(S, m, z))

    def to_csv(self, path, m, z):
        """Write (x, y, Re q, Im q, ||q||) rows for the points ``z``."""
        z = np.ravel(np.asarray(z, dtype=complex))
        q = self.q(z)
        norm = np.abs(q) / m.density(z)
        write_csv(path, ["x", "y", "re_q", "im_q", "norm_q"],
                  zip(z.real, z.imag, q.real, q.imag, norm))


def phi_l2_norm_sq(S, hyperbolic, chart=None):
    """||Phi||_2^2 = integral of (|q| e^{-2 phi_h})^2 dA_h.

    ``hyperbolic`` is the complete hyperbolic metric used to measure the
    Schwarzian ``q = -Sf/2`` of the structure relative to it.
    """
    return fld.quadrature(hyperbolic, lambda z: norm_q(S, hyperbolic, z) ** 2, chart)
