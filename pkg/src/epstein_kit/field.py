"""Conformal metrics e^{2 phi} |dz|^2 on planar charts.

A metric is carried by its real log-density ``phi`` together with a jet
provider returning real partial derivatives ``d^a/dx^a d^b/dy^b phi``.
Complex Wirtinger derivatives are always formed from those partials.

Catalog metrics get closed-form jets by differentiating their defining
expression with sympy once and compiling the result to numpy.  Sampled
metrics (for example loaded from CSV) use 4th-order finite differences.
"""

from __future__ import annotations

import configparser
import functools
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import sympy as sp
from scipy.interpolate import RegularGridInterpolator, make_interp_spline

MAX_ORDER = 3

_X, _Y, _T = sp.symbols("x y theta", real=True)


class OutsideChartError(ValueError):
    """A point lies outside the open domain of a field."""


class MissingJetError(ValueError):
    """A derivative of higher order than the provider supports was requested."""


class QuadratureError(ValueError):
    """Non-finite samples were met during quadrature."""


class ConfigError(ValueError):
    """Malformed metric configuration."""


def _multi_indices(order):
    return [(a, k - a) for k in range(order + 1) for a in range(k, -1, -1)]


def _as_points(z):
    z = np.asarray(z, dtype=complex)
    return z.real, z.imag


# ---------------------------------------------------------------- charts


@dataclass(frozen=True)
class Chart:
    """A planar domain together with a quadrature grid.

    ``kind`` is one of ``rectangle``, ``disk``, ``uhp`` or ``torus``.
    Rectangles and the torus use node grids (trapezoid rule); the UHP box
    uses cell midpoints so no node touches the real axis; disks use a
    radial-midpoint, angular-trapezoid product grid.
    """

    kind: str
    bounds: tuple
    nx: int
    ny: int

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, nx=65, ny=65):
        return cls("rectangle", (float(x0), float(x1), float(y0), float(y1)), int(nx), int(ny))

    @classmethod
    def uhp(cls, x0=-1.0, x1=1.0, y0=0.0, y1=2.0, nx=65, ny=64):
        if y0 < 0:
            raise ValueError("UHP truncation box must lie in Im z >= 0")
        return cls("uhp", (float(x0), float(x1), float(y0), float(y1)), int(nx), int(ny))

    @classmethod
    def disk(cls, center=0j, radius=1.0, nr=64, ntheta=128):
        c = complex(center)
        return cls("disk", (c.real, c.imag, float(radius)), int(ntheta), int(nr))

    @classmethod
    def torus(cls, n=64, ny=None):
        return cls("torus", (0.0, 1.0, 0.0, 1.0), int(n), int(n if ny is None else ny))

    def with_resolution(self, nx, ny):
        return Chart(self.kind, self.bounds, int(nx), int(ny))

    def _axes(self):
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.bounds
            return np.linspace(x0, x1, self.nx), np.linspace(y0, y1, self.ny)
        if self.kind == "torus":
            return np.arange(self.nx) / self.nx, np.arange(self.ny) / self.ny
        if self.kind == "uhp":
            x0, x1, y0, y1 = self.bounds
            hx, hy = (x1 - x0) / self.nx, (y1 - y0) / self.ny
            return x0 + hx * (np.arange(self.nx) + 0.5), y0 + hy * (np.arange(self.ny) + 0.5)
        cx, cy, radius = self.bounds
        r = radius * (np.arange(self.ny) + 0.5) / self.ny
        theta = 2 * np.pi * np.arange(self.nx) / self.nx
        return theta, r

    def points(self):
        """Grid points as a complex array of shape ``(ny, nx)``."""
        a, b = self._axes()
        if self.kind == "disk":
            cx, cy, _ = self.bounds
            theta, r = np.meshgrid(a, b)
            return complex(cx, cy) + r * np.exp(1j * theta)
        xx, yy = np.meshgrid(a, b)
        return xx + 1j * yy

    def weights(self):
        """Euclidean quadrature weights (dx dy) matching :meth:`points`."""
        a, b = self._axes()
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.bounds
            wx = np.full(self.nx, (x1 - x0) / (self.nx - 1))
            wy = np.full(self.ny, (y1 - y0) / (self.ny - 1))
            wx[[0, -1]] *= 0.5
            wy[[0, -1]] *= 0.5
            return np.outer(wy, wx)
        if self.kind == "torus":
            return np.full((self.ny, self.nx), 1.0 / (self.nx * self.ny))
        if self.kind == "uhp":
            x0, x1, y0, y1 = self.bounds
            return np.full((self.ny, self.nx), (x1 - x0) * (y1 - y0) / (self.nx * self.ny))
        _, _, radius = self.bounds
        dr = radius / self.ny
        dtheta = 2 * np.pi / self.nx
        return np.outer(b * dr * dtheta, np.ones(self.nx))

    def transposed(self):
        """The same chart with the roles of the two grid axes exchanged."""
        if self.kind in ("rectangle", "uhp", "torus"):
            x0, x1, y0, y1 = self.bounds
            return Chart(self.kind, (y0, y1, x0, x1), self.ny, self.nx)
        raise ValueError("only rectangular grids can be transposed")


# ---------------------------------------------------------------- scalar fields


def _broadcast(val, shape):
    return np.broadcast_to(np.asarray(val, dtype=float), shape).copy()


class ScalarField:
    """Real scalar field with a jet provider.

    Subclasses implement :meth:`partials`, returning a dict keyed by
    ``(a, b)`` for the derivative ``d^a/dx^a d^b/dy^b``.
    """

    max_order = MAX_ORDER

    def partials(self, z, order=2):
        raise NotImplementedError

    def _check_order(self, order):
        if order > self.max_order:
            raise MissingJetError(f"{type(self).__name__} provides jets up to order {self.max_order}")

    def __call__(self, z):
        return self.partials(z, 0)[(0, 0)]

    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, as_field(other))])

    __radd__ = __add__

    def __neg__(self):
        return LinearCombination([(-1.0, self)])

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, as_field(other))])

    def __mul__(self, c):
        return LinearCombination([(float(c), self)])

    __rmul__ = __mul__


def as_field(obj):
    if isinstance(obj, ScalarField):
        return obj
    if isinstance(obj, (int, float, np.floating)):
        return Constant(float(obj))
    if isinstance(obj, (str, sp.Expr)):
        return SymbolicField(obj)
    raise TypeError(f"cannot interpret {obj!r} as a scalar field")


class Constant(ScalarField):
    def __init__(self, value):
        self.value = float(value)

    def partials(self, z, order=2):
        self._check_order(order)
        shape = np.shape(z)
        out = {k: np.zeros(shape) for k in _multi_indices(order)}
        out[(0, 0)] = np.full(shape, self.value)
        return out

    def __repr__(self):
        return f"Constant({self.value!r})"


class LinearCombination(ScalarField):
    """Finite sum of scaled fields; jets add linearly."""

    def __init__(self, terms):
        flat = []
        for c, f in terms:
            if isinstance(f, LinearCombination):
                flat.extend((c * c2, f2) for c2, f2 in f.terms)
            else:
                flat.append((c, f))
        self.terms = flat
        self.max_order = min((f.max_order for _, f in flat), default=MAX_ORDER)

    def partials(self, z, order=2):
        self._check_order(order)
        total = None
        for c, f in self.terms:
            p = f.partials(z, order)
            if total is None:
                total = {k: c * v for k, v in p.items()}
            else:
                for k in total:
                    total[k] = total[k] + c * p[k]
        if total is None:
            return Constant(0.0).partials(z, order)
        return total


@functools.lru_cache(maxsize=256)
def _compile_partials(expr_src):
    expr = sp.sympify(expr_src, locals={"x": _X, "y": _Y})
    funcs = {}
    for a, b in _multi_indices(MAX_ORDER):
        d = expr
        if a:
            d = sp.diff(d, _X, a)
        if b:
            d = sp.diff(d, _Y, b)
        funcs[(a, b)] = sp.lambdify((_X, _Y), sp.simplify(d) if a + b <= 1 else d, "numpy")
    return funcs


class SymbolicField(ScalarField):
    """Scalar field given by a closed-form expression in ``x`` and ``y``.

    >>> f = SymbolicField("x**2 + y**2")
    >>> float(f.partials(0.5 + 0.5j, 2)[(2, 0)])
    2.0
    """

    def __init__(self, expr):
        self.expr = str(sp.sympify(expr, locals={"x": _X, "y": _Y}))
        self._funcs = _compile_partials(self.expr)

    def partials(self, z, order=2):
        self._check_order(order)
        x, y = _as_points(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return {k: _broadcast(self._funcs[k](x, y), x.shape) for k in _multi_indices(order)}

    def __repr__(self):
        return f"SymbolicField({self.expr!r})"


# ---------------------------------------------------------------- angular profiles


class AngularProfile:
    """A function h(theta) on (0, pi) with derivatives up to order 3."""

    name = "profile"

    def derivatives(self, theta, order=3):
        raise NotImplementedError


@functools.lru_cache(maxsize=64)
def _compile_profile(expr_src):
    expr = sp.sympify(expr_src, locals={"theta": _T})
    return [sp.lambdify(_T, sp.diff(expr, _T, k), "numpy") for k in range(MAX_ORDER + 1)]


class ExpressionProfile(AngularProfile):
    """Profile given by a sympy-readable expression in ``theta``."""

    def __init__(self, expr, name=None):
        self.expr = str(sp.sympify(expr, locals={"theta": _T}))
        self.name = name or self.expr
        self._funcs = _compile_profile(self.expr)

    def derivatives(self, theta, order=3):
        theta = np.asarray(theta, dtype=float)
        return [_broadcast(self._funcs[k](theta), theta.shape) for k in range(order + 1)]


class TableProfile(AngularProfile):
    """Profile interpolated from a table by a quintic spline."""

    def __init__(self, theta, values, name="table"):
        self.theta = np.asarray(theta, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.name = name
        self._spline = make_interp_spline(self.theta, self.values, k=5)

    def derivatives(self, theta, order=3):
        theta = np.asarray(theta, dtype=float)
        return [self._spline(theta, nu=k) for k in range(order + 1)]


PROFILES = {
    "hyperbolic": "-log(sin(theta))",
    "log-sin": "-log(sin(theta))",
    "double-log-sin": "-2*log(sin(theta))",
}


def angular_profile(profile):
    """Named profile, expression string, or an existing profile."""
    if isinstance(profile, AngularProfile):
        return profile
    if profile in PROFILES:
        return ExpressionProfile(PROFILES[profile], name=profile)
    return ExpressionProfile(profile)


@functools.lru_cache(maxsize=1)
def _power_cone_template():
    # phi = -log r + H(theta) differentiated with H left abstract
    H = sp.Function("H")
    theta = sp.atan2(_Y, _X)
    phi = -sp.log(_X**2 + _Y**2) / 2 + H(theta)
    hs = sp.symbols("h0:4", real=True)
    funcs = {}
    for a, b in _multi_indices(MAX_ORDER):
        d = phi
        if a:
            d = sp.diff(d, _X, a)
        if b:
            d = sp.diff(d, _Y, b)
        mapping = {}
        for node in d.atoms(sp.Subs, sp.Derivative):
            inner = node.expr if isinstance(node, sp.Subs) else node
            if isinstance(inner, sp.Derivative) and inner.expr.func == H:
                mapping[node] = hs[inner.derivative_count]
        d = d.xreplace(mapping).subs(H(theta), hs[0])
        funcs[(a, b)] = sp.lambdify((_X, _Y, *hs), d, "numpy")
    return funcs


class PowerConeField(ScalarField):
    """phi = -log r + h(theta) on the upper half plane."""

    def __init__(self, profile):
        self.profile = angular_profile(profile)
        self._funcs = _power_cone_template()

    def partials(self, z, order=2):
        self._check_order(order)
        x, y = _as_points(z)
        hs = self.profile.derivatives(np.arctan2(y, x), MAX_ORDER)
        return {k: _broadcast(self._funcs[k](x, y, *hs), x.shape) for k in _multi_indices(order)}


# ---------------------------------------------------------------- grid fields


def _d1(arr, h, axis, periodic):
    """4th-order first derivative along ``axis``."""
    if periodic:
        r = lambda k: np.roll(arr, -k, axis=axis)  # noqa: E731
        return (r(-2) - 8 * r(-1) + 8 * r(1) - r(2)) / (12 * h)
    a = np.moveaxis(arr, axis, 0)
    out = np.empty_like(a)
    out[2:-2] = (a[:-4] - 8 * a[1:-3] + 8 * a[3:-1] - a[4:]) / (12 * h)
    out[0] = (-25 * a[0] + 48 * a[1] - 36 * a[2] + 16 * a[3] - 3 * a[4]) / (12 * h)
    out[1] = (-3 * a[0] - 10 * a[1] + 18 * a[2] - 6 * a[3] + a[4]) / (12 * h)
    out[-1] = (25 * a[-1] - 48 * a[-2] + 36 * a[-3] - 16 * a[-4] + 3 * a[-5]) / (12 * h)
    out[-2] = (3 * a[-1] + 10 * a[-2] - 18 * a[-3] + 6 * a[-4] - a[-5]) / (12 * h)
    return np.moveaxis(out, 0, axis)


class GridField(ScalarField):
    """Scalar field sampled on a uniform node grid.

    ``values`` has shape ``(ny, nx)``; node ``(j, i)`` sits at
    ``x0 + i hx, y0 + j hy``.  With ``periodic=True`` the grid covers
    ``[x0, x1) x [y0, y1)`` and derivatives wrap around.
    """

    def __init__(self, values, bounds, periodic=False):
        self.values = np.asarray(values, dtype=float)
        self.bounds = tuple(float(b) for b in bounds)
        self.periodic = bool(periodic)
        ny, nx = self.values.shape
        x0, x1, y0, y1 = self.bounds
        if periodic:
            self.hx, self.hy = (x1 - x0) / nx, (y1 - y0) / ny
        else:
            self.hx, self.hy = (x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1)
        self.x = x0 + self.hx * np.arange(nx)
        self.y = y0 + self.hy * np.arange(ny)
        self._arrays = {}
        for a, b in _multi_indices(MAX_ORDER):
            arr = self.values
            for _ in range(a):
                arr = _d1(arr, self.hx, 1, periodic)
            for _ in range(b):
                arr = _d1(arr, self.hy, 0, periodic)
            self._arrays[(a, b)] = arr
        self._interp = {}

    @classmethod
    def sample(cls, f, bounds, nx, ny, periodic=False):
        x0, x1, y0, y1 = bounds
        if periodic:
            xs = x0 + (x1 - x0) * np.arange(nx) / nx
            ys = y0 + (y1 - y0) * np.arange(ny) / ny
        else:
            xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
        xx, yy = np.meshgrid(xs, ys)
        return cls(f(xx + 1j * yy), bounds, periodic)

    def nodes(self):
        xx, yy = np.meshgrid(self.x, self.y)
        return xx + 1j * yy

    def _interpolator(self, key):
        if key not in self._interp:
            x, y, arr = self.x, self.y, self._arrays[key]
            if self.periodic:
                pad = 3
                arr = np.pad(arr, pad, mode="wrap")
                x = self.x[0] + self.hx * np.arange(-pad, len(self.x) + pad)
                y = self.y[0] + self.hy * np.arange(-pad, len(self.y) + pad)
            self._interp[key] = RegularGridInterpolator((y, x), arr, method="cubic")
        return self._interp[key]

    def partials(self, z, order=2):
        self._check_order(order)
        x, y = _as_points(z)
        if self.periodic:
            x0, x1, y0, y1 = self.bounds
            x = x0 + np.mod(x - x0, x1 - x0)
            y = y0 + np.mod(y - y0, y1 - y0)
        pts = np.stack([np.ravel(y), np.ravel(x)], axis=-1)
        out = {}
        for key in _multi_indices(order):
            out[key] = self._interpolator(key)(pts).reshape(np.shape(x))
        return out


# ---------------------------------------------------------------- jets and metrics


@dataclass(frozen=True)
class Jet:
    """Wirtinger view of a real jet.

    ``z = phi_z``, ``zz = phi_zz``, ``zzbar = phi_{z zbar}`` (real),
    ``zzz`` and ``zzzbar`` are present when order 3 was requested.
    """

    value: np.ndarray
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    zz: np.ndarray | None = None
    zzbar: np.ndarray | None = None
    zzz: np.ndarray | None = None
    zzzbar: np.ndarray | None = None

    @property
    def zbar(self):
        return np.conj(self.z)

    @property
    def zbarzbar(self):
        return np.conj(self.zz)


def wirtinger(p):
    """Assemble a :class:`Jet` from real partials (missing orders stay None)."""
    z = zz = zzbar = zzz = zzzbar = None
    if (1, 0) in p:
        z = 0.5 * (p[(1, 0)] - 1j * p[(0, 1)])
    if (2, 0) in p:
        zz = 0.25 * (p[(2, 0)] - p[(0, 2)] - 2j * p[(1, 1)])
        zzbar = 0.25 * (p[(2, 0)] + p[(0, 2)])
    if (3, 0) in p:
        zzz = 0.125 * (p[(3, 0)] - 3j * p[(2, 1)] - 3 * p[(1, 2)] + 1j * p[(0, 3)])
        zzzbar = 0.125 * ((p[(3, 0)] + p[(1, 2)]) - 1j * (p[(2, 1)] + p[(0, 3)]))
    return Jet(p[(0, 0)], p.get((1, 0)), p.get((0, 1)), z, zz, zzbar, zzz, zzzbar)


def jet(u, z, order=2):
    return wirtinger(as_field(u).partials(z, order))


_DOMAINS = {
    "plane": lambda z: np.ones(np.shape(z), bool),
    "disk": lambda z: np.abs(z) < 1,
    "uhp": lambda z: np.imag(z) > 0,
}


@dataclass(frozen=True)
class MetricField:
    """The conformal metric e^{2 phi} |dz|^2.

    ``domain`` names the open set where ``phi`` is defined (``plane``,
    ``disk`` or ``uhp``); ``complete`` flags metrics that blow up at the
    boundary of that domain.
    """

    phi: ScalarField
    chart: Chart
    name: str = "metric"
    domain: str = "plane"
    complete: bool = False
    constant_curvature: float | None = None
    params: dict = dc_field(default_factory=dict)

    def _check(self, z):
        inside = _DOMAINS[self.domain](np.asarray(z))
        if not np.all(inside):
            bad = np.asarray(z).ravel()[~np.ravel(inside)][0]
            raise OutsideChartError(f"point {bad} is outside the domain of {self.name}")

    def jet(self, z, order=2):
        self._check(z)
        return wirtinger(self.phi.partials(z, order))

    def density(self, z):
        """e^{2 phi}, the area density w.r.t. dx dy."""
        self._check(z)
        return np.exp(2 * self.phi(z))

    def matrix(self, z):
        """The metric as a stack of 2x2 matrices."""
        lam = self.density(z)
        return lam[..., None, None] * np.eye(2)

    def scaled(self, s):
        """The metric e^{2s} times this one."""
        return conformal_change(self, Constant(s))

    @property
    def is_periodic(self):
        return self.chart.kind == "torus"


def curvature(m, z):
    """Gaussian curvature K = -4 e^{-2 phi} phi_{z zbar}."""
    j = m.jet(z, 2)
    return -4 * np.exp(-2 * j.value) * j.zzbar


def curvature_z(m, z):
    """d/dz of the curvature (needs the 3-jet of phi)."""
    j = m.jet(z, 3)
    return -4 * np.exp(-2 * j.value) * (j.zzzbar - 2 * j.z * j.zzbar)


def laplacian(m, u, z):
    """Laplace-Beltrami operator 4 e^{-2 phi} u_{z zbar}."""
    j = m.jet(z, 0)
    ju = jet(u, z, 2)
    return 4 * np.exp(-2 * j.value) * ju.zzbar


def gradient_norm_sq(m, u, z):
    """|grad u|^2_g = 4 e^{-2 phi} |u_z|^2."""
    j = m.jet(z, 0)
    p = as_field(u).partials(z, 1)
    uz = 0.5 * (p[(1, 0)] - 1j * p[(0, 1)])
    return 4 * np.exp(-2 * j.value) * np.abs(uz) ** 2


def conformal_change(m, u, name=None):
    """The metric e^{2u} m."""
    u = as_field(u)
    cc = None
    if isinstance(u, Constant) and m.constant_curvature is not None:
        cc = m.constant_curvature * math.exp(-2 * u.value)
    return MetricField(
        m.phi + u,
        m.chart,
        name or f"{m.name}*exp(2u)",
        m.domain,
        m.complete,
        cc,
        dict(m.params),
    )


def sample(f, z):
    """Evaluate a scalar field or plain callable at ``z``."""
    if isinstance(f, ScalarField):
        return f(z)
    if callable(f):
        return np.asarray(f(z), dtype=float) * np.ones(np.shape(z))
    return np.asarray(f, dtype=float)


def quadrature_chart(m, chart=None):
    """The grid used for integrals against ``m``.

    Complete metrics on the unit disk get the radius clamped to
    ``1 - 3/nr`` so the integrand stays bounded.
    """
    chart = chart or m.chart
    if chart.kind == "disk" and m.complete:
        cx, cy, radius = chart.bounds
        limit = 1.0 - 3.0 / chart.ny
        if radius > limit:
            chart = Chart("disk", (cx, cy, limit), chart.nx, chart.ny)
    return chart


def quadrature(m, f=1.0, chart=None):
    """Integral of ``f dA_m`` over the chart by a fixed composite rule.

    ``f`` may be a number, a callable of complex ``z``, a scalar field, or
    an array already sampled on the chart grid.  Summation is numpy's
    pairwise reduction over the flattened grid in C order.
    """
    chart = quadrature_chart(m, chart)
    z = chart.points()
    if isinstance(f, (int, float)):
        vals = np.full(z.shape, float(f))
    else:
        vals = sample(f, z)
    if vals.shape != z.shape:
        raise ValueError(f"samples have shape {vals.shape}, grid is {z.shape}")
    integrand = vals * m.density(z) * chart.weights()
    bad = ~np.isfinite(integrand)
    if np.any(bad):
        idx = tuple(int(i[0]) for i in np.nonzero(bad))
        raise QuadratureError(f"non-finite sample at grid index {idx}, z = {z[idx]}")
    return float(np.sum(integrand.ravel()))


def richardson(coarse, fine, order=2, ratio=2.0):
    """One Richardson step for an error that scales like ``h**order``."""
    k = ratio**order
    return (k * fine - coarse) / (k - 1)


# ---------------------------------------------------------------- catalog


def torus_bump_expression(terms=None):
    """Trigonometric polynomial sum a cos(2 pi (kx x + ky y) + phase)."""
    if terms is None:
        terms = ((0.05, 1, 0, 0.0), (0.025, 1, 1, 0.5), (0.0125, 0, 2, 1.0))
    parts = [
        f"{a!r}*cos(2*pi*({kx}*x + {ky}*y) + {ph!r})"
        for a, kx, ky, ph in terms
    ]
    return " + ".join(parts) if parts else "0"


def catalog(name, **params):
    """Built-in metrics.

    ``euclidean``, ``hyperbolic-disk``, ``hyperbolic-uhp``, ``spherical``,
    ``power-cone`` (keyword ``profile``) and ``torus-bump`` (keywords
    ``terms`` or ``amplitude``).
    """
    key = name.replace("_", "-").lower()
    if key == "euclidean":
        return MetricField(Constant(0.0), Chart.rectangle(-1, 1, -1, 1), "euclidean", "plane", False, 0.0)
    if key in ("hyperbolic-disk", "disk"):
        return MetricField(
            SymbolicField("log(2/(1 - x**2 - y**2))"), Chart.disk(0, 1.0, 48, 96),
            "hyperbolic-disk", "disk", True, -1.0,
        )
    if key in ("hyperbolic-uhp", "uhp"):
        return MetricField(
            SymbolicField("-log(y)"), Chart.uhp(-1, 1, 0, 2, 65, 64), "hyperbolic-uhp", "uhp", True, -1.0,
        )
    if key == "spherical":
        return MetricField(
            SymbolicField("log(2/(1 + x**2 + y**2))"), Chart.disk(0, 2.0, 48, 96), "spherical", "plane", False, 1.0,
        )
    if key in ("power-cone", "powercone"):
        prof = angular_profile(params.get("profile", "hyperbolic"))
        return MetricField(
            PowerConeField(prof), Chart.uhp(-1, 1, 0, 2, 65, 64), f"power-cone({prof.name})", "uhp",
            True, None, {"profile": prof.name},
        )
    if key in ("torus-bump", "torus"):
        terms = params.get("terms")
        if terms is None and "amplitude" in params:
            a = float(params["amplitude"])
            terms = ((a, 1, 0, 0.0), (a / 2, 1, 1, 0.5), (a / 4, 0, 2, 1.0))
        expr = torus_bump_expression(terms)
        return MetricField(SymbolicField(expr), Chart.torus(64), "torus-bump", "plane", False, None, {"expr": expr})
    raise KeyError(f"unknown catalog metric {name!r}")


CATALOG_NAMES = (
    "euclidean",
    "hyperbolic-disk",
    "hyperbolic-uhp",
    "spherical",
    "power-cone",
    "torus-bump",
)


# ---------------------------------------------------------------- I/O


def write_grid_csv(path, values, bounds, periodic=False):
    """Write phi samples with header rows nx, ny, bounds, periodic."""
    from .io import atomic_write_text

    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    lines = [f"nx,{nx}", f"ny,{ny}", "bounds," + ",".join(repr(float(b)) for b in bounds),
             f"periodic,{int(bool(periodic))}"]
    lines += [",".join(repr(float(v)) for v in row) for row in values]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_grid_csv(path):
    """Inverse of :func:`write_grid_csv`, returning a :class:`GridField`."""
    rows = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    header = {}
    for ln in rows[:4]:
        key, *rest = ln.split(",")
        header[key] = rest
    try:
        nx, ny = int(header["nx"][0]), int(header["ny"][0])
        bounds = tuple(float(b) for b in header["bounds"])
        periodic = bool(int(header.get("periodic", ["0"])[0]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: bad grid header") from exc
    data = np.array([[float(v) for v in ln.split(",")] for ln in rows[4:]])
    if data.shape != (ny, nx):
        raise ConfigError(f"{path}: expected {ny}x{nx} samples, found {data.shape}")
    return GridField(data, bounds, periodic)


def _parse_value(text):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    try:
        return float(text)
    except ValueError:
        return text


def read_config(path):
    """Read a sectioned ``key = value`` file into nested dicts."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return {s: {k: _parse_value(v) for k, v in parser.items(s)} for s in parser.sections()}


_METRIC_KEYS = {"name", "profile", "amplitude", "csv", "scale", "domain"}


def metric_from_config(section, base_dir="."):
    """Build a metric from a ``[metric]`` config section.

    Either ``name`` (a catalog entry, with optional ``profile`` or
    ``amplitude``) or ``csv`` (a sampled phi grid) must be given; ``scale``
    multiplies the metric by e^{2 scale}.
    """
    unknown = set(section) - _METRIC_KEYS
    if unknown:
        raise ConfigError(f"unknown metric keys: {sorted(unknown)}")
    if "csv" in section:
        gf = read_grid_csv(Path(base_dir) / str(section["csv"]))
        x0, x1, y0, y1 = gf.bounds
        if gf.periodic:
            chart = Chart.torus(gf.values.shape[1], gf.values.shape[0])
        else:
            chart = Chart.rectangle(x0, x1, y0, y1, gf.values.shape[1], gf.values.shape[0])
        m = MetricField(gf, chart, f"grid:{section['csv']}", str(section.get("domain", "plane")))
    elif "name" in section:
        kw = {k: section[k] for k in ("profile", "amplitude") if k in section}
        try:
            m = catalog(str(section["name"]), **kw)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        raise ConfigError("metric section needs 'name' or 'csv'")
    if "scale" in section:
        m = m.scaled(float(section["scale"]))
    return m
