"""Conical domain, angular/radial grids, Z-field calculus and weighted inequalities.

Points of the nozzle are written in spherical coordinates
``x = r (cos(theta) sin(phi), sin(theta) sin(phi), cos(phi))`` with
``r >= 1`` and ``0 <= phi <= phi0``.  The rotation fields are

    Z1 = x1 d2 - x2 d1,   Z2 = x2 d3 - x3 d2,   Z3 = x3 d1 - x1 d3.

With this orientation the commutators are ``[Z1, Z2] = -Z3`` and cyclic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .errors import DegenerateInput, DomainError, ResolutionError

# ---------------------------------------------------------------------------
# Finite-difference weights


def fd_weights(offsets, order: int) -> np.ndarray:
    """Weights w with sum_k w_k u(x + offsets_k h) ~ h^order u^(order)(x)."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    A = np.vander(offsets, n, increasing=True).T
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


_C1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# wall value making the one-sided 4th-order derivative vanish
_WALL = np.array([-3.0, 16.0, -36.0, 48.0]) / 25.0


@dataclass(frozen=True)
class AngularGrid:
    """Uniform grid on [0, phi0] with both endpoints.

    ``d1``/``d2`` are fourth-order accurate.  The axis uses even reflection
    (exact for axisymmetric smooth data).  At the wall the value is slaved to
    the interior by :meth:`apply_neumann` and near-wall rows use one-sided
    stencils.
    """

    phi0: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    spacing: float = field(init=False)

    def __post_init__(self):
        if self.n < 18:
            raise DomainError("an angular grid needs at least 16 interior nodes")
        if not 0.0 < self.phi0 < 0.5 * math.pi:
            raise DomainError("phi0 must lie in (0, pi/2)")
        object.__setattr__(self, "nodes", np.linspace(0.0, self.phi0, self.n))
        object.__setattr__(self, "spacing", self.phi0 / (self.n - 1))

    @cached_property
    def _matrices(self):
        n, h = self.n, self.spacing
        D1 = np.zeros((n, n))
        D2 = np.zeros((n, n))
        N = n - 1
        for i in range(0, N - 1):
            for k, off in enumerate(range(-2, 3)):
                j = abs(i + off)  # even reflection across the axis
                D1[i, j] += _C1[k]
                D2[i, j] += _C2[k]
        offs = np.arange(-4, 2)
        D1[N - 1, N - 5 : N + 1] = fd_weights(offs, 1)
        D2[N - 1, N - 5 : N + 1] = fd_weights(offs, 2)
        D1[N, N - 4 : N + 1] = fd_weights(np.arange(-4, 1), 1)
        # u''(wall) from the quintic through u_{N-4..N} with u'(wall) = 0
        offs = np.arange(-4, 1, dtype=float)
        A = np.zeros((6, 6))
        A[:5] = np.vander(offs, 6, increasing=True)
        A[5, 1] = 1.0
        inv = np.linalg.inv(A)
        D2[N, N - 4 : N + 1] = 2.0 * inv[2, :5]
        return D1 / h, D2 / (h * h)

    def apply_neumann(self, u: np.ndarray) -> np.ndarray:
        """Copy of ``u`` (nodes on the last axis) with the wall value slaved to the interior."""
        u = np.array(u, dtype=float, copy=True)
        u[..., -1] = u[..., -5:-1] @ _WALL
        return u

    def d1(self, u: np.ndarray) -> np.ndarray:
        return u @ self._matrices[0].T

    def d2(self, u: np.ndarray) -> np.ndarray:
        return u @ self._matrices[1].T

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Weights for int_0^phi0 f dphi from nodal samples.

        The samples are interpolated by a not-a-knot cubic spline, which is
        integrated exactly with 3-point Gauss-Legendre on every cell.
        """
        xg, wg = np.polynomial.legendre.leggauss(3)
        a, b = self.nodes[:-1], self.nodes[1:]
        pts = (0.5 * (b - a)[:, None] * xg + 0.5 * (a + b)[:, None]).ravel()
        wts = (0.5 * (b - a)[:, None] * wg).ravel()
        eye = np.eye(self.n)
        vals = CubicSpline(self.nodes, eye, axis=0, bc_type="not-a-knot")(pts)
        return wts @ vals

    def integrate(self, f: np.ndarray) -> np.ndarray:
        """int_0^phi0 f(phi) dphi over the last axis."""
        return f @ self.quadrature_weights


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray
    policy: str = "log"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 1 or nodes[0] != 1.0:
            raise DomainError("radial grid must start at r = 1")
        if np.any(np.diff(nodes) <= 0.0):
            raise DomainError("radial grid must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def log_spaced(cls, r_max: float, n: int) -> "RadialGrid":
        nodes = np.logspace(0.0, math.log10(r_max), n)
        nodes[0] = 1.0
        return cls(nodes, "log")


# ---------------------------------------------------------------------------
# Z-field calculus on closed-form functions

X1, X2, X3 = X = sp.symbols("x1 x2 x3", real=True)
R_EXPR = sp.sqrt(X1**2 + X2**2 + X3**2)

_PAIRS = {1: (X1, X2), 2: (X2, X3), 3: (X3, X1)}


def z_apply(i: int, expr):
    """Z_i applied to a sympy expression in (x1, x2, x3)."""
    a, b = _PAIRS[i]
    return a * sp.diff(expr, b) - b * sp.diff(expr, a)


def radial_derivative(expr):
    return (X1 * sp.diff(expr, X1) + X2 * sp.diff(expr, X2) + X3 * sp.diff(expr, X3)) / R_EXPR


def _as_expr(f):
    return f.expr if isinstance(f, TestFunction) else sp.sympify(f)


def _point(point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if p.shape != (3,):
        raise DomainError("point must be 3-D")
    if float(np.dot(p, p)) == 0.0:
        raise DomainError("Z-fields and d_r are singular at the origin")
    return p


def _eval(expr, p):
    return _evals([expr], p)[0]


def _evals(exprs, p) -> np.ndarray:
    # direct substitution: cheaper than compiling for one-off point values
    sub = {x: sp.Float(float(v), 30) for x, v in zip(X, p)}
    return np.array([float(sp.sympify(e).xreplace(sub).evalf(30)) for e in exprs])


def z_field_identity_check(f, g, point) -> float:
    """|grad f . grad g - (d_r f d_r g + r^-2 sum_i Z_i f Z_i g)| at ``point``."""
    p = _point(point)
    f, g = _as_expr(f), _as_expr(g)
    lhs = sum(sp.diff(f, x) * sp.diff(g, x) for x in X)
    rhs = radial_derivative(f) * radial_derivative(g) + sum(
        z_apply(i, f) * z_apply(i, g) for i in (1, 2, 3)
    ) / R_EXPR**2
    a, b = _evals([lhs, rhs], p)
    return abs(float(a) - float(b))


def _levi_civita(i, j, k):
    return (i - j) * (j - k) * (k - i) / 2


def commutator_check(i: int, j: int, f, point) -> float:
    """|[Z_i, Z_j] f + eps_ijk Z_k f| at ``point`` (k the remaining index)."""
    p = _point(point)
    f = _as_expr(f)
    comm = z_apply(i, z_apply(j, f)) - z_apply(j, z_apply(i, f))
    if i == j:
        return abs(_eval(comm, p))
    k = 6 - i - j
    return abs(_eval(comm + _levi_civita(i, j, k) * z_apply(k, f), p))


def radial_commutator_check(i: int, f, point) -> float:
    """|[Z_i, d_r] f| + |Z_i r| at ``point``."""
    p = _point(point)
    f = _as_expr(f)
    comm = z_apply(i, radial_derivative(f)) - radial_derivative(z_apply(i, f))
    return abs(_eval(comm, p)) + abs(_eval(z_apply(i, R_EXPR), p))


def z_bound_slack(f, point) -> float:
    """max_i |Z_i f| - r |grad f| at ``point``; never positive beyond rounding."""
    p = _point(point)
    f = _as_expr(f)
    exprs = [z_apply(i, f) for i in (1, 2, 3)] + [sp.diff(f, x) for x in X]
    vals = _evals(exprs, p)
    r = float(np.linalg.norm(p))
    return float(np.max(np.abs(vals[:3])) - r * np.linalg.norm(vals[3:]))


# ---------------------------------------------------------------------------
# Extension across r = T


@dataclass(frozen=True)
class ExtensionCoefficients:
    lam: tuple[float, float, float, float]

    def moment_residuals(self) -> np.ndarray:
        j = np.arange(1, 5, dtype=float)
        return np.array([abs(np.sum((-j) ** k * np.array(self.lam)) - 1.0) for k in range(4)])


def extension_coefficients() -> ExtensionCoefficients:
    """Weights with sum_j (-j)^k lam_j = 1 for k = 0..3."""
    j = np.arange(1, 5, dtype=float)
    A = np.array([(-j) ** k for k in range(4)])
    lam = np.linalg.solve(A, np.ones(4))
    return ExtensionCoefficients(tuple(float(x) for x in lam))


def cutoff(s):
    """Smooth step: 1 for s <= 1, 0 for s >= 9/8."""
    s = np.asarray(s, dtype=float)
    t = np.clip((9.0 / 8.0 - s) * 8.0, 0.0, 1.0)

    def psi(x):
        xs = np.where(x > 0.0, x, 1.0)
        return np.where(x > 0.0, np.exp(-1.0 / xs), 0.0)

    a, b = psi(t), psi(1.0 - t)
    return a / (a + b)


def reflect_sum(u, r, T, lam):
    """sum_j lam_j u(T + j(T - r)): the reflected part of the extension, before cutoff."""
    r = np.asarray(r, dtype=float)
    return sum(l * u(T + j * (T - r)) for j, l in zip(range(1, 5), lam))


def extend(r_samples, u_samples, T: float, r_out) -> np.ndarray:
    """Extension of radially sampled data from [1, T] to [1, 9T/8].

    ``u_samples`` has the radial index first (any trailing shape).  Inside
    [1, T] the result is the samples' spline interpolant; beyond T it is the
    cutoff times the weighted sum of reflected values, and it vanishes for
    r >= 9T/8.  Reflected points below the first sample raise ResolutionError.
    """
    r_samples = np.asarray(r_samples, dtype=float)
    u_samples = np.asarray(u_samples, dtype=float)
    r_out = np.asarray(r_out, dtype=float)
    if r_samples[-1] < T * (1.0 - 1e-14) or r_samples[0] > T:
        raise ResolutionError("samples must cover r = T")
    lam = extension_coefficients().lam
    outside = r_out > T
    lowest = T - 4.0 * (np.minimum(r_out[outside], 9.0 * T / 8.0) - T)
    if lowest.size and lowest.min() < r_samples[0] - 1e-12 * T:
        raise ResolutionError(
            f"reflected point r={lowest.min():.6g} lies below the first sample {r_samples[0]:.6g}"
        )
    spline = CubicSpline(r_samples, u_samples, axis=0, bc_type="not-a-knot")
    out = np.zeros(r_out.shape + u_samples.shape[1:])
    out[~outside] = spline(r_out[~outside])
    ro = r_out[outside]
    active = ro < 9.0 * T / 8.0
    ra = ro[active]
    vals = reflect_sum(spline, ra, T, lam)
    eta = cutoff(ra / T).reshape(ra.shape + (1,) * (u_samples.ndim - 1))
    block = np.zeros(ro.shape + u_samples.shape[1:])
    block[active] = eta * vals
    out[outside] = block
    return out


def extension_jumps(derivs_at_T, lam=None) -> np.ndarray:
    """|d^k/dr^k of the reflected sum at T+ minus u^(k)(T)| for k = 0..3."""
    lam = extension_coefficients().lam if lam is None else lam
    j = np.arange(1, 5, dtype=float)
    d = np.asarray(derivs_at_T, dtype=float)
    return np.array([abs(np.sum(np.array(lam) * (-j) ** k) * d[k] - d[k]) for k in range(4)])


def extension_sup_cap(beta: float) -> float:
    """T-independent bound on |r^beta E u|_inf / |r^beta u|_inf from the reflection geometry."""
    lam = extension_coefficients().lam
    return float(np.sum(np.abs(lam))) * (9.0 / 4.0) ** max(beta, 0.0)


# ---------------------------------------------------------------------------
# Weighted interpolation inequalities


@dataclass(frozen=True)
class CNKVerdict:
    admissible: bool
    failures: tuple[str, ...] = ()

    def __bool__(self):
        return self.admissible


def cnk_conditions_check(s, tau, p, alpha, beta, q, a, j, m, n, tol=1e-12) -> CNKVerdict:
    """Admissibility of a parameter set for the weighted interpolation inequality

        | |x|^tau D^j v |_{L^s} <= C | |x|^alpha D^m v |_{L^p}^a | |x|^beta v |_{L^q}^(1-a).

    ``q = math.inf`` is allowed.  Returns a verdict listing every violated
    condition.
    """
    inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
    fails = []
    if not (p >= 1 and q >= 1):
        fails.append("p, q >= 1")
    if not (j / m - tol <= a <= 1 + tol):
        fails.append("j/m <= a <= 1")
    if not s > 0:
        fails.append("s > 0")
    if not inv(s) + tau / n > 0:
        fails.append("1/s + tau/n > 0")
    if not inv(p) + alpha / n > 0:
        fails.append("1/p + alpha/n > 0")
    if not inv(q) + beta / n > 0:
        fails.append("1/q + beta/n > 0")
    gap = m - j - n * inv(p)
    if gap > -tol and abs(gap - round(gap)) <= tol:
        fails.append("m - j - n/p is a nonnegative integer")
    lhs = inv(s) + (tau - j) / n
    rhs = a * (inv(p) + (alpha - m) / n) + (1 - a) * (inv(q) + beta / n)
    if abs(lhs - rhs) > tol:
        fails.append("dimensional balance")
    if tau > a * alpha + (1 - a) * beta + tol:
        fails.append("tau <= a alpha + (1-a) beta")
    if abs(inv(q) + beta / n - (inv(p) + (alpha - m) / n)) <= tol:
        if not a * (alpha - m) + (1 - a) * beta + j <= tau + tol:
            fails.append("a(alpha-m) + (1-a) beta + j <= tau")
    if abs(a - j / m) <= tol and abs(tau - (a * alpha + (1 - a) * beta)) > tol:
        fails.append("tau = a alpha + (1-a) beta when a = j/m")
    return CNKVerdict(not fails, tuple(fails))


INEQUALITY_IDS = ("2.12", "2.13", "2.14", "2.15")


def inequality_parameters(which: str, gamma: float, sigma: float, delta: float) -> dict:
    """(tau, alpha, beta) with s=4, p=2, q=inf, a=1/2, j=1, m=2, n=3."""
    g = gamma
    table = {
        "2.12": ((2 * g + 2 * sigma - 1) / 4, (2 * g - 1) / 2, sigma),
        "2.13": ((4 * g + 1) / 4, (2 * g + 1) / 2, g),
        "2.14": ((8 * g - 7 - delta) / 4, (4 * g - 3 - delta) / 2, 2 * (g - 1)),
        "2.15": ((8 * g - 3 - delta) / 4, (4 * g - 1 - delta) / 2, 2 * g - 1),
    }
    if which not in table:
        raise DomainError(f"unknown inequality {which!r}; expected one of {INEQUALITY_IDS}")
    tau, alpha, beta = table[which]
    return dict(s=4, tau=tau, p=2, alpha=alpha, beta=beta, q=math.inf, a=0.5, j=1, m=2, n=3)


class TestFunction:
    """Closed-form function on the nozzle with analytic gradient and Hessian.

    ``expr`` is a sympy expression in (x1, x2, x3) and the symbols listed in
    ``param_syms``; ``values`` binds those symbols.  ``radial_support`` is an
    interval outside of which the function vanishes identically; evaluation
    returns exact zeros there.
    """

    __test__ = False  # not a pytest class

    def __init__(self, expr, radial_support, param_syms=(), values=(), axisymmetric=True):
        self.expr = expr
        self.param_syms = tuple(param_syms)
        self.values = tuple(float(v) for v in values)
        self.radial_support = (float(radial_support[0]), float(radial_support[1]))
        self.axisymmetric = axisymmetric
        self._fns = _compile(expr, self.param_syms)

    def bind(self, values) -> "TestFunction":
        tf = object.__new__(TestFunction)
        tf.__dict__.update(self.__dict__)
        tf.values = tuple(float(v) for v in values)
        return tf

    def with_support(self, lo, hi) -> "TestFunction":
        tf = self.bind(self.values)
        tf.radial_support = (float(lo), float(hi))
        return tf

    def value(self, pts: np.ndarray) -> np.ndarray:
        """Function values only, at Cartesian points of shape (..., 3)."""
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        lo, hi = self.radial_support
        inside = (r > lo) & (r < hi)
        val = np.zeros(pts.shape[:-1])
        if np.any(inside):
            p = pts[inside]
            with np.errstate(all="ignore"):
                v = self._fns[0](p[:, 0], p[:, 1], p[:, 2], *self.values)
            val[inside] = np.nan_to_num(np.broadcast_to(np.asarray(v, dtype=float), p.shape[:1]))
        return val

    def evaluate(self, pts: np.ndarray):
        """(value, gradient, hessian) at Cartesian points of shape (..., 3).

        The gradient is the compiled symbolic gradient.  The Hessian is its
        complex-step derivative, which is exact to rounding (no subtractive
        cancellation) and avoids compiling fourth derivatives of the
        derived families.
        """
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        lo, hi = self.radial_support
        inside = (r > lo) & (r < hi)
        shape = pts.shape[:-1]
        val = np.zeros(shape)
        grad = np.zeros(shape + (3,))
        hess = np.zeros(shape + (3, 3))
        if np.any(inside):
            p = pts[inside]
            m = p.shape[0]
            v, g = self._fns
            with np.errstate(all="ignore"):
                vv = np.broadcast_to(np.asarray(v(p[:, 0], p[:, 1], p[:, 2], *self.values), dtype=float), (m,))
                gg = self._grad(g, p.astype(complex)).real
                hh = np.empty((m, 3, 3))
                for k in range(3):
                    q = p.astype(complex)
                    q[:, k] += 1j * _CSTEP
                    hh[:, :, k] = self._grad(g, q).imag / _CSTEP
            val[inside] = np.nan_to_num(vv)
            grad[inside] = np.nan_to_num(gg)
            hess[inside] = np.nan_to_num(0.5 * (hh + np.swapaxes(hh, -1, -2)))
        return val, grad, hess

    def _grad(self, g, q):
        vals = tuple(complex(v) for v in self.values)
        comps = g(q[:, 0], q[:, 1], q[:, 2], *vals)
        return np.stack([np.broadcast_to(np.asarray(c, dtype=complex), q.shape[:1]) for c in comps], -1)


_CSTEP = 1e-30


@lru_cache(maxsize=64)
def _compile(expr, param_syms):
    args = list(X) + list(param_syms)
    grad = [sp.diff(expr, x) for x in X]
    return (
        sp.lambdify(args, expr, "numpy", cse=True),
        sp.lambdify(args, grad, "numpy", cse=True),
    )


_C, _W, _B = sp.symbols("c w b", real=True)


def bump_family_expr():
    """exp(-1/(1-((r-c)/w)^2)) * (1 + b (x3/r)^2) with parameters (c, w, b)."""
    s = (R_EXPR - _C) / _W
    return sp.exp(-1 / (1 - s**2)) * (1 + _B * (X3 / R_EXPR) ** 2), (_C, _W, _B)


def bump_test_function(center, width, b=0.0) -> TestFunction:
    expr, syms = bump_family_expr()
    return TestFunction(expr, (center - width, center + width), syms, (center, width, b))


def derived_test_function(kind: str, base: TestFunction) -> TestFunction:
    """Apply (1/r) Z3, d_r Z3 or d_r^2 to a closed-form test function."""
    e = base.expr
    if kind == "Z/r":
        new, axi = z_apply(3, e) / R_EXPR, False
    elif kind == "drZ":
        new, axi = radial_derivative(z_apply(3, e)), False
    elif kind == "dr2":
        new, axi = radial_derivative(radial_derivative(e)), True
    else:
        raise DomainError(f"unknown derivation {kind!r}")
    tf = TestFunction(new, base.radial_support, base.param_syms, base.values, axisymmetric=axi)
    return tf


def _spherical_points(r, phi, theta):
    R, P, Th = np.meshgrid(r, phi, theta, indexing="ij")
    sp_ = np.sin(P)
    pts = np.stack([R * np.cos(Th) * sp_, R * np.sin(Th) * sp_, R * np.cos(P)], -1)
    return pts, R, P


def _gl_nodes(a, b, panels, order=8):
    xg, wg = np.polynomial.legendre.leggauss(order)
    e = np.linspace(a, b, panels + 1)
    lo, hi = e[:-1], e[1:]
    x = (0.5 * (hi - lo)[:, None] * xg + 0.5 * (hi + lo)[:, None]).ravel()
    w = (0.5 * (hi - lo)[:, None] * wg).ravel()
    return x, w


def _radial_range(u: TestFunction, T):
    lo = max(1.0, u.radial_support[0])
    hi = min(T, u.radial_support[1])
    if hi <= lo:
        raise DegenerateInput("test function vanishes on D_T")
    return lo, hi


def _quadrature_data(u: TestFunction, T, phi0, level, n_theta):
    """(jacobian weights, R, |grad u|^2, |grad^2 u|^2) on the level's Gauss-Legendre grid."""
    lo, hi = _radial_range(u, T)
    r, wr = _gl_nodes(lo, hi, 16 * 2**level)
    phi, wphi = _gl_nodes(0.0, phi0, 4 * 2**level)
    theta = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    pts, R, P = _spherical_points(r, phi, theta)
    _, g, h = u.evaluate(pts)
    jac = (wr[:, None, None] * wphi[None, :, None] * (2 * np.pi / n_theta)) * R**2 * np.sin(P)
    return jac, R, np.sum(g * g, -1), np.sum(h * h, (-1, -2))


def _sup_data(u: TestFunction, T, phi0, level, n_theta):
    """(R, |u|) on a grid with ten points per quadrature panel."""
    lo, hi = _radial_range(u, T)
    r = np.linspace(lo, hi, 160 * 2**level + 1)
    phi = np.linspace(0.0, phi0, 40 * 2**level + 1)
    theta = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    pts, R, _ = _spherical_points(r, phi, theta)
    return R, np.abs(u.value(pts))


def inequality_ratios(
    u: TestFunction,
    gamma: float,
    sigma: float,
    delta: float,
    T: float,
    phi0: float = math.pi / 6,
    level: int = 0,
    which=INEQUALITY_IDS,
) -> dict[str, float]:
    """LHS/RHS of the weighted interpolation inequalities for ``u`` on D_T.

    For each inequality with exponents (tau, alpha, beta)::

        LHS = | r^tau grad u |_{L^4},
        RHS = | r^alpha grad^2 u |_{L^2}^(1/2) | r^beta u |_{L^inf}^(1/2).

    Integrals use tensor Gauss-Legendre panels (order 8) in (r, phi) with
    ``16 * 2**level`` radial and ``4 * 2**level`` angular panels and the
    trapezoid rule in theta (one node for axisymmetric u; eight nodes
    otherwise, exact for the rotation-derived families whose integrands are
    trigonometric polynomials of degree <= 4).  The sup norm is a maximum over
    a uniform grid with ten points per panel.  One evaluation of u serves all
    requested inequalities.
    """
    if u.radial_support[1] > T * (1.0 + 1e-12):
        raise DomainError("test function must vanish for r >= T")
    n_theta = 1 if u.axisymmetric else 8
    jac, R, grad2, hess2 = _quadrature_data(u, T, phi0, level, n_theta)
    Rs, absu = _sup_data(u, T, phi0, level, n_theta)
    out = {}
    for w in which:
        prm = inequality_parameters(w, gamma, sigma, delta)
        i4 = float(np.sum(jac * R ** (4 * prm["tau"]) * grad2**2))
        i2 = float(np.sum(jac * R ** (2 * prm["alpha"]) * hess2))
        sup = float(np.max(Rs ** prm["beta"] * absu))
        if i2 <= 0.0 or sup <= 0.0 or i4 <= 0.0:
            raise DegenerateInput("a norm in the inequality vanishes")
        out[w] = i4**0.25 / (i2**0.25 * sup**0.5)
    return out


def inequality_ratio(
    which: str,
    u: TestFunction,
    gamma: float,
    sigma: float,
    delta: float,
    T: float,
    phi0: float = math.pi / 6,
    level: int = 0,
) -> float:
    """Single-inequality form of :func:`inequality_ratios`."""
    inequality_parameters(which, gamma, sigma, delta)  # validates the id
    return inequality_ratios(u, gamma, sigma, delta, T, phi0, level, (which,))[which]


def random_bump_family(n_members: int, T_values, seed: int) -> list[tuple[float, float, float, float]]:
    """Seeded (T, center, width, b) tuples for bumps centred in (1, T) and vanishing for r >= T."""
    rng = np.random.default_rng(seed)
    out = []
    T_values = list(T_values)
    for k in range(n_members):
        T = float(T_values[k % len(T_values)])
        width = float(rng.uniform(0.15, 0.45) * (T - 1.0))
        center = float(rng.uniform(1.0 + 0.3 * width, T - width))
        b = float(rng.uniform(-0.5, 1.0))
        out.append((T, center, width, b))
    return out

