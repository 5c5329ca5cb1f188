"""Radial background flow in the conical nozzle and its linearization coefficients.

The background is the purely radial supersonic flow ``(rho_hat(r), U_hat(r))``
fixed by mass conservation ``r**2 * rho * U = rho0 * q0`` and Bernoulli's law
``U**2/2 + gamma/(gamma-1) * rho**(gamma-1) = C0`` with ``C0 = 1``.  Density
decays like ``r**-2``, the sound speed squared like ``r**(2(1-gamma))`` and the
speed tends to the limit speed ``sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchError, CavitationError, DomainError, NoConvergence

C0 = 1.0

_CONSISTENCY_TOL = 1e-12


def default_delta(gamma: float) -> float:
    """Multiplier decay exponent: half of the largest admissible value."""
    sigma = min(1.0, 2.0 * (gamma - 1.0))
    return 0.5 * min(gamma - 1.0, sigma - (gamma - 1.0))


def entrance_density(gamma: float, q0: float) -> float:
    """Density forced at the entrance by Bernoulli's law with C0 = 1."""
    return ((gamma - 1.0) / gamma * (C0 - 0.5 * q0 * q0)) ** (1.0 / (gamma - 1.0))


@dataclass(frozen=True)
class GasParams:
    """Gas and nozzle parameters with the derived weight exponents.

    Use :meth:`from_entrance` unless you need to pass every field by hand; the
    constructor validates the same invariants either way.
    """

    gamma: float
    q0: float
    rho0: float
    phi0: float
    C0: float = C0
    mu: float = field(default=float("nan"))
    sigma: float = field(default=float("nan"))
    delta: float = field(default=float("nan"))

    def __post_init__(self):
        g = self.gamma
        if not 1.0 < g < 2.0:
            raise DomainError(f"gamma must lie in (1, 2), got {g}")
        if not 0.0 < self.phi0 < 0.5 * math.pi:
            raise DomainError(f"phi0 must lie in (0, pi/2), got {self.phi0}")
        if self.C0 != 1.0:
            raise DomainError("the Bernoulli constant is normalised to C0 = 1")
        if not (self.q0 > 0.0 and self.rho0 > 0.0):
            raise DomainError("q0 and rho0 must be positive")
        bern = 0.5 * self.q0**2 + g / (g - 1.0) * self.rho0 ** (g - 1.0)
        if abs(bern - self.C0) > _CONSISTENCY_TOL:
            raise DomainError(
                f"entrance state violates Bernoulli's law: {bern!r} != {self.C0}"
            )
        c2 = g * self.rho0 ** (g - 1.0)
        if not self.q0**2 > c2:
            raise DomainError(
                f"entrance flow is not supersonic: q0^2={self.q0**2:.6g} <= c^2={c2:.6g}"
            )
        sigma = min(1.0, 2.0 * (g - 1.0))
        mu = 4.0 * g - 6.0
        if math.isnan(self.mu):
            object.__setattr__(self, "mu", mu)
        elif abs(self.mu - mu) > 1e-14:
            raise DomainError(f"mu is fixed to 4*gamma-6 = {mu}, got {self.mu}")
        if math.isnan(self.sigma):
            object.__setattr__(self, "sigma", sigma)
        elif abs(self.sigma - sigma) > 1e-14:
            raise DomainError(f"sigma is fixed to min(1, 2(gamma-1)) = {sigma}")
        if math.isnan(self.delta):
            object.__setattr__(self, "delta", default_delta(g))
        dmax = min(g - 1.0, sigma - (g - 1.0))
        if not 0.0 < self.delta <= dmax + 1e-15:
            raise DomainError(f"delta must lie in (0, {dmax:.6g}], got {self.delta}")

    @classmethod
    def from_entrance(
        cls,
        gamma: float = 1.4,
        q0: float = 1.2,
        phi0: float = math.pi / 6,
        delta: float | None = None,
    ) -> "GasParams":
        if not 1.0 < gamma < 2.0:
            raise DomainError(f"gamma must lie in (1, 2), got {gamma}")
        if not 0.0 < q0 < math.sqrt(2.0 * C0):
            raise DomainError(f"q0 must lie in (0, sqrt(2)), got {q0}")
        rho0 = entrance_density(gamma, q0)
        return cls(
            gamma=gamma,
            q0=q0,
            rho0=rho0,
            phi0=phi0,
            delta=float("nan") if delta is None else delta,
        )

    @property
    def mass_rate(self) -> float:
        """rho0 * q0, the conserved value of r^2 rho U."""
        return self.rho0 * self.q0

    @property
    def c2_entrance(self) -> float:
        return self.gamma * self.rho0 ** (self.gamma - 1.0)


def density_from_speed_sq(speed_sq, params: GasParams):
    """Density from Bernoulli's law given |grad Phi|^2.

    Accepts scalars or arrays.  Raises CavitationError when the speed exceeds
    the limit speed sqrt(2*C0).
    """
    s = np.asarray(speed_sq, dtype=float)
    if np.any(s < 0.0):
        raise DomainError("speed_sq must be nonnegative")
    if np.any(s > 2.0 * params.C0):
        raise CavitationError(
            f"speed^2={float(np.max(s)):.17g} exceeds the limit 2*C0={2.0 * params.C0}"
        )
    g = params.gamma
    base = (g - 1.0) / g * (params.C0 - 0.5 * s)
    rho = np.power(base, 1.0 / (g - 1.0))
    if np.ndim(rho) == 0:
        return float(rho)
    return rho


def sound_speed_sq_from_speed_sq(speed_sq, params: GasParams):
    """c^2 = gamma rho^(gamma-1) = (gamma-1)(C0 - speed^2/2), unchecked."""
    return (params.gamma - 1.0) * (params.C0 - 0.5 * np.asarray(speed_sq, dtype=float))


@dataclass(frozen=True)
class BackgroundState:
    r: float
    rho_hat: float
    U_hat: float
    c2: float
    dU_dr: float
    drho_dr: float
    P1: float
    P2: float
    dP1_dr: float
    dP2_dr: float


def _rhs_derivatives(r, rho, U, c2, params):
    D = U * U - c2
    drho = -2.0 * params.mass_rate * U / (r**3 * D)
    dU = 2.0 * U * c2 / (r * D)
    return drho, dU


def _coefficients(r, U, c2, gamma):
    D = U * U - c2
    U2 = U * U
    P1 = c2 / D
    P2 = 2.0 * ((gamma - 1.0) * U2 * U2 + c2 * c2 + U2 * c2) / (D * D)
    core = (gamma - 1.0) * U2 + 2.0 * c2
    dP1 = -2.0 * U2 * c2 * core / (r * D**3)
    dP2 = -4.0 * U2 * c2 * core * ((2.0 * gamma - 1.0) * U2 + 3.0 * c2) / (r * D**4)
    return P1, P2, dP1, dP2


def background_derivatives(state: BackgroundState) -> tuple[float, float]:
    """(drho_dr, dU_dr) from the background ODE form."""
    return state.drho_dr, state.dU_dr


def linearization_coefficients(state: BackgroundState) -> tuple[float, float, float, float]:
    """(P1, P2, dP1_dr, dP2_dr) of the linearized operator at ``state.r``.

    ``P1 = c^2/(U^2-c^2)`` and
    ``P2 = 2((gamma-1)U^4 + c^4 + U^2 c^2)/(U^2-c^2)^2``.  The radial
    derivatives are the exact closed forms obtained by differentiating these
    along the background, with ``D = U^2 - c^2``::

        P1' = -2 U^2 c^2 ((gamma-1)U^2 + 2c^2) / (r D^3)
        P2' = -4 U^2 c^2 ((gamma-1)U^2 + 2c^2)((2gamma-1)U^2 + 3c^2) / (r D^4)
    """
    return state.P1, state.P2, state.dP1_dr, state.dP2_dr


def _eliminated(U, r, params):
    # Bernoulli residual after eliminating rho through r^2 rho U = rho0 q0
    g = params.gamma
    rho = params.mass_rate / (r * r * U)
    return 0.5 * U * U + g / (g - 1.0) * rho ** (g - 1.0) - params.C0


def _bisect_speed(r, params, tol=1e-16, maxiter=200):
    lo, hi = params.q0, math.sqrt(2.0 * params.C0)
    if _eliminated(lo, r, params) >= 0.0:
        return lo
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if _eliminated(mid, r, params) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    return 0.5 * (lo + hi)


def _newton(r, rho, U, params, tol, maxiter=60):
    g = params.gamma
    m = params.mass_rate
    r2 = r * r
    for _ in range(maxiter):
        f1 = r2 * rho * U - m
        f2 = 0.5 * U * U + g / (g - 1.0) * rho ** (g - 1.0) - params.C0
        if abs(f1) <= tol * m and abs(f2) <= tol:
            return rho, U
        c2 = g * rho ** (g - 1.0)
        det = r2 * (U * U - c2)
        if det <= 0.0:
            raise NoConvergence(f"Jacobian lost positivity at r={r}")
        drho = (U * f1 - r2 * rho * f2) / det
        dU = (r2 * U * f2 - g * rho ** (g - 2.0) * f1) / det
        step = 1.0
        while rho - step * drho <= 0.0:
            step *= 0.5
            if step < 1e-12:
                raise NoConvergence(f"density left (0, inf) at r={r}")
        rho -= step * drho
        U -= step * dU
    raise NoConvergence(f"Newton did not converge at r={r}")


def solve_background(
    r: float,
    params: GasParams,
    guess: tuple[float, float] | None = None,
    tol: float = 1e-12,
) -> BackgroundState:
    """Background state at radius ``r >= 1``.

    Newton's method on the mass and Bernoulli residuals, started from
    ``guess = (rho, U)`` when given (continuation from a neighbouring radius),
    otherwise from a bisection estimate on the supersonic branch.  A failed
    Newton run falls back to bisection.
    """
    r = float(r)
    if not r >= 1.0:
        raise DomainError(f"background is defined for r >= 1, got {r}")
    if r == 1.0:
        rho, U = params.rho0, params.q0
    else:
        if guess is None:
            U0 = _bisect_speed(r, params, tol=1e-10)
            guess = (params.mass_rate / (r * r * U0), U0)
        try:
            rho, U = _newton(r, guess[0], guess[1], params, tol)
        except NoConvergence:
            U = _bisect_speed(r, params)
            rho, U = _newton(r, params.mass_rate / (r * r * U), U, params, tol)
    g = params.gamma
    c2 = g * rho ** (g - 1.0)
    if U < params.q0 * (1.0 - 1e-12) or U * U <= c2:
        raise BranchError(f"subsonic root at r={r}: U={U}, c^2={c2}")
    drho, dU = _rhs_derivatives(r, rho, U, c2, params)
    P1, P2, dP1, dP2 = _coefficients(r, U, c2, g)
    return BackgroundState(r, rho, U, c2, dU, drho, P1, P2, dP1, dP2)


def background_table(radii, params: GasParams, tol: float = 1e-12) -> list[BackgroundState]:
    """Background states at each radius, solved by continuation in r.

    Radii need not be sorted; continuation follows the sorted order.
    """
    radii = np.asarray(radii, dtype=float)
    order = np.argsort(radii, kind="stable")
    out: list[BackgroundState | None] = [None] * len(radii)
    guess = None
    for idx in order:
        st = solve_background(radii[idx], params, guess=guess, tol=tol)
        guess = (st.rho_hat, st.U_hat)
        out[idx] = st
    return out  # type: ignore[return-value]


def background_arrays(radii, params: GasParams) -> dict[str, np.ndarray]:
    """Column arrays (r, rho, U, c2, dU, drho, P1, P2, dP1, dP2) for ``radii``."""
    states = background_table(radii, params)
    keys = ("r", "rho_hat", "U_hat", "c2", "dU_dr", "drho_dr", "P1", "P2", "dP1_dr", "dP2_dr")
    return {k: np.array([getattr(s, k) for s in states]) for k in keys}


def background_potential(radii, params: GasParams, order: int = 8) -> np.ndarray:
    """Phi_hat(r) = int_1^r U_hat(s) ds at each radius (Gauss-Legendre in log r)."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 1.0):
        raise DomainError("background potential is defined for r >= 1")
    xg, wg = np.polynomial.legendre.leggauss(order)
    targets = np.unique(radii)
    # panels of width <= 0.05 in log r between consecutive targets
    edges = [1.0]
    for t in targets:
        if t <= edges[-1]:
            continue
        n = max(1, math.ceil(math.log(t / edges[-1]) / 0.05))
        inner = np.exp(np.linspace(math.log(edges[-1]), math.log(t), n + 1))[1:-1]
        edges.extend(inner)
        edges.append(float(t))
    edges = np.array(edges)
    a, b = edges[:-1], edges[1:]
    nodes = 0.5 * (b - a)[:, None] * xg[None, :] + 0.5 * (a + b)[:, None]
    U = background_arrays(nodes.ravel(), params)["U_hat"].reshape(nodes.shape)
    panel = 0.5 * (b - a) * (U @ wg)
    cum = np.concatenate([[0.0], np.cumsum(panel)])
    return cum[np.searchsorted(edges, radii)]


def background_csv_rows(states) -> list[str]:
    """Rows for the background table CSV, header included."""
    lines = ["r,rho,U,c2,P1,P2,dP1,dP2"]
    for s in states:
        vals = (s.r, s.rho_hat, s.U_hat, s.c2, s.P1, s.P2, s.dP1_dr, s.dP2_dr)
        lines.append(",".join(f"{v:.16e}" for v in vals))
    return lines


# ---------------------------------------------------------------------------
# Initial perturbation profiles


@dataclass(frozen=True)
class BumpProfile:
    """amplitude * exp(-1/(1 - ((phi - center)/width)^2)) on |phi - center| < width.

    A center of 0 gives a profile even in phi about the axis.
    """

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0.0:
            raise DomainError("bump width must be positive")

    def _s(self, phi):
        return (np.asarray(phi, dtype=float) - self.center) / self.width

    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width

    def __call__(self, phi):
        s = self._s(phi)
        q = 1.0 - s * s
        inside = q > 0.0
        qs = np.where(inside, q, 1.0)
        return np.where(inside, self.amplitude * np.exp(-1.0 / qs), 0.0)

    def derivative(self, phi):
        s = self._s(phi)
        q = 1.0 - s * s
        inside = q > 0.0
        qs = np.where(inside, q, 1.0)
        val = self.amplitude * np.exp(-1.0 / qs) * (-2.0 * s / (qs * qs)) / self.width
        return np.where(inside, val, 0.0)


def initial_density_profile(phi, eps: float, profiles, params: GasParams):
    """Entrance density rho_0^eps(phi) of the perturbed data.

    ``profiles = (Phi0, Phi1)``: callables, ``Phi0`` also providing
    ``derivative``.  The speed squared at r = 1 is
    ``(q0 + eps Phi1)^2 + eps^2 Phi0'^2``.
    """
    Phi0, Phi1 = profiles
    g = params.gamma
    p1 = np.asarray(Phi1(phi), dtype=float)
    d0 = np.asarray(Phi0.derivative(phi), dtype=float)
    brace = g / (g - 1.0) * params.rho0 ** (g - 1.0) - 0.5 * (
        2.0 * params.q0 * eps * p1 + eps**2 * p1**2 + eps**2 * d0**2
    )
    if np.any(brace <= 0.0):
        raise CavitationError("initial density brace is nonpositive")
    rho = ((g - 1.0) / g) ** (1.0 / (g - 1.0)) * brace ** (1.0 / (g - 1.0))
    if np.ndim(rho) == 0:
        return float(rho)
    return rho
