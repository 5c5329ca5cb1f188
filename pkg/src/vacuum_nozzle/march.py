"""Radial marching of the axisymmetric steady potential equation.

The flow is supersonic in r, so r plays the role of time.  The state at a
radius is the pair (Phi, V = d_r Phi) sampled on an :class:`AngularGrid`; it is
advanced by classical RK4 with ``d_r V`` obtained by solving the axisymmetric
potential equation for the second radial derivative.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .background import (
    BumpProfile,
    GasParams,
    background_arrays,
    background_potential,
)
from .errors import AbortedAt, CavitationError, HyperbolicityLoss, StepRejected
from .geometry import AngularGrid

log = logging.getLogger(__name__)

HYPERBOLICITY_FLOOR = 1e-8
CAVITATION_FLOOR = 1e-10


@dataclass(frozen=True)
class FlowSlice:
    r: float
    phi_grid: AngularGrid
    Phi: np.ndarray
    dPhi_dr: np.ndarray

    @property
    def dPhi_dphi(self) -> np.ndarray:
        return self.phi_grid.d1(self.Phi)

    def speed_sq(self) -> np.ndarray:
        return self.dPhi_dr**2 + (self.dPhi_dphi / self.r) ** 2


@dataclass(frozen=True)
class GuardRecord:
    r: float
    hyperbolicity: float  # min over nodes of (d_r Phi)^2 - c^2
    cavitation: float  # min over nodes of C0 - |grad Phi|^2 / 2


@dataclass
class MarchTrace:
    slices: list[FlowSlice]
    params: GasParams
    steps_taken: int = 0
    guard_log: list[GuardRecord] = field(default_factory=list)
    eps: float = 0.0

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.r for s in self.slices])

    @property
    def grid(self) -> AngularGrid:
        return self.slices[0].phi_grid

    def guard_minima(self) -> tuple[float, float]:
        hyp = min(g.hyperbolicity for g in self.guard_log)
        cav = min(g.cavitation for g in self.guard_log)
        return hyp, cav

    def slice_at(self, r: float) -> FlowSlice:
        idx = int(np.argmin(np.abs(self.radii - r)))
        if not math.isclose(self.slices[idx].r, r, rel_tol=1e-12):
            raise KeyError(f"no stored slice at r={r}")
        return self.slices[idx]


@dataclass(frozen=True)
class PerturbationSlice:
    r: float
    dot_Phi: np.ndarray
    d_dot_Phi_dr: np.ndarray
    d_dot_Phi_dphi: np.ndarray


def _guards(r, V, Phi_phi, params):
    bern = params.C0 - 0.5 * (V * V + (Phi_phi / r) ** 2)
    c2 = (params.gamma - 1.0) * bern
    return bern, c2, V * V - c2


def _check_guards(r, bern, hyp):
    if np.min(bern) <= CAVITATION_FLOOR:
        j = int(np.argmin(bern))
        raise CavitationError(f"C0 - |grad Phi|^2/2 = {bern[j]:.3e} at r={r:.6g}, node {j}")
    if np.min(hyp) <= HYPERBOLICITY_FLOOR:
        j = int(np.argmin(hyp))
        raise HyperbolicityLoss(f"(d_r Phi)^2 - c^2 = {hyp[j]:.3e} at r={r:.6g}, node {j}")


def rhs_second_radial(slice_: FlowSlice, params: GasParams) -> np.ndarray:
    """d_r^2 Phi at every node from the axisymmetric potential equation.

    At the axis node the singular term ``cot(phi) d_phi Phi`` is replaced by
    its limit ``d_phi^2 Phi``.
    """
    return _second_radial(slice_.r, slice_.phi_grid, slice_.Phi, slice_.dPhi_dr, params)


def _second_radial(r, grid, Phi, V, params):
    Pp = grid.d1(Phi)
    Ppp = grid.d2(Phi)
    Vp = grid.d1(V)
    bern, c2, hyp = _guards(r, V, Pp, params)
    _check_guards(r, bern, hyp)
    cot_term = np.empty_like(Pp)
    cot_term[0] = Ppp[0]
    cot_term[1:] = Pp[1:] / np.tan(grid.nodes[1:])
    r2 = r * r
    rest = (
        (Pp * Pp / r2 - c2) * Ppp / r2
        + 2.0 * V * Pp * Vp / r2
        - (2.0 * r2 * c2 + Pp * Pp) * V / (r2 * r)
        - c2 * cot_term / r2
    )
    return -rest / hyp


def _project(grid, Phi, V):
    return grid.apply_neumann(Phi), grid.apply_neumann(V)


def step(slice_: FlowSlice, dr: float, params: GasParams) -> FlowSlice:
    """One RK4 step of size ``dr`` for the system (Phi, V)' = (V, d_r^2 Phi)."""
    g = slice_.phi_grid
    r, P, V = slice_.r, slice_.Phi, slice_.dPhi_dr
    k1p, k1v = V, _second_radial(r, g, P, V, params)
    P2, V2 = _project(g, P + 0.5 * dr * k1p, V + 0.5 * dr * k1v)
    k2p, k2v = V2, _second_radial(r + 0.5 * dr, g, P2, V2, params)
    P3, V3 = _project(g, P + 0.5 * dr * k2p, V + 0.5 * dr * k2v)
    k3p, k3v = V3, _second_radial(r + 0.5 * dr, g, P3, V3, params)
    P4, V4 = _project(g, P + dr * k3p, V + dr * k3v)
    k4p, k4v = V4, _second_radial(r + dr, g, P4, V4, params)
    Pn = P + dr / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    Vn = V + dr / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    Pn, Vn = _project(g, Pn, Vn)
    bern, _, hyp = _guards(r + dr, Vn, g.d1(Pn), params)
    if np.min(bern) <= CAVITATION_FLOOR or np.min(hyp) <= HYPERBOLICITY_FLOOR:
        raise StepRejected(f"post-step guards failed at r={r + dr:.6g}")
    return FlowSlice(r + dr, g, Pn, Vn)


def stable_step(slice_: FlowSlice, params: GasParams, kappa: float = 0.5, max_rel_step: float = 0.05) -> float:
    """CFL-like step: kappa * h_phi * r * min sqrt((d_r Phi)^2 - c^2) / c.

    The angular characteristic slope of the equation is
    ``c / (r sqrt((d_r Phi)^2 - c^2))``; the step is also capped at
    ``max_rel_step * r``.
    """
    _, c2, hyp = _guards(slice_.r, slice_.dPhi_dr, slice_.dPhi_dphi, params)
    ratio = float(np.min(np.sqrt(np.maximum(hyp, 0.0)) / np.sqrt(np.maximum(c2, 1e-300))))
    dr = kappa * slice_.phi_grid.spacing * slice_.r * ratio
    return min(dr, max_rel_step * slice_.r)


def initial_slice(grid: AngularGrid, eps: float, profiles, params: GasParams) -> FlowSlice:
    """Entrance data: Phi = eps Phi0(phi), d_r Phi = q0 + eps Phi1(phi) at r = 1."""
    Phi0, Phi1 = profiles
    P = eps * np.asarray(Phi0(grid.nodes), dtype=float)
    V = params.q0 + eps * np.asarray(Phi1(grid.nodes), dtype=float)
    return FlowSlice(1.0, grid, P, V)


def default_profiles(phi0: float, center: float = 0.5, width: float = 0.3, amp0: float = 0.0, amp1: float = 1.0):
    """Bumps centred at ``center*phi0`` with half-width ``width*phi0``, zero near axis and wall."""
    return (
        BumpProfile(amp0, center * phi0, width * phi0),
        BumpProfile(amp1, center * phi0, width * phi0),
    )


def march(
    profiles,
    eps: float,
    r_max: float,
    params: GasParams,
    store_every: int = 1,
    n_phi: int = 129,
    kappa: float = 0.5,
    max_rel_step: float = 0.05,
    r_out=None,
    max_retries: int = 6,
) -> MarchTrace:
    """March the initial data from r = 1 to ``r_max``.

    Slices are stored every ``store_every`` steps, at every radius of
    ``r_out`` (hit exactly) and at ``r_max``.  A step whose guards fail is
    retried with half the step size up to ``max_retries`` times; after that
    the march raises :class:`AbortedAt` carrying the partial trace.
    """
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if not r_max > 1.0:
        raise ValueError("r_max must exceed 1")
    grid = AngularGrid(params.phi0, n_phi)
    targets = sorted({float(t) for t in (r_out if r_out is not None else ()) if 1.0 < t < r_max})
    targets.append(float(r_max))
    s = initial_slice(grid, eps, profiles, params)
    Pp = grid.d1(s.Phi)
    bern, _, hyp = _guards(1.0, s.dPhi_dr, Pp, params)
    trace = MarchTrace([s], params, 0, [GuardRecord(1.0, float(hyp.min()), float(bern.min()))], eps)
    try:
        _check_guards(1.0, bern, hyp)
    except (CavitationError, HyperbolicityLoss) as exc:
        raise AbortedAt(1.0, type(exc).__name__, trace, str(exc)) from exc
    ti = 0
    since_store = 0
    while ti < len(targets):
        target = targets[ti]
        dr = stable_step(s, params, kappa, max_rel_step)
        hit = s.r + dr >= target * (1.0 - 1e-13)
        if hit:
            dr = target - s.r
        elif s.r + 2.0 * dr > target:
            dr = 0.5 * (target - s.r)
        for attempt in range(max_retries + 1):
            try:
                new = step(s, dr, params)
                break
            except (StepRejected, CavitationError, HyperbolicityLoss) as exc:
                if attempt == max_retries:
                    raise AbortedAt(s.r, type(exc).__name__, trace, str(exc)) from exc
                hit = False
                dr *= 0.5
        if hit:
            new = FlowSlice(target, grid, new.Phi, new.dPhi_dr)
            ti += 1
        s = new
        trace.steps_taken += 1
        since_store += 1
        bern, _, hyp = _guards(s.r, s.dPhi_dr, s.dPhi_dphi, params)
        trace.guard_log.append(GuardRecord(s.r, float(hyp.min()), float(bern.min())))
        if hit or since_store >= store_every:
            trace.slices.append(s)
            since_store = 0
    log.debug("march eps=%g reached r=%g in %d steps", eps, s.r, trace.steps_taken)
    return trace


def perturbation(trace: MarchTrace) -> list[PerturbationSlice]:
    """Phi_dot = Phi - Phi_hat and its derivatives at every stored slice."""
    radii = trace.radii
    Phi_hat = background_potential(radii, trace.params)
    U_hat = background_arrays(radii, trace.params)["U_hat"]
    out = []
    for s, ph, u in zip(trace.slices, Phi_hat, U_hat):
        dot = s.Phi - ph
        out.append(PerturbationSlice(s.r, dot, s.dPhi_dr - u, s.phi_grid.d1(dot)))
    return out


def snapshot_rows(trace: MarchTrace) -> list[str]:
    """CSV rows ``r,phi,Phi,dPhi_dr,dPhi_dphi,rho,c2,mach_radial`` for every stored slice."""
    p = trace.params
    lines = ["r,phi,Phi,dPhi_dr,dPhi_dphi,rho,c2,mach_radial"]
    for s in trace.slices:
        Pp = s.dPhi_dphi
        bern = p.C0 - 0.5 * (s.dPhi_dr**2 + (Pp / s.r) ** 2)
        c2 = (p.gamma - 1.0) * bern
        rho = ((p.gamma - 1.0) / p.gamma * bern) ** (1.0 / (p.gamma - 1.0))
        mach = s.dPhi_dr / np.sqrt(c2)
        for row in zip(s.phi_grid.nodes, s.Phi, s.dPhi_dr, Pp, rho, c2, mach):
            lines.append(",".join(f"{v:.16e}" for v in (s.r,) + row))
    return lines
