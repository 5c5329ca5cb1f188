"""Conserved quantities, decay fits, multiplier certificates and weighted energies.

Everything here is a pure function of a :class:`MarchTrace` or of background
states.  The energy terms follow the weighted functional of the global
stability estimate; for axisymmetric data the rotation fields collapse to the
single angular derivative, so ``|Z u|^2`` is realized as ``(d_phi u)^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .background import (
    BackgroundState,
    GasParams,
    background_arrays,
    background_table,
    density_from_speed_sq,
    initial_density_profile,
)
from .errors import DomainError, InsufficientSlices
from .march import FlowSlice, MarchTrace, perturbation, rhs_second_radial


# ---------------------------------------------------------------------------
# Mass flux


def mass_flux(slice_: FlowSlice, params: GasParams) -> float:
    """2 pi r^2 int_0^phi0 rho d_r Phi sin(phi) dphi through the sphere of radius r."""
    rho = density_from_speed_sq(slice_.speed_sq(), params)
    g = slice_.phi_grid
    return float(2.0 * math.pi * slice_.r**2 * g.integrate(rho * slice_.dPhi_dr * np.sin(g.nodes)))


def entrance_mass(grid, eps: float, profiles, params: GasParams) -> float:
    """m_eps = 2 pi int rho_0^eps(phi) (q0 + eps Phi1(phi)) sin(phi) dphi."""
    phi = grid.nodes
    rho = initial_density_profile(phi, eps, profiles, params)
    Phi1 = profiles[1]
    return float(2.0 * math.pi * grid.integrate(rho * (params.q0 + eps * Phi1(phi)) * np.sin(phi)))


def flux_drift(trace: MarchTrace) -> float:
    """max |flux(r)/flux(1) - 1| over the stored slices."""
    f = np.array([mass_flux(s, trace.params) for s in trace.slices])
    return float(np.max(np.abs(f / f[0] - 1.0)))


# ---------------------------------------------------------------------------
# Weighted energies


@dataclass(frozen=True)
class EnergyReport:
    k: int
    T_values: np.ndarray
    surface_dr_term: np.ndarray
    surface_Z_term: np.ndarray
    volume_dr_term: np.ndarray
    volume_Z_term: np.ndarray
    eps: float

    def terms(self) -> np.ndarray:
        """Array of shape (4, len(T_values))."""
        return np.vstack([self.surface_dr_term, self.surface_Z_term, self.volume_dr_term, self.volume_Z_term])

    def csv_rows(self, header: bool = True) -> list[str]:
        lines = ["k,T,surface_dr,surface_Z,volume_dr,volume_Z,eps"] if header else []
        for i, T in enumerate(self.T_values):
            vals = (T, self.surface_dr_term[i], self.surface_Z_term[i], self.volume_dr_term[i], self.volume_Z_term[i], self.eps)
            lines.append(f"{self.k}," + ",".join(f"{v:.16e}" for v in vals))
        return lines


def _densities(trace: MarchTrace, k: int):
    """Angular integrals int (...)^2 2 pi r^2 sin(phi) dphi of the dr and Z integrands per slice."""
    grid = trace.grid
    sin = np.sin(grid.nodes)
    pert = perturbation(trace)
    radii = trace.radii
    dU = background_arrays(radii, trace.params)["dU_dr"] if k == 1 else None
    dr_int, z_int = [], []
    for i, (s, p) in enumerate(zip(trace.slices, pert)):
        r = s.r
        if k == 0:
            fd = p.d_dot_Phi_dr**2
            fz = (p.d_dot_Phi_dphi / r) ** 2
        else:
            Vphi = grid.d1(s.dPhi_dr)  # d_phi d_r Phi_dot, the background is phi independent
            Phi_rr = rhs_second_radial(s, trace.params) - dU[i]
            fd = Phi_rr**2 + (Vphi / r) ** 2
            w_r = Vphi / r - p.d_dot_Phi_dphi / r**2
            w_phi = grid.d2(s.Phi) / r
            fz = (np.abs(w_r) + np.abs(w_phi) / r) ** 2
        dr_int.append(2.0 * math.pi * r * r * grid.integrate(fd * sin))
        z_int.append(2.0 * math.pi * r * r * grid.integrate(fz * sin))
    return radii, np.array(dr_int), np.array(z_int)


def weighted_energy(trace: MarchTrace, k: int, T_values, eps: float | None = None) -> EnergyReport:
    """The four terms of the weighted energy at each radius in ``T_values``.

    Surface terms use weights ``T^(mu+2k)`` and ``T^(mu-2gamma+2k)``; volume
    terms integrate ``r^(mu-1-delta+2k)`` and ``r^(mu+1-2gamma+2k)`` over
    ``1 <= r <= T`` by the trapezoid rule on the stored slices.  Every ``T``
    must be a stored radius.  Only k in {0, 1} is supported.
    """
    if k not in (0, 1):
        raise DomainError("weighted_energy supports k = 0 and k = 1")
    T_values = np.atleast_1d(np.asarray(T_values, dtype=float))
    if len(trace.slices) < 3:
        raise InsufficientSlices("need at least three stored slices")
    p = trace.params
    mu, g, dl = p.mu, p.gamma, p.delta
    radii, dr_int, z_int = _densities(trace, k)
    vol_dr = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(radii) * _pair_sum(radii ** (mu - 1 - dl + 2 * k) * dr_int))])
    vol_z = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(radii) * _pair_sum(radii ** (mu + 1 - 2 * g + 2 * k) * z_int))])
    idx = []
    for T in T_values:
        j = int(np.argmin(np.abs(radii - T)))
        if not math.isclose(radii[j], T, rel_tol=1e-12):
            raise InsufficientSlices(f"no stored slice at T={T}")
        idx.append(j)
    idx = np.array(idx)
    return EnergyReport(
        k=k,
        T_values=T_values,
        surface_dr_term=T_values ** (mu + 2 * k) * dr_int[idx],
        surface_Z_term=T_values ** (mu - 2 * g + 2 * k) * z_int[idx],
        volume_dr_term=vol_dr[idx],
        volume_Z_term=vol_z[idx],
        eps=trace.eps if eps is None else eps,
    )


def _pair_sum(y):
    return y[1:] + y[:-1]


# ---------------------------------------------------------------------------
# Multiplier and positivity certificates


def multiplier_weight(r, params: GasParams, mu: float | None = None, delta: float | None = None):
    """(r^mu a(r), a(r), a'(r)) with a = 1 + r^-delta."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise DomainError("the multiplier is defined for r >= 1")
    mu = params.mu if mu is None else mu
    delta = params.delta if delta is None else delta
    a = 1.0 + r ** (-delta)
    a_prime = -delta * r ** (-delta - 1.0)
    return r**mu * a, a, a_prime


@dataclass(frozen=True)
class CertificateReport:
    radii: np.ndarray
    lhs_first: np.ndarray  # (P2 - (mu+2)/2) a - r a'/2
    margin_first: np.ndarray  # lhs_first - delta r^-delta / 2
    lhs_second: np.ndarray  # -(mu P1 + r P1') a - r a' P1
    mu: float
    delta: float

    @property
    def min_first(self) -> float:
        """min of lhs_first * r^delta."""
        return float(np.min(self.lhs_first * self.radii**self.delta))

    @property
    def min_margin_first(self) -> float:
        return float(np.min(self.margin_first))

    @property
    def min_second(self) -> float:
        """min of lhs_second * r^(2(gamma-1)), stored pre-normalized."""
        return float(np.min(self.lhs_second))

    @property
    def failures(self) -> list[str]:
        out = []
        if not self.delta > 0.0:
            out.append(f"delta = {self.delta} is not positive; the first certificate loses its decay margin")
        if not self.min_first > 0.0:
            out.append(f"normalized first certificate min = {self.min_first:.6g} <= 0")
        if not self.min_margin_first > 0.0:
            out.append(f"first certificate margin min = {self.min_margin_first:.6g} <= 0")
        if not self.min_second > 0.0:
            out.append(f"normalized second certificate min = {self.min_second:.6g} <= 0")
        return out

    @property
    def passed(self) -> bool:
        return not self.failures


def positivity_certificates(table, params: GasParams, mu: float | None = None, delta: float | None = None) -> CertificateReport:
    """Evaluate both multiplier positivity conditions on a background table.

    ``table`` is a sequence of :class:`BackgroundState` or an array of radii.
    ``mu``/``delta`` override the parameter values to probe violations.
    """
    table = list(table)
    if table and not isinstance(table[0], BackgroundState):
        table = background_table(np.asarray(table, dtype=float), params)
    r = np.array([s.r for s in table])
    P1 = np.array([s.P1 for s in table])
    P2 = np.array([s.P2 for s in table])
    dP1 = np.array([s.dP1_dr for s in table])
    mu = params.mu if mu is None else float(mu)
    delta = params.delta if delta is None else float(delta)
    _, a, ap = multiplier_weight(r, params, mu, delta)
    lhs1 = (P2 - 0.5 * (mu + 2.0)) * a - 0.5 * r * ap
    margin = lhs1 - 0.5 * delta * r ** (-delta)
    lhs2 = (-(mu * P1 + r * dP1) * a - r * ap * P1) * r ** (2.0 * (params.gamma - 1.0))
    return CertificateReport(r, lhs1, margin, lhs2, mu, delta)


# ---------------------------------------------------------------------------
# Decay fits


@dataclass(frozen=True)
class DecayFit:
    quantity: str
    r_lo: float
    r_hi: float
    slope: float
    intercept: float
    residual: float
    n_points: int

    def csv_row(self) -> str:
        return f"{self.quantity},{self.r_lo:.16e},{self.r_hi:.16e},{self.slope:.16e},{self.residual:.16e}"


DECAY_HEADER = "quantity,r_lo,r_hi,slope,residual"


def decay_fit(r, y, window, quantity: str = "y") -> DecayFit:
    """Least-squares slope of log y against log r for r in ``window``.

    The residual is the root-mean-square deviation in log y.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    sel = (r >= lo * (1 - 1e-12)) & (r <= hi * (1 + 1e-12))
    if sel.sum() < 8:
        raise InsufficientSlices(f"decay fit on [{lo}, {hi}] needs at least 8 samples, got {int(sel.sum())}")
    ys = y[sel]
    if np.any(~(ys > 0.0)):
        raise DomainError("decay fit requires positive samples")
    lr, ly = np.log(r[sel]), np.log(ys)
    (slope, intercept), res, *_ = np.polyfit(lr, ly, 1, full=True)
    resid = math.sqrt(float(res[0]) / len(lr)) if len(res) else 0.0
    return DecayFit(quantity, float(lo), float(hi), float(slope), float(intercept), resid, int(sel.sum()))


def decay_series(trace: MarchTrace) -> dict[str, np.ndarray]:
    """sup_phi |d_r Phi_dot| and sup_phi |d_phi Phi_dot| / r at every stored slice."""
    pert = perturbation(trace)
    return {
        "r": trace.radii,
        "sup_dr": np.array([np.max(np.abs(p.d_dot_Phi_dr)) for p in pert]),
        "sup_Z": np.array([np.max(np.abs(p.d_dot_Phi_dphi)) / p.r for p in pert]),
    }


def sound_speed_band(trace: MarchTrace) -> tuple[float, float]:
    """(min, max) of c^2 r^(2(gamma-1)) over all nodes of all stored slices."""
    p = trace.params
    lo, hi = math.inf, -math.inf
    for s in trace.slices:
        c2 = (p.gamma - 1.0) * (p.C0 - 0.5 * s.speed_sq())
        v = c2 * s.r ** (2.0 * (p.gamma - 1.0))
        lo, hi = min(lo, float(v.min())), max(hi, float(v.max()))
    return lo, hi
