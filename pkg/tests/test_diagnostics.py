import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacuum_nozzle.background import GasParams, background_arrays, background_table
from vacuum_nozzle.diagnostics import (
    DECAY_HEADER,
    decay_fit,
    decay_series,
    entrance_mass,
    flux_drift,
    mass_flux,
    multiplier_weight,
    positivity_certificates,
    sound_speed_band,
    weighted_energy,
)
from vacuum_nozzle.errors import DomainError, InsufficientSlices
from vacuum_nozzle.march import march


def test_unperturbed_flux_analytic(trace_zero, params):
    exact = 2 * math.pi * (1 - math.cos(params.phi0)) * params.rho0 * params.q0
    np.testing.assert_allclose(mass_flux(trace_zero.slices[0], params), exact, rtol=1e-12)
    for s in trace_zero.slices:
        np.testing.assert_allclose(mass_flux(s, params), exact, rtol=1e-7)


def test_flux_at_entrance_is_entrance_mass(trace_eps, params, profiles):
    s0 = trace_eps.slices[0]
    np.testing.assert_allclose(mass_flux(s0, params), entrance_mass(trace_eps.grid, 1e-3, profiles, params), rtol=1e-14)
    assert entrance_mass(trace_eps.grid, 1e-3, profiles, params) != entrance_mass(trace_eps.grid, 0.0, profiles, params)


def test_flux_drift_small(trace_eps):
    assert flux_drift(trace_eps) < 1e-4


def test_energy_shapes_and_csv(trace_eps):
    T = [10.0, 100.0]
    rep = weighted_energy(trace_eps, 0, T)
    assert rep.terms().shape == (4, 2)
    assert np.all(rep.terms() > 0)
    assert np.all(np.diff(rep.volume_dr_term) > 0)
    rows = rep.csv_rows()
    assert rows[0] == "k,T,surface_dr,surface_Z,volume_dr,volume_Z,eps"
    assert len(rows) == 3 and rows[1].startswith("0,")
    assert len(rep.csv_rows(header=False)) == 2
    assert rep.eps == 1e-3


def test_energy_vanishes_without_perturbation(trace_zero):
    T = [10.0, 100.0]
    for k in (0, 1):
        rep = weighted_energy(trace_zero, k, T)
        assert np.max(np.abs(rep.terms())) < 1e-12


def test_energy_quadratic_in_eps(params, profiles):
    T = [5.0, 20.0]
    reps = [weighted_energy(march(profiles, e, 20.0, params, n_phi=65, r_out=T), 1, T) for e in (1e-3, 2e-3)]
    ratio = reps[1].terms() / reps[0].terms()
    np.testing.assert_allclose(ratio, 4.0, rtol=0.05)


def test_energy_errors(trace_eps, params, profiles):
    with pytest.raises(DomainError):
        weighted_energy(trace_eps, 2, [10.0])
    with pytest.raises(InsufficientSlices):
        weighted_energy(trace_eps, 0, [12.345])
    short = march(profiles, 1e-3, 1.01, params, n_phi=33, store_every=10_000)
    with pytest.raises(InsufficientSlices):
        weighted_energy(short, 0, [1.01])


def test_multiplier(params):
    w, a, ap = multiplier_weight(1.0, params)
    assert a == 2.0 and w == 2.0
    np.testing.assert_allclose(ap, -params.delta)
    r = np.logspace(0, 4, 50)
    w, a, ap = multiplier_weight(r, params)
    assert np.all(np.diff(a) < 0) and np.all(a > 1) and np.all(ap < 0)
    np.testing.assert_allclose(w, r**params.mu * a)
    with pytest.raises(DomainError):
        multiplier_weight(0.5, params)


@pytest.mark.parametrize("gamma", [1.2, 1.4, 1.6, 1.8])
def test_certificates_pass(gamma):
    p = GasParams.from_entrance(gamma=gamma)
    rep = positivity_certificates(np.logspace(0, 6, 100), p)
    assert rep.passed, rep.failures
    assert rep.min_first > 0 and rep.min_second > 0 and rep.min_margin_first > 0


@pytest.mark.parametrize("gamma", [1.2, 1.4, 1.6, 1.8])
def test_certificates_detect_large_mu(gamma):
    p = GasParams.from_entrance(gamma=gamma)
    rep = positivity_certificates(np.logspace(0, 6, 100), p, mu=p.mu + 0.5)
    assert not rep.passed


def test_certificates_accept_states(params):
    radii = np.logspace(0, 3, 20)
    a = positivity_certificates(radii, params)
    b = positivity_certificates(background_table(radii, params), params)
    np.testing.assert_array_equal(a.lhs_first, b.lhs_first)


def test_certificates_nonpositive_delta(params):
    rep = positivity_certificates(np.logspace(0, 3, 20), params, delta=0.0)
    assert not rep.passed and any("delta" in f for f in rep.failures)


def test_decay_fit_exact():
    r = np.logspace(0, 4, 60)
    fit = decay_fit(r, 3.0 * r**-0.8, (10, 1e3), "q")
    assert abs(fit.slope + 0.8) < 1e-12
    assert abs(fit.intercept - math.log(3.0)) < 1e-11
    assert fit.residual < 1e-12 and fit.n_points == 30
    assert fit.csv_row().startswith("q,1.0000000000000000e+01,")
    assert DECAY_HEADER.count(",") == fit.csv_row().count(",")


def test_decay_fit_errors():
    r = np.logspace(0, 2, 20)
    with pytest.raises(InsufficientSlices):
        decay_fit(r, r, (1.0, 1.5))
    y = r.copy()
    y[5] = 0.0
    with pytest.raises(DomainError):
        decay_fit(r, y, (1.0, 100.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.01, 100.0))
def test_decay_fit_recovers_power(k, c):
    r = np.logspace(0, 3, 25)
    fit = decay_fit(r, c * r**k, (1.0, 1e3))
    assert abs(fit.slope - k) < 1e-9


def test_decay_series_and_band(trace_eps, params):
    ds = decay_series(trace_eps)
    assert ds["r"].shape == ds["sup_dr"].shape == ds["sup_Z"].shape
    assert ds["sup_Z"][0] == 0.0 and ds["sup_dr"][0] > 0
    lo, hi = sound_speed_band(trace_eps)
    bg = background_arrays(trace_eps.radii, params)
    k = bg["c2"] * trace_eps.radii ** (2 * (params.gamma - 1))
    assert lo <= hi
    assert abs(lo / k.min() - 1) < 0.01 and abs(hi / k.max() - 1) < 0.01
