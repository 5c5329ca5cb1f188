import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacuum_nozzle.background import (
    BumpProfile,
    GasParams,
    background_arrays,
    background_csv_rows,
    background_derivatives,
    background_potential,
    background_table,
    default_delta,
    density_from_speed_sq,
    entrance_density,
    initial_density_profile,
    linearization_coefficients,
    solve_background,
)
from vacuum_nozzle.errors import BranchError, CavitationError, DomainError

import oracles


def test_default_params(params):
    assert params.gamma == 1.4
    assert params.q0 == 1.2
    np.testing.assert_allclose(params.mu, -0.4, atol=1e-15)
    np.testing.assert_allclose(params.sigma, 0.8, atol=1e-15)
    np.testing.assert_allclose(params.delta, 0.2, atol=1e-15)
    bern = 0.5 * params.q0**2 + params.gamma / (params.gamma - 1) * params.rho0 ** (params.gamma - 1)
    assert abs(bern - 1.0) < 1e-14
    assert params.q0**2 > params.c2_entrance


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(gamma=1.0),
        dict(gamma=2.0),
        dict(gamma=2.5),
        dict(phi0=0.0),
        dict(phi0=math.pi / 2),
        dict(q0=0.3),  # subsonic
        dict(q0=1.5),  # beyond the limit speed
        dict(delta=0.0),
        dict(delta=0.5),
    ],
)
def test_params_rejected(kwargs):
    with pytest.raises(DomainError):
        GasParams.from_entrance(**kwargs)


def test_params_inconsistent_bernoulli():
    with pytest.raises(DomainError):
        GasParams(gamma=1.4, q0=1.2, rho0=0.002, phi0=0.5)
    with pytest.raises(DomainError):
        GasParams(gamma=1.4, q0=1.2, rho0=entrance_density(1.4, 1.2), phi0=0.5, mu=0.0)


def test_default_delta_interior():
    for g in (1.1, 1.3, 1.5, 1.7, 1.9):
        sigma = min(1.0, 2 * (g - 1))
        d = default_delta(g)
        assert 0 < d < min(g - 1, sigma - (g - 1))


def test_density_examples(params):
    assert density_from_speed_sq(2.0, params) == 0.0
    np.testing.assert_allclose(density_from_speed_sq(0.0, params), oracles.density_hp(0.0, 1.4), rtol=1e-14)
    np.testing.assert_allclose(density_from_speed_sq(0.0, params), (2 / 7) ** 2.5, rtol=1e-14)
    np.testing.assert_allclose(density_from_speed_sq(params.q0**2, params), params.rho0, rtol=1e-13)


def test_density_errors(params):
    with pytest.raises(CavitationError):
        density_from_speed_sq(2.0 + 1e-9, params)
    with pytest.raises(DomainError):
        density_from_speed_sq(-1.0, params)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_density_monotone(a, b):
    params = GasParams.from_entrance()
    lo, hi = sorted((a, b))
    assert density_from_speed_sq(lo, params) >= density_from_speed_sq(hi, params)
    assert density_from_speed_sq(lo, params) >= 0.0


def test_density_continuous_at_vacuum(params):
    s = 2.0 - np.logspace(-2, -12, 11)
    rho = density_from_speed_sq(s, params)
    assert np.all(np.diff(rho) < 0)
    assert rho[-1] < 1e-25


def test_entrance_state_exact(params):
    st_ = solve_background(1.0, params)
    assert st_.rho_hat == params.rho0 and st_.U_hat == params.q0


@pytest.mark.parametrize("r", [1.5, 2.0, 10.0, 1e3, 1e6])
def test_matches_brent_oracle(params, r):
    st_ = solve_background(r, params)
    rho, U = oracles.background_brentq(r, 1.4, 1.2)
    np.testing.assert_allclose(st_.U_hat, U, rtol=1e-12)
    np.testing.assert_allclose(st_.rho_hat, rho, rtol=1e-10)


def test_matches_ode_oracle(params):
    radii = np.logspace(0, 3, 30)
    rho, U = oracles.background_ode(radii, 1.4, 1.2)
    a = background_arrays(radii, params)
    np.testing.assert_allclose(a["U_hat"], U, rtol=1e-9)
    np.testing.assert_allclose(a["rho_hat"], rho, rtol=1e-6)


def test_residuals_and_branch(params):
    for st_ in background_table(np.logspace(0, 6, 50), params):
        assert abs(st_.r**2 * st_.rho_hat * st_.U_hat - params.mass_rate) < 1e-10 * params.mass_rate
        bern = 0.5 * st_.U_hat**2 + 1.4 / 0.4 * st_.rho_hat**0.4
        assert abs(bern - 1.0) < 1e-12
        assert st_.U_hat >= params.q0 and st_.U_hat**2 > st_.c2


def test_domain_error_below_entrance(params):
    with pytest.raises(DomainError):
        solve_background(0.5, params)


def test_subsonic_guess_recovers_supersonic_branch(params):
    # a guess on the subsonic side must not leak through
    st_ = solve_background(3.0, params, guess=(0.05, 0.3))
    assert st_.U_hat > params.q0


def test_branch_error_exists():
    assert issubclass(BranchError, ArithmeticError)


def test_limit_speed(params):
    st_ = solve_background(1e6, params)
    assert abs(st_.U_hat - math.sqrt(2)) < 10 * 1e6 ** (2 * (1 - 1.4))


def test_derivatives_signs_and_fd(params):
    for r in (1.0, 1.7, 12.0, 400.0):
        st_ = solve_background(r, params)
        drho, dU = background_derivatives(st_)
        assert dU > 0 and drho < 0
        if r > 1.0:
            h = 1e-4 * r
            up, dn = solve_background(r + h, params), solve_background(r - h, params)
            np.testing.assert_allclose((up.U_hat - dn.U_hat) / (2 * h), dU, rtol=1e-6)
            np.testing.assert_allclose((up.rho_hat - dn.rho_hat) / (2 * h), drho, rtol=1e-6)


def test_dU_decay_rate(params):
    radii = np.logspace(2, 6, 20)
    a = background_arrays(radii, params)
    scaled = a["dU_dr"] * radii ** (2 * 1.4 - 1)
    assert np.all(np.isfinite(scaled)) and scaled.max() / scaled.min() < 2.0


def test_coefficients_entrance(params):
    st_ = solve_background(1.0, params)
    c2 = 1.4 * params.rho0**0.4
    np.testing.assert_allclose(st_.P1, c2 / (params.q0**2 - c2), rtol=1e-13)


def test_coefficient_derivatives_symbolic_oracle(params):
    d1, d2 = oracles.coefficient_derivative_functions(1.4)
    for r in (1.0, 3.0, 50.0, 1e4):
        st_ = solve_background(r, params)
        _, _, dP1, dP2 = linearization_coefficients(st_)
        np.testing.assert_allclose(dP1, d1(st_.U_hat, st_.c2, r), rtol=1e-12)
        np.testing.assert_allclose(dP2, d2(st_.U_hat, st_.c2, r), rtol=1e-12)


@pytest.mark.parametrize("gamma", [1.2, 1.4, 1.6, 1.8])
def test_coefficient_derivatives_fd(gamma):
    p = GasParams.from_entrance(gamma=gamma)
    for r in (1.5, 20.0, 3e3):
        h = 1e-4 * r
        st_, up, dn = (solve_background(x, p) for x in (r, r + h, r - h))
        np.testing.assert_allclose((up.P1 - dn.P1) / (2 * h), st_.dP1_dr, rtol=1e-5)
        np.testing.assert_allclose((up.P2 - dn.P2) / (2 * h), st_.dP2_dr, rtol=1e-5)


def test_coefficient_signs_and_limit(params):
    radii = np.logspace(0, 6, 100)
    a = background_arrays(radii, params)
    assert np.all(a["P1"] > 0) and np.all(a["dP1_dr"] < 0) and np.all(a["P2"] > 0)
    big = radii >= 1e2
    scaled = np.abs(a["P2"][big] - 0.8) * radii[big] ** 0.8
    assert scaled.max() < 1.0


def test_monotonicity(params):
    a = background_arrays(np.logspace(0, 6, 200), params)
    assert np.all(np.diff(a["U_hat"]) > 0)
    assert np.all(np.diff(a["rho_hat"]) < 0)
    assert np.all(np.diff(a["U_hat"] ** 2 - a["c2"]) > 0)


def test_table_order_independent(params):
    radii = np.array([50.0, 2.0, 1.0, 700.0])
    t = background_table(radii, params)
    assert [s.r for s in t] == list(radii)
    for s in t:
        ref = solve_background(s.r, params)
        np.testing.assert_allclose([s.rho_hat, s.U_hat, s.P1, s.P2], [ref.rho_hat, ref.U_hat, ref.P1, ref.P2], rtol=1e-11)


def test_potential_quadrature(params):
    radii = np.array([1.0, 2.0, 10.0, 100.0])
    phi = background_potential(radii, params)
    assert phi[0] == 0.0
    # independent composite Simpson on a fine log grid
    for r, val in zip(radii[1:], phi[1:]):
        s = np.linspace(0.0, math.log(r), 4001)
        f = background_arrays(np.exp(s), params)["U_hat"] * np.exp(s)
        h = s[1] - s[0]
        simpson = h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())
        np.testing.assert_allclose(val, simpson, rtol=1e-10)


def test_csv_rows(params):
    rows = background_csv_rows(background_table([1.0, 2.0], params))
    assert rows[0] == "r,rho,U,c2,P1,P2,dP1,dP2"
    fields = rows[1].split(",")
    assert len(fields) == 8
    assert float(fields[0]) == 1.0 and float(fields[2]) == 1.2
    assert all("e" in f for f in fields)


def test_bump_profile():
    b = BumpProfile(2.0, 0.25, 0.1)
    assert b(0.25) == pytest.approx(2.0 * math.exp(-1.0))
    assert b(0.1) == 0.0 and b(0.4) == 0.0
    x = np.linspace(0.16, 0.34, 7)
    h = 1e-6
    np.testing.assert_allclose(b.derivative(x), (b(x + h) - b(x - h)) / (2 * h), rtol=1e-6, atol=1e-9)
    with pytest.raises(DomainError):
        BumpProfile(1.0, 0.2, 0.0)


def test_initial_density(params, profiles):
    phi = np.linspace(0, params.phi0, 50)
    np.testing.assert_allclose(initial_density_profile(phi, 0.0, profiles, params), params.rho0, rtol=1e-13)
    lo, hi = profiles[1].support()
    outside = phi[(phi <= lo) | (phi >= hi)]
    np.testing.assert_allclose(initial_density_profile(outside, 1e-3, profiles, params), params.rho0, rtol=1e-13)
    # term-by-term arithmetic oracle with a nonzero potential perturbation
    prof = (BumpProfile(0.7, 0.25, 0.15), BumpProfile(1.0, 0.25, 0.15))
    eps = 1e-3
    for x in (0.2, 0.25, 0.33):
        p1, d0 = float(prof[1](x)), float(prof[0].derivative(x))
        speed_sq = (1.2 + eps * p1) ** 2 + (eps * d0) ** 2
        np.testing.assert_allclose(initial_density_profile(x, eps, prof, params), oracles.density_hp(speed_sq, 1.4), rtol=1e-12)


def test_initial_density_negative_brace(params):
    prof = (BumpProfile(0.0, 0.25, 0.15), BumpProfile(1.0, 0.25, 0.15))
    with pytest.raises(CavitationError):
        initial_density_profile(np.array([0.25]), 2.0, prof, params)
