import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singreen import verify, zero_range
from singreen.errors import DomainError, SingularConfigurationError
from singreen.potentials import SingularityClass, power_exp
from singreen.zero_range import omega, regularize, solve_beta

SUB, COUL, SUPER = (SingularityClass.SUB_COULOMB, SingularityClass.COULOMB,
                    SingularityClass.SUPER_COULOMB)
KZ = [0.0, 0.0, 1.0]


def test_solve_beta_examples():
    assert solve_beta(0.0, 0.7 + 0.1j, 3.0) == 0.7 + 0.1j
    assert solve_beta(5.0, 0.7 + 0.1j, 0.0) == 0.7 + 0.1j
    assert solve_beta(2.0, 1.0, 0.25 + 0.1j) == pytest.approx(1 / (1.5 + 0.2j), rel=1e-15)


def test_solve_beta_pole():
    with pytest.raises(SingularConfigurationError):
        solve_beta(-2.0, 1.0, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.complex_numbers(max_magnitude=3),
       st.complex_numbers(max_magnitude=3))
def test_fixed_point_property(lam, p0, B):
    if abs(1 + lam * B) < 1e-3:
        return
    b = solve_beta(lam, p0, B)
    assert b == pytest.approx(p0 - lam * B * b, abs=1e-10 * (1 + abs(b)))


def test_omega_examples():
    r = np.geomspace(1e-5, 1e-1, 9)
    assert np.allclose(omega(SUB, 3.0, 0.5, r), r, rtol=1e-15)
    assert np.allclose(omega(COUL, 0.0, 1.0, r), r, rtol=1e-15)
    # 1/omega = 100 + (-4) * 0.01^(-1/2) = 60
    assert omega(SUPER, 1.0, 1.5, 0.01) == pytest.approx(1 / 60.0, rel=1e-14)
    assert omega("Coulomb", 2.0, None, 0.1) == pytest.approx(1 / (10 + 2 * math.log(0.1)))


def test_omega_critical_radius():
    # 1/r - 4 r^(-1/2) vanishes at r = 1/16
    assert zero_range.critical_radius(SUPER, 1.0, 1.5) == pytest.approx(1 / 16, rel=1e-10)
    with pytest.raises(DomainError, match="r_c = 0.0625"):
        omega(SUPER, 1.0, 1.5, 0.1)
    assert math.isinf(zero_range.critical_radius(COUL, 1.0, 1.0))
    with pytest.raises(DomainError):
        omega(SUB, 1.0, 0.5, 0.0)


@pytest.mark.parametrize("cls,v0,rho", [(SUB, 1.0, 0.5), (COUL, 1.0, 1.0), (COUL, -1.0, 1.0),
                                        (SUPER, 1.0, 1.25), (SUPER, -1.0, 1.5)])
def test_omega_monotone(cls, v0, rho):
    r = zero_range.default_phi_window(1.0, 200)
    w = omega(cls, v0, rho, np.geomspace(1e-10, 1e-2, 400))
    assert np.all(np.diff(w) > 0)
    assert np.all(np.diff(omega(cls, v0, rho, r)) > 0)


@pytest.mark.parametrize("cls,v0,rho", [(SUB, 0.0, 0.5), (COUL, 1.0, 1.0), (SUPER, 1.0, 1.25)])
def test_regularize_exact_synthetic(cls, v0, rho):
    r = np.geomspace(1e-8, 1e-6, 30)
    alpha, beta = -0.8 + 0.3j, 0.4 - 1.1j
    ph = alpha / (4 * np.pi * omega(cls, v0, rho, r)) + beta
    reg = regularize((r, ph), cls, v0, rho)
    assert reg.beta == pytest.approx(beta, rel=1e-6)
    assert reg.intercept == pytest.approx(alpha / (4 * np.pi), rel=1e-9)
    assert not reg.flagged


def test_regularize_pairs_and_min_samples():
    r = np.geomspace(1e-8, 1e-6, 12)
    reg = regularize(list(zip(r, np.full(12, 2.0 + 0j))), SUB, 0.0, 0.5)
    assert complex(reg) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        regularize((r[:8], np.ones(8)), SUB, 0.0, 0.5)


def test_regularize_wrong_omega_flags():
    r = np.geomspace(1e-8, 1e-6, 30)
    ph = 1.0 / (4 * np.pi * omega(COUL, 1.0, 1.0, r)) + 0.5
    assert regularize((r, ph), SUB, 1.0, 1.0).flagged


def test_phi0_free_is_one():
    assert zero_range.phi0_at_origin(power_exp(0.0, 0.5), KZ) == 1.0


def test_phi0_sub_limit_is_angle_independent():
    s = power_exp(1.0, 0.5)
    lim = zero_range.phi0_at_origin(s, KZ)
    for c in (0.9, -0.4):
        v = zero_range.phi0(s, KZ, 1e-6, cos_angle=c)
        assert abs(v - lim) < 1e-6 * abs(lim)


def test_phi0_origin_born_route_weak():
    s = power_exp(0.01, 0.5)
    ode = zero_range.phi0_at_origin(s, KZ)
    born = zero_range.phi0_at_origin(s, KZ, method="born")
    # the first iterate misses terms of second order in V
    assert abs(ode - born) < abs(1 - ode) ** 2


def test_phi0_rejects_long_range_away_from_origin():
    from singreen.potentials import coulomb
    with pytest.raises(DomainError):
        zero_range.phi0(coulomb(1.0), KZ, 0.1)


def test_lambda_zero_closure_returns_phi0():
    st_, reg, _ = verify.closure(1.0, 0.0)
    assert st_.beta == st_.phi0_at_zero
    assert abs(reg.beta - st_.phi0_at_zero) < 1e-6 * abs(st_.phi0_at_zero)


def test_closure_residual():
    st_ = zero_range.build_state(power_exp(1.0, 1.0), KZ, 2.0)
    assert st_.closure_residual <= 1e-12
    assert st_.alpha == -2.0 * st_.beta


@pytest.mark.parametrize("rho", [0.5, 1.0, 1.25])
def test_closure_each_class(rho):
    st_, reg, _ = verify.closure(rho, 1.0, cos_angle=-0.7)
    assert abs(reg.beta - st_.beta) <= 1e-3 * abs(st_.beta)
    assert not reg.flagged


def test_closure_at_rho_15_is_flagged():
    # omega_1 misses the further singular terms present for rho >= 3/2
    st_, reg, _ = verify.closure(1.5, 1.0)
    assert reg.flagged
    assert abs(reg.beta - st_.beta) > 0.1 * abs(st_.beta)
