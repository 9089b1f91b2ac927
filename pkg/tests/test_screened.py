import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singreen import greens3d, radial, screened, specfun
from singreen.errors import DomainError
from singreen.potentials import screened_coulomb


@pytest.mark.parametrize("ell", [0, 2, 5])
def test_free_degeneration(ell):
    md = screened.match(ell, 0.0, 1.3, 7.0)
    assert md.a1 == pytest.approx(1.0, abs=1e-12)
    assert md.b1 == pytest.approx(0.0, abs=1e-12)
    assert md.chi == pytest.approx(0.0, abs=1e-12)
    for r in (0.5, 3.0, 6.5):
        c = specfun.coulomb_fg(ell, 0.0, 1.3 * r)
        t = specfun.riccati(ell, 1.3 * r)
        assert md.a2 * c.value_F + md.b2 * c.value_G == pytest.approx(t.h, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(ell=st.integers(0, 6), eta=st.floats(-2, 2), k=st.floats(0.2, 3), R=st.floats(2, 60))
def test_continuity_residuals(ell, eta, k, R):
    md = screened.match(ell, eta, k, R)
    assert md.interior_residual < 1e-9
    assert md.exterior_residual < 1e-9


def test_chi_invariant_under_hankel_scaling():
    eta, k, R = 0.8, 1.0, 12.0
    c = specfun.coulomb_fg(1, eta, k * R)
    t = specfun.riccati(1, k * R)
    s = 2.5 - 1.5j
    h, dh = s * t.h, s * t.dh
    num = h * (c.deriv_H) - dh * c.value_H
    den = h * c.deriv_F - dh * c.value_F
    assert -num / den == pytest.approx(screened.chi(1, eta, k, R), rel=1e-12)


def test_chi_array_matches_scalar():
    arr = screened.chi_array(8, 1.0, 1.0, 20.0)
    for ell in range(9):
        assert arr[ell] == pytest.approx(screened.chi(ell, 1.0, 1.0, 20.0), rel=1e-10)


def test_chi_near_asymptote_at_R40():
    c = screened.chi(0, 1.0, 1.0, 40.0)
    a = screened.chi_asymptotic(0, 1.0, 1.0, 40.0)
    assert a.valid
    assert abs(c - a.value) / abs(a.value) < 3.0 / 40.0


def test_asymptote_magnitude_and_free_limit():
    for R in (10.0, 33.0, 100.0):
        a = screened.chi_asymptotic(2, 1.4, 0.7, R)
        assert abs(a.value) == pytest.approx(1.4 / (0.7 * R), rel=1e-14)
    assert screened.chi_asymptotic(0, 0.0, 1.0, 10.0).value == 0
    assert not screened.chi_asymptotic(3, 1.0, 1.0, 20.0).valid


def test_convergence_order_stable_under_doubling():
    Rs = [50.0, 100.0, 200.0, 400.0]
    c = [abs(screened.chi(0, 1.0, 1.0, R) - screened.chi_asymptotic(0, 1.0, 1.0, R).value)
         / (1.0 / R) * R for R in Rs]
    # relative error ~ c / R with c bounded
    assert max(c) / min(c) < 4.0


def test_wronskian_consistency():
    eta, k, R = 1.0, 1.0, 10.0
    md = screened.match(0, eta, k, R)
    spec = screened_coulomb(2 * eta * k, R)
    pair = radial.solve_pair(spec, 0, k, 0.5, 9.0)
    # W(u, v) for u = F, v = hhat outside; rescale the ODE pair accordingly
    su = specfun.coulomb_fg(0, eta, k).value_F / pair.u(1.0)
    sv = specfun.riccati(0, k * 12.0).h / pair.v(12.0)
    assert pair.wronskian * su * sv == pytest.approx(md.wronskian, rel=1e-9)


@pytest.mark.parametrize("r,rp", [(0.5, 2.0), (2.0, 0.5), (3.3, 7.1), (0.1, 9.0)])
def test_cross_module_partial_green(r, rp):
    eta, k, R = 1.0, 1.0, 10.0
    spec = screened_coulomb(2 * eta * k, R)
    pair = radial.solve_pair(spec, 0, k, min(r, rp), max(r, rp) * 1.0001)
    assert radial.partial_green(pair, r, rp) == pytest.approx(
        screened.screened_partial_green(0, eta, k, R, r, rp), rel=1e-7)


def test_partial_green_free_and_domain():
    k = 1.2
    g = screened.screened_partial_green(0, 0.0, k, 5.0, 0.4, 1.5)
    assert g == pytest.approx(math.sin(k * 0.4) * complex(math.cos(1.8), math.sin(1.8)) / k)
    with pytest.raises(DomainError):
        screened.screened_partial_green(0, 1.0, 1.0, 10.0, 0.5, 10.0)


def test_partial_green_jump():
    eta, k, R, rp, h = 1.0, 1.0, 10.0, 1.3, 1e-5
    g = lambda r: screened.screened_partial_green(0, eta, k, R, r, rp)
    right = (g(rp + 2 * h) - g(rp + h)) / h
    left = (g(rp - h) - g(rp - 2 * h)) / h
    assert right - left == pytest.approx(-1.0, abs=1e-4)


def test_q_term_limits():
    assert screened.q_term(0.0, 1.0, 10.0, 0.3, 0.4, 0.2).value == 0
    lim = greens3d.q_origin_limit(1.0, 1.0, 10.0)
    assert screened.q_term(1.0, 1.0, 10.0, 0.0, 0.0, 1.0).value == pytest.approx(lim, rel=1e-12)
    near = screened.q_term(1.0, 1.0, 10.0, 1e-6, 0.0, 0.4).value
    assert near == pytest.approx(lim, rel=1e-5)


def test_q_term_truncation_doubling():
    a = screened.q_term(1.0, 1.0, 10.0, 0.3, 0.3, 1.0, ell_max=64)
    b = screened.q_term(1.0, 1.0, 10.0, 0.3, 0.3, 1.0, ell_max=128)
    assert a.value == pytest.approx(b.value, rel=1e-13)
    auto = screened.q_term(1.0, 1.0, 10.0, 0.3, 0.3, 1.0)
    assert auto.converged and auto.value == pytest.approx(b.value, rel=1e-12)


def test_kernel_norm():
    assert screened.z_kernel_norm(0.0, 1.0, 50.0).value == 0.0
    n = screened.z_kernel_norm(1.0, 1.0, 50.0, ell_max=30)
    chis = [abs(screened.chi(l, 1.0, 1.0, 50.0)) for l in range(31)]
    assert n.value == pytest.approx(max(chis), rel=1e-12)
    # l = 30 lies far past l(l+1) ~ kR, where |chi_l| keeps growing
    assert n.inconclusive and n.argmax_ell == 30
    for R in (100.0, 200.0):
        n = screened.z_kernel_norm(1.0, 1.0, R)
        assert not n.inconclusive
        assert n.value * R == pytest.approx(1.0, abs=5.0 / R)


def test_kernel_norm_inconclusive_past_window():
    n = screened.z_kernel_norm(1.0, 1.0, 20.0, ell_max=40)
    assert n.inconclusive


def test_free_sum_identity():
    rng = np.random.default_rng(7)
    for _ in range(5):
        r, rp = rng.uniform(0.3, 1.0), rng.uniform(2.0, 4.0)
        c = rng.uniform(-1, 1)
        ev = greens3d.green_sum(screened_coulomb(0.0, 10.0), 1.0, r, rp, c, split_free=False)
        assert ev.value == pytest.approx(greens3d.free_kernel(1.0, r, rp, c), rel=1e-6)
