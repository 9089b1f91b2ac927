import math

import numpy as np
import pytest

from singreen import asymptotics, greens3d, screened, specfun
from singreen.errors import DomainError
from singreen.potentials import coulomb, power_exp, screened_coulomb

FREE = power_exp(0.0, 1.0)


def test_free_closed_form():
    ev = greens3d.green_sum(FREE, 1.0, 0.6, 2.1, 0.3, split_free=False)
    assert ev.converged and ev.tail_estimate < greens3d.DEFAULT_TOL
    assert ev.value == pytest.approx(greens3d.free_kernel(1.0, 0.6, 2.1, 0.3), rel=1e-9)


def test_free_at_origin():
    r = np.array([1e-3, 0.5, 4.0])
    np.testing.assert_allclose(greens3d.green_at_origin(FREE, 1.3, r),
                               np.exp(1.3j * r) / (4 * np.pi * r), rtol=1e-15)


def test_free_origin_leading_terms():
    r = 1e-6
    g = greens3d.green_at_origin(FREE, 2.0, r)
    assert g - 1 / (4 * math.pi * r) == pytest.approx(2.0j / (4 * math.pi), abs=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_screened_decomposition(seed):
    rng = np.random.default_rng(seed)
    eta, k, R = 1.0, 1.0, 10.0
    # radii apart: the plain series converges like (r</r>)^l
    r, rp = rng.uniform(0.1, 4.5), rng.uniform(5.0, 9.5)
    c = rng.uniform(-1, 1)
    full = greens3d.green_sum(screened_coulomb(2 * eta * k, R), k, r, rp, c).value
    cs = greens3d.green_sum(coulomb(2 * eta * k), k, r, rp, c).value
    q = screened.q_term(eta, k, R, r, rp, c).value
    assert full == pytest.approx(cs + q, rel=1e-8)


def test_slow_series_is_flagged():
    # r'/r = 0.88: the terms outlive the double-precision range of G_l
    ev = greens3d.green_sum(coulomb(2.0), 1.0, 2.428, 2.757, 0.0)
    assert not ev.converged


def test_screened_needs_interior_points():
    with pytest.raises(DomainError):
        greens3d.green_sum(screened_coulomb(2.0, 10.0), 1.0, 0.5, 11.0, 0.2)


@pytest.mark.parametrize("spec", [FREE, coulomb(-1.0), screened_coulomb(2.0, 10.0),
                                  power_exp(1.0, 1.5)])
def test_reciprocity(spec):
    a = greens3d.green_sum(spec, 1.0, 0.4, 1.7, -0.35).value
    b = greens3d.green_sum(spec, 1.0, 1.7, 0.4, -0.35).value
    assert a == pytest.approx(b, rel=1e-9)


def test_coulomb_origin_asymptote():
    v0, k = -2.0, 1.0
    r = 1e-4
    g = greens3d.green_at_origin(coulomb(v0), k, r)
    pred = (1 / r + v0 * math.log(r)) / (4 * math.pi) + asymptotics.coulomb_C(k, v0)
    # remainder is O(r log r)
    assert abs(g - pred) < 10 * r * abs(math.log(r))


def test_screened_origin_prediction():
    eta, k, R, r = 1.0, 1.0, 10.0, 1e-3
    v0 = 2 * eta * k
    g = greens3d.green_at_origin(screened_coulomb(v0, R), k, r)
    pred = ((1 / r + v0 * math.log(r)) / (4 * math.pi) + asymptotics.coulomb_C(k, v0)
            + k * specfun.coulomb_norm0(eta) ** 2 * screened.chi(0, eta, k, R) / (4 * math.pi))
    assert abs(g - pred) < 10 * r * abs(math.log(r))
    assert abs(g - pred) / abs(g) < 1e-4


@pytest.mark.parametrize("spec", [coulomb(0.5), screened_coulomb(0.5, 10.0),
                                  power_exp(1.0, 0.5)])
def test_origin_limit_is_stable(spec):
    # at cos = 0 the l = 1 term drops out, leaving corrections of relative size
    # O(V0 r') (Coulomb core) or O(r'^(2 - rho))
    r, rp = 0.7, 1e-6
    g0 = greens3d.green_at_origin(spec, 1.0, r)
    g = greens3d.green_sum(spec, 1.0, r, rp, 0.0).value
    assert g == pytest.approx(g0, rel=1e-6)
    # the l = 1 term is O(k^2 r r') relative
    g2 = greens3d.green_sum(spec, 1.0, r, rp, 0.9).value
    assert abs(g2 - g) < 5 * rp * abs(g)


def test_origin_limit_rate_super_coulomb():
    # with rho = 1.5 the approach to the origin value is slow, ~ r'^(1/2)
    spec = power_exp(1.0, 1.5)
    g0 = greens3d.green_at_origin(spec, 1.0, 0.7)
    d = [abs(greens3d.green_sum(spec, 1.0, 0.7, rp, 0.0).value - g0) for rp in (1e-4, 1e-6)]
    assert d[0] / d[1] == pytest.approx(10.0, rel=0.05)


def test_near_diagonal_split():
    spec = screened_coulomb(1.0, 10.0)
    ev = greens3d.green_sum(spec, 1.0, 1.0, 1.01, 1.0)
    assert ev.near_diagonal
    plain = greens3d.green_sum(spec, 1.0, 1.0, 1.01, 1.0, split_free=False)
    # neither sum reaches 1e-10 before G_l overflows, but the split one is far closer
    assert not plain.converged
    assert ev.tail_estimate < 1e-3 * plain.tail_estimate
    plain = greens3d.green_sum(FREE, 1.0, 1.0, 1.01, 1.0, split_free=True)
    assert plain.value == greens3d.free_kernel(1.0, 1.0, 1.01, 1.0)
    with pytest.raises(DomainError):
        greens3d.green_sum(FREE, 1.0, 1.0, 1.0, 1.0)


def test_split_agrees_with_plain_sum():
    spec = screened_coulomb(1.0, 10.0)
    a = greens3d.green_sum(spec, 1.0, 0.5, 2.0, 0.8, split_free=True).value
    b = greens3d.green_sum(spec, 1.0, 0.5, 2.0, 0.8, split_free=False).value
    assert a == pytest.approx(b, rel=1e-9)


def test_legendre_recurrence():
    from scipy.special import eval_legendre
    p = greens3d.legendre(30, 0.37)
    np.testing.assert_allclose(p, [eval_legendre(l, 0.37) for l in range(31)], atol=1e-14)
    with pytest.raises(DomainError):
        greens3d.legendre(3, 1.5)
