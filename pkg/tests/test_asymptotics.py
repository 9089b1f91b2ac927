import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singreen import asymptotics
from singreen.asymptotics import a0, coulomb_C, fit_short_range
from singreen.errors import DomainError, IllConditionedError
from singreen.potentials import SingularityClass

R = np.geomspace(1e-4, 1e-2, 40)
FOUR_PI = 4 * math.pi


def test_a0_examples():
    assert a0(1.0, 1.5) == pytest.approx(-4.0, rel=1e-15)
    assert a0(-2.0, 1.25) == pytest.approx(32.0 / 3.0, rel=1e-15)
    assert a0(0.0, 1.7) == 0.0


@pytest.mark.parametrize("rho", [1.0, 2.0, 0.5, 2.5])
def test_a0_domain(rho):
    with pytest.raises(DomainError):
        a0(1.0, rho)


def test_coulomb_C_free_limit():
    for k in (1e-3, 0.4, 3.0):
        assert coulomb_C(k, 0.0) == pytest.approx(1j * k / FOUR_PI, abs=1e-16)


def test_coulomb_C_branch():
    # log(-2ik) on the principal branch contributes -i pi/2 per unit V0
    k, v0 = 1.0, 1e-6
    d = (coulomb_C(k, v0) - coulomb_C(k, 0.0)) / v0 * FOUR_PI
    assert d.imag == pytest.approx(-math.pi / 2, abs=1e-5)
    assert d.real == pytest.approx(math.log(2) + float(np.euler_gamma) - 1, abs=1e-5)


def test_coulomb_C_needs_positive_k():
    with pytest.raises(DomainError):
        coulomb_C(0.0, 1.0)


def test_exact_sub():
    g = 1 / (FOUR_PI * R) + (0.3 - 0.2j)
    f = fit_short_range((R, g), SingularityClass.SUB_COULOMB, nuisance=None)
    assert f.pole_coeff == pytest.approx(1 / FOUR_PI, rel=1e-12)
    assert f.const_term == pytest.approx(0.3 - 0.2j, abs=1e-11)
    assert f.accepted


def test_exact_coulomb():
    g = (1 / R + 3 * np.log(R)) / FOUR_PI + (2 + 1j)
    f = fit_short_range((R, g), SingularityClass.COULOMB, nuisance=None)
    assert f.pole_coeff == pytest.approx(1 / FOUR_PI, rel=1e-12)
    assert f.extra_coeff == pytest.approx(3 / FOUR_PI, rel=1e-10)
    assert f.const_term == pytest.approx(2 + 1j, abs=1e-10)


def test_exact_super():
    rho = 1.25
    g = (1 / R + 7.0 * R ** (1 - rho)) / FOUR_PI - 0.5 + 0.25j
    f = fit_short_range((R, g), rho=rho, nuisance=None)
    assert f.singularity is SingularityClass.SUPER_COULOMB
    assert f.extra_coeff == pytest.approx(7 / FOUR_PI, rel=1e-10)
    assert f.const_term == pytest.approx(-0.5 + 0.25j, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(1.1, 1.45))
def test_recovery_property(extra, cre, cim, rho):
    g = (1 / R + extra * R ** (1 - rho)) / FOUR_PI + complex(cre, cim)
    f = fit_short_range((R, g), rho=rho, nuisance=None)
    assert f.extra_coeff * FOUR_PI == pytest.approx(extra, abs=1e-7)
    assert f.const_term == pytest.approx(complex(cre, cim), abs=1e-7)


def test_nuisance_power_absorbed():
    g = 1 / (FOUR_PI * R) + 0.1 + 5.0 * R ** 0.5
    plain = fit_short_range((R, g), SingularityClass.SUB_COULOMB, nuisance=None)
    extra = fit_short_range((R, g), SingularityClass.SUB_COULOMB, nuisance=[0.5])
    assert abs(extra.const_term - 0.1) < 1e-10
    assert abs(plain.const_term - 0.1) > 1e-3
    assert extra.nuisance["r^0.5"] == pytest.approx(5.0, rel=1e-8)


def test_pair_list_input():
    g = 1 / (FOUR_PI * R) + 1.0
    f = fit_short_range(list(zip(R, g)), SingularityClass.SUB_COULOMB, nuisance=None)
    assert f.const_term == pytest.approx(1.0, abs=1e-11)


def test_collinearity_refused():
    with pytest.raises(IllConditionedError):
        fit_short_range((R, 1 / R), rho=1.03, nuisance=None)


def test_collinearity_forced_conditioning_degrades():
    g = (1 / R + R ** -0.03) / FOUR_PI
    f = fit_short_range((R, g), rho=1.03, nuisance=None, force=True)
    ok = fit_short_range((R, g), rho=1.25, nuisance=None)
    assert f.condition_number > 5 * ok.condition_number


def test_rank_deficient():
    r = np.full(12, 0.01)
    r[6:] = 0.1
    with pytest.raises(IllConditionedError):
        fit_short_range((r, 1 / r), SingularityClass.COULOMB, nuisance=[0.5, 1.0])


def test_condition_flag():
    g = 1 / (FOUR_PI * R)
    f = fit_short_range((R, g), SingularityClass.SUB_COULOMB, nuisance=[0.5, 0.505, 0.51, 0.515])
    assert f.ill_conditioned and not f.accepted


def test_too_few_samples():
    r = np.geomspace(1e-4, 1e-2, 7)
    with pytest.raises(DomainError):
        fit_short_range((r, 1 / r), SingularityClass.SUB_COULOMB)


def test_less_than_a_decade():
    r = np.geomspace(1e-3, 5e-3, 20)
    with pytest.raises(DomainError):
        fit_short_range((r, 1 / r), SingularityClass.SUB_COULOMB)


def test_class_rho_mismatch():
    with pytest.raises(DomainError):
        fit_short_range((R, 1 / R), SingularityClass.COULOMB, rho=0.5)


def test_residual_rejects_wrong_template():
    g = (1 / R + 3 * np.log(R)) / FOUR_PI
    f = fit_short_range((R, g), SingularityClass.SUB_COULOMB, rho=0.5, nuisance=None)
    assert f.residual_rms > 1e-4
    assert not f.accepted


def test_window_stability_sigma():
    # a hidden r^0.3 term moves the constant between windows
    g = 1 / (FOUR_PI * R) + 0.2 + 3.0 * R ** 0.3
    f = fit_short_range((R, g), SingularityClass.SUB_COULOMB, nuisance=None)
    assert f.const_sigma > 1e-3


def test_default_window():
    assert asymptotics.default_window(1.0)[0] == pytest.approx(1e-4)
    assert asymptotics.default_window(10.0)[-1] == pytest.approx(1e-3)
    assert asymptotics.default_window(0.1)[-1] == pytest.approx(1e-2)
