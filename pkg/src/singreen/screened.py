"""
Sharply screened Coulomb potential ``V = V0/r`` for ``r <= R``, zero beyond.

Inside the cutoff the regular solution is the Coulomb function ``F_l``;
outside, the outgoing solution is the free ``hhat_l``.  Matching values and
r-derivatives at ``R`` gives

    u = F_l                      (r <= R),   u = a1 jhat_l + b1 nhat_l   (r > R)
    v = a2 F_l + b2 G_l          (r <= R),   v = hhat_l                  (r > R)

and for ``r, r' < R`` the partial Green's function splits into the pure
Coulomb part plus a rank-one correction,

    G_l = F_l(kr<) H+_l(kr>) / k + chi_l F_l(kr) F_l(kr') / k,

with ``chi_l = -W(hhat, H+) / W(hhat, F)``.

Wronskians here are ``W(f, g) = f g' - f' g`` with derivatives in r.  The
special-function layer differentiates in ``x = kr``, so each Wronskian picks
up one factor of k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, SingularConfigurationError
from .specfun import (coulomb_fg, coulomb_fg_array, coulomb_norm0, coulomb_phase,
                      riccati, riccati_array)

#: factor used to read "kR >> l(l+1) + eta^2"
VALIDITY_FACTOR = 10.0
Q_TERM_TOL = 1e-12
Q_TERM_MAX_ELL = 2000


def _w(f, df, g, dg, k):
    """Wronskian in r from values and x-derivatives."""
    return k * (f * dg - df * g)


def _check(k, R):
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    if not R > 0.0:
        raise DomainError(f"R must be positive, got {R}")


@dataclass(frozen=True)
class MatchingData:
    """Matching coefficients and chi for one partial wave.

    ``interior_residual`` and ``exterior_residual`` are the relative
    mismatches in (value, r-derivative) at ``R`` of the two continued
    solutions.
    """

    a1: complex
    b1: complex
    a2: complex
    b2: complex
    chi: complex
    ell: int
    k: float
    R: float
    eta: float
    interior_residual: float = 0.0
    exterior_residual: float = 0.0

    @property
    def wronskian(self) -> complex:
        """``W(u, v) = W_R(F, hhat)``, constant in r."""
        return -self.k * self.b2

    @property
    def theta(self) -> float:
        return coulomb_theta(self.ell, self.eta, self.k, self.R)


def coulomb_theta(ell: int, eta: float, k: float, R: float) -> float:
    """Asymptotic Coulomb phase ``kR - eta log(2kR) - l pi/2 + sigma_l``."""
    return k * R - eta * math.log(2.0 * k * R) - 0.5 * math.pi * ell + coulomb_phase(ell, eta)


def match(ell: int, eta: float, k: float, R: float) -> MatchingData:
    _check(k, R)
    x = k * R
    c = coulomb_fg(ell, eta, x)
    t = riccati(ell, x)
    F, dF, G, dG = c.value_F, c.deriv_F, c.value_G, c.deriv_G
    h, dh = t.h, t.dh
    a1 = -_w(F, dF, t.n, t.dn, k) / k
    b1 = _w(F, dF, t.j, t.dj, k) / k
    a2 = -_w(h, dh, G, dG, k) / k
    b2 = _w(h, dh, F, dF, k) / k
    den = _w(h, dh, F, dF, k)
    if abs(den) <= 1e-14 * k * abs(h) * max(abs(F), abs(dF), 1e-300):
        raise SingularConfigurationError(
            f"W(hhat, F) vanishes at ell={ell}, eta={eta}, k={k}, R={R}")
    chi_val = -_w(h, dh, G + 1j * F, dG + 1j * dF, k) / den

    # continuity of u and v across R
    u_out = a1 * t.j + b1 * t.n
    du_out = a1 * t.dj + b1 * t.dn
    res_u = max(abs(u_out - F), abs(du_out - dF)) / max(abs(F), abs(dF))
    v_in = a2 * F + b2 * G
    dv_in = a2 * dF + b2 * dG
    res_v = max(abs(v_in - h), abs(dv_in - dh)) / max(abs(h), abs(dh))
    return MatchingData(a1=complex(a1), b1=complex(b1), a2=complex(a2), b2=complex(b2),
                        chi=complex(chi_val), ell=int(ell), k=float(k), R=float(R),
                        eta=float(eta), interior_residual=float(res_u),
                        exterior_residual=float(res_v))


def chi(ell: int, eta: float, k: float, R: float) -> complex:
    """Screening correction ``chi_l(k)`` for cutoff radius R."""
    return match(ell, eta, k, R).chi


def chi_array(ell_max: int, eta: float, k: float, R: float) -> np.ndarray:
    """``chi_l`` for ``l = 0..ell_max`` from one recurrence sweep."""
    _check(k, R)
    x = k * R
    F, dF, G, dG = coulomb_fg_array(ell_max, eta, x)
    # overflowing high-l entries come back non-finite; callers truncate there
    j, dj, n, dn = riccati_array(ell_max, x, strict=False)
    h, dh = n + 1j * j, dn + 1j * dj
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        num = h * (dG + 1j * dF) - dh * (G + 1j * F)
        den = h * dF - dh * F
        out = -num / den
    if np.any(den == 0.0):
        raise SingularConfigurationError("W(hhat, F) vanishes for some ell")
    return out


@dataclass(frozen=True)
class AsymptoticChi:
    """Large-R form of chi; ``valid`` is False when kR is not >> l(l+1) + eta^2."""

    value: complex
    valid: bool
    theta: float

    def __complex__(self):
        return complex(self.value)


def chi_asymptotic(ell: int, eta: float, k: float, R: float) -> AsymptoticChi:
    """``i eta exp(2 i theta_l) / (kR)``, leading order in 1/R."""
    _check(k, R)
    th = coulomb_theta(ell, eta, k, R)
    val = 1j * eta * complex(math.cos(2 * th), math.sin(2 * th)) / (k * R)
    valid = k * R >= VALIDITY_FACTOR * (ell * (ell + 1) + eta * eta)
    return AsymptoticChi(value=val, valid=bool(valid), theta=th)


def screened_partial_green(ell: int, eta: float, k: float, R: float,
                           r: float, rp: float) -> complex:
    """Partial Green's function for ``0 < r, r' < R``."""
    _check(k, R)
    if not (0.0 < r < R and 0.0 < rp < R):
        raise DomainError("the split representation only holds for 0 < r, r' < R")
    lo, hi = min(r, rp), max(r, rp)
    c_lo = coulomb_fg(ell, eta, k * lo)
    c_hi = coulomb_fg(ell, eta, k * hi)
    x = chi(ell, eta, k, R)
    return (c_lo.value_F * c_hi.value_H + x * c_lo.value_F * c_hi.value_F) / k


@dataclass(frozen=True)
class SeriesValue:
    """A truncated partial-wave sum."""

    value: complex
    ell_used: int
    tail_estimate: float
    converged: bool


def legendre_array(ell_max: int, x: float) -> np.ndarray:
    """``P_0..P_ell_max`` at x by upward recurrence."""
    p = np.empty(ell_max + 1)
    p[0] = 1.0
    if ell_max >= 1:
        p[1] = x
    for n in range(1, ell_max):
        p[n + 1] = ((2 * n + 1) * x * p[n] - n * p[n - 1]) / (n + 1)
    return p


def _f_over_r(ell_max, eta, k, r):
    """``F_l(kr) / r`` with the r -> 0 limit (only l = 0 survives)."""
    if r == 0.0:
        out = np.zeros(ell_max + 1)
        out[0] = k * coulomb_norm0(eta)
        return out
    F = coulomb_fg_array(ell_max, eta, k * r)[0]
    return F / r


def q_term(eta: float, k: float, R: float, r: float, rp: float, cos_angle: float,
           ell_max: int | None = None, tol: float = Q_TERM_TOL) -> SeriesValue:
    """Screening part of the 3D Green's function for ``r, r' < R``.

    ``(1/4 pi) sum (2l+1) chi_l F_l(kr) F_l(kr') P_l(cos) / (k r r')``.
    Either radius may be 0, in which case only ``l = 0`` contributes.
    Without ``ell_max`` the sum stops after three consecutive terms fall
    below ``tol`` (in absolute value, before the Legendre factor).
    """
    _check(k, R)
    if not (0.0 <= r < R and 0.0 <= rp < R):
        raise DomainError("q_term needs 0 <= r, r' < R")
    if abs(cos_angle) > 1.0:
        raise DomainError("cos_angle must lie in [-1, 1]")
    if eta == 0.0:
        return SeriesValue(0j, 0, 0.0, True)

    def terms(L):
        ch = chi_array(L, eta, k, R)
        a = _f_over_r(L, eta, k, r)
        b = _f_over_r(L, eta, k, rp)
        with np.errstate(invalid="ignore", over="ignore"):
            mag = ch * a * b / k
        mag = np.where(np.isfinite(mag), mag, 0.0)
        return mag

    if ell_max is not None:
        t = terms(ell_max)
        p = legendre_array(ell_max, cos_angle)
        val = _ksum((2 * np.arange(ell_max + 1) + 1) * t * p) / (4 * math.pi)
        tail = float(np.abs(t[-1]) * (2 * ell_max + 1) / (4 * math.pi))
        return SeriesValue(val, ell_max, tail, tail < tol)

    L = 16
    while True:
        t = terms(L)
        small = np.abs(t) < tol
        stop = None
        for i in range(2, L + 1):
            if small[i] and small[i - 1] and small[i - 2]:
                stop = i
                break
        if stop is not None:
            t = t[: stop + 1]
            p = legendre_array(stop, cos_angle)
            val = _ksum((2 * np.arange(stop + 1) + 1) * t * p) / (4 * math.pi)
            tail = float(np.abs(t[-1]) * (2 * stop + 1) / (4 * math.pi))
            return SeriesValue(val, stop, tail, True)
        if L >= Q_TERM_MAX_ELL:
            raise AccuracyError(f"q_term did not converge within ell <= {Q_TERM_MAX_ELL}")
        L *= 2


def _ksum(values) -> complex:
    """Compensated sum in fixed order."""
    s = 0j
    c = 0j
    for v in values:
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


@dataclass(frozen=True)
class KernelNorm:
    """``max_l |chi_l|`` over ``0..ell_max``.

    ``inconclusive`` is set when ``|chi|`` is still rising at an ``ell_max``
    beyond the large-R window ``l(l+1) <= kR``.  Inside that window the rise
    is ``O((kR)^-2)`` relative and does not affect the leading law.
    """

    value: float
    argmax_ell: int
    ell_max: int
    inconclusive: bool
    chis: np.ndarray


def default_norm_ell_max(k: float, R: float) -> int:
    """Largest l with ``l(l+1) <= kR``."""
    kr = k * R
    return max(0, int((math.sqrt(1.0 + 4.0 * kr) - 1.0) / 2.0))


def z_kernel_norm(eta: float, k: float, R: float, ell_max: int | None = None) -> KernelNorm:
    """Norm of the screening kernel, ``max |chi_l|`` for ``l <= ell_max``.

    The default ``ell_max`` keeps ``l(l+1) <= kR``, the range where the
    large-R law ``|chi_l| -> |eta|/(kR)`` applies.  Past ``l ~ kR`` the
    exterior turning point moves outside R and ``|chi_l|`` grows without
    bound, so the maximum over all l does not exist.
    """
    _check(k, R)
    if ell_max is None:
        ell_max = default_norm_ell_max(k, R)
    if eta == 0.0:
        return KernelNorm(0.0, 0, ell_max, False, np.zeros(ell_max + 1, dtype=complex))
    ch = chi_array(ell_max, eta, k, R)
    mags = np.abs(ch)
    i = int(np.argmax(mags))
    rising = ell_max >= 1 and mags[-1] > mags[-2]
    inconclusive = rising and ell_max > default_norm_ell_max(k, R)
    return KernelNorm(float(mags[i]), i, ell_max, bool(inconclusive), ch)
