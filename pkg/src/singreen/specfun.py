"""
Special functions for the Coulomb and free radial problems.

Conventions
-----------
* All derivatives are taken with respect to the dimensionless argument
  ``x = k r``.  Callers apply the chain-rule factor ``k`` themselves.
* Coulomb functions use the standard normalization
  ``F'G - FG' = 1`` with ``F ~ sin(theta)``, ``G ~ cos(theta)`` at large x,
  ``theta = x - eta*log(2x) - ell*pi/2 + sigma_ell``.
* Riccati functions: ``jhat = x j_l(x)``, ``nhat = -x y_l(x)`` so that
  ``nhat_0 = cos x`` and ``jhat' nhat - jhat nhat' = +1``.  The outgoing
  function is ``hhat = nhat + i jhat ~ exp(i(x - l pi/2))``, which equals
  the Coulomb ``H+ = G + iF`` at ``eta = 0``.

Coulomb evaluation strategy
---------------------------
F ratios come from the continued fraction CF1 (F'/F) started at an order
inside the classically forbidden region, followed by downward recurrence.
The absolute normalization at ``ell = 0`` comes from

* the Frobenius/log series of F_0 and G_0 for ``x < SERIES_MAX_X``;
* Steed's method with the complex continued fraction CF2 (H+'/H+) otherwise.

G is then propagated upward in ``ell``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, PoleError

EULER_GAMMA = 0.57721566490153286061

# Below this argument the ell=0 series is used; above it Steed's CF2 converges
# in a few hundred iterations at most for |eta| <= 10.
SERIES_MAX_X = 1.0
_SERIES_TERMS = 120
_CF_TOL = 1e-16
_CF1_MAXIT = 100_000
_CF2_MAXIT = 20_000
_RESCALE = 1e250
_TINY = 1e-300


@dataclass(frozen=True)
class CoulombPair:
    """F, G and their x-derivatives for one (ell, eta, x)."""

    value_F: float
    deriv_F: float
    value_G: float
    deriv_G: float
    ell: int
    eta: float
    x: float

    @property
    def wronskian(self) -> float:
        return self.deriv_F * self.value_G - self.value_F * self.deriv_G

    @property
    def value_H(self) -> complex:
        """Outgoing Coulomb wave ``H+ = G + iF``."""
        return complex(self.value_G, self.value_F)

    @property
    def deriv_H(self) -> complex:
        return complex(self.deriv_G, self.deriv_F)


@dataclass(frozen=True)
class RiccatiTriple:
    """Riccati-Bessel, -Neumann and outgoing -Hankel values with x-derivatives."""

    j: float
    dj: float
    n: float
    dn: float
    ell: int
    x: float

    @property
    def h(self) -> complex:
        return complex(self.n, self.j)

    @property
    def dh(self) -> complex:
        return complex(self.dn, self.dj)


def _check_args(ell, x):
    if ell < 0 or int(ell) != ell:
        raise DomainError(f"ell must be a nonnegative integer, got {ell!r}")
    if not (x > 0) or not math.isfinite(x):
        raise DomainError(f"x must be positive and finite, got {x!r}")


# --------------------------------------------------------------------------
# Gamow factor, phase shift, digamma
# --------------------------------------------------------------------------

def coulomb_norm0(eta: float) -> float:
    """``C_0(eta) = sqrt(2 pi eta / (exp(2 pi eta) - 1))``, with C_0(0) = 1."""
    if eta == 0.0:
        return 1.0
    t = 2.0 * math.pi * eta
    if t > 700.0:
        return math.sqrt(t) * math.exp(-0.5 * t)
    return math.sqrt(t / math.expm1(t))


def coulomb_norm(ell: int, eta: float) -> float:
    """Gamow normalization C_ell(eta), ``F ~ C_ell x^(ell+1)`` as x -> 0.

    Built by the upward product ``C_l = sqrt(l^2 + eta^2) / (l (2l+1)) C_{l-1}``.
    """
    if ell < 0 or int(ell) != ell:
        raise DomainError(f"ell must be a nonnegative integer, got {ell!r}")
    c = coulomb_norm0(eta)
    for L in range(1, int(ell) + 1):
        c *= math.sqrt(L * L + eta * eta) / (L * (2 * L + 1))
    return c


def coulomb_phase(ell: int, eta: float) -> float:
    """Coulomb phase shift ``sigma_ell = arg Gamma(ell + 1 + i eta)``.

    Taken as the imaginary part of the principal log-gamma, which is the
    branch that is continuous in eta.
    """
    if ell < 0 or int(ell) != ell:
        raise DomainError(f"ell must be a nonnegative integer, got {ell!r}")
    return float(special.loggamma(complex(ell + 1, eta)).imag)


def digamma(z: complex) -> complex:
    """Principal digamma function psi(z) for complex z."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"digamma has a pole at z = {z.real:g}")
    return complex(special.psi(z))


# --------------------------------------------------------------------------
# Riccati functions
# --------------------------------------------------------------------------

def riccati_array(lmax: int, x: float, strict: bool = True):
    """Riccati functions for ell = 0..lmax.

    Returns arrays ``(j, dj, n, dn)`` of length ``lmax + 1``.  Derivatives
    use ``f'_l = f_{l-1} - l f_l / x``, which avoids the cancellation in
    ``d/dx (x y_l)`` at small x.  With ``strict=False`` an overflowing
    Neumann branch is returned as inf instead of raising.
    """
    _check_args(lmax, x)
    ells = np.arange(lmax + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        j = x * special.spherical_jn(ells, x)
        n = -x * special.spherical_yn(ells, x)
        dj = np.empty_like(j)
        dn = np.empty_like(n)
        dj[0], dn[0] = math.cos(x), -math.sin(x)
        dj[1:] = j[:-1] - ells[1:] * j[1:] / x
        dn[1:] = n[:-1] - ells[1:] * n[1:] / x
    if strict and not (np.all(np.isfinite(n)) and np.all(np.isfinite(dn))):
        raise AccuracyError(
            f"Riccati-Neumann overflow for lmax={lmax}, x={x:g}")
    return j, dj, n, dn


def riccati(ell: int, x: float) -> RiccatiTriple:
    j, dj, n, dn = riccati_array(ell, x)
    return RiccatiTriple(float(j[ell]), float(dj[ell]), float(n[ell]),
                         float(dn[ell]), int(ell), float(x))


# --------------------------------------------------------------------------
# Coulomb functions
# --------------------------------------------------------------------------

def _cf1(L, eta, x):
    """F'_L / F_L by modified Lentz on the downward-recurrence fraction."""

    def s(m):
        return m / x + eta / m

    def r2(m):
        return 1.0 + (eta / m) ** 2

    f = s(L + 1)
    if f == 0.0:
        f = _TINY
    C, D = f, 0.0
    for j in range(1, _CF1_MAXIT):
        a = -r2(L + j)
        b = s(L + j) + s(L + j + 1)
        D = b + a * D
        if D == 0.0:
            D = _TINY
        C = b + a / C
        if C == 0.0:
            C = _TINY
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return f
    raise AccuracyError(f"CF1 did not converge (L={L}, eta={eta}, x={x})")


def _cf2(eta, x):
    """``H+'/H+ = p + iq`` at ell = 0 (Steed's second continued fraction)."""

    def a(n):
        return complex(-eta * eta + (n - 1) * n, eta * (2 * n - 1))

    def b(n):
        return complex(2.0 * (x - eta), 2.0 * n)

    f = b(1)
    C, D = f, 0j
    for n in range(2, _CF2_MAXIT):
        D = b(n) + a(n) * D
        if D == 0:
            D = _TINY
        C = b(n) + a(n) / C
        if C == 0:
            C = _TINY
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return 1j * (1.0 - eta / x) + 1j / x * a(1) / f
    raise AccuracyError(f"CF2 did not converge (eta={eta}, x={x})")


def _series_ell0(eta, x):
    """F_0, F_0', G_0, G_0' from the regular and logarithmic series.

    ``F_0 = C_0 * Ft`` with ``Ft = sum a_n x^n`` and
    ``G_0 = u2 / C_0 + gamma F_0`` with ``u2 = 2 eta Ft log x + sum b_n x^n``;
    ``gamma = 2 eta (log 2 + Re psi(1 + i eta) + 2 gamma_E - 1) / C_0^2``.
    """
    a = np.zeros(_SERIES_TERMS)
    b = np.zeros(_SERIES_TERMS)
    c = 2.0 * eta
    a[1] = 1.0
    a[2] = eta
    b[0] = 1.0
    for m in range(2, _SERIES_TERMS):
        if m >= 3:
            a[m] = (2.0 * eta * a[m - 1] - a[m - 2]) / (m * (m - 1))
        b[m] = (2.0 * eta * b[m - 1] - b[m - 2] - c * (2 * m - 1) * a[m]) / (m * (m - 1))
    n = np.arange(_SERIES_TERMS)
    xp = x ** n
    if abs(a[-1] * xp[-1]) + abs(b[-1] * xp[-1]) > 1e-30:
        raise AccuracyError(f"ell=0 series not converged at x={x}")
    ft = np.dot(a, xp)
    bsum = np.dot(b, xp)
    xpm1 = np.concatenate(([0.0], xp[:-1]))
    ftp = np.dot(n * a, xpm1)
    bp = np.dot(n * b, xpm1)
    lx = math.log(x)
    u2 = c * ft * lx + bsum
    u2p = c * (ftp * lx + ft / x) + bp
    c0 = coulomb_norm0(eta)
    if eta == 0.0:
        gam = 0.0
    else:
        gam = c * (math.log(2.0) + digamma(complex(1.0, eta)).real
                   + 2.0 * EULER_GAMMA - 1.0) / (c0 * c0)
    F = c0 * ft
    Fp = c0 * ftp
    G = u2 / c0 + gam * F
    Gp = u2p / c0 + gam * Fp
    return F, Fp, G, Gp


def coulomb_fg_array(lmax: int, eta: float, x: float):
    """Coulomb F, F', G, G' for ell = 0..lmax at one (eta, x).

    Returns four float arrays of length ``lmax + 1``.  F underflows to zero
    (rather than failing) at very high ell and small x; G may overflow to inf
    in the same regime.
    """
    _check_args(lmax, x)
    eta = float(eta)
    if not math.isfinite(eta):
        raise DomainError("eta must be finite")
    # Start deep enough that x lies before the turning point, where F > 0.
    ltop = max(int(lmax), int(math.sqrt(x * x + 2.0 * abs(eta) * x)) + 2)
    F = np.zeros(ltop + 1)
    Fp = np.zeros(ltop + 1)
    F[ltop] = 1.0
    Fp[ltop] = _cf1(ltop, eta, x)
    for L in range(ltop, 0, -1):
        R = math.sqrt(L * L + eta * eta) / L
        S = L / x + eta / L
        F[L - 1] = (S * F[L] + Fp[L]) / R
        Fp[L - 1] = S * F[L - 1] - R * F[L]
        if abs(F[L - 1]) > _RESCALE or abs(Fp[L - 1]) > _RESCALE:
            F[L - 1:] /= _RESCALE
            Fp[L - 1:] /= _RESCALE
    f0, fp0 = F[0], Fp[0]
    m = max(abs(f0), abs(fp0))
    f0 /= m
    fp0 /= m
    if x < SERIES_MAX_X:
        F0, F0p, G0, G0p = _series_ell0(eta, x)
        scale = (F0 * f0 + F0p * fp0) / (f0 * f0 + fp0 * fp0)
    else:
        pq = _cf2(eta, x)
        p, q = pq.real, pq.imag
        if q == 0.0:
            raise AccuracyError(f"Steed normalization failed (eta={eta}, x={x})")
        scale = 1.0 / math.sqrt((fp0 - p * f0) ** 2 / q + q * f0 * f0)
        G0 = (fp0 - p * f0) * scale / q
        G0p = p * G0 - q * f0 * scale
    scale /= m
    F = F[: lmax + 1] * scale
    Fp = Fp[: lmax + 1] * scale
    G = np.empty(lmax + 1)
    Gp = np.empty(lmax + 1)
    G[0], Gp[0] = G0, G0p
    with np.errstate(over="ignore", invalid="ignore"):
        for L in range(1, lmax + 1):
            R = math.sqrt(L * L + eta * eta) / L
            S = L / x + eta / L
            G[L] = (S * G[L - 1] - Gp[L - 1]) / R
            Gp[L] = R * G[L - 1] - S * G[L]
    return F, Fp, G, Gp


def coulomb_fg(ell: int, eta: float, x: float) -> CoulombPair:
    """Regular and irregular Coulomb functions at one point."""
    F, Fp, G, Gp = coulomb_fg_array(int(ell), eta, x)
    vals = (F[ell], Fp[ell], G[ell], Gp[ell])
    if not all(math.isfinite(v) for v in vals):
        raise AccuracyError(f"Coulomb functions out of range (ell={ell}, eta={eta}, x={x})")
    return CoulombPair(*(float(v) for v in vals), int(ell), float(eta), float(x))
