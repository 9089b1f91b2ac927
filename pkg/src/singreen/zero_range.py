"""
Zero-range interaction on top of a singular background potential.

The solution is ``phi = phi0 - lambda G(r, 0) beta`` where ``phi0`` scatters
off V alone.  Near the origin ``phi -> alpha / (4 pi omega) + beta`` with
``alpha = -lambda beta`` and the class-dependent variable

    1/omega = 1/r + A0 r^(1-rho)   (SuperCoulomb)
    1/omega = 1/r + V0 log r       (Coulomb)
    1/omega = 1/r                  (SubCoulomb)

The regular part is recovered by ``lim d/d omega (omega phi)``, and the
amplitude satisfies the fixed point ``beta = phi0(0) - lambda B beta`` with
``B`` the finite part of ``G(r, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import radial
from .asymptotics import a0, default_window, fit_short_range
from .errors import DomainError, SingularConfigurationError
from .greens3d import green_at_origin
from .potentials import PotentialSpec, SingularityClass, classify
from .screened import legendre_array, match
from .specfun import coulomb_norm0, coulomb_phase

SLOPE_TOL = 1e-3


def default_phi_window(k: float, n: int = 30):
    """Radii for :func:`regularize`: ``[1e-8, 1e-6] * min(1, 1/k)``.

    Deep enough that the vanishing corrections to ``omega phi`` stay below
    the slope tolerance for the SuperCoulomb variable at rho = 5/4.
    """
    return np.geomspace(1e-8, 1e-6, n) * min(1.0, 1.0 / k)


@dataclass(frozen=True)
class ZeroRangeState:
    """Fixed-point data of the zero-range construction."""

    lam: float
    beta: complex
    phi0_at_zero: complex
    B: complex
    singularity: SingularityClass
    k: float = 1.0

    @property
    def alpha(self) -> complex:
        return -self.lam * self.beta

    @property
    def closure_residual(self) -> float:
        """Relative mismatch of ``beta (1 + lambda B) = phi0(0)``."""
        lhs = self.beta * (1.0 + self.lam * self.B)
        return abs(lhs - self.phi0_at_zero) / max(abs(self.phi0_at_zero), 1e-300)


def _k_of(kvec):
    kv = np.atleast_1d(np.asarray(kvec, dtype=float))
    k = float(np.linalg.norm(kv))
    if not k > 0.0:
        raise DomainError("|k| must be positive")
    return k


def _cos_kr(kvec, cos_angle):
    return 1.0 if cos_angle is None else float(cos_angle)


def phi0_at_origin(spec: PotentialSpec, kvec, method: str = "ode", **opts) -> complex:
    """``phi0(0, k)`` for the scattering solution off V.

    ``method="ode"`` uses ``-1 / W(u, v)`` with ``u ~ r`` at the origin and
    ``v -> hhat_0``; this equals ``1/(k (a - i b))`` for ``u = a jhat + b nhat``
    outside the potential.  ``method="born"`` is the first iterate
    ``1 - J(0)``, useful only for weak potentials.
    """
    k = _k_of(kvec)
    if spec.is_free:
        return 1.0 + 0j
    if method == "born":
        from .born import j1_j2_phi0
        return 1.0 - j1_j2_phi0(spec, k, 0.0, **opts).value
    if method != "ode":
        raise DomainError(f"unknown method {method!r}")
    if spec.model == "coulomb":
        eta = spec.v0 / (2.0 * k)
        s0 = coulomb_phase(0, eta)
        return coulomb_norm0(eta) * complex(math.cos(s0), math.sin(s0))
    if spec.model == "screened_coulomb":
        md = match(0, spec.v0 / (2.0 * k), k, spec.screening_radius)
        return coulomb_norm0(md.eta) / md.b2
    r_ref = opts.pop("r_ref", 0.5)
    pair = radial.solve_pair(spec, 0, k, r_ref, r_ref * 1.5, **opts)
    return -1.0 / pair.wronskian


def phi0(spec: PotentialSpec, kvec, r, cos_angle: Optional[float] = None,
         tol: float = 1e-12, ell_max: int = 60, **opts):
    """Scattering solution ``phi0(r)`` for scalar or array r at one angle to k.

    Partial waves ``-u_l(r) / (r W_l)`` weighted by ``i^l (2l+1) P_l``;
    stops when three consecutive terms are below ``tol`` of the sum at
    every radius.
    """
    k = _k_of(kvec)
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs <= 0.0):
        raise DomainError("r must be positive")
    c = _cos_kr(kvec, cos_angle)
    if spec.is_free:
        out = np.exp(1j * k * rs * c)
    elif spec.long_range:
        raise DomainError("phi0 away from the origin needs a short-range potential")
    else:
        p = legendre_array(ell_max, c)
        out = np.zeros(rs.shape, dtype=complex)
        lo, hi = float(rs.min()), float(rs.max()) * 1.0000001
        small = 0
        for ell in range(ell_max + 1):
            pair = radial.solve_pair(spec, ell, k, lo, hi, **opts)
            u = np.array([pair.u(x) for x in rs])
            term = (1j ** ell) * (2 * ell + 1) * p[ell] * (-u / (rs * pair.wronskian))
            out += term
            tiny = np.all(np.abs(term) < tol * np.maximum(np.abs(out), 1e-300))
            small = small + 1 if tiny else 0
            if small >= 3:
                break
    return complex(out[0]) if np.ndim(r) == 0 else out


def solve_beta(lam: float, phi0_at_zero: complex, B: complex) -> complex:
    """``beta = phi0(0) / (1 + lambda B)``."""
    den = 1.0 + lam * B
    if abs(den) < 1e-14 * max(1.0, abs(lam * B)):
        raise SingularConfigurationError(
            "1 + lambda B vanishes: the zero-range problem is at a pole")
    return complex(phi0_at_zero) / den


def green_constant(spec: PotentialSpec, k: float, r=None, **solver_opts):
    """Fit of ``G(r, 0)`` near the origin; returns the :class:`AsymptoteFit`."""
    r = default_window(k) if r is None else np.asarray(r, dtype=float)
    g = green_at_origin(spec, k, r, **solver_opts)
    cls = classify(spec)
    return fit_short_range((r, g), cls, rho=spec.rho, V0=spec.v0)


def build_state(spec: PotentialSpec, kvec, lam: float, fit_r=None,
                **solver_opts) -> ZeroRangeState:
    """Fit B, compute phi0(0) and solve for beta."""
    k = _k_of(kvec)
    fit = green_constant(spec, k, fit_r, **solver_opts)
    p0 = phi0_at_origin(spec, kvec)
    B = fit.const_term
    return ZeroRangeState(lam=float(lam), beta=solve_beta(lam, p0, B), phi0_at_zero=p0,
                          B=B, singularity=classify(spec), k=k)


def phi_full(state: ZeroRangeState, spec: PotentialSpec, kvec, r,
             cos_angle: Optional[float] = None, **opts):
    """``phi0(r) - lambda G(r, 0) beta`` for scalar or array r."""
    k = _k_of(kvec)
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    g = np.atleast_1d(green_at_origin(spec, k, rs))
    p = np.atleast_1d(phi0(spec, kvec, rs, cos_angle, **opts))
    out = p - state.lam * g * state.beta
    return complex(out[0]) if np.ndim(r) == 0 else out


def omega(singularity, V0: float, rho: Optional[float], r):
    """Pseudo-potential variable; raises when ``1/omega <= 0``."""
    cls = singularity if isinstance(singularity, SingularityClass) \
        else SingularityClass(str(singularity))
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs <= 0.0):
        raise DomainError("r must be positive")
    inv = _inv_omega(cls, V0, rho)
    vals = inv(rs)
    if np.any(vals <= 0.0):
        rc = critical_radius(cls, V0, rho, float(rs.max()))
        raise DomainError(f"1/omega <= 0 beyond the critical radius r_c = {rc:.6g}")
    out = 1.0 / vals
    return float(out[0]) if np.ndim(r) == 0 else out


def _inv_omega(cls, V0, rho):
    if cls is SingularityClass.SUB_COULOMB:
        return lambda r: 1.0 / r
    if cls is SingularityClass.COULOMB:
        return lambda r: 1.0 / r + V0 * np.log(r)
    if rho is None:
        raise DomainError("SuperCoulomb omega needs rho")
    A = a0(V0, rho)
    return lambda r: 1.0 / r + A * r ** (1.0 - rho)


def critical_radius(singularity, V0, rho, r_hi: float = 1e3) -> float:
    """Smallest r where ``1/omega`` reaches zero (inf if none below r_hi)."""
    cls = singularity if isinstance(singularity, SingularityClass) \
        else SingularityClass(str(singularity))
    f = _inv_omega(cls, V0, rho)
    grid = np.geomspace(1e-12, r_hi, 2000)
    vals = f(grid)
    idx = np.nonzero(vals <= 0.0)[0]
    if len(idx) == 0:
        return math.inf
    i = idx[0]
    if i == 0:
        return float(grid[0])
    return float(brentq(lambda x: float(f(np.array([x]))[0]), grid[i - 1], grid[i]))


@dataclass(frozen=True)
class Regularized:
    """Result of the ``d/d omega (omega phi)`` extrapolation.

    ``intercept`` estimates ``alpha / 4 pi``; ``flagged`` is set when the
    slopes on the two halves of the fitted range disagree by more than the
    tolerance, i.e. ``omega phi`` is not linear in omega there.
    """

    beta: complex
    intercept: complex
    slope_spread: float
    flagged: bool

    def __complex__(self):
        return complex(self.beta)


def regularize(phi_samples, singularity, V0: float, rho: Optional[float],
               tol: float = SLOPE_TOL) -> Regularized:
    """Regular part of phi from its short-range samples."""
    if isinstance(phi_samples, tuple) and len(phi_samples) == 2 and np.ndim(phi_samples[0]) == 1:
        r = np.asarray(phi_samples[0], dtype=float)
        ph = np.asarray(phi_samples[1], dtype=complex)
    else:
        r = np.array([float(a) for a, _ in phi_samples])
        ph = np.array([complex(b) for _, b in phi_samples])
    if len(r) < 9:
        raise DomainError("need at least 9 samples")
    w = omega(singularity, V0, rho, r)
    order = np.argsort(w)
    w, ph = w[order], ph[order]
    y = w * ph
    m = max(len(w) // 3, 6)
    ws, ys = w[:m], y[:m]

    def line(x, z):
        A = np.column_stack([np.ones_like(x), x])
        sol, *_ = np.linalg.lstsq(A, z, rcond=None)
        return sol

    c0, slope = line(ws, ys)
    h = m // 2
    s1 = line(ws[:h], ys[:h])[1]
    s2 = line(ws[h:], ys[h:])[1]
    spread = float(abs(s1 - s2) / max(abs(slope), 1e-300))
    return Regularized(beta=complex(slope), intercept=complex(c0), slope_spread=spread,
                       flagged=bool(spread > tol))
