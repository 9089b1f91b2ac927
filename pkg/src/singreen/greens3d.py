"""
Three-dimensional outgoing Green's function from its partial waves.

    G(r, r') = (1 / 4 pi r r') sum_l (2l + 1) G_l(r, r') P_l(cos theta)

Partial waves come from exact Coulomb functions (pure and sharply screened
Coulomb) or from the radial ODE solver (everything else).  Near the
diagonal the free kernel ``exp(ik|r - r'|) / (4 pi |r - r'|)`` is split off
and added in closed form, which leaves a smooth, quickly converging
remainder.

For ``r' = 0`` only the s-wave survives: ``G_l(r, r') ~ r'^(l+1)``, so after
dividing by ``r r'`` every ``l > 0`` term vanishes in the limit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import radial
from .errors import AccuracyError, DomainError, IntegrationError
from .potentials import PotentialSpec
from .screened import _ksum, chi, chi_array, legendre_array, match
from .specfun import coulomb_fg_array, coulomb_norm0, riccati, riccati_array

DEFAULT_TOL = 1e-10
DEFAULT_ELL_BUDGET = 400
#: budget when partial waves come from the ODE solver
ODE_ELL_BUDGET = 100
NEAR_DIAGONAL = 0.05


@dataclass(frozen=True)
class GreenEvaluation:
    """One evaluation of the 3D kernel.

    ``tail_estimate`` is the magnitude of the last retained terms; the
    result is ``converged`` when it fell below the requested tolerance.
    ``near_diagonal`` marks points where the plain series converges slowly.
    """

    value: complex
    r: float
    rprime: float
    cos_angle: float
    k: float
    ell_used: int
    tail_estimate: float
    converged: bool = True
    near_diagonal: bool = False


def legendre(ell_max: int, x: float) -> np.ndarray:
    if abs(x) > 1.0:
        raise DomainError("Legendre argument must lie in [-1, 1]")
    return legendre_array(ell_max, x)


def free_kernel(k: float, r: float, rp: float, cos_angle: float) -> complex:
    d = math.sqrt(max(r * r + rp * rp - 2.0 * r * rp * cos_angle, 0.0))
    if d == 0.0:
        raise DomainError("free kernel is singular at r = r'")
    return cmath.exp(1j * k * d) / (4.0 * math.pi * d)


def _eta(spec, k):
    return spec.v0 / (2.0 * k)


def _free_waves(L, k, lo, hi):
    j = riccati_array(L, k * lo, strict=False)[0]
    jh, _, nh, _ = riccati_array(L, k * hi, strict=False)
    with np.errstate(over="ignore", invalid="ignore"):
        return j * (nh + 1j * jh) / k


def _coulomb_waves(L, eta, k, lo, hi):
    F = coulomb_fg_array(L, eta, k * lo)[0]
    Fh, _, Gh, _ = coulomb_fg_array(L, eta, k * hi)
    with np.errstate(over="ignore", invalid="ignore"):
        return F * (Gh + 1j * Fh) / k, F, Fh


def _partial_waves(spec: PotentialSpec, k, lo, hi, L, cache):
    """``G_l(lo, hi)`` for ``l = 0..L``."""
    if spec.is_free:
        return _free_waves(L, k, lo, hi)
    if spec.model == "coulomb":
        return _coulomb_waves(L, _eta(spec, k), k, lo, hi)[0]
    if spec.model == "screened_coulomb":
        R = spec.screening_radius
        if not hi < R:
            raise DomainError("screened-Coulomb kernel needs r, r' < R")
        eta = _eta(spec, k)
        g, F, Fh = _coulomb_waves(L, eta, k, lo, hi)
        with np.errstate(over="ignore", invalid="ignore"):
            return g + chi_array(L, eta, k, R) * F * Fh / k
    out = np.full(L + 1, np.nan, dtype=complex)
    for ell in range(L + 1):
        if ell not in cache:
            try:
                pair = radial.solve_pair(spec, ell, k, lo, hi)
                cache[ell] = radial.partial_green(pair, lo, hi)
            except (IntegrationError, AccuracyError):
                # high-l solutions leave the floating-point range; stop here
                break
        out[ell] = cache[ell]
    return out


def green_sum(spec: PotentialSpec, k: float, r: float, rprime: float, cos_angle: float,
              tol: float = DEFAULT_TOL, split_free: bool | None = None,
              ell_budget: int = DEFAULT_ELL_BUDGET) -> GreenEvaluation:
    """Partial-wave sum of the 3D Green's function.

    The sum stops once three consecutive terms are below ``tol`` relative to
    the running sum.  ``split_free`` (default: near the diagonal) sums only
    ``G_l - G_l^free`` and adds the closed-form free kernel.
    """
    if not k > 0.0:
        raise DomainError("k must be positive")
    if not (r > 0.0 and rprime > 0.0):
        raise DomainError("green_sum needs r, r' > 0; use green_at_origin for r' = 0")
    if abs(cos_angle) > 1.0:
        raise DomainError("cos_angle must lie in [-1, 1]")
    lo, hi = min(r, rprime), max(r, rprime)
    d = math.sqrt(max(r * r + rprime * rprime - 2 * r * rprime * cos_angle, 0.0))
    near = d < NEAR_DIAGONAL * hi
    if split_free is None:
        split_free = near
    if split_free and d == 0.0:
        raise DomainError("coincident points: the kernel is singular")
    if spec.is_free and split_free:
        return GreenEvaluation(free_kernel(k, r, rprime, cos_angle), r, rprime,
                               cos_angle, k, 0, 0.0, True, near)

    exact = spec.is_free or spec.model in ("coulomb", "screened_coulomb")
    if not exact:
        ell_budget = min(ell_budget, ODE_ELL_BUDGET)
    cache: dict = {}
    L = 16
    while True:
        L = min(L, ell_budget)
        waves = _partial_waves(spec, k, lo, hi, L, cache)
        bad = ~np.isfinite(waves)
        if bad.any():
            # truncate at the first partial wave that could not be computed
            L = int(np.argmax(bad)) - 1
            if L < 2:
                raise AccuracyError("partial waves unavailable beyond l = 1")
            waves = waves[: L + 1]
            ell_budget = L
        if split_free:
            waves = waves - _free_waves(L, k, lo, hi)
        p = legendre_array(L, cos_angle)
        ells = np.arange(L + 1)
        terms = (2 * ells + 1) * waves * p / (4.0 * math.pi * lo * hi)
        finite = np.isfinite(terms)
        terms = np.where(finite, terms, 0.0)
        mags = (2 * ells + 1) * np.abs(np.where(np.isfinite(waves), waves, 0.0)) \
            / (4.0 * math.pi * lo * hi)
        total = _ksum(terms)
        scale = max(abs(total), 1e-300)
        small = mags < tol * scale
        stop = None
        for i in range(2, L + 1):
            if small[i] and small[i - 1] and small[i - 2]:
                stop = i
                break
        if stop is not None or L >= ell_budget:
            n = stop if stop is not None else L
            val = _ksum(terms[: n + 1])
            if split_free:
                val += free_kernel(k, r, rprime, cos_angle)
            tail = float(mags[max(n - 2, 0): n + 1].max())
            return GreenEvaluation(complex(val), r, rprime, cos_angle, k, int(n), tail,
                                   stop is not None, near)
        # ODE waves are expensive: grow by small steps instead of doubling
        L = L * 2 if exact else L + 8


def coulomb_origin(eta: float, k: float, r):
    """``C_0 H+_0(eta, kr) / (4 pi r)`` for scalar or array r."""
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    c0 = coulomb_norm0(eta)
    out = np.empty(rs.shape, dtype=complex)
    for i, x in enumerate(rs):
        F, _, G, _ = coulomb_fg_array(0, eta, k * x)
        out[i] = c0 * (G[0] + 1j * F[0]) / (4.0 * math.pi * x)
    return out if np.ndim(r) else complex(out[0])


def green_at_origin(spec: PotentialSpec, k: float, r, **solver_opts):
    """``G(r, 0)`` for scalar or array ``r > 0`` (s-wave only).

    Uses ``-v(r) / (4 pi r W(u, v))`` with ``u ~ r`` at the origin; the
    exactly solvable models use their closed forms.  ``solver_opts`` are
    passed to :func:`radial.solve_pair` for generic potentials.
    """
    if not k > 0.0:
        raise DomainError("k must be positive")
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs <= 0.0):
        raise DomainError("r must be positive")
    scalar = np.ndim(r) == 0
    if spec.is_free:
        out = np.exp(1j * k * rs) / (4.0 * math.pi * rs)
    elif spec.model == "coulomb":
        out = coulomb_origin(_eta(spec, k), k, rs)
    elif spec.model == "screened_coulomb":
        out = _screened_origin(_eta(spec, k), k, spec.screening_radius, rs)
    else:
        pair = radial.solve_pair(spec, 0, k, float(rs.min()), float(rs.max()) * 1.0000001,
                                 **solver_opts)
        out = np.array([radial.green_origin_limit(pair, x) / (4.0 * math.pi * x)
                        for x in rs])
    return complex(out[0]) if scalar else out


def _screened_origin(eta, k, R, rs):
    c0 = coulomb_norm0(eta)
    md = match(0, eta, k, R)
    out = np.empty(rs.shape, dtype=complex)
    for i, x in enumerate(rs):
        if x < R:
            F, _, G, _ = coulomb_fg_array(0, eta, k * x)
            out[i] = c0 * (G[0] + 1j * F[0] + md.chi * F[0]) / (4.0 * math.pi * x)
        else:
            out[i] = c0 * riccati(0, k * x).h / (4.0 * math.pi * x * md.b2)
    return out


def q_origin_limit(eta: float, k: float, R: float) -> complex:
    """``lim_{r -> 0} Q(r, 0) = k C_0^2 chi_0 / (4 pi)``."""
    return k * coulomb_norm0(eta) ** 2 * chi(0, eta, k, R) / (4.0 * math.pi)


__all__ = ["GreenEvaluation", "green_sum", "green_at_origin", "legendre", "free_kernel",
           "coulomb_origin", "q_origin_limit"]
