"""
Radial Schrodinger solutions for potentials singular as ``r^-rho``.

Solves ``-u'' + [l(l+1)/r^2 + V(r) - k^2] u = 0`` for

* the regular solution ``u ~ r^(l+1)`` (launched from a Frobenius series at
  a small ``r_start`` and integrated outward), and
* the outgoing solution ``v -> hhat_l(kr) ~ exp(i(kr - l pi/2))`` (launched
  at ``r_max`` where the potential is below ``tail_epsilon`` and integrated
  inward).

Integration runs in ``t = log r`` on the state ``(y, r y')``.  In that
variable the coefficient ``r^2 V(r) = r^(2-rho) W(r)`` is bounded at the
origin, so step control near the singular point needs no special casing.

The regular solution is normalized to unit leading coefficient,
``u = r^(l+1) (1 + ...)``; the outgoing one carries the recorded constant
``v_norm`` (1 unless rescaled), which cancels in the partial Green's
function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AccuracyError, DomainError, IntegrationError
from .potentials import PotentialSpec, evaluate
from .specfun import riccati

DEFAULT_TAIL_EPSILON = 1e-10
DEFAULT_RTOL = 1e-12
_SERIES_TOL = 1e-17


def default_r_start(k: float) -> float:
    return 1e-4 * min(1.0, 1.0 / k)


# --------------------------------------------------------------------------
# Frobenius start
# --------------------------------------------------------------------------

def frobenius_coefficients(spec: PotentialSpec, ell: int, k: float, e_max: float):
    """Coefficients of ``u = r^(l+1) sum c_(m,n) r^(m + n s)``, ``s = 2 - rho``.

    Recursion: ``e (e + 2l + 1) c_(m,n) = sum_j w_j c_(m-j, n-1) - k^2 c_(m-2, n)``
    with ``e = m + n s`` and ``w_j`` the Taylor coefficients of W.
    Exponent collisions (rational s) are harmless: each lattice point obeys
    its own linear equation and the sum satisfies the ODE.

    Returns ``(exponents, coeffs)`` sorted by exponent.
    """
    s = 2.0 - spec.rho
    w = spec.taylor
    n_max = int(e_max / s) + 1
    m_max = int(e_max) + 1
    c = {(0, 0): 1.0}
    pts = sorted(((m + n * s, m, n) for n in range(n_max + 1) for m in range(m_max + 1)
                  if m + n * s <= e_max and (m, n) != (0, 0)))
    for e, m, n in pts:
        acc = 0.0
        if n >= 1:
            for j in range(0, min(m, len(w) - 1) + 1):
                acc += w[j] * c.get((m - j, n - 1), 0.0)
        if m >= 2:
            acc -= k * k * c.get((m - 2, n), 0.0)
        c[(m, n)] = acc / (e * (e + 2 * ell + 1))
    exps = np.array([0.0] + [p[0] for p in pts])
    coeffs = np.array([1.0] + [c[(p[1], p[2])] for p in pts])
    return exps, coeffs


def frobenius_start(spec: PotentialSpec, ell: int, k: float, r_start: float,
                    n_terms: Optional[int] = None):
    """Value and r-derivative of the regular solution at ``r_start``.

    The series is extended until the terms in the last unit band of
    exponents fall below ``1e-17`` of the sum; ``n_terms`` caps the lattice
    size.  Returns ``(u, du, truncation_estimate)``.
    """
    if not r_start > 0.0:
        raise DomainError("r_start must be positive")
    if spec.screening_radius is not None and r_start >= spec.screening_radius:
        raise DomainError("r_start must lie inside the screening radius")
    e_max = 4.0
    while True:
        exps, coeffs = frobenius_coefficients(spec, ell, k, e_max)
        if n_terms is not None and len(exps) > n_terms:
            exps, coeffs = exps[:n_terms], coeffs[:n_terms]
        terms = coeffs * r_start ** exps
        total = terms.sum()
        band = np.abs(terms[exps > exps[-1] - 1.0]).max()
        if band <= _SERIES_TOL * abs(total) or (n_terms is not None and len(exps) >= n_terms):
            break
        e_max *= 1.5
        if e_max > 400:
            raise AccuracyError(
                f"Frobenius series does not decay at r_start={r_start:g}; step too large")
    p = ell + 1 + exps
    u = r_start ** (ell + 1) * total
    du = r_start ** ell * np.dot(coeffs * p, r_start ** exps)
    return u, du, band / max(abs(total), 1e-300)


# --------------------------------------------------------------------------
# log-variable integration
# --------------------------------------------------------------------------

def _rhs_factory(spec, ell, k):
    ll = ell * (ell + 1.0)
    k2 = k * k
    s = 2.0 - spec.rho
    w = spec.smooth_factor
    R = spec.screening_radius if spec.screening_radius is not None else math.inf

    def rhs(t, y):
        r = math.exp(t)
        # r^2 V = r^(2 - rho) W(r), bounded at the origin
        q = ll - k2 * r * r
        if r <= R:
            q += r ** s * w(r)
        return [y[1], y[1] + q * y[0]]

    return rhs


def _integrate(spec, ell, k, t0, t1, y0, rtol):
    """Integrate from t0 to t1 splitting at the screening radius."""
    breaks = []
    if spec.screening_radius is not None:
        tb = math.log(spec.screening_radius)
        if min(t0, t1) < tb < max(t0, t1):
            breaks.append(tb)
    knots = [t0] + breaks + [t1]
    rhs = _rhs_factory(spec, ell, k)
    pieces = []
    y = np.asarray(y0)
    for a, b in zip(knots[:-1], knots[1:]):
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=rtol,
                        atol=1e-300, dense_output=True)
        if sol.status != 0:
            raise IntegrationError(f"radial integration failed: {sol.message}",
                                   radius=math.exp(sol.t[-1]))
        pieces.append((min(a, b), max(a, b), sol.sol))
        y = sol.y[:, -1]
    return pieces


class _Piecewise:
    """Dense output over several integration pieces in t = log r."""

    def __init__(self, pieces, scale=1.0):
        self.pieces = sorted(pieces, key=lambda p: p[0])
        self.scale = scale
        self.t_lo = self.pieces[0][0]
        self.t_hi = self.pieces[-1][1]

    def __call__(self, t):
        for lo, hi, fn in self.pieces:
            if lo - 1e-12 <= t <= hi + 1e-12:
                return fn(min(max(t, lo), hi)) * self.scale
        raise DomainError(f"r = {math.exp(t):g} outside the integrated range")


def find_tail_radius(spec: PotentialSpec, k: float, tail_epsilon: float,
                     r_from: float = 1.0) -> float:
    """Smallest radius past which ``|V| < tail_epsilon`` on a geometric scan."""
    if spec.long_range:
        raise DomainError("long-range (unscreened Coulomb) potential has no tail radius")
    if spec.screening_radius is not None:
        return float(spec.screening_radius)
    r = max(r_from, 1.0)
    for _ in range(400):
        probe = r * np.geomspace(1.0, 4.0, 9)
        if np.all(np.abs([evaluate(spec, x) for x in probe]) < tail_epsilon):
            return float(r)
        r *= 1.25
    raise DomainError("could not find a radius where the potential tail is negligible")


# --------------------------------------------------------------------------
# solution pair
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialSolutionPair:
    """Regular ``u`` and outgoing ``v`` for one (spec, ell, k).

    ``u(r)``, ``v(r)`` and their r-derivatives accept scalars.  Below
    ``r_start`` the regular solution is taken from the Frobenius series.
    """

    spec: PotentialSpec
    ell: int
    k: float
    r_start: float
    r_max: float
    tail_epsilon: float
    grid: np.ndarray
    _u: _Piecewise = field(repr=False)
    _v: _Piecewise = field(repr=False)
    v_norm: complex = 1.0
    wronskian: complex = 0j

    @property
    def r_lo(self) -> float:
        return math.exp(self._v.t_lo)

    @property
    def r_hi(self) -> float:
        return math.exp(self._u.t_hi)

    def _u_state(self, r):
        if r < self.r_start:
            u, du, _ = frobenius_start(self.spec, self.ell, self.k, r)
            return u, du
        y = self._u(math.log(r))
        return y[0], y[1] / r

    def _v_state(self, r):
        if r > self.r_max and (self.spec.screening_radius is not None):
            tr = riccati(self.ell, self.k * r)
            return self.v_norm * tr.h, self.v_norm * self.k * tr.dh
        y = self._v(math.log(r))
        return y[0] * self.v_norm, y[1] * self.v_norm / r

    def u(self, r):
        return self._u_state(r)[0]

    def du(self, r):
        return self._u_state(r)[1]

    def v(self, r):
        return self._v_state(r)[0]

    def dv(self, r):
        return self._v_state(r)[1]

    def wronskian_at(self, r) -> complex:
        u, du = self._u_state(r)
        v, dv = self._v_state(r)
        return u * dv - du * v

    def wronskian_spread(self) -> float:
        """Max relative deviation of ``u v' - u' v`` from ``wronskian`` over the grid."""
        vals = np.array([self.wronskian_at(r) for r in self.grid])
        return float(np.max(np.abs(vals - self.wronskian)) / abs(self.wronskian))

    def rescaled(self, factor: complex) -> "RadialSolutionPair":
        """Same pair with v multiplied by ``factor``."""
        return replace(self, v_norm=self.v_norm * factor,
                       wronskian=self.wronskian * factor)


def solve_regular(spec: PotentialSpec, ell: int, k: float, r_end: float,
                  r_start: Optional[float] = None, rtol: float = DEFAULT_RTOL):
    """Regular solution on ``[r_start, r_end]`` as a dense evaluator of (u, r u')."""
    r_start = r_start or default_r_start(k)
    if r_end <= r_start:
        raise DomainError("r_end must exceed r_start")
    u0, du0, _ = frobenius_start(spec, ell, k, r_start)
    # integrate a scaled copy; u0 may underflow at high ell
    y0 = np.array([1.0, r_start * du0 / u0])
    pieces = _integrate(spec, ell, k, math.log(r_start), math.log(r_end), y0, rtol)
    return _Piecewise(pieces, scale=u0)


def solve_outgoing(spec: PotentialSpec, ell: int, k: float, r_end: float,
                   r_max: Optional[float] = None,
                   tail_epsilon: float = DEFAULT_TAIL_EPSILON,
                   rtol: float = DEFAULT_RTOL):
    """Outgoing solution integrated inward from ``r_max`` to ``r_end``.

    Returns ``(evaluator, r_max)``.  ``r_max`` defaults to the screening
    radius or the first radius where ``|V| < tail_epsilon``.
    """
    if r_max is None:
        r_max = find_tail_radius(spec, k, tail_epsilon)
    elif spec.screening_radius is None and abs(evaluate(spec, r_max)) >= tail_epsilon:
        raise DomainError(
            f"|V(r_max={r_max:g})| = {abs(evaluate(spec, r_max)):.3g} is not below "
            f"tail_epsilon = {tail_epsilon:g}")
    tr = riccati(ell, k * r_max)
    y0 = np.array([tr.h, r_max * k * tr.dh], dtype=complex)
    if r_end >= r_max:
        # nothing to integrate: v is free everywhere requested
        r_end_eff = r_max * (1 - 1e-9)
    else:
        r_end_eff = r_end
    pieces = _integrate(spec, ell, k, math.log(r_max), math.log(r_end_eff), y0, rtol)
    return _Piecewise(pieces), float(r_max)


def solve_pair(spec: PotentialSpec, ell: int, k: float, r_lo: float, r_hi: float,
               grid=None, r_start: Optional[float] = None, r_max: Optional[float] = None,
               tail_epsilon: float = DEFAULT_TAIL_EPSILON,
               rtol: float = DEFAULT_RTOL) -> RadialSolutionPair:
    """Solve for u and v so that both are available on ``[r_lo, r_hi]``."""
    if not k > 0.0:
        raise DomainError("k must be positive")
    if not 0.0 < r_lo < r_hi:
        raise DomainError("need 0 < r_lo < r_hi")
    r_start = r_start or default_r_start(k)
    if ell > 0:
        # u ~ r^(l+1): starting far below r_lo only costs dynamic range
        r_start = max(r_start, r_lo * 1e-12 ** (1.0 / (ell + 1)))
    r_start = min(r_start, r_lo)
    if spec.long_range:
        raise DomainError("use exact Coulomb functions for the unscreened Coulomb model")
    if r_max is None:
        r_max = find_tail_radius(spec, k, tail_epsilon, r_from=r_hi)
    u_end = r_hi * (1 + 1e-12)
    u_ev = solve_regular(spec, ell, k, u_end, r_start=r_start, rtol=rtol)
    v_ev, r_max = solve_outgoing(spec, ell, k, r_lo, r_max=r_max,
                                 tail_epsilon=tail_epsilon, rtol=rtol)
    if grid is None:
        grid = np.geomspace(r_lo, r_hi, 32)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    pair = RadialSolutionPair(spec=spec, ell=int(ell), k=float(k), r_start=r_start,
                              r_max=r_max, tail_epsilon=tail_epsilon, grid=grid,
                              _u=u_ev, _v=v_ev)
    r_ref = min(max(math.sqrt(r_lo * r_hi), r_lo), r_max)
    return replace(pair, wronskian=pair.wronskian_at(r_ref))


def partial_green(pair: RadialSolutionPair, r: float, rp: float) -> complex:
    """``G_l(r, r') = -u(r_<) v(r_>) / W(u, v)``."""
    lo, hi = min(r, rp), max(r, rp)
    if lo <= 0.0 or lo < pair.r_lo * (1 - 1e-12) or hi > pair.r_hi:
        raise DomainError(f"(r, r') = ({r:g}, {rp:g}) outside the solved range")
    return -pair.u(lo) * pair.v(hi) / pair.wronskian


def green_origin_limit(pair: RadialSolutionPair, r: float) -> complex:
    """``lim_{r'->0} G_0(r, r') / r'`` for the s-wave (unit-normalized u)."""
    if pair.ell != 0:
        raise DomainError("origin limit is only nonzero for ell = 0")
    return -pair.v(r) / pair.wronskian
