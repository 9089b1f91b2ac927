"""
Quadrature for the first-order (Born) terms near a singular origin.

With the free kernel ``G0(r, q) = exp(ik|r - q|) / (4 pi |r - q|)``:

* ``I(r) = int G0(r, q) V(q) G0(q, 0) d^3q`` split at ``q = r0`` into
  ``I1`` (inner ball) and ``I2`` (outside).  Only the s-wave of ``G0(r, q)``
  survives the angular integral, leaving

      I1 = [exp(ikr) int_0^r V e^{ikq} sin(kq)/k dq
            + sin(kr)/k int_r^r0 V e^{2ikq} dq] / (4 pi r)
      I2 = sin(kr) / (4 pi k r) int_r0^inf V e^{2ikq} dq

* ``J(r) = int G0(r, q) V(q) exp(i k.q) d^3q``, the first iterate of the
  scattering solution (which is ``exp(i k.r) - J + ...``), expanded in
  partial waves.

Integrals touching the origin use ``q = b t^(1/(2 - rho))``, which turns the
``q^(1 - rho)`` endpoint into a bounded integrand, followed by Gauss-Legendre
panels refined geometrically towards ``t = 0``.  Everything else runs on
panels in ``log q``.  Each integral is repeated with twice the nodes per
panel; the difference is the reported error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from .errors import AccuracyError, DomainError, UnsupportedClassError
from .potentials import PotentialSpec, evaluate
from .screened import legendre_array


#: beyond this many radians of exp(2ikq) the tail goes to QAWF instead of panels
MAX_TAIL_PHASE = 500.0


@dataclass(frozen=True)
class SplitConfig:
    """Numerical settings for the split integrals.

    ``r0`` separates the inner ball from the tail region.  ``nodes`` is the
    Gauss-Legendre order per panel, ``origin_levels`` the number of
    geometric panels towards a singular endpoint, ``tail_cut`` the value of
    ``|V|`` below which the tail is dropped.
    """

    r0: float = 1.0
    nodes: int = 24
    origin_levels: int = 40
    max_log_width: float = 0.5
    tol: float = 1e-10
    tail_cut: float = 1e-15
    ell_max: int = 200

    def __post_init__(self):
        if not self.r0 > 0.0:
            raise DomainError("r0 must be positive")
        if self.nodes < 4:
            raise DomainError("nodes must be at least 4")


@dataclass(frozen=True)
class QuadValue:
    value: complex
    error: float
    converged: bool

    def __complex__(self):
        return complex(self.value)


_GL_CACHE: dict = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = leggauss(n)
    return _GL_CACHE[n]


def _panels(a, b, fn, n):
    """Sum of Gauss-Legendre rules over consecutive panels; fn is vectorized."""
    x, w = _gl(n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    return np.sum(vals * (half[:, None] * w[None, :]), axis=-1)


def _origin_rule(fn, b, s, cfg, n):
    """``int_0^b fn(q) dq`` with ``fn ~ q^(s-1)`` at 0."""
    lv = cfg.origin_levels
    edges = np.concatenate(([0.0], 2.0 ** -np.arange(lv, -1, -1.0)))

    def g(t):
        q = b * t ** (1.0 / s)
        return fn(q) * (b / s) * t ** (1.0 / s - 1.0)

    return _panels(edges[:-1], edges[1:], g, n)


def _log_rule(fn, a, b, k, cfg, n):
    """``int_a^b fn(q) dq`` on panels uniform in log q, split for oscillation."""
    ta, tb = math.log(a), math.log(b)
    m = max(1, math.ceil((tb - ta) / cfg.max_log_width))
    m = max(m, math.ceil(2.0 * k * (b - a) / math.pi))
    edges = np.linspace(ta, tb, m + 1)

    def g(t):
        q = np.exp(t)
        return fn(q) * q

    return _panels(edges[:-1], edges[1:], g, n)


def _integrate(rule, cfg, *args):
    lo = np.sum(rule(*args, cfg, cfg.nodes))
    hi = np.sum(rule(*args, cfg, 2 * cfg.nodes))
    err = float(abs(hi - lo))
    return QuadValue(complex(hi), err, bool(err <= cfg.tol * max(1.0, abs(hi))))


def _pot(spec):
    def v(q):
        return np.asarray(evaluate(spec, q), dtype=float)
    return v


def _breaks(spec, a, b):
    """Interval endpoints with the screening radius inserted if inside."""
    pts = [a]
    R = spec.screening_radius
    if R is not None and a < R < b:
        pts.append(R)
    pts.append(b)
    return pts


def _log_integral(spec, fn, a, b, k, cfg):
    total, err, ok = 0j, 0.0, True
    pts = _breaks(spec, a, b)
    for lo, hi in zip(pts[:-1], pts[1:]):
        q = _integrate(_log_rule, cfg, fn, lo, hi, k)
        total += q.value
        err += q.error
        ok = ok and q.converged
    return QuadValue(total, err, ok)


def _origin_integral(spec, fn, b, cfg):
    R = spec.screening_radius
    if R is not None and R < b:
        raise DomainError("inner region may not contain the screening radius")
    s = 2.0 - spec.rho
    return _integrate(_origin_rule, cfg, fn, b, s)


def _tail_end(spec, k, a, cfg):
    """Radius past which ``|V|`` stays below ``cfg.tail_cut``."""
    if spec.screening_radius is not None:
        return max(a, spec.screening_radius)
    r = max(a, 1.0)
    v = _pot(spec)
    for _ in range(200):
        probe = r * np.geomspace(1.0, 4.0, 9)
        if np.all(np.abs(v(probe)) < cfg.tail_cut):
            return r
        r *= 1.25
    return None


# --------------------------------------------------------------------------
# I1, I2
# --------------------------------------------------------------------------

def i1_singular_closed(V0: float, rho: float, r: float, r0: float) -> float:
    """Leading small-r part of ``I1`` for ``V = V0 q^-rho`` (k -> 0 kernels)."""
    if not 0.0 < r < r0:
        raise DomainError("need 0 < r < r0")
    if rho >= 2.0:
        raise UnsupportedClassError("rho must be < 2")
    if V0 == 0.0:
        return 0.0
    if rho == 1.0:
        return -V0 / (4 * math.pi) * math.log(r) + V0 / (4 * math.pi) * (1.0 + math.log(r0))
    return (V0 / (4 * math.pi * (2 - rho) * (rho - 1)) * r ** (1 - rho)
            + V0 / (4 * math.pi * (1 - rho)) * r0 ** (1 - rho))


def _check_r(r, cfg):
    if not 0.0 < r < cfg.r0:
        raise DomainError(f"need 0 < r < r0 = {cfg.r0}, got r = {r}")


def i1_quadrature(spec: PotentialSpec, k: float, r: float,
                  config: SplitConfig | None = None) -> QuadValue:
    """``I1(r)`` over the ball ``q < r0``."""
    cfg = config or SplitConfig()
    _check_r(r, cfg)
    if not k > 0.0:
        raise DomainError("k must be positive")
    if spec.is_free:
        return QuadValue(0j, 0.0, True)
    v = _pot(spec)
    rr = min(r, spec.screening_radius) if spec.screening_radius is not None else r
    a = _origin_integral(spec, lambda q: v(q) * np.exp(1j * k * q) * np.sin(k * q) / k, rr, cfg)
    if spec.screening_radius is not None and spec.screening_radius < cfg.r0:
        b_hi = max(r, min(cfg.r0, spec.screening_radius))
    else:
        b_hi = cfg.r0
    if b_hi > r:
        b = _log_integral(spec, lambda q: v(q) * np.exp(2j * k * q), r, b_hi, k, cfg)
    else:
        b = QuadValue(0j, 0.0, True)
    pref = 1.0 / (4 * math.pi * r)
    s = math.sin(k * r) / k
    val = pref * (complex(math.cos(k * r), math.sin(k * r)) * a.value + s * b.value)
    err = pref * (a.error + abs(s) * b.error)
    return QuadValue(val, err, a.converged and b.converged)


def tail_fourier(spec: PotentialSpec, k: float, a: float,
                 config: SplitConfig | None = None) -> QuadValue:
    """``int_a^inf V(q) exp(2ikq) dq``."""
    cfg = config or SplitConfig()
    v = _pot(spec)
    end = _tail_end(spec, k, a, cfg)
    if end is not None and end <= a:
        return QuadValue(0j, 0.0, True)
    if end is not None and (spec.screening_radius is not None or k * (end - a) <= MAX_TAIL_PHASE):
        return _log_integral(spec, lambda q: v(q) * np.exp(2j * k * q), a, end, k, cfg)
    # slowly decaying tail: Fourier-weighted adaptive quadrature
    f = lambda q: float(evaluate(spec, q))  # noqa: E731
    re, e1, *_ = integrate.quad(f, a, np.inf, weight="cos", wvar=2 * k, limlst=200,
                                epsabs=1e-14, full_output=1)
    im, e2, *_ = integrate.quad(f, a, np.inf, weight="sin", wvar=2 * k, limlst=200,
                                epsabs=1e-14, full_output=1)
    err = abs(e1) + abs(e2)
    return QuadValue(complex(re, im), err, err <= cfg.tol * max(1.0, abs(complex(re, im))))


def i2_quadrature(spec: PotentialSpec, k: float, r: float,
                  config: SplitConfig | None = None) -> QuadValue:
    """``I2(r)``, the part of the first Born term from ``q > r0``."""
    cfg = config or SplitConfig()
    _check_r(r, cfg)
    if spec.is_free:
        return QuadValue(0j, 0.0, True)
    t = tail_fourier(spec, k, cfg.r0, cfg)
    pref = math.sin(k * r) / (4 * math.pi * k * r)
    return QuadValue(pref * t.value, abs(pref) * t.error, t.converged)


def i2_bound(spec: PotentialSpec, k: float, r0: float) -> float:
    """Upper bound on ``|I2(r)|`` for every ``r < r0`` from the tail bound.

    ``|I2| <= (1/4 pi) int_r0^inf |V| dq <= C (1 + r0)^-delta / (4 pi delta)``.
    """
    if spec.long_range or not spec.delta > 1.0:
        raise UnsupportedClassError("tail bound needs delta > 1")
    if r0 < 0.0:
        raise DomainError("r0 must be nonnegative")
    d = spec.delta
    return spec.tail_bound_C * (1.0 + r0) ** (-d) / (4 * math.pi * d)


def born_green_origin(spec: PotentialSpec, k: float, r: float,
                      config: SplitConfig | None = None) -> QuadValue:
    """``G0(r, 0) - I1(r) - I2(r)``: the Green's function to first order in V."""
    cfg = config or SplitConfig()
    a = i1_quadrature(spec, k, r, cfg)
    b = i2_quadrature(spec, k, r, cfg)
    g0 = complex(math.cos(k * r), math.sin(k * r)) / (4 * math.pi * r)
    return QuadValue(g0 - a.value - b.value, a.error + b.error, a.converged and b.converged)


# --------------------------------------------------------------------------
# first iterate of the scattering solution
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FirstIterate:
    """``J = J1 + J2`` at one point; the scattering solution is ``exp(ik.r) - J``."""

    j1: complex
    j2: complex
    ell_used: int
    error: float
    converged: bool

    @property
    def value(self) -> complex:
        return self.j1 + self.j2


def _rj(ells, x):
    return x * special.spherical_jn(ells, x)


def _rh(ells, x):
    return x * (-special.spherical_yn(ells, x) + 1j * special.spherical_jn(ells, x))


def _resolve_point(kvec, r, cos_angle):
    kv = np.atleast_1d(np.asarray(kvec, dtype=float))
    k = float(np.linalg.norm(kv)) if kv.size > 1 else float(abs(kv[0]))
    if not k > 0.0:
        raise DomainError("|k| must be positive")
    rv = np.atleast_1d(np.asarray(r, dtype=float))
    if rv.size == 3:
        rad = float(np.linalg.norm(rv))
        if kv.size != 3:
            raise DomainError("a position vector needs a wave vector")
        c = float(rv @ kv) / (rad * k) if rad > 0 else 1.0
    else:
        rad = float(rv[0])
        c = 1.0 if cos_angle is None else float(cos_angle)
    if rad < 0.0 or abs(c) > 1.0 + 1e-12:
        raise DomainError("invalid evaluation point")
    return k, rad, max(-1.0, min(1.0, c))


def j1_j2_phi0(spec: PotentialSpec, kvec, r, config: SplitConfig | None = None,
               cos_angle: float | None = None) -> FirstIterate:
    """First iterate ``J = int G0(r, q) V(q) exp(i k.q) d^3q`` split at r0.

    ``kvec`` is a 3-vector (or |k|), ``r`` a position 3-vector or a radius
    with ``cos_angle`` between r and k.  ``r = 0`` gives the finite limit
    ``int V exp(ikq) sin(kq)/k dq``.
    """
    cfg = config or SplitConfig()
    k, rad, c = _resolve_point(kvec, r, cos_angle)
    if spec.long_range:
        raise UnsupportedClassError("the plane-wave iterate needs a short-range potential")
    if spec.is_free:
        return FirstIterate(0j, 0j, 0, 0.0, True)
    if rad >= cfg.r0:
        raise DomainError("r must lie inside r0")
    v = _pot(spec)
    end = _tail_end(spec, k, cfg.r0, cfg)
    if end is None:
        raise AccuracyError("potential tail too slow for the truncated iterate quadrature")

    if rad == 0.0:
        def f0(q):
            return v(q) * np.exp(1j * k * q) * np.sin(k * q) / k

        inner = _split_inner(spec, f0, cfg.r0, cfg)
        outer = _log_integral(spec, f0, cfg.r0, end, k, cfg) if end > cfg.r0 \
            else QuadValue(0j, 0.0, True)
        return FirstIterate(inner.value, outer.value, 0, inner.error + outer.error,
                            inner.converged and outer.converged)

    x = k * rad
    j1 = j2 = 0j
    err = 0.0
    ok = True
    small = 0
    p = legendre_array(cfg.ell_max, c)
    ell = 0
    for ell in range(cfg.ell_max + 1):
        e = np.array([ell])
        jr = float(_rj(e, x)[0])
        hr = complex(_rh(e, x)[0])

        def f_in(q, e=e):
            return v(q) * _rj(e, k * q) ** 2 / k

        def f_out(q, e=e):
            return v(q) * _rh(e, k * q) * _rj(e, k * q) / k

        a = _split_inner(spec, f_in, rad, cfg)
        b1 = _log_integral(spec, f_out, rad, cfg.r0, k, cfg)
        b2 = _log_integral(spec, f_out, cfg.r0, end, k, cfg) if end > cfg.r0 \
            else QuadValue(0j, 0.0, True)
        w = (1j ** ell) * (2 * ell + 1) * p[ell] / rad
        t1 = w * (hr / k * a.value + jr / k * b1.value)
        t2 = w * (jr / k * b2.value)
        j1 += t1
        j2 += t2
        err += abs(w) * (abs(hr / k) * a.error + abs(jr / k) * (b1.error + b2.error))
        ok = ok and a.converged and b1.converged and b2.converged
        mag = (2 * ell + 1) * (abs(hr / k * a.value) + abs(jr / k) * abs(b1.value + b2.value)) / rad
        small = small + 1 if mag < cfg.tol * max(abs(j1 + j2), 1e-300) else 0
        if small >= 3:
            break
    else:
        ok = False
    return FirstIterate(complex(j1), complex(j2), ell, err, ok)


def _split_inner(spec, fn, b, cfg):
    R = spec.screening_radius
    return _origin_integral(spec, fn, min(b, R) if R is not None else b, cfg)
