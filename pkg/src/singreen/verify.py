"""
End-to-end verification checks.

Each ``check_*`` function recomputes one property of the package at a fixed
tolerance and returns a :class:`CheckResult`.  The metrics are
deterministic (no timings), so reports built from them are reproducible
byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asy
from . import born, greens3d, radial, screened, specfun, zero_range
from .potentials import SingularityClass, power_exp, coulomb, screened_coulomb


@dataclass
class CheckResult:
    ident: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        body = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"criterion {self.ident:2d} [{status}] {self.title}: {body}"


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}j"
    return str(v)


# --------------------------------------------------------------------------

def check_wronskian_grid() -> CheckResult:
    """Coulomb Wronskian over the (eta, l, x) grid and the eta = 0 limit."""
    etas = (-2.0, -0.5, 0.0, 0.5, 2.0)
    xs = np.geomspace(1e-4, 50.0, 80)
    worst_w = 0.0
    worst_r = 0.0
    for eta in etas:
        for x in xs:
            F, dF, G, dG = specfun.coulomb_fg_array(10, eta, x)
            ok = np.isfinite(G) & np.isfinite(dG)
            w = dF[ok] * G[ok] - F[ok] * dG[ok]
            worst_w = max(worst_w, float(np.max(np.abs(w - 1.0))))
            if eta == 0.0:
                j, dj, n, dn = specfun.riccati_array(10, x)
                for a, b in ((F, j), (dF, dj), (G, n), (dG, dn)):
                    fin = np.isfinite(a) & np.isfinite(b)
                    rel = np.abs(a[fin] - b[fin]) / np.maximum(np.abs(b[fin]), 1e-300)
                    worst_r = max(worst_r, float(rel.max()))
    passed = worst_w <= 1e-9 and worst_r <= 1e-10
    return CheckResult(1, "Coulomb Wronskian and eta=0 limit", passed,
                       {"max_wronskian_dev": worst_w, "max_riccati_rel": worst_r})


def check_chi_asymptote() -> CheckResult:
    Rs = (10, 20, 40, 80, 160, 320)
    rel, scaled = [], []
    for R in Rs:
        c = screened.chi(0, 1.0, 1.0, R)
        a = screened.chi_asymptotic(0, 1.0, 1.0, R).value
        rel.append(abs(c - a) / abs(a))
        scaled.append(abs(c - a) * R * R)
    decreasing = all(b < a for a, b in zip(rel, rel[1:]))
    spread = max(scaled) / min(scaled)
    return CheckResult(2, "chi large-R asymptote", decreasing and spread <= 4.0,
                       {"rel_err_first": rel[0], "rel_err_last": rel[-1],
                        "monotone": decreasing, "R2_spread": spread})


def check_kernel_norm() -> CheckResult:
    worst = 0.0
    ok = True
    for R in (40, 80, 160, 320):
        n = screened.z_kernel_norm(1.0, 1.0, R)
        dev = abs(n.value * R - 1.0)
        worst = max(worst, dev * R)
        ok = ok and dev <= 5.0 / R and not n.inconclusive
    return CheckResult(3, "kernel norm ~ eta/(kR)", ok, {"max_R_times_dev": worst, "bound": 5.0})


def _coulomb_fit(v0, k, spec):
    r = np.geomspace(1e-4, 1e-2, 40)
    g = greens3d.green_at_origin(spec, k, r)
    return asy.fit_short_range((r, g), SingularityClass.COULOMB, rho=1.0, V0=v0)


def check_coulomb_asymptote() -> CheckResult:
    v0, k = -2.0, 1.0
    f = _coulomb_fit(v0, k, coulomb(v0))
    C = asy.coulomb_C(k, v0)
    pole = abs(f.pole_coeff * 4 * math.pi - 1.0)
    ratio = abs(f.ratio / v0 - 1.0)
    const = abs(f.const_term - C) / abs(C)
    passed = pole <= 1e-5 and ratio <= 1e-3 and const <= 1e-3
    return CheckResult(4, "pure Coulomb short-range fit", passed,
                       {"pole_rel": pole, "ratio_rel": ratio, "const_rel": const})


def check_screened_shift() -> CheckResult:
    v0, k, R = 2.0, 1.0, 10.0
    f = _coulomb_fit(v0, k, screened_coulomb(v0, R))
    shift = greens3d.q_origin_limit(v0 / (2 * k), k, R)
    got = f.const_term - asy.coulomb_C(k, v0)
    rel = abs(got - shift) / abs(shift)
    return CheckResult(5, "screened constant shift", rel <= 1e-3, {"rel_err": rel})


def class_fits(rho, k=1.0, v0=1.0, r=None):
    """Short-range fits via the ODE and Born routes for ``v0 r^-rho e^-r``."""
    r = np.geomspace(1e-4, 1e-2, 40) if r is None else r
    spec = power_exp(v0, rho)
    g_ode = greens3d.green_at_origin(spec, k, r)
    g_born = np.array([born.born_green_origin(spec, k, x).value for x in r])
    if rho < 1.0:
        cls = SingularityClass.COULOMB
        f1 = asy.fit_short_range((r, g_ode), cls, rho=rho, V0=v0, force=True)
        f2 = asy.fit_short_range((r, g_born), cls, rho=rho, force=True)
    else:
        f1 = asy.fit_short_range((r, g_ode), rho=rho, V0=v0)
        # first order in V0: the higher singular terms are O(V0^2) and absent
        f2 = asy.fit_short_range((r, g_born), rho=rho)
    return f1, f2


def check_three_classes() -> CheckResult:
    metrics = {}
    ok = True
    for rho in (1.25, 1.5, 1.75):
        f1, f2 = class_fits(rho)
        A0 = asy.a0(1.0, rho)
        e1, e2 = abs(f1.ratio / A0 - 1), abs(f2.ratio / A0 - 1)
        cross = abs(f1.ratio - f2.ratio) / abs(A0)
        metrics[f"rho{rho}_ode"] = e1
        metrics[f"rho{rho}_born"] = e2
        ok = ok and e1 <= 1e-2 and e2 <= 1e-2 and cross <= 1e-2
    f1, f2 = class_fits(1.0)
    e1, e2 = abs(f1.ratio - 1.0), abs(f2.ratio - 1.0)
    metrics["rho1_ode"], metrics["rho1_born"] = e1, e2
    ok = ok and e1 <= 1e-3 and e2 <= 1e-3 and abs(f1.ratio - f2.ratio) <= 1e-3
    f1, f2 = class_fits(0.5)
    z1 = abs(f1.extra_coeff) / f1.extra_sigma
    z2 = abs(f2.extra_coeff) / f2.extra_sigma
    metrics["rho0.5_ode_z"], metrics["rho0.5_born_z"] = z1, z2
    ok = ok and z1 < 3 and z2 < 3
    return CheckResult(6, "three-class short-range theorem", ok, metrics)


def power_core(rho, v0=1.0, cutoff=5.0):
    """``v0 r^-rho`` cut off at ``cutoff`` (a pure power inside every test ball)."""
    return power_exp(v0, rho, mu=0.0, screening_radius=cutoff)


def check_born_closed_forms(k: float = 1e-3) -> CheckResult:
    r = np.geomspace(1e-4, 1e-2, 25)
    metrics = {}
    ok = True
    for rho in (0.5, 1.0, 1.5):
        spec = power_core(rho)
        cfg = born.SplitConfig(r0=1.0)
        d = np.array([born.i1_quadrature(spec, k, x, cfg).value
                      - born.i1_singular_closed(1.0, rho, x, 1.0) for x in r])
        spread = float(np.max(np.abs(d - d[-1])))
        metrics[f"rho{rho}_spread"] = spread
        ok = ok and spread <= 1e-4
        # singular coefficient versus r0
        coefs, consts = [], []
        for r0 in (0.5, 1.0, 2.0):
            cfg = born.SplitConfig(r0=r0)
            g = np.array([1 / (4 * math.pi * x) - born.i1_quadrature(spec, k, x, cfg).value
                          for x in r])
            f = asy.fit_short_range((r, g), rho=rho)
            coefs.append(f.extra_coeff if rho >= 1.0 else f.pole_coeff)
            consts.append(f.const_term)
        cvar = max(abs(c - coefs[1]) for c in coefs) / abs(coefs[1])
        shift = min(abs(consts[0] - consts[1]), abs(consts[2] - consts[1]))
        metrics[f"rho{rho}_coef_var"] = cvar
        ok = ok and cvar <= 1e-4 and shift > 1e-3
    return CheckResult(7, "Born closed forms and r0 independence", ok, metrics)


def diagonal_jumps(rp: float = 1.3):
    """``dG_l/dr`` at ``r = r'+`` minus ``r = r'-`` for three kinds of kernel.

    With ``G_l = -u(r<) v(r>) / W`` the jump is ``-(u v' - u' v) / W = -1``.
    """
    out = {}
    pair = radial.solve_pair(power_exp(1.0, 1.5), 0, 1.0, 0.5, 3.0)
    out["ode"] = (-pair.u(rp) * pair.dv(rp) + pair.du(rp) * pair.v(rp)) / pair.wronskian
    # G_l = F(kr<) H(kr>) / k: the k of d/dr cancels the 1/k
    c = specfun.coulomb_fg(2, 1.0, rp)
    out["coulomb"] = c.value_F * c.deriv_H - c.deriv_F * c.value_H
    t = specfun.riccati(1, rp)
    out["free"] = t.j * t.dh - t.dj * t.h
    return out


def check_structural(seed: int = 20240917) -> CheckResult:
    metrics = {}
    jumps = diagonal_jumps()
    jdev = max(abs(v + 1.0) for v in jumps.values())
    metrics["max_jump_dev"] = jdev
    spread = 0.0
    for sp, ell in ((power_exp(1.0, 1.5), 0), (power_exp(1.0, 1.5), 3),
                    (power_exp(-1.0, 1.0), 1), (power_exp(1.0, 0.5), 2)):
        p = radial.solve_pair(sp, ell, 1.0, 0.05, 5.0)
        spread = max(spread, p.wronskian_spread())
    metrics["wronskian_spread"] = spread
    worst = max(abs(a - b) / abs(b) for a, b in free_pairs(seed))
    metrics["free_series_rel"] = worst
    ok = jdev <= 1e-6 and spread <= 1e-8 and worst <= 1e-6
    return CheckResult(8, "Green's-function structural invariants", ok, metrics)


def free_pairs(seed: int, n: int = 20, k: float = 1.0):
    """Series and closed form of the free kernel at ``n`` separated random pairs."""
    rng = np.random.default_rng(seed)
    free = power_exp(0.0, 1.0)
    out = []
    while len(out) < n:
        r1, r2 = rng.uniform(0.2, 3.0, 2)
        cth = rng.uniform(-1.0, 1.0)
        # the series converges like (r</r>)^l, so the radii must differ
        if abs(r1 - r2) < 0.3 * max(r1, r2):
            continue
        ev = greens3d.green_sum(free, k, r1, r2, cth, split_free=False)
        out.append((ev.value, greens3d.free_kernel(k, r1, r2, cth)))
    return out


CLOSURE_SPECS = {"SubCoulomb": 0.5, "Coulomb": 1.0, "SuperCoulomb": 1.25}
WRONG_CLASS = {"SubCoulomb": "Coulomb", "Coulomb": "SubCoulomb", "SuperCoulomb": "SubCoulomb"}


def closure(rho, lam, k=1.0, cos_angle=0.3, wrong=None):
    spec = power_exp(1.0, rho)
    kvec = [0.0, 0.0, k]
    st = zero_range.build_state(spec, kvec, lam)
    r = zero_range.default_phi_window(k)
    ph = zero_range.phi_full(st, spec, kvec, r, cos_angle=cos_angle)
    reg = zero_range.regularize((r, ph), st.singularity, spec.v0, spec.rho)
    bad = zero_range.regularize((r, ph), wrong, spec.v0, spec.rho) if wrong else None
    return st, reg, bad


def check_zero_range() -> CheckResult:
    metrics = {}
    ok = True
    for name, rho in CLOSURE_SPECS.items():
        worst = 0.0
        flags = True
        for lam in (0.5, 1.0, 2.0):
            st, reg, bad = closure(rho, lam, wrong=WRONG_CLASS[name])
            worst = max(worst, abs(reg.beta - st.beta) / abs(st.beta))
            flags = flags and bad.flagged and not reg.flagged
        metrics[f"{name}_rel"] = worst
        metrics[f"{name}_wrong_flagged"] = flags
        ok = ok and worst <= 1e-3 and flags
    return CheckResult(9, "zero-range closure", ok, metrics)


CHECKS = (check_wronskian_grid, check_chi_asymptote, check_kernel_norm,
          check_coulomb_asymptote, check_screened_shift, check_three_classes,
          check_born_closed_forms, check_structural, check_zero_range)


def run_all():
    return [c() for c in CHECKS]
