"""
Short-range asymptotics of ``G(r, 0)`` and least-squares extraction of its
singular coefficients.

Near the origin

    SubCoulomb   (rho < 1):      G = 1/(4 pi r)                     + B + o(1)
    Coulomb      (rho = 1):      G = [1/r + V0 log r] / (4 pi)      + B + o(1)
    SuperCoulomb (1 < rho < 2):  G = [1/r + A0 r^(1-rho)] / (4 pi)  + B + o(1)

with ``A0 = V0 / ((2 - rho)(1 - rho))``.  :func:`fit_short_range` fits the
basis ``{1/r, f(r), 1}`` (plus optional vanishing "nuisance" powers) and
returns raw basis coefficients; no ``1/(4 pi)`` is divided out.

For ``rho >= 3/2`` the s-wave solution carries further singular terms
``r^(n s - 1)`` (``s = 2 - rho``, ``n s < 1``) and a ``log r`` when
``n s = 1``.  Their coefficients follow from the leading one through the
Frobenius recursion, so when ``V0`` is given the SuperCoulomb column ``f``
is "dressed" with them; the fitted ``extra_coeff`` still multiplies the
``r^(1-rho)`` term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, IllConditionedError
from .potentials import SingularityClass, classify
from .specfun import EULER_GAMMA, digamma

COLLINEARITY_GAP = 0.05
CONDITION_LIMIT = 1e8
DEFAULT_RMS_THRESHOLD = 1e-6
#: highest vanishing power included by nuisance="auto"
AUTO_NUISANCE_MAX = 2.0
AUTO_NUISANCE_COLUMNS = 4
AUTO_NUISANCE_COND = 1e7


def coulomb_C(k: float, V0: float) -> complex:
    """Finite part of the pure-Coulomb ``G(r, 0)`` at the origin.

    ``ik/(4 pi) + (V0/4 pi) [log(-2ik) + psi(1 + i eta) + 2 gamma - 1]`` with
    the principal logarithm, ``log(-2ik) = log 2k - i pi/2``.
    """
    if not k > 0.0:
        raise DomainError("k must be positive")
    eta = V0 / (2.0 * k)
    lg = complex(math.log(2.0 * k), -0.5 * math.pi)
    return 1j * k / (4 * math.pi) + V0 / (4 * math.pi) * (
        lg + digamma(complex(1.0, eta)) + 2.0 * EULER_GAMMA - 1.0)


def a0(V0: float, rho: float) -> float:
    """Coefficient of ``r^(1-rho)`` relative to ``1/r`` for ``1 < rho < 2``."""
    if not 1.0 < rho < 2.0:
        raise DomainError(f"A0 is defined for 1 < rho < 2, got rho = {rho}")
    return V0 / ((2.0 - rho) * (1.0 - rho))


# --------------------------------------------------------------------------
# singular lattice
# --------------------------------------------------------------------------

def singular_series(V0: float, rho: float):
    """Singular terms of ``4 pi r G`` relative to the leading ``1``.

    Returns ``(powers, coeffs, log_coeff)`` for the terms
    ``sum coeffs[n] r^powers[n]`` with ``0 < powers < 1`` plus
    ``log_coeff * r log r`` (the resonant ``n s = 1`` case), all for unit
    pole coefficient.  ``powers[0] = 2 - rho`` carries ``A0``.
    """
    s = 2.0 - rho
    powers, coeffs = [], []
    c_prev = 1.0
    log_coeff = 0.0
    n = 1
    while n * s <= 1.0 + 1e-12:
        e = n * s
        if abs(e - 1.0) < 1e-12:
            log_coeff = V0 * c_prev
            break
        c = V0 * c_prev / (e * (e - 1.0))
        powers.append(e)
        coeffs.append(c)
        c_prev = c
        n += 1
    return powers, coeffs, log_coeff


def lattice_exponents(rho: float, p_max: float = 1.0) -> list:
    """Vanishing exponents ``e - 1`` with ``e = n s + m`` in ``(0, p_max]``."""
    s = 2.0 - rho
    out = set()
    for n in range(0, int(p_max / s) + 3):
        for m in range(0, int(p_max) + 3):
            p = n * s + m - 1.0
            if 1e-9 < p <= p_max + 1e-9:
                out.add(round(p, 12))
    return sorted(out)


def _has_log(rho):
    s = 2.0 - rho
    q = 1.0 / s
    return abs(q - round(q)) < 1e-9


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoteFit:
    """Coefficients of the short-range template fitted to samples of G.

    ``pole_coeff``, ``extra_coeff`` are the real parts of the fitted
    ``1/r`` and ``f(r)`` coefficients; ``const_term`` is complex.  The
    ``*_sigma`` fields combine the statistical error with the change under
    halving the window's upper radius.
    """

    pole_coeff: float
    extra_coeff: float
    const_term: complex
    residual_rms: float
    fit_window: tuple
    singularity: SingularityClass
    condition_number: float
    pole_sigma: float = 0.0
    extra_sigma: float = 0.0
    const_sigma: float = 0.0
    accepted: bool = True
    ill_conditioned: bool = False
    basis: tuple = ()
    nuisance: dict = field(default_factory=dict)
    n_samples: int = 0

    @property
    def ratio(self) -> float:
        """``extra_coeff / pole_coeff``."""
        return self.extra_coeff / self.pole_coeff


def _columns(r, cls, rho, V0, nuisance, log_nuisance):
    cols, names = [1.0 / r], ["pole"]
    if cls is SingularityClass.COULOMB:
        cols.append(np.log(r))
        names.append("log")
    elif cls is SingularityClass.SUPER_COULOMB:
        f = r ** (1.0 - rho)
        if V0 is not None:
            pw, cf, lc = singular_series(V0, rho)
            a = cf[0]
            if a != 0.0:
                f = sum(c / a * r ** (p - 1.0) for p, c in zip(pw, cf))
                if lc:
                    f = f + lc / a * np.log(r)
        cols.append(f)
        names.append("power")
    cols.append(np.ones_like(r))
    names.append("const")
    for p in nuisance:
        cols.append(r ** p)
        names.append(f"r^{p:g}")
        if log_nuisance:
            cols.append(r ** p * np.log(r))
            names.append(f"r^{p:g} log r")
    return np.column_stack(cols), names


def _solve(A, y, w):
    Aw = A * w[:, None]
    yw = y * w
    norms = np.linalg.norm(Aw, axis=0)
    if np.any(norms == 0.0):
        raise IllConditionedError("a basis column vanishes on the sample window")
    As = Aw / norms
    sv = np.linalg.svd(As, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if not math.isfinite(cond) or cond > 1e15:
        raise IllConditionedError(f"design matrix is rank deficient (cond = {cond:.3g})")
    coef_s, *_ = np.linalg.lstsq(As, yw, rcond=None)
    coef = coef_s / norms
    res = yw - Aw @ coef
    n, p = A.shape
    dof = max(n - p, 1)
    # separate real and imaginary noise levels
    s2_re = float(np.sum(res.real ** 2)) / dof
    s2_im = float(np.sum(res.imag ** 2)) / dof
    cov = np.linalg.pinv(As.T @ As) / np.outer(norms, norms)
    sig_re = np.sqrt(np.abs(np.diag(cov)) * s2_re)
    sig_im = np.sqrt(np.abs(np.diag(cov)) * s2_im)
    rms = float(np.sqrt(np.mean(np.abs(res) ** 2)))
    return coef, sig_re, sig_im, rms, cond


def fit_short_range(samples, singularity=None, rho: Optional[float] = None,
                    weights: Optional[Sequence[float]] = None, V0: Optional[float] = None,
                    nuisance="auto", log_nuisance=None, force: bool = False,
                    rms_threshold: float = DEFAULT_RMS_THRESHOLD,
                    window_check: bool = True) -> AsymptoteFit:
    """Weighted least-squares fit of the short-range template.

    Parameters
    ----------
    samples
        ``(r, G)`` pairs, or a pair of arrays.
    singularity
        Template to fit; defaults to ``classify(rho)``.  A template that
        disagrees with ``rho`` needs ``force=True``.
    rho
        Singularity exponent; required for the SuperCoulomb template.
    weights
        Row weights, default ``r`` (evens out the 1/r dynamic range).
    V0
        Leading strength.  Dresses the SuperCoulomb column with the
        higher singular terms and selects the nuisance lattice.
    nuisance
        ``"auto"`` (lattice powers up to ``r^2``, in increasing order, while
        the design stays well conditioned; needs ``rho``),
        ``None`` or a list of vanishing powers of r to include.
    log_nuisance
        Add ``r^p log r`` companions; by default only where the lattice
        produces logarithms.
    """
    r, g = _unpack(samples)
    n = len(r)
    if n < 8:
        raise DomainError("need at least 8 samples")
    if r.max() / r.min() < 10.0 * (1 - 1e-9):
        raise DomainError("samples must span at least one decade in r")

    if singularity is None:
        if rho is None:
            raise DomainError("give the singularity class or rho")
        cls = classify(rho)
    else:
        cls = singularity if isinstance(singularity, SingularityClass) \
            else SingularityClass(str(singularity))
        if rho is not None and classify(rho) is not cls and not force:
            raise DomainError(f"class {cls} is inconsistent with rho = {rho}; pass force=True")
    if cls is SingularityClass.SUPER_COULOMB:
        if rho is None:
            raise DomainError("SuperCoulomb template needs rho")
        if rho - 1.0 < COLLINEARITY_GAP and not force:
            raise IllConditionedError(
                f"rho - 1 = {rho - 1:.3g} < {COLLINEARITY_GAP}: r^(1-rho) and log r are "
                "numerically indistinguishable; fit as Coulomb or pass force=True")

    w = r.copy() if weights is None else np.asarray(weights, dtype=float)
    if isinstance(nuisance, str):
        if nuisance != "auto":
            raise DomainError("nuisance must be 'auto', None or a list of powers")
        if log_nuisance is None:
            log_nuisance = rho is not None and V0 is not None and _has_log(rho) and V0 != 0.0
        nuisance = _auto_nuisance(r, w, cls, rho, V0, bool(log_nuisance))
    nuisance = list(nuisance or [])
    log_nuisance = bool(log_nuisance)

    A, names = _columns(r, cls, rho, V0, nuisance, log_nuisance)
    if A.shape[1] >= n:
        raise DomainError("more basis functions than samples")
    coef, sig_re, sig_im, rms, cond = _solve(A, g, w)

    i_extra = 1 if cls is not SingularityClass.SUB_COULOMB else None
    i_const = 2 if i_extra is not None else 1
    sig = {"pole": sig_re[0], "extra": sig_re[i_extra] if i_extra else 0.0,
           "const": math.hypot(sig_re[i_const], sig_im[i_const])}

    if window_check:
        keep = r <= 0.5 * r.max()
        if keep.sum() >= A.shape[1] + 2 and r[keep].max() / r[keep].min() > 2.0:
            c2, *_ = _solve(A[keep], g[keep], w[keep])
            sig["pole"] = math.hypot(sig["pole"], abs(c2[0].real - coef[0].real))
            if i_extra:
                sig["extra"] = math.hypot(sig["extra"], abs(c2[i_extra].real - coef[i_extra].real))
            sig["const"] = math.hypot(sig["const"], abs(c2[i_const] - coef[i_const]))

    ill = cond > CONDITION_LIMIT
    extra_names = names[i_const + 1:]
    return AsymptoteFit(
        pole_coeff=float(coef[0].real),
        extra_coeff=float(coef[i_extra].real) if i_extra else 0.0,
        const_term=complex(coef[i_const]),
        residual_rms=rms,
        fit_window=(float(r.min()), float(r.max())),
        singularity=cls,
        condition_number=cond,
        pole_sigma=float(sig["pole"]),
        extra_sigma=float(sig["extra"]),
        const_sigma=float(sig["const"]),
        accepted=bool(rms < rms_threshold and not ill),
        ill_conditioned=bool(ill),
        basis=tuple(names),
        nuisance={nm: complex(c) for nm, c in zip(extra_names, coef[i_const + 1:])},
        n_samples=n,
    )


def _auto_nuisance(r, w, cls, rho, V0, log_nuisance):
    """Lattice powers in increasing order while the design stays well conditioned."""
    if rho is None:
        return []
    chosen = []
    for p in lattice_exponents(rho, AUTO_NUISANCE_MAX):
        trial = chosen + [p]
        A, _ = _columns(r, cls, rho, V0, trial, log_nuisance)
        if A.shape[1] > AUTO_NUISANCE_COLUMNS + 3 or A.shape[1] >= len(r) - 2:
            break
        As = A * w[:, None]
        As = As / np.linalg.norm(As, axis=0)
        sv = np.linalg.svd(As, compute_uv=False)
        if sv[-1] <= 0 or sv[0] / sv[-1] > AUTO_NUISANCE_COND:
            break
        chosen = trial
    return chosen


def _unpack(samples):
    if isinstance(samples, tuple) and len(samples) == 2 and np.ndim(samples[0]) == 1:
        r = np.asarray(samples[0], dtype=float)
        g = np.asarray(samples[1], dtype=complex)
    else:
        arr = list(samples)
        r = np.array([float(a) for a, _ in arr])
        g = np.array([complex(b) for _, b in arr])
    if r.shape != g.shape:
        raise DomainError("r and G must have the same length")
    if np.any(r <= 0.0):
        raise DomainError("sample radii must be positive")
    order = np.argsort(r)
    return r[order], g[order]


def default_window(k: float, n: int = 40):
    """Geometric r grid on ``[1e-4, 1e-2] * min(1, 1/k)``."""
    return np.geomspace(1e-4, 1e-2, n) * min(1.0, 1.0 / k)
