"""
Central potentials ``V(r) = r^(-rho) W(r)`` with an optional sharp cutoff.

A :class:`PotentialSpec` is immutable.  The built-in model family

* ``coulomb``           W = v0 everywhere (long range, exact Coulomb functions)
* ``screened_coulomb``  W = v0, cut off at ``screening_radius``
* ``power_exp``         W = v0 exp(-mu r)
* ``power_tail``        W = v0 (1 + r)^(rho - 1 - delta)

is selectable from plain ``key=value`` configuration files.  Any model may
carry a ``screening_radius``; ``power_exp`` with ``mu = 0`` and a cutoff is
a pure power core.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, UnsupportedClassError

RHO_EQUALITY_BAND = 1e-12
MODELS = ("coulomb", "screened_coulomb", "power_exp", "power_tail")


class SingularityClass(enum.Enum):
    SUB_COULOMB = "SubCoulomb"
    COULOMB = "Coulomb"
    SUPER_COULOMB = "SuperCoulomb"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PotentialSpec:
    """One member of the class of potentials singular as ``r^-rho``.

    ``taylor`` holds Taylor coefficients of the smooth factor W about r = 0;
    the radial Frobenius start uses them.  ``long_range`` marks the pure
    Coulomb model, which has no finite ``delta`` and is handled through
    exact Coulomb functions instead of the tail bound.
    """

    rho: float
    delta: float
    v0: float
    smooth_factor: Callable[[float], float]
    screening_radius: Optional[float] = None
    tail_bound_C: float = 1.0
    model: str = "custom"
    taylor: tuple = ()
    long_range: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rho < 2.0:
            raise UnsupportedClassError(f"rho must be < 2, got {self.rho}")
        if not self.long_range and not self.delta > 1.0:
            raise UnsupportedClassError(f"delta must be > 1, got {self.delta}")
        if not self.tail_bound_C > 0.0:
            raise DomainError("tail_bound_C must be positive")
        if self.screening_radius is not None and not self.screening_radius > 0.0:
            raise DomainError("screening_radius must be positive")
        if not self.taylor:
            object.__setattr__(self, "taylor", (float(self.v0),))

    @property
    def singularity(self) -> "SingularityClass":
        return classify(self)

    @property
    def is_free(self) -> bool:
        return self.v0 == 0.0

    def __call__(self, r):
        return evaluate(self, r)

    def with_screening(self, radius: Optional[float]) -> "PotentialSpec":
        from dataclasses import replace
        return replace(self, screening_radius=radius)


def evaluate(spec: PotentialSpec, r):
    """``r^-rho W(r) theta(R - r)``; accepts scalars or arrays of r > 0."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("potential is only defined for r > 0")
    if arr.ndim == 0:
        rr = float(arr)
        if spec.screening_radius is not None and rr > spec.screening_radius:
            return 0.0
        return rr ** (-spec.rho) * spec.smooth_factor(rr)
    out = arr ** (-spec.rho) * np.array([spec.smooth_factor(x) for x in arr.ravel()]).reshape(arr.shape)
    if spec.screening_radius is not None:
        out = np.where(arr > spec.screening_radius, 0.0, out)
    return out


def classify(spec_or_rho) -> SingularityClass:
    """Three-way split on rho used by the short-range asymptotics."""
    rho = spec_or_rho.rho if isinstance(spec_or_rho, PotentialSpec) else float(spec_or_rho)
    if rho >= 2.0:
        raise UnsupportedClassError(f"rho = {rho} >= 2 is outside the supported class")
    if abs(rho - 1.0) < RHO_EQUALITY_BAND:
        return SingularityClass.COULOMB
    if rho < 1.0:
        return SingularityClass.SUB_COULOMB
    return SingularityClass.SUPER_COULOMB


def sommerfeld_eta(spec_or_v0, k: float) -> float:
    """``eta = V0 / (2k)`` for a Coulomb-type (rho = 1) core."""
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    if isinstance(spec_or_v0, PotentialSpec):
        if classify(spec_or_v0) is not SingularityClass.COULOMB:
            raise DomainError("Sommerfeld parameter needs a rho = 1 core")
        v0 = spec_or_v0.v0
    else:
        v0 = float(spec_or_v0)
    return v0 / (2.0 * k)


def tail_constant(rho, delta, fn, r0=1.0, r_max=None):
    """Smallest C with ``|V(r)| <= C (1 + r)^(-1-delta)`` on a sampled r >= r0 grid."""
    r_max = r_max or max(200.0, 50.0 * r0)
    rs = np.geomspace(r0, r_max, 2000)
    vals = [abs(fn(r)) * (1.0 + r) ** (1.0 + delta) for r in rs]
    return max(max(vals), 1e-300)


# --------------------------------------------------------------------------
# model family
# --------------------------------------------------------------------------

def coulomb(v0: float) -> PotentialSpec:
    return PotentialSpec(rho=1.0, delta=math.inf, v0=float(v0),
                         smooth_factor=lambda r, v0=float(v0): v0,
                         tail_bound_C=max(abs(v0), 1e-300), model="coulomb",
                         taylor=(float(v0),), long_range=True)


def screened_coulomb(v0: float, radius: float, delta: float = 2.0) -> PotentialSpec:
    v0 = float(v0)
    c = tail_constant(1.0, delta,
                      lambda r: v0 / r if r <= radius else 0.0,
                      r0=min(1.0, radius), r_max=max(2.0 * radius, 2.0))
    return PotentialSpec(rho=1.0, delta=float(delta), v0=v0,
                         smooth_factor=lambda r, v0=v0: v0,
                         screening_radius=float(radius), tail_bound_C=c,
                         model="screened_coulomb", taylor=(v0,))


def power_exp(v0: float, rho: float, mu: float = 1.0, delta: float = 2.0,
              screening_radius: Optional[float] = None, n_taylor: int = 30) -> PotentialSpec:
    """``V = v0 r^-rho exp(-mu r)``; decays faster than any power."""
    v0, rho, mu = float(v0), float(rho), float(mu)

    def w(r, v0=v0, mu=mu):
        return v0 * math.exp(-mu * r)

    taylor = tuple(v0 * (-mu) ** j / math.factorial(j) for j in range(n_taylor))

    def full(r):
        if screening_radius is not None and r > screening_radius:
            return 0.0
        return r ** (-rho) * w(r)

    c = tail_constant(rho, delta, full)
    return PotentialSpec(rho=rho, delta=float(delta), v0=v0, smooth_factor=w,
                         screening_radius=screening_radius, tail_bound_C=c,
                         model="power_exp", taylor=taylor, params={"mu": mu})


def power_tail(v0: float, rho: float, delta: float = 2.0,
               screening_radius: Optional[float] = None, n_taylor: int = 30) -> PotentialSpec:
    """``V = v0 r^-rho (1 + r)^(rho - 1 - delta)``, tail exactly ``r^(-1-delta)``."""
    v0, rho, delta = float(v0), float(rho), float(delta)
    expo = rho - 1.0 - delta

    def w(r):
        return v0 * (1.0 + r) ** expo

    # generalized binomial by products; scipy's binom is nan at negative integers
    coeffs = [1.0]
    for j in range(1, n_taylor):
        coeffs.append(coeffs[-1] * (expo - j + 1) / j)
    taylor = tuple(v0 * c for c in coeffs)
    c = tail_constant(rho, delta, lambda r: r ** (-rho) * w(r))
    return PotentialSpec(rho=rho, delta=delta, v0=v0, smooth_factor=w,
                         screening_radius=screening_radius, tail_bound_C=c,
                         model="power_tail", taylor=taylor)


def from_mapping(cfg: dict) -> PotentialSpec:
    """Build a spec from string or numeric key/value pairs."""
    model = str(cfg.get("model", "power_exp")).strip()
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")
    v0 = float(cfg.get("v0", 1.0))
    rad = cfg.get("screening_radius")
    rad = None if rad in (None, "", "none", "None") else float(rad)
    delta = float(cfg.get("delta", 2.0))
    if model == "coulomb":
        if "rho" in cfg and float(cfg["rho"]) != 1.0:
            raise DomainError("coulomb model requires rho = 1")
        return coulomb(v0)
    if model == "screened_coulomb":
        if rad is None:
            raise DomainError("screened_coulomb requires screening_radius")
        return screened_coulomb(v0, rad, delta=delta)
    rho = float(cfg.get("rho", 1.0))
    if model == "power_exp":
        return power_exp(v0, rho, mu=float(cfg.get("mu", 1.0)), delta=delta,
                         screening_radius=rad)
    return power_tail(v0, rho, delta=delta, screening_radius=rad)


def parse_key_values(text: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> PotentialSpec:
    return from_mapping(parse_key_values(Path(path).read_text()))
