"""
Command-line front end.

    singreen <subcommand> [--config PATH] [--set key=value ...]
             [--out PATH] [--format csv|json] [--allow-flagged]

Settings come from a ``key=value`` config file (``#`` comments) and are
overridden by ``--set``.  Every output starts with a metadata block that
echoes the settings, package versions and tolerances.  Exit codes: 0 ok,
1 usage, 2 numerical flag, 3 internal error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import asymptotics, born, greens3d, radial, screened, verify, zero_range
from .errors import (AccuracyError, DomainError, IllConditionedError, IntegrationError,
                     SingularConfigurationError, UnsupportedClassError)
from .potentials import SingularityClass, classify, from_mapping, parse_key_values

EXIT_OK, EXIT_USAGE, EXIT_FLAGGED, EXIT_INTERNAL = 0, 1, 2, 3

SUBCOMMANDS = ("greens-eval", "chi-sweep", "asymptote-fit", "born-check",
               "zero-range", "verify-all")

TOLERANCES = {
    "green_tol": greens3d.DEFAULT_TOL,
    "ode_rtol": radial.DEFAULT_RTOL,
    "tail_epsilon": radial.DEFAULT_TAIL_EPSILON,
    "fit_rms_threshold": asymptotics.DEFAULT_RMS_THRESHOLD,
    "fit_condition_limit": asymptotics.CONDITION_LIMIT,
    "omega_slope_tol": zero_range.SLOPE_TOL,
    "chi_validity_factor": screened.VALIDITY_FACTOR,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# settings

def parse_grid(text: str) -> np.ndarray:
    """``start:stop:points:lin|log``, a comma list, or a single number."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 4:
            raise UsageError(f"grid {text!r}: expected start:stop:points:lin|log")
        try:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"grid {text!r}: {exc}") from None
        if n < 1:
            raise UsageError(f"grid {text!r}: need at least one point")
        if parts[3] == "lin":
            return np.linspace(a, b, n)
        if parts[3] == "log":
            if a <= 0 or b <= 0:
                raise UsageError(f"grid {text!r}: log spacing needs positive ends")
            return np.geomspace(a, b, n)
        raise UsageError(f"grid {text!r}: spacing must be lin or log")
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a number or grid") from None


def load_settings(config, overrides) -> dict:
    settings = {}
    if config:
        path = Path(config)
        if not path.is_file():
            raise UsageError(f"config file not found: {config}")
        settings.update(parse_key_values(path.read_text()))
    for item in overrides or ():
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        settings[key.strip()] = value.strip()
    return settings


def _num(settings, key, default, cast=float):
    if key not in settings:
        return default
    try:
        return cast(settings[key])
    except ValueError:
        raise UsageError(f"{key}={settings[key]!r} is not a valid number") from None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SG_THREADS", "1")))
    except ValueError:
        return 1


def _pool_map(fn, items):
    """Map in a thread pool capped by SG_THREADS; results keep input order."""
    items = list(items)
    n = min(_threads(), max(len(items), 1))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# emission

def _f(x) -> str:
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, SingularityClass):
        return x.value
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def metadata(command: str, settings: dict) -> dict:
    return {
        "command": command,
        "settings": dict(sorted(settings.items())),
        "versions": {"singreen": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "tolerances": TOLERANCES,
    }


def render(meta: dict, columns, rows, fmt: str) -> str:
    if fmt == "json":
        records = [dict(zip(columns, r)) for r in rows]
        doc = {"metadata": meta, "results": records}
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# command={meta['command']}\n")
    for k, v in meta["settings"].items():
        buf.write(f"# set {k}={v}\n")
    for k, v in meta["versions"].items():
        buf.write(f"# version {k}={v}\n")
    for k, v in meta["tolerances"].items():
        buf.write(f"# tolerance {k}={_f(v)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (bool, np.bool_)):
                cells.append(str(bool(v)).lower())
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(_f(v))
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


# --------------------------------------------------------------------------
# subcommands; each returns (columns, rows, flagged)

def cmd_greens_eval(s):
    spec = from_mapping(s)
    k = _num(s, "k", 1.0)
    tol = _num(s, "tol", greens3d.DEFAULT_TOL)
    rs = parse_grid(s.get("r", "0.1:2:8:lin"))
    rps = parse_grid(s.get("rprime", "0.5"))
    cth = _num(s, "cos_angle", 0.5)
    points = [(r, rp) for r in rs for rp in rps]

    def one(p):
        r, rp = p
        if rp == 0.0:
            g = greens3d.green_at_origin(spec, k, r)
            return (r, rp, cth, g.real, g.imag, 0, 0.0, True)
        ev = greens3d.green_sum(spec, k, r, rp, cth, tol=tol)
        return (r, rp, cth, ev.value.real, ev.value.imag, ev.ell_used, ev.tail_estimate,
                ev.converged)

    rows = _pool_map(one, points)
    cols = ["r", "rprime", "cos_angle", "re_G", "im_G", "ell_used", "tail_estimate",
            "converged"]
    return cols, rows, not all(r[-1] for r in rows)


def cmd_chi_sweep(s):
    eta = _num(s, "eta", 1.0)
    k = _num(s, "k", 1.0)
    ell = _num(s, "ell", 0, int)
    Rs = parse_grid(s.get("R", "10:320:6:log"))

    def one(R):
        c = screened.chi(ell, eta, k, R)
        a = screened.chi_asymptotic(ell, eta, k, R)
        return (R, c.real, c.imag, a.value.real, a.value.imag,
                abs(c - a.value) / abs(a.value), a.valid)

    rows = _pool_map(one, Rs)
    return ["R", "re_chi", "im_chi", "re_chi_asym", "im_chi_asym", "rel_err", "valid"], \
        rows, False


def _read_samples(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    data = []
    for line in p.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            data.append((float(parts[0]), complex(float(parts[1]), float(parts[2]))))
        except (ValueError, IndexError):
            continue  # header row
    if not data:
        raise UsageError(f"no samples in {path}")
    r = np.array([a for a, _ in data])
    return r, np.array([b for _, b in data])


def cmd_asymptote_fit(s):
    spec = from_mapping(s)
    k = _num(s, "k", 1.0)
    if "input" in s:
        r, g = _read_samples(s["input"])
    else:
        r = parse_grid(s["r"]) if "r" in s else asymptotics.default_window(k)
        g = greens3d.green_at_origin(spec, k, r)
    cls = SingularityClass(s["class"]) if "class" in s else classify(spec)
    force = cls is not classify(spec)
    f = asymptotics.fit_short_range((r, g), cls, rho=spec.rho, V0=spec.v0, force=force)
    cols = ["class", "pole_coeff", "extra_coeff", "ratio", "re_const", "im_const",
            "residual_rms", "condition_number", "window_lo", "window_hi", "accepted",
            "ill_conditioned", "class_mismatch"]
    row = (f.singularity.value, f.pole_coeff, f.extra_coeff,
           f.ratio if f.pole_coeff else math.nan, f.const_term.real, f.const_term.imag,
           f.residual_rms, f.condition_number, f.fit_window[0], f.fit_window[1],
           f.accepted, f.ill_conditioned, force)
    # a template forced against the potential's class is always reported
    return cols, [row], (not f.accepted) or f.ill_conditioned or force


def cmd_born_check(s):
    spec = from_mapping(s)
    k = _num(s, "k", 1.0)
    cfg = born.SplitConfig(r0=_num(s, "r0", 1.0))
    rs = parse_grid(s.get("r", "1e-4:1e-2:9:log"))

    def one(r):
        q = born.i1_quadrature(spec, k, r, cfg)
        c = born.i1_singular_closed(spec.v0, spec.rho, r, cfg.r0)
        return (r, q.value.real, q.value.imag, c, q.value.real - c, q.converged)

    rows = _pool_map(one, rs)
    return ["r", "re", "im", "closed_form", "diff", "converged"], rows, \
        not all(r[-1] for r in rows)


def cmd_zero_range(s):
    spec = from_mapping(s)
    k = _num(s, "k", 1.0)
    lam = _num(s, "lam", 1.0)
    kvec = [0.0, 0.0, k]
    st = zero_range.build_state(spec, kvec, lam)
    cols = ["class", "lam", "beta", "alpha", "B", "phi0_at_zero", "closure_residual"]
    row = [st.singularity.value, st.lam, st.beta, st.alpha, st.B, st.phi0_at_zero,
           st.closure_residual]
    flagged = st.closure_residual > 1e-12
    if _num(s, "regularize", 1, int) and not spec.long_range:
        r = zero_range.default_phi_window(k)
        ph = zero_range.phi_full(st, spec, kvec, r, cos_angle=_num(s, "cos_angle", 0.3))
        reg = zero_range.regularize((r, ph), st.singularity, spec.v0, spec.rho)
        cols += ["regularized_beta", "beta_rel_diff", "extrapolation_flag"]
        row += [reg.beta, abs(reg.beta - st.beta) / abs(st.beta), reg.flagged]
        flagged = flagged or reg.flagged
    # complex cells become Re/Im column pairs
    out_cols, out_row = [], []
    for c, v in zip(cols, row):
        if isinstance(v, complex):
            out_cols += [f"re_{c}", f"im_{c}"]
            out_row += [v.real, v.imag]
        else:
            out_cols.append(c)
            out_row.append(v)
    return out_cols, [tuple(out_row)], flagged


def cmd_verify_all(s):
    results = _pool_map(lambda c: c(), verify.CHECKS)
    rows = []
    for res in results:
        for key, val in res.metrics.items():
            rows.append((res.ident, res.title.replace(",", ";"), res.passed, key,
                         float(val)))
    return ["criterion", "title", "passed", "metric", "value"], rows, \
        not all(r.passed for r in results)


COMMANDS = {
    "greens-eval": cmd_greens_eval,
    "chi-sweep": cmd_chi_sweep,
    "asymptote-fit": cmd_asymptote_fit,
    "born-check": cmd_born_check,
    "zero-range": cmd_zero_range,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="singreen", description="Green's functions of singular potentials.")
    ap.add_argument("command", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="key=value settings file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override one setting (repeatable)")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--allow-flagged", action="store_true",
                    help="exit 0 even when a numerical flag is raised")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config, args.set)
        cols, rows, flagged = COMMANDS[args.command](settings)
    except (UsageError, DomainError, UnsupportedClassError) as exc:
        print(f"singreen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, IllConditionedError, SingularConfigurationError,
            IntegrationError) as exc:
        print(f"singreen: numerical flag: {exc}", file=sys.stderr)
        return EXIT_FLAGGED
    except Exception as exc:  # noqa: BLE001
        print(f"singreen: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = render(metadata(args.command, settings), cols, rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if flagged:
        print("singreen: numerical flag raised (see output)", file=sys.stderr)
        if not args.allow_flagged:
            return EXIT_FLAGGED
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
