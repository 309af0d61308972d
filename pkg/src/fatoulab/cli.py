"""Command-line front end: ``fatoulab <subcommand> [flags]``.

Every command is a deterministic function of its arguments.  JSON goes to
``--out`` (or stdout); images always need ``--out``.  Verification commands
exit with status 0 exactly when every executed report passes, and print a
JSON failure summary to stderr otherwise.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, maps
from .cf import (ModifiedCF, brjuno_ledger, cf_to_dict, classify, context, expand_cf,
                 reconstruct, regular_cf_alpha, to_mpfr)
from .config import ConfigError, default_config_text
from .errors import FatouLabError
from .fatou import (FatouFrame, abel_report, dilatation_report, near_translation_report,
                    semiconjugacy_report)
from .render import (ESCAPE_TIME, ORBIT_TRAP, RenderJob, Viewport, render_julia,
                     render_postcritical)
from .renorm import rotation_report, tower_ledger
from .report import jsonable
from .verify import dump_orbit, run_verification

_MAKERS = {"quadratic": maps.quadratic, "cubic": maps.cubic}


def _parse_cf(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--cf expects integers 'a0,a1,...', got {text!r}") from None


def _alpha_source(args):
    """A callable bits -> mpfr for the requested parameter."""
    if getattr(args, "cf", None):
        a = args.cf
        if args.tail == "golden":
            return lambda b: a[0] + regular_cf_alpha(a[1:], b, tail="golden")
        value = reconstruct(ModifiedCF.from_quotients(a))
        return lambda b: to_mpfr(value, b)
    if args.alpha is None:
        raise SystemExit("error: give --alpha or --cf")
    text = args.alpha.strip()
    if "/" in text:
        value = Fraction(text)
        return lambda b: to_mpfr(value, b)
    return lambda b: to_mpfr(text, b)


def _alpha_float(args) -> float:
    with context(128):
        return float(_alpha_source(args)(128))


def _emit(obj, out: str | None) -> None:
    text = json.dumps(jsonable(obj), indent=1, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _finish(reports, out: str | None, extra: dict | None = None) -> int:
    payload = {"tool_version": __version__,
               "status": "PASS" if all(r.passed for r in reports) else "FAIL",
               "reports": [r.to_dict() for r in reports]}
    if extra:
        payload.update(extra)
    _emit(payload, out)
    failed = [{"section": r.lemma, "failed_checks": [k for k, v in r.checks.items() if not v]}
              for r in reports if not r.passed]
    if failed:
        sys.stderr.write(json.dumps({"status": "FAIL", "failures": failed}) + "\n")
        return 1
    return 0


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_cf(args) -> int:
    cf = expand_cf(_alpha_source(args), args.depth, bits=args.precision_bits)
    _emit(cf_to_dict(cf), args.out)
    return 0


def cmd_brjuno(args) -> int:
    cf = expand_cf(_alpha_source(args), args.depth, bits=args.precision_bits)
    led = brjuno_ledger(cf)
    out = cf_to_dict(cf, led)
    n = min(args.sum_depth, len(led.partial_sums) - 1)
    k = min(args.product_depth, len(led.product_seq))
    if n >= 0 and k >= 1:
        out["classification"] = classify(led, n, k)
    _emit(out, args.out)
    return 0


def cmd_orbit(args) -> int:
    m = _MAKERS[args.map](_alpha_float(args))
    if args.z0 in ("cv", "critical-value"):
        z0 = complex(maps.critical_value(m))
    else:
        z0 = complex(args.z0.replace(" ", ""))
    n = args.budget
    if args.out:
        dump_orbit(m, z0, n, args.out, args.format, args.escape_radius)
    else:
        rec = maps.orbit(m, z0, n, args.escape_radius)
        sys.stdout.write(rec.to_json() + "\n" if args.format == "json" else rec.to_csv())
    return 0


def cmd_render_julia(args) -> int:
    m = _MAKERS[args.map](_alpha_float(args))
    job = RenderJob(m, Viewport.parse(args.viewport), args.res, args.max_iter,
                    args.escape_radius, args.coloring)
    render_julia(job, args.out, args.threads)
    return 0


def cmd_render_pc(args) -> int:
    render_postcritical(_alpha_float(args), args.budget, Viewport.parse(args.viewport), args.out,
                        args.res)
    return 0


def _frame(args) -> FatouFrame:
    with context(args.precision_bits):
        m = _MAKERS[args.map](_alpha_source(args)(args.precision_bits))
    return FatouFrame(m, bits=args.precision_bits)


def cmd_fatou_check(args) -> int:
    fr = _frame(args)
    reports = [near_translation_report(fr, grid=args.grid),
               dilatation_report(fr),
               semiconjugacy_report(fr, grid=max(args.grid // 4, 4)),
               abel_report(fr, points=args.points)]
    extra = {"frame": {"map": fr.map.kind, "alpha": fr.alpha, "C2": fr.c2_fitted,
                       "base_a": fr.base_a, "cp_lift": complex(fr.cp_lift),
                       "precision_bits": fr.bits}}
    return _finish(reports, args.out, extra)


def cmd_renorm_check(args) -> int:
    fr = _frame(args)
    rep = rotation_report(fr, args.radius, args.steps, tol=args.tol)
    cf = expand_cf(_alpha_source(args), args.depth, bits=max(args.precision_bits, 256))
    extra = {"tower": tower_ledger(cf, levels=min(args.depth - 1, 20)).to_dict()}
    return _finish([rep], args.out, extra)


def cmd_verify(args) -> int:
    if args.print_default_config:
        sys.stdout.write(default_config_text())
        return 0
    overrides = {"precision_bits": args.precision_bits}
    if args.sections:
        overrides["sections"] = args.sections
    if args.budget is not None:
        overrides["gate_budget"] = args.budget
    bundle = run_verification(args.config, out=None, threads=args.threads, overrides=overrides)
    text = bundle.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not bundle.passed:
        sys.stderr.write(json.dumps({"status": "FAIL", "failures": bundle.failures()}) + "\n")
        return 1
    return 0


# ---------------------------------------------------------------------------

def _add_alpha(p, depth: int | None = None, bits: int = 256) -> None:
    p.add_argument("--alpha", help="decimal string or p/q")
    p.add_argument("--cf", type=_parse_cf, help='quotients "a0,a1,..." (all signs +1)')
    p.add_argument("--tail", choices=("none", "golden"), default="none",
                   help="continue --cf with 1,1,1,... (default: stop)")
    p.add_argument("--precision-bits", type=int, default=bits)
    if depth is not None:
        p.add_argument("--depth", type=int, default=depth)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fatoulab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"fatoulab {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cf", help="nearest-integer continued fraction")
    _add_alpha(p, depth=30)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("brjuno", help="Brjuno partial sums and product sequence")
    _add_alpha(p, depth=30)
    p.add_argument("--sum-depth", type=int, default=25)
    p.add_argument("--product-depth", type=int, default=30)
    p.add_argument("--out")
    p.set_defaults(func=cmd_brjuno)

    p = sub.add_parser("orbit", help="dump an orbit as CSV or JSON")
    _add_alpha(p)
    p.add_argument("--map", choices=sorted(_MAKERS), default="quadratic")
    p.add_argument("--z0", default="cv", help="complex start, or 'cv' for the critical value")
    p.add_argument("--budget", "-n", type=int, default=1000, help="number of iterations")
    p.add_argument("--escape-radius", type=float, default=1e6)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("render-julia", help="escape-time image")
    _add_alpha(p)
    p.add_argument("--map", choices=sorted(_MAKERS), default="quadratic")
    p.add_argument("--viewport", default="-0.4,0,3.2", help="cx,cy,w")
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--escape-radius", type=float, default=4.0)
    p.add_argument("--coloring", choices=(ESCAPE_TIME, ORBIT_TRAP), default=ESCAPE_TIME)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True, help=".ppm or .png")
    p.set_defaults(func=cmd_render_julia)

    p = sub.add_parser("render-pc", help="critical-orbit density image")
    _add_alpha(p)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--viewport", default="0,0,2.4", help="cx,cy,w")
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--out", required=True, help=".ppm or .png")
    p.set_defaults(func=cmd_render_pc)

    p = sub.add_parser("fatou-check", help="lift, Fatou coordinate and Abel checks")
    _add_alpha(p, bits=128)
    p.add_argument("--map", choices=sorted(_MAKERS), default="quadratic")
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fatou_check)

    p = sub.add_parser("renorm-check", help="rotation number of the renormalized map")
    _add_alpha(p, depth=22, bits=128)
    p.add_argument("--map", choices=sorted(_MAKERS), default="quadratic")
    p.add_argument("--radius", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_renorm_check)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--config")
    p.add_argument("--precision-bits", type=int)
    p.add_argument("--sections", help="comma-separated section names")
    p.add_argument("--budget", type=int, help="iteration budget of the gate experiment")
    p.add_argument("--threads", type=int)
    p.add_argument("--print-default-config", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps({"status": "ERROR", "error": "ConfigError", "message": str(exc),
                                     "key": exc.key, "line": exc.line}) + "\n")
        return 2
    except (FatouLabError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"status": "ERROR", "error": type(exc).__name__,
                                     "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
