"""The verification suite: configured sections, each producing one merged report."""
from __future__ import annotations

import datetime as _dt
import json
import logging
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import gmpy2
from gmpy2 import mpfr

from . import __version__, maps
from .cf import (context, exp_linear_rule, exp_power_rule, expand_cf, approximants,
                 brjuno_ledger, classify, growth_ledger, reconstruct, regular_cf_alpha)
from .config import SECTION_ORDER, VerifyConfig, load_config
from .fatou import (FatouFrame, abel_report, fit_M, near_translation_report,
                    semiconjugacy_report)
from .render import thread_count
from .renorm import (critical_gate_experiment, gate_report, rotation_number_estimate,
                     rotation_report, sector_count_check)
from .report import VerifyReport, config_hash, jsonable, merge

log = logging.getLogger(__name__)

SCHEMA_BUNDLE = "fatoulab.bundle.v1"
_MAKERS = {"quadratic": maps.quadratic, "cubic": maps.cubic}


def _frames(cfg: VerifyConfig, alphas) -> list[FatouFrame]:
    return [FatouFrame(_MAKERS[m](a), bits=cfg.precision_bits) for a in alphas for m in cfg.maps]


def _cases(reports, frames) -> list[dict]:
    return [{"map": f.map.kind, "alpha": f.alpha, "status": r.status} for r, f in zip(reports, frames)]


# ---------------------------------------------------------------------------
# Sections.

def section_cf_roundtrip(cfg: VerifyConfig) -> VerifyReport:
    bits = max(256, cfg.precision_bits)
    rnd = random.Random(cfg.seed)
    worst = 0.0
    with context(bits):
        for _ in range(cfg.cf_samples):
            alpha = mpfr(rnd.getrandbits(bits)) / mpfr(2) ** bits
            cf = expand_cf(alpha, cfg.cf_depth, bits)
            err = abs(mpfr(reconstruct(cf)) - alpha)
            worst = max(worst, float(err))
    rep = VerifyReport("cf-roundtrip", precision_bits=bits, samples=cfg.cf_samples)
    rep.region = {"depth": cfg.cf_depth, "seed": cfg.seed}
    rep.residuals = {"sup_abs_error": worst}
    rep.check("error_below_2^-29", worst <= 2.0 ** -29)
    return rep


def curated_family() -> list[tuple[str, bool, dict]]:
    """(name, is_brjuno, growth_ledger kwargs): five Brjuno, five not."""
    return [
        ("constant 2", True, {"head": [2] * 40}),
        ("constant 10", True, {"head": [10] * 40}),
        ("a_j = j + 1", True, {"head": [j + 2 for j in range(40)]}),
        ("a_j = 2^j", True, {"head": [2 ** (j + 1) for j in range(40)]}),
        ("ceil(exp(sqrt q))", True, {"rule": exp_power_rule(0.5)}),
        ("ceil(exp(q))", False, {"rule": exp_linear_rule(1)}),
        ("ceil(exp(5 q))", False, {"rule": exp_linear_rule(5)}),
        ("ceil(exp(10 q))", False, {"rule": exp_linear_rule(10)}),
        ("ceil(exp(q^1.5))", False, {"rule": exp_power_rule(1.5)}),
        ("ceil(exp(q^2))", False, {"rule": exp_power_rule(2)}),
    ]


def section_brjuno_product(cfg: VerifyConfig) -> VerifyReport:
    n, k = cfg.brjuno_depth, cfg.product_depth
    depth = max(n, k) + 1
    cases, dual = [], 0.0
    for name, truth, kw in curated_family():
        verdict = classify(growth_ledger(depth, bits=cfg.precision_bits, **kw), n, k)
        cases.append({"case": name, "brjuno": truth, **verdict})
        if "head" in kw:
            # second route: expand the actual number and rebuild the ledger
            head = kw["head"]
            cf = expand_cf(lambda b, h=head: regular_cf_alpha(h, b, tail="none"), depth + 1,
                           bits=max(cfg.precision_bits, 512))
            other = brjuno_ledger(cf)
            dual = max(dual, abs(float(other.partial_sums[n]) - verdict["brjuno_partial"]))
    rep = VerifyReport("brjuno-product", precision_bits=cfg.precision_bits, samples=len(cases))
    rep.region = {"cases": cases, "sum_depth": n, "product_depth": k,
                  "sum_threshold": 100.0, "product_threshold": 1e-2}
    rep.residuals = {"dual_route_partial_gap": dual}
    rep.check("classifiers_agree", all(c["agree"] for c in cases))
    rep.check("dual_route_consistent", dual < 1e-20)
    return rep


def section_semiconjugacy(cfg: VerifyConfig) -> VerifyReport:
    frames = _frames(cfg, cfg.semiconj_alphas)
    reps = [semiconjugacy_report(f, grid=cfg.semiconj_grid) for f in frames]
    out = merge(reps)
    out.region = {"cases": _cases(reps, frames), "grid": cfg.semiconj_grid}
    return out


def section_near_translation(cfg: VerifyConfig) -> VerifyReport:
    frames = _frames(cfg, cfg.translation_alphas)
    reps = []
    for f in frames:
        r1 = near_translation_report(f, grid=cfg.translation_grid)
        r2 = near_translation_report(f, grid=2 * cfg.translation_grid)
        c2, c2b = r1.fitted["C2"], r2.fitted["C2"]
        r1.fitted["C2_doubled_grid"] = c2b
        r1.residuals["C2_relative_change"] = abs(c2b - c2) / c2
        r1.check("C2_at_most_1e3", c2 <= 1e3)
        r1.check("C2_stable_10pct", abs(c2b - c2) <= 0.1 * c2)
        r1.check("doubled_grid_passes", r2.passed)
        reps.append(r1)
    out = merge(reps)
    out.region = {"cases": _cases(reps, frames), "grid": cfg.translation_grid}
    return out


def section_abel(cfg: VerifyConfig) -> VerifyReport:
    frames = _frames(cfg, cfg.abel_alphas)
    reps = [abel_report(f, points=cfg.abel_points, seed=cfg.seed) for f in frames]
    out = merge(reps)
    out.region = {"cases": _cases(reps, frames), "points": cfg.abel_points}
    return out


def section_sector_count(cfg: VerifyConfig) -> VerifyReport:
    rnd = random.Random(cfg.seed)
    reps = []
    for _ in range(cfg.sector_trials):
        k = rnd.randint(0, 50)
        k_n = k + 1 + rnd.randint(0, 50)
        a_next = rnd.randint(1, 10**6)
        q_prev = rnd.getrandbits(rnd.randint(1, 200))
        q_n = q_prev + 1 + rnd.getrandbits(rnd.randint(1, 200))
        q_next = a_next * q_n + q_prev + rnd.choice((0, 0, 1, -1, rnd.getrandbits(64)))
        reps.append(sector_count_check([q_prev, q_n, q_next], k_n, k, a_next, 1))
    pell = approximants(expand_cf(lambda b: gmpy2.sqrt(mpfr(2, b)) - 1, cfg.pell_levels + 2,
                                  bits=256))
    for n in range(cfg.pell_levels + 1):
        reps.append(sector_count_check(pell, 3, 1, 2, n))
    out = merge(reps)
    out.region = {"random_trials": cfg.sector_trials, "pell_levels": cfg.pell_levels,
                  "pell_q": [str(v) for v in pell.q[:cfg.pell_levels + 2]]}
    out.residuals = {}
    return out


def section_rotation(cfg: VerifyConfig) -> VerifyReport:
    frames = _frames(cfg, cfg.rotation_alphas)
    reps = [rotation_report(f, cfg.rotation_radius, cfg.rotation_steps, tol=cfg.rotation_tol)
            for f in frames]
    beta = math.sqrt(2) - 1
    lin = rotation_number_estimate(lambda z: complex(math.cos(2 * math.pi * beta),
                                                     math.sin(2 * math.pi * beta)) * z,
                                   cfg.rotation_radius, cfg.rotation_steps)
    out = merge(reps)
    out.region = {"cases": _cases(reps, frames), "radius": cfg.rotation_radius,
                  "steps": cfg.rotation_steps}
    out.residuals["linear_stub_error"] = abs(lin.value - beta)
    out.check("linear_stub_within_1e-12", abs(lin.value - beta) < 1e-12)
    return out


def section_gate(cfg: VerifyConfig) -> VerifyReport:
    quots = cfg.gate_quotients
    alphas = [float(regular_cf_alpha(q)) for q in quots]
    M = fit_M([FatouFrame(maps.quadratic(a), bits=cfg.precision_bits) for a in alphas])
    recs = []
    for q in quots:
        recs += critical_gate_experiment(q, [len(q)], cfg.gate_budget, M)
    rep = gate_report(recs, cfg.gate_factor)
    rep.fitted = {"M": M}
    rep.notes.append("M fitted on the experiment's own parameters, tag: fitted")
    return rep


SECTIONS: dict[str, Callable[[VerifyConfig], VerifyReport]] = {
    "cf-roundtrip": section_cf_roundtrip,
    "brjuno-product": section_brjuno_product,
    "semiconjugacy": section_semiconjugacy,
    "near-translation": section_near_translation,
    "abel": section_abel,
    "sector-count": section_sector_count,
    "rotation-number": section_rotation,
    "gate-experiment": section_gate,
}
assert tuple(SECTIONS) == SECTION_ORDER


# ---------------------------------------------------------------------------
# Bundles.

def build_timestamp() -> str | None:
    """ISO time from SOURCE_DATE_EPOCH, or None; wall-clock time is never recorded."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    return _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc).isoformat()


@dataclass
class ReportBundle:
    tool_version: str
    config_hash: str
    sections: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    timestamp: str | None = None

    @property
    def passed(self) -> bool:
        return bool(self.sections) and all(r.passed for r in self.sections)

    def failures(self) -> list[dict]:
        return [{"section": r.lemma, "failed_checks": [k for k, v in r.checks.items() if not v]}
                for r in self.sections if not r.passed]

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_BUNDLE, "tool_version": self.tool_version,
                "config_hash": self.config_hash, "config": jsonable(self.config),
                "timestamp": self.timestamp, "status": "PASS" if self.passed else "FAIL",
                "sections": [r.to_dict() for r in self.sections]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def run_verification(config: str | Path | VerifyConfig | None = None,
                     out: str | Path | None = None, threads: int | None = None,
                     overrides: dict | None = None) -> ReportBundle:
    """Run the configured sections and optionally write the bundle as JSON.

    Sections run on a thread pool; results are stored by index so that the
    bundle does not depend on completion order.
    """
    cfg = config if isinstance(config, VerifyConfig) else load_config(config, overrides)
    names = list(cfg.sections)
    results: list = [None] * len(names)

    def run(i: int) -> None:
        log.info("section %s", names[i])
        results[i] = SECTIONS[names[i]](cfg)

    n = min(thread_count(threads), len(names)) if names else 1
    if n <= 1:
        for i in range(len(names)):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(run, range(len(names))))
    bundle = ReportBundle(__version__, config_hash(cfg.to_dict()), results, cfg.to_dict(),
                          build_timestamp())
    if out is not None:
        Path(out).write_text(bundle.to_json())
    return bundle


def dump_orbit(m: maps.MapSpec, z0, n: int, path: str | Path, fmt: str | None = None,
               escape_radius: float = 1e6) -> Path:
    """Write an orbit as CSV or JSON (chosen by ``fmt`` or the file suffix)."""
    if n > 10**8:
        raise ValueError("n above 1e8")
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "csv").lower()
    rec = maps.orbit(m, z0, n, escape_radius)
    if fmt == "csv":
        path.write_text(rec.to_csv())
    elif fmt == "json":
        path.write_text(rec.to_json() + "\n")
    else:
        raise ValueError(f"unknown orbit format {fmt!r}")
    return path
