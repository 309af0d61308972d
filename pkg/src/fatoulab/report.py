"""Structured verification reports and their JSON form."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

SCHEMA_REPORT = "fatoulab.report.v1"


def jsonable(x: Any) -> Any:
    """Convert numbers (mpfr, numpy, complex) into deterministic JSON values."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, complex) or type(x).__name__ in ("mpc", "complex128", "complex64"):
        c = complex(x)
        return [jsonable(c.real), jsonable(c.imag)]
    if hasattr(x, "item") and not hasattr(x, "__len__"):
        return jsonable(x.item())
    try:
        v = float(x)
    except (TypeError, ValueError):
        return str(x)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class VerifyReport:
    lemma: str
    region: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    fitted: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    samples: int = 0
    precision_bits: int = 53
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(bool(v) for v in self.checks.values())

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def check(self, name: str, ok: bool) -> bool:
        self.checks[name] = bool(ok)
        return bool(ok)

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "status": self.status,
            "region": jsonable(self.region),
            "samples": int(self.samples),
            "precision_bits": int(self.precision_bits),
            "residuals": jsonable(self.residuals),
            "fitted": jsonable(self.fitted),
            "checks": {k: bool(v) for k, v in self.checks.items()},
            "notes": list(self.notes),
        }


def merge(reports: Iterable[VerifyReport], lemma: str | None = None) -> VerifyReport:
    """Combine reports of one kind: sups of residuals, maxima of fitted values,
    conjunction of checks, sum of samples.  Associative and order-free."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to merge")
    out = VerifyReport(lemma or reports[0].lemma)
    out.precision_bits = min(r.precision_bits for r in reports)
    for r in reports:
        out.samples += r.samples
        for k, v in r.residuals.items():
            out.residuals[k] = max(out.residuals.get(k, -math.inf), float(v))
        for k, v in r.fitted.items():
            out.fitted[k] = max(out.fitted.get(k, -math.inf), float(v))
        for k, v in r.checks.items():
            out.checks[k] = out.checks.get(k, True) and bool(v)
        out.notes.extend(r.notes)
    out.notes = sorted(set(out.notes))
    return out


def config_hash(config: dict) -> str:
    """SHA-256 of the config as sorted-key compact JSON."""
    blob = json.dumps(jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_schema(name: str) -> dict:
    """The packaged JSON schema ``name`` (e.g. 'orbit.v1')."""
    from importlib.resources import files
    return json.loads(files("fatoulab").joinpath("schemas", f"{name}.json").read_text())
