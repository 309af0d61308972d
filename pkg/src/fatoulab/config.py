"""Flat ``key = value`` configuration for the verification suite.

Grammar, one entry per line::

    # comment                 (also ';' comments)
    key = value               (':' works as separator too)
    key = v1, v2, v3          (lists are comma separated)
    key = 3 | 3,50 | 3,50,100000   (lists of integer lists use '|')

Keys are case-insensitive and must be known.  Values are checked against
the type of the default.  Values given on the command line win over the
file.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

SECTION_ORDER = ("cf-roundtrip", "brjuno-product", "semiconjugacy", "near-translation",
                 "abel", "sector-count", "rotation-number", "gate-experiment")

# key -> (kind, default); kinds: int, float, str, ints, floats, strs, intlists
SCHEMA: dict[str, tuple[str, Any]] = {
    "sections": ("strs", [s for s in SECTION_ORDER if s != "brjuno-product"]),
    "precision_bits": ("int", 128),
    "seed": ("int", 20240917),
    "maps": ("strs", ["quadratic", "cubic"]),
    "cf_samples": ("int", 100),
    "cf_depth": ("int", 30),
    "brjuno_depth": ("int", 25),
    "product_depth": ("int", 30),
    "semiconj_alphas": ("floats", [0.2, 0.05, 0.01, 0.002]),
    "semiconj_grid": ("int", 24),
    "translation_alphas": ("floats", [0.01]),
    "translation_grid": ("int", 100),
    "abel_alphas": ("floats", [0.01]),
    "abel_points": ("int", 200),
    "sector_trials": ("int", 1000),
    "pell_levels": ("int", 20),
    "rotation_alphas": ("floats", [math.sqrt(2) - 1, 0.208, 0.24]),
    "rotation_radius": ("float", 1e-3),
    "rotation_steps": ("int", 200),
    "rotation_tol": ("float", 1e-2),
    "gate_quotients": ("intlists", [[3], [3, 50], [3, 50, 100000]]),
    "gate_budget": ("int", 10**7),
    "gate_factor": ("float", 10.0),
}

_SECTION = "fatoulab"


def _convert(key: str, kind: str, raw: str, line: int | None) -> Any:
    def bad(why: str) -> ConfigError:
        return ConfigError(f"bad value {raw!r}: {why}", key=key, line=line)

    text = raw.strip()
    try:
        if kind == "int":
            return int(float(text)) if re.fullmatch(r"\d+e\d+", text) else int(text)
        if kind == "float":
            return float(text)
        if kind == "str":
            return text
        items = [t.strip() for t in text.split(",") if t.strip()]
        if kind == "ints":
            return [int(t) for t in items]
        if kind == "floats":
            return [float(t) for t in items]
        if kind == "strs":
            return items
        if kind == "intlists":
            return [[int(t) for t in part.split(",") if t.strip()] for part in text.split("|")]
    except ValueError as exc:
        raise bad(str(exc)) from None
    raise bad(f"unknown kind {kind}")


@dataclass
class VerifyConfig:
    values: dict = field(default_factory=lambda: {k: v for k, (_, v) in SCHEMA.items()})
    source: str | None = None

    def __getattr__(self, name: str) -> Any:
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def to_dict(self) -> dict:
        return dict(sorted(self.values.items()))


def _line_numbers(text: str) -> dict[str, int]:
    out = {}
    for i, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*([A-Za-z0-9_.-]+)\s*[=:]", line)
        if m:
            out.setdefault(m.group(1).lower(), i)
    return out


def parse_config(text: str, overrides: Mapping[str, Any] | None = None,
                 source: str | None = None) -> VerifyConfig:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), strict=True)
    try:
        # configparser wants a section header; the file format has none
        parser.read_string(f"[{_SECTION}]\n" + text, source=source or "<config>")
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", key=exc.option, line=exc.lineno - 1) from None
    except configparser.ParsingError as exc:
        lineno, bad_line = exc.errors[0]
        raise ConfigError(f"expected 'key = value', got {bad_line.strip()!r}",
                          line=lineno - 1) from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"cannot parse: {exc.message.splitlines()[0]}",
                          line=None if line is None else line - 1) from None
    lines = _line_numbers(text)
    cfg = VerifyConfig(source=source)
    for key, raw in parser[_SECTION].items():
        if key not in SCHEMA:
            raise ConfigError("unknown key", key=key, line=lines.get(key))
        cfg.values[key] = _convert(key, SCHEMA[key][0], raw, lines.get(key))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in SCHEMA:
            raise ConfigError("unknown override", key=key)
        if isinstance(value, str):
            value = _convert(key, SCHEMA[key][0], value, None)
        cfg.values[key] = value
    _validate(cfg, lines)
    return cfg


def _validate(cfg: VerifyConfig, lines: dict) -> None:
    unknown = [s for s in cfg.values["sections"] if s not in SECTION_ORDER]
    if unknown:
        raise ConfigError(f"unknown section {unknown[0]!r}", key="sections", line=lines.get("sections"))
    for key in ("precision_bits", "cf_samples", "cf_depth", "semiconj_grid", "translation_grid",
                "abel_points", "rotation_steps"):
        if cfg.values[key] < 1:
            raise ConfigError("must be positive", key=key, line=lines.get(key))
    if not 53 <= cfg.values["precision_bits"] <= 1 << 15:
        raise ConfigError("must be in [53, 32768]", key="precision_bits",
                          line=lines.get("precision_bits"))
    for m in cfg.values["maps"]:
        if m not in ("quadratic", "cubic"):
            raise ConfigError(f"unknown map {m!r}", key="maps", line=lines.get("maps"))


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> VerifyConfig:
    if path is None:
        return parse_config("", overrides)
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, overrides, source=str(path))


def default_config_text() -> str:
    rows = ["# fatoulab verification defaults"]
    for key, (kind, value) in SCHEMA.items():
        if kind == "intlists":
            text = " | ".join(",".join(str(v) for v in part) for part in value)
        elif isinstance(value, list):
            text = ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            text = repr(value) if isinstance(value, float) else str(value)
        rows.append(f"{key} = {text}")
    return "\n".join(rows) + "\n"
