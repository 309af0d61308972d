import json

import pytest

from fatoulab import cli
from fatoulab.config import SCHEMA, default_config_text, load_config, parse_config
from fatoulab.errors import ConfigError
from fatoulab.report import load_schema
from fatoulab.verify import build_timestamp, run_verification

jsonschema = pytest.importorskip("jsonschema")


def test_defaults_roundtrip():
    cfg = parse_config(default_config_text())
    assert cfg.to_dict() == load_config().to_dict()
    assert cfg.rotation_alphas[0] == pytest.approx(2 ** 0.5 - 1)


def test_grammar():
    cfg = parse_config("; comment\nseed: 5  # inline\ngate_quotients = 3 | 3,50\nmaps = cubic\n")
    assert cfg.seed == 5 and cfg.gate_quotients == [[3], [3, 50]] and cfg.maps == ["cubic"]
    assert parse_config("gate_budget = 1e7").gate_budget == 10**7


@pytest.mark.parametrize("text, key, line", [
    ("seed = 1\nbogus = 3\n", "bogus", 2),
    ("\n\nprecision_bits = lots\n", "precision_bits", 3),
    ("seed = 1\nseed = 2\n", "seed", 2),
    ("maps = quadratic, quartic\n", "maps", 1),
    ("sections = abel, nonsense\n", "sections", 1),
    ("precision_bits = 8\n", "precision_bits", 1),
])
def test_config_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key and exc.value.line == line


def test_parse_error_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("seed = 1\nthis line has no separator\n")
    assert exc.value.line == 2


def test_overrides_win():
    cfg = parse_config("seed = 1\n", {"seed": 9, "precision_bits": None, "sections": "abel"})
    assert cfg.seed == 9 and cfg.precision_bits == 128 and cfg.sections == ["abel"]


def test_config_hash_ignores_key_order():
    a = run_verification(parse_config("seed = 3\ncf_samples = 4\nsections = cf-roundtrip\n"))
    b = run_verification(parse_config("sections = cf-roundtrip\ncf_samples = 4\nseed = 3\n"))
    assert a.config_hash == b.config_hash and a.to_json() == b.to_json()


def test_bundle_schema_and_timestamp(monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    cfg = parse_config("sections = cf-roundtrip, sector-count\ncf_samples = 5\n")
    bundle = run_verification(cfg, threads=2)
    doc = json.loads(bundle.to_json())
    jsonschema.validate(doc, load_schema("bundle.v1"))
    for sec in doc["sections"]:
        jsonschema.validate(sec, load_schema("report.v1"))
    assert doc["timestamp"] is None and doc["status"] == "PASS"
    assert [s["lemma"] for s in doc["sections"]] == ["cf-roundtrip", "sector-count"]
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert build_timestamp() == "1970-01-01T00:00:00+00:00"


def test_every_key_has_a_default_line():
    text = default_config_text()
    for key in SCHEMA:
        assert f"\n{key} = " in text


# ---------------------------------------------------------------------------
# CLI

def test_cli_cf(tmp_path, capsys):
    assert cli.main(["cf", "--alpha", "1/3", "--depth", "5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, load_schema("cf.v1"))
    assert doc["a"] == [0, 3]


def test_cli_orbit_csv(tmp_path):
    out = tmp_path / "o.csv"
    assert cli.main(["orbit", "--alpha", "0.3", "-n", "10", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 12


def test_cli_orbit_json(tmp_path):
    out = tmp_path / "o.json"
    assert cli.main(["orbit", "--cf", "0,3,50", "--tail", "golden", "--map", "cubic",
                     "-n", "4", "--z0", "0.1+0.1j", "--out", str(out)]) == 0
    jsonschema.validate(json.loads(out.read_text()), load_schema("orbit.v1"))


def test_cli_render(tmp_path):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    for path, threads in ((a, "1"), (b, "8")):
        assert cli.main(["render-julia", "--alpha", "0.3", "--res", "48", "--threads", threads,
                         "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert cli.main(["render-pc", "--alpha", "0.3", "--budget", "1000", "--res", "32",
                     "--out", str(tmp_path / "pc.ppm")]) == 0


def test_cli_verify_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.ini"
    good.write_text("sections = sector-count\nsector_trials = 20\n")
    assert cli.main(["verify", "--config", str(good)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "PASS"

    bad = tmp_path / "bad.ini"
    bad.write_text("seed = 1\nbogus = 2\n")
    assert cli.main(["verify", "--config", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["key"] == "bogus" and err["line"] == 2


def test_cli_verify_failure_summary(tmp_path, capsys):
    cfg = tmp_path / "b.ini"
    cfg.write_text("sections = brjuno-product\n")
    assert cli.main(["verify", "--config", str(cfg)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["failures"][0]["section"] == "brjuno-product"


def test_cli_print_default_config(capsys):
    assert cli.main(["verify", "--print-default-config"]) == 0
    assert parse_config(capsys.readouterr().out).to_dict() == load_config().to_dict()


def test_cli_bad_alpha(capsys):
    assert cli.main(["cf", "--alpha", "abc"]) == 2
    assert json.loads(capsys.readouterr().err)["status"] == "ERROR"
