"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines are printed even with output capture on) or
directly with ``python3 tests/test_acceptance.py``.
"""
import hashlib
import math
import sys
import time

from fatoulab import maps
from fatoulab.config import parse_config
from fatoulab.render import RenderJob, Viewport, ORBIT_TRAP, render_julia, render_postcritical
from fatoulab.verify import SECTIONS, run_verification

SQRT2M1 = math.sqrt(2) - 1


def _cfg(**overrides):
    return parse_config("", overrides)


def _announce(capsys, number: int, title: str, ok: bool, seconds: float, limit: float | None,
              detail: str = "") -> None:
    timed = seconds < limit if limit else True
    status = "PASS" if ok and timed else "FAIL"
    budget = f" (limit {limit:g}s)" if limit else ""
    line = f"{status} criterion {number}: {title} [{seconds:.2f}s{budget}] {detail}".rstrip()
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)


def _section(name: str, **overrides):
    cfg = _cfg(sections=[name], **overrides)
    t0 = time.perf_counter()
    rep = SECTIONS[name](cfg)
    return rep, time.perf_counter() - t0


def _failed(rep) -> str:
    bad = [k for k, v in rep.checks.items() if not v]
    return "failed checks: " + ", ".join(bad) if bad else ""


def test_criterion_1_cf_roundtrip(capsys):
    rep, dt = _section("cf-roundtrip", cf_samples=100, cf_depth=30, precision_bits=256)
    _announce(capsys, 1, "CF round-trip, 100 samples at 256 bits", rep.passed, dt, 5,
              f"sup error {rep.residuals['sup_abs_error']:.2e}")
    assert rep.passed and dt < 5


def test_criterion_2_brjuno_product(capsys):
    rep, dt = _section("brjuno-product", brjuno_depth=25, product_depth=30)
    wrong = [c["case"] for c in rep.region["cases"] if not c["agree"]]
    _announce(capsys, 2, "Brjuno sum vs product classifier, 10 curated cases", rep.passed, dt,
              10, f"disagreeing: {wrong}" if wrong else "")
    assert rep.passed and dt < 10, _failed(rep) + f"; disagreeing cases {wrong}"


def test_criterion_3_semiconjugacy(capsys):
    rep, dt = _section("semiconjugacy", semiconj_alphas=[0.2, 0.05, 0.01, 0.002],
                       semiconj_grid=100, precision_bits=128)
    _announce(capsys, 3, "semiconjugacy, 100x100 grid, 4 alphas x 2 maps", rep.passed, dt, 30,
              f"sup residual {rep.residuals['sup_residual']:.2e}")
    assert rep.passed and dt < 30, _failed(rep)


def test_criterion_4_near_translation(capsys):
    rep, dt = _section("near-translation", translation_alphas=[0.01, 0.002],
                       translation_grid=100)
    _announce(capsys, 4, "near-translation with grid doubling, alpha <= 0.01", rep.passed, dt,
              60, f"C2 {rep.fitted['C2']:.3f}")
    assert rep.passed and dt < 60, _failed(rep)


def test_criterion_5_abel(capsys):
    rep, dt = _section("abel", abel_alphas=[0.01], abel_points=1000)
    _announce(capsys, 5, "Abel equation on 1000 points, Phi(cp)=0, dilatation < 1/3", rep.passed,
              dt, 60, f"sup {rep.residuals['sup_abel']:.2e}")
    assert rep.passed and dt < 60, _failed(rep)


def test_criterion_6_rotation(capsys):
    rep, dt = _section("rotation-number", rotation_alphas=[SQRT2M1, 0.208, 0.24],
                       rotation_radius=1e-3, rotation_tol=1e-2)
    _announce(capsys, 6, "rotation number of the renormalized map", rep.passed, dt, 300,
              f"max error {rep.residuals['rotation_error']:.2e}")
    assert rep.passed and dt < 300, _failed(rep)


def test_criterion_7_sector_count(capsys):
    rep, dt = _section("sector-count", sector_trials=1000, pell_levels=20)
    _announce(capsys, 7, "sector-count identity, 1000 random + 21 Pell levels", rep.passed,
              dt, 1, f"{rep.samples} cases")
    assert rep.passed and dt < 1, _failed(rep)


def test_criterion_8_gate(capsys):
    rep, dt = _section("gate-experiment", gate_quotients=[[3], [3, 50], [3, 50, 100000]],
                       gate_budget=10**7, gate_factor=10)
    mins = ", ".join(f"{v:.4g}" for v in (r["min_abs"] for r in rep.region["records"]))
    _announce(capsys, 8, "gate experiment, budget 1e7", rep.passed, dt, 600,
              f"minima [{mins}], M {rep.fitted['M']:.3f}")
    assert rep.passed and dt < 600, _failed(rep)


def _digest(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_9_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    digests = {}
    for run, threads in enumerate((1, 8, 8)):
        d = tmp_path / f"run{run}"
        d.mkdir()
        m = maps.quadratic(SQRT2M1)
        vp = Viewport(-0.4, 0, 3.2)
        render_julia(RenderJob(m, vp, 256, 300), d / "julia.ppm", threads=threads)
        render_julia(RenderJob(maps.cubic(0.24), vp, 256, 300, coloring=ORBIT_TRAP),
                     d / "trap.png", threads=threads)
        render_postcritical(SQRT2M1, 10**5, Viewport(0, 0, 2.4), d / "pc.ppm", 256)
        run_verification(_cfg(), out=d / "bundle.json", threads=threads)
        digests[run] = {p.name: _digest(p) for p in sorted(d.iterdir())}
    ok = digests[0] == digests[1] == digests[2]
    _announce(capsys, 9, "byte-identical renders and reports, threads 1 and 8, repeated",
              ok, time.perf_counter() - t0, None, f"{len(digests[0])} artifacts")
    assert ok, digests


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failures = 0
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_criterion_"):
            continue
        try:
            if name.endswith("determinism"):
                with tempfile.TemporaryDirectory() as tmp:
                    fn(Path(tmp), None)
            else:
                fn(None)
        except AssertionError:
            failures += 1
    sys.exit(1 if failures else 0)
