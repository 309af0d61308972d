import cmath
import math

import gmpy2
import pytest
from gmpy2 import mpfr

from fatoulab import maps
from fatoulab.cf import ModifiedCF, approximants, expand_cf, growth_ledger, exp_linear_rule
from fatoulab.errors import DiskTooLarge
from fatoulab.fatou import FatouFrame
from fatoulab.renorm import (critical_gate_experiment, critical_min_distance,
                             gate_constant, gate_diameter_bound, gate_exponent_sum,
                             reduced_inverse, renormalize, renormalize_eval,
                             rotation_number_estimate, rotation_report, sector_count_check,
                             sector_count_sides, tower_ledger)

SQRT2M1 = math.sqrt(2) - 1


def test_reduced_inverse_examples():
    assert reduced_inverse(0.24) == pytest.approx(1 / 0.24 - 4)
    assert reduced_inverse(SQRT2M1) == pytest.approx(SQRT2M1)
    assert reduced_inverse(0.208) == pytest.approx(1 / 0.208 - 5)


def test_linear_stub_rotation():
    beta = 0.1234567
    rot = cmath.exp(2j * math.pi * beta)
    est = rotation_number_estimate(lambda z: rot * z, 1e-3, 50)
    assert abs(float(est) - beta) < 1e-12
    assert not est.low_confidence
    one = rotation_number_estimate(lambda z: rot * z, 1e-3, 1)
    assert one.low_confidence and len(one.increments) == 1


@pytest.fixture(scope="module")
def silver():
    return FatouFrame(maps.quadratic(SQRT2M1))


def test_renormalized_map_rotation(silver):
    res = renormalize(silver)
    assert res.child_alpha_expected == pytest.approx(SQRT2M1)
    est = rotation_number_estimate(res, 1e-3, 100)
    assert abs(est.value - SQRT2M1) < 1e-3
    assert res.rotation_estimate == est.value
    assert all(t >= 2 for t in res.return_times)


def test_renormalized_map_is_small_near_zero(silver):
    z = renormalize_eval(silver, 1e-4 + 0j)
    assert 0.5e-4 < abs(z) < 2e-4


def test_disk_too_large(silver):
    res = renormalize(silver)
    with pytest.raises(DiskTooLarge):
        res(10 * res.validated_disk)
    assert res.as_map().kind == maps.RENORM


@pytest.mark.parametrize("alpha", [0.208, 0.24])
def test_rotation_report_negative_and_positive_signs(alpha):
    rep = rotation_report(FatouFrame(maps.cubic(alpha)), steps=100)
    assert rep.passed, rep.to_dict()
    assert rep.fitted["child_alpha_expected"] == pytest.approx(abs(reduced_inverse(alpha)))


def test_sector_count_equality_example():
    rep = sector_count_check([5, 12, 89], k_n=5, k=2, a_next=7, level=1)
    assert rep.passed
    assert rep.residuals == {"lhs": "113", "rhs": "113"}


def test_sector_count_degenerate_offset():
    lhs, rhs = sector_count_sides(5, 12, 100, k_n=3, k=2, a_next=7)
    assert rhs == 100 and lhs == 89


def test_sector_count_pell_level():
    q = approximants(expand_cf(lambda b: gmpy2.sqrt(mpfr(2, b)) - 1, 6))
    rep = sector_count_check(q, 3, 1, 2, level=1)
    assert rep.passed and rep.residuals == {"lhs": "7", "rhs": "7"}


def test_sector_count_strict_inequality():
    rep = sector_count_check([1, 2, 9], 3, 1, 2, 1)
    assert rep.passed and int(rep.residuals["lhs"]) < int(rep.residuals["rhs"])


def test_tower_ledger_counts():
    cf = expand_cf(lambda b: gmpy2.sqrt(mpfr(2, b)) - 1, 22)
    led = tower_ledger(cf, levels=20)
    assert len(led.levels) == 20
    for L in led.levels:
        assert L.sector_count <= L.omega_bound
    assert all(t["closest_return"] for t in led.transfer_log)
    assert led.to_dict()["levels"][2]["q_n"] == "5"


def test_gate_bound_first_factor_and_monotone():
    cf = expand_cf(lambda b: gmpy2.const_pi(b) - 3, 25)
    assert gate_diameter_bound(cf, 1, 2.0) == pytest.approx(2 * float(cf.alpha_seq[1]))
    vals = [gate_diameter_bound(cf, m, 1.0) for m in range(1, 20)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_gate_constant_closure():
    cf = ModifiedCF.from_quotients([0, 3, 3, 3, 3, 3, 3, 3, 3])
    s = gate_exponent_sum(cf)
    assert 1 < s < 1 / (1 - 0.5)
    assert gate_constant(2.0, cf) == pytest.approx(2.0 ** s)
    assert gate_constant(2.0, cf) <= 4.0


def test_gate_bound_plateaus_for_constant_type():
    cf = expand_cf(lambda b: gmpy2.sqrt(mpfr(2, b)) - 1, 40)
    tail = [gate_diameter_bound(cf, m, 1.0) for m in (10, 20, 30)]
    assert min(tail) > 0.22
    assert tail[0] - tail[2] < 1e-4


def test_bound_small_for_fast_growth():
    led = growth_ledger(8, rule=exp_linear_rule(1))
    assert float(led.product_seq[5]) < 1e-3


def test_gate_budget_zero_is_cv():
    best, arg = critical_min_distance(0.3, 0)
    assert arg == 0 and best == pytest.approx(0.25)


def test_gate_minima_decrease_for_caption_parameters():
    recs = []
    for q in ([3], [3, 50], [3, 50, 10**5]):
        recs += critical_gate_experiment(q, [len(q)], 10**6)
    mins = [r.min_abs for r in recs]
    assert mins[0] > mins[1] >= mins[2]
    assert recs[1].argmin_iter > 0
