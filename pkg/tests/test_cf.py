import json
import math
import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from fatoulab.cf import (ModifiedCF, approximants, brjuno_ledger, brjuno_partial, cf_to_dict,
                         classify, compare_conventions, context, decimal, expand_cf,
                         exp_linear_rule, growth_ledger, is_irr_N, log_product_sequence,
                         product_sequence, reconstruct, regular_cf_alpha, regular_quotients)
from fatoulab.errors import DepthExceeded, PrecisionExhausted
from fatoulab.report import load_schema

SQRT2M1 = lambda b: gmpy2.sqrt(mpfr(2, b)) - 1  # noqa: E731


def test_silver_ratio_expansion():
    cf = expand_cf(SQRT2M1, 4)
    assert cf.a == (0, 2, 2, 2, 2)
    assert cf.eps == (1, 1, 1, 1, 1)
    assert abs(float(cf.alpha_seq[3]) - (math.sqrt(2) - 1)) < 1e-15


def test_rational_terminates():
    cf = expand_cf(Fraction(1, 3), 10)
    assert cf.a == (0, 3)
    assert cf.terminated
    assert reconstruct(cf) == Fraction(1, 3)


def test_negative_sign_at_level_zero():
    cf = expand_cf("0.7", 3)
    assert cf.a[0] == 1 and cf.eps[0] == -1
    assert abs(float(cf.alpha_seq[0]) - 0.3) < 1e-30


def test_alphas_below_half():
    with context(256):
        cf = expand_cf(gmpy2.const_pi() - 3, 25)
    assert all(0 <= x <= 0.5 for x in cf.alpha_seq)


def test_roundtrip_random_inputs():
    rnd = random.Random(7)
    with context(256):
        for _ in range(25):
            alpha = mpfr(rnd.getrandbits(256)) / mpfr(2) ** 256
            cf = expand_cf(alpha, 30)
            err = abs(mpfr(reconstruct(cf)) - alpha)
            assert err <= 2.0 ** -29


def test_reconstruct_prefix_is_signed_convergent():
    cf = expand_cf("0.7", 3)
    assert reconstruct(cf, 0) == 1
    assert reconstruct(cf) == Fraction(7, 10)


def test_from_quotients_inverts_expand():
    cf = ModifiedCF.from_quotients([0, 3, 50, 7])
    value = reconstruct(cf)
    assert value == 1 / (3 + 1 / (50 + Fraction(1, 7)))
    again = expand_cf(value, 10)
    assert again.a == (0, 3, 50, 7)


def test_pell_denominators():
    q = approximants(expand_cf(SQRT2M1, 5)).q
    assert q[:5] == (1, 2, 5, 12, 29)
    assert approximants(ModifiedCF.from_quotients([0, 3, 50])).q == (1, 3, 151)


def test_signed_convention_differs_for_negative_signs():
    cf = expand_cf(Fraction(2, 7), 5)   # 7/2 = 4 - 1/2
    plain, signed = approximants(cf).q, approximants(cf, signed=True).q
    assert plain != signed
    cmp = compare_conventions(cf)
    assert cmp["first_divergence"] is not None


def test_precision_exhausted_then_auto_doubling():
    with pytest.raises(PrecisionExhausted):
        expand_cf(SQRT2M1, 200, bits=64, auto_precision=False)
    cf = expand_cf(SQRT2M1, 200, bits=64)
    assert cf.precision_bits > 64
    assert set(cf.a[1:]) == {2}


def test_brjuno_partial_closed_form():
    cf = expand_cf(SQRT2M1, 10)
    # log q_1 / q_0 + log q_2 / q_1 = log 2 + log 5 / 2
    assert abs(float(brjuno_partial(cf, 1)) - (math.log(2) + math.log(5) / 2)) < 1e-14
    with pytest.raises(DepthExceeded):
        brjuno_partial(cf, 10)


def test_product_sequence_constant_type_limit():
    cf = expand_cf(SQRT2M1, 40)
    a = math.sqrt(2) - 1
    assert float(product_sequence(cf, 1)) == pytest.approx(a, rel=1e-14)
    assert float(product_sequence(cf, 30)) == pytest.approx(a ** (1 / (1 - a)), rel=1e-10)


def test_product_sequence_nonincreasing():
    cf = expand_cf(lambda b: gmpy2.const_pi(b) - 3, 20)
    vals = [float(log_product_sequence(cf, k)) for k in range(1, 20)]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_is_irr_N():
    assert is_irr_N(ModifiedCF.from_quotients([0, 20, 30, 25]), 20)
    assert not is_irr_N(ModifiedCF.from_quotients([0, 20, 3]), 20)


def test_growth_ledger_matches_direct_expansion():
    head = [3, 7, 2, 9, 4, 11, 5, 2, 8, 6, 3, 10] * 3
    direct = brjuno_ledger(expand_cf(lambda b: regular_cf_alpha(head, b, tail="none"), 30,
                                     bits=512))
    logspace = growth_ledger(28, head=head, bits=256)
    for j in range(28):
        assert abs(direct.partial_sums[j] - logspace.partial_sums[j]) < 1e-60
    for k in range(1, 25):
        assert float(logspace.log_product_seq[k - 1]) == pytest.approx(
            float(direct.log_product_seq[k - 1]), rel=1e-12)


def test_growth_ledger_beyond_representable_integers():
    led = growth_ledger(31, rule=exp_linear_rule(5))
    assert math.isfinite(float(led.partial_sums[25]))
    verdict = classify(led)
    assert verdict["non_brjuno_by_sum"] and verdict["non_brjuno_by_product"]


def test_regular_quotients_and_golden_tail():
    x = regular_cf_alpha([3, 50])
    assert regular_quotients(x, 6) == [3, 50, 1, 1, 1, 1]


def test_json_follows_schema():
    jsonschema = pytest.importorskip("jsonschema")
    cf = expand_cf(SQRT2M1, 6)
    doc = json.loads(json.dumps(cf_to_dict(cf, brjuno_ledger(cf))))
    jsonschema.validate(doc, load_schema("cf.v1"))
    assert doc["q"][:3] == ["1", "2", "5"]


def test_decimal_is_deterministic():
    with context(128):
        assert decimal(mpfr(1) / 3, 5) == "3.3333e-1"
        assert decimal(mpfr("-inf")) == "-inf"
