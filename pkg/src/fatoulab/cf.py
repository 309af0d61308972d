"""Nearest-integer continued fractions, Brjuno sums and the product sequence.

Everything here runs on MPFR numbers through gmpy2.  The expansion of an
irrational alpha is

    alpha = a_0 + eps_0 * alpha_0,   1/alpha_{n-1} = a_n + eps_n * alpha_n,

with alpha_n in (0, 1/2) the distance of 1/alpha_{n-1} to the nearest integer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import DepthExceeded, PrecisionExhausted

DEFAULT_BITS = 256
MAX_BITS = 1 << 15
# alpha_n below this is read as the end of a rational expansion
RATIONAL_FLOOR_LOG2 = -40
# relative error (log2) above which a level is no longer trusted
TRUST_LOG2 = -24

AlphaLike = Union[float, int, str, Fraction, "mpfr", Callable[[int], "mpfr"]]


def context(bits: int) -> gmpy2.context:
    """MPFR context with ``bits`` of mantissa and the widest exponent range."""
    return gmpy2.context(precision=bits, emax=gmpy2.get_emax_max(),
                         emin=gmpy2.get_emin_min())


def to_mpfr(x: AlphaLike, bits: int) -> mpfr:
    """Round ``x`` to ``bits`` bits.  Callables are asked for that many bits."""
    with context(bits):
        if callable(x):
            return mpfr(x(bits))
        if isinstance(x, Fraction):
            return mpfr(mpq(x.numerator, x.denominator))
        return mpfr(x)


def decimal(x: mpfr, digits: int = 40) -> str:
    """Deterministic scientific-notation string of an mpfr."""
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1}"


def _log2add(x: float, y: float) -> float:
    hi, lo = max(x, y), min(x, y)
    if lo == -math.inf:
        return hi
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


@dataclass(frozen=True)
class ModifiedCF:
    a: tuple[int, ...]
    eps: tuple[int, ...]
    alpha_seq: tuple[mpfr, ...]
    depth: int
    terminated: bool
    precision_bits: int = DEFAULT_BITS

    @classmethod
    def from_quotients(cls, a: Sequence[int], eps: Sequence[int] | None = None,
                       bits: int = DEFAULT_BITS) -> "ModifiedCF":
        """Build a CF from its quotients, reading the list as a finite expansion.

        The alpha_n are evaluated backward with exact rationals, so the last
        level has alpha = 0.
        """
        a = tuple(int(v) for v in a)
        if not a:
            raise ValueError("need at least a_0")
        eps = tuple(int(e) for e in eps) if eps is not None else (1,) * len(a)
        if len(eps) != len(a) or any(e not in (1, -1) for e in eps):
            raise ValueError("eps must be a list of +-1 with the same length as a")
        if any(v < 1 for v in a[1:]):
            raise ValueError("a_n must be >= 1 for n >= 1")
        alphas = [Fraction(0)]
        for n in range(len(a) - 1, 0, -1):
            alphas.append(1 / (a[n] + eps[n] * alphas[-1]))
        alphas.reverse()
        seq = tuple(to_mpfr(x, bits) for x in alphas)
        return cls(a, eps, seq, len(a) - 1, False, bits)


def _expand_once(alpha: AlphaLike, depth: int, bits: int) -> ModifiedCF:
    with context(bits):
        x = to_mpfr(alpha, bits)
        if not gmpy2.is_finite(x):
            raise ValueError("alpha must be finite")
        a0 = gmpy2.rint(x)  # ties go to the even integer
        d = x - a0
        a = [int(a0)]
        eps = [1 if d >= 0 else -1]
        al = abs(d)
        alphas = [al]
        # log2 of an absolute error bound on the current alpha_n
        lerr = -bits + max(0.0, math.log2(abs(float(x)) + 1.0))
        terminated = False
        level = 0
        while level < depth:
            if al == 0 or gmpy2.get_exp(al) - 1 < RATIONAL_FLOOR_LOG2:
                terminated = True
                alphas[-1] = mpfr(0)
                break
            if lerr - math.log2(float(al)) > TRUST_LOG2:
                raise PrecisionExhausted(level, bits)
            y = 1 / al
            an = gmpy2.rint(y)
            d = y - an
            la = math.log2(float(al))
            lerr = _log2add(lerr - 2.0 * la, -bits + math.log2(float(y))) + 2.0 ** (1 - bits)
            level += 1
            a.append(int(an))
            eps.append(1 if d >= 0 else -1)
            al = abs(d)
            alphas.append(al)
        if not terminated and level == depth and al == 0:
            terminated = True
    return ModifiedCF(tuple(a), tuple(eps), tuple(alphas), len(a) - 1, terminated, bits)


def expand_cf(alpha: AlphaLike, depth: int, bits: int = DEFAULT_BITS,
              auto_precision: bool = True, max_bits: int = MAX_BITS) -> ModifiedCF:
    """Nearest-integer expansion of ``alpha`` to ``depth`` levels.

    On PrecisionExhausted the precision is doubled and the expansion redone,
    up to ``max_bits``.  Pass a callable ``bits -> mpfr`` (or a string or a
    Fraction) so that the higher-precision rerun sees more digits of alpha.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    while True:
        try:
            return _expand_once(alpha, depth, bits)
        except PrecisionExhausted:
            if not auto_precision or bits * 2 > max_bits:
                raise
            bits *= 2


def reconstruct(cf: ModifiedCF, n: int | None = None) -> Fraction:
    """Exact value of the expansion truncated at level ``n`` (alpha_n := 0)."""
    n = cf.depth if n is None else n
    if n > cf.depth:
        raise DepthExceeded(f"level {n} > depth {cf.depth}")
    if n == 0:
        return Fraction(cf.a[0])
    x = Fraction(cf.a[n])
    for i in range(n - 1, 0, -1):
        x = cf.a[i] + cf.eps[i] / x
    return cf.a[0] + cf.eps[0] / x


@dataclass(frozen=True)
class Approximants:
    q: tuple[int, ...]
    p: tuple[int, ...]
    convention: str = "plain"


def approximants(cf: ModifiedCF, signed: bool = False) -> Approximants:
    """Convergent numerators and denominators, q_0 = 1, q_1 = a_1.

    The plain recurrence is q_{n+1} = a_{n+1} q_n + q_{n-1}; with ``signed``
    the last term carries eps_n, which makes p_n/q_n the true convergent of a
    nearest-integer expansion.
    """
    q_prev, q = 0, 1
    p_prev, p = 1, cf.a[0]
    qs, ps = [q], [p]
    for n in range(1, cf.depth + 1):
        c = cf.eps[n - 1] if signed else 1
        q_prev, q = q, cf.a[n] * q + c * q_prev
        p_prev, p = p, cf.a[n] * p + c * p_prev
        qs.append(q)
        ps.append(p)
    return Approximants(tuple(qs), tuple(ps), "signed" if signed else "plain")


def compare_conventions(cf: ModifiedCF) -> dict:
    """Where the plain and signed denominators part ways, and by how much."""
    plain = approximants(cf).q
    signed = approximants(cf, signed=True).q
    first = next((i for i, (u, v) in enumerate(zip(plain, signed)) if u != v), None)
    worst = max((abs(math.log(u) - math.log(v)) for u, v in zip(plain, signed) if v > 0),
                default=0.0)
    return {"first_divergence": first, "max_abs_log_ratio": worst}


def brjuno_partial(cf: ModifiedCF, n: int) -> mpfr:
    """Sum over j = 0..n of log(q_{j+1}) / q_j."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n + 1 > cf.depth:
        raise DepthExceeded(f"need q_{n + 1}, depth is {cf.depth}")
    q = approximants(cf).q
    with context(cf.precision_bits):
        s = mpfr(0)
        for j in range(n + 1):
            s += gmpy2.log(mpfr(q[j + 1])) / q[j]
    return s


def log_product_sequence(cf: ModifiedCF, k: int) -> mpfr:
    """log of alpha_1 * alpha_2^alpha_1 * ... * alpha_k^(alpha_1...alpha_{k-1})."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > cf.depth:
        raise DepthExceeded(f"need alpha_{k}, depth is {cf.depth}")
    with context(cf.precision_bits):
        s = mpfr(0)
        w = mpfr(0)
        for i in range(1, k + 1):
            if cf.alpha_seq[i] == 0:
                return mpfr("-inf")
            la = gmpy2.log(cf.alpha_seq[i])
            s += gmpy2.exp(w) * la
            w += la
    return s


def product_sequence(cf: ModifiedCF, k: int) -> mpfr:
    with context(cf.precision_bits):
        return gmpy2.exp(log_product_sequence(cf, k))


def is_irr_N(cf: ModifiedCF, N: int) -> bool:
    return all(v >= N for v in cf.a[1:])


@dataclass(frozen=True)
class BrjunoLedger:
    """Brjuno bookkeeping up to some depth.

    ``beta[j]`` is alpha_0...alpha_j (beta_{-1} = 1 is implicit),
    ``alt_sums[m]`` is the sum over j <= m of beta_{j-1} log(1/alpha_j),
    ``product_seq[k-1]`` is the product sequence at k.
    """
    partial_sums: tuple[mpfr, ...]
    beta: tuple[mpfr, ...]
    alt_sums: tuple[mpfr, ...]
    product_seq: tuple[mpfr, ...]
    log_product_seq: tuple[mpfr, ...] = field(default=())


def brjuno_ledger(cf: ModifiedCF) -> BrjunoLedger:
    """Ledger over every level the expansion supports."""
    n_alpha = cf.depth + 1
    if cf.terminated:
        n_alpha = cf.depth  # the last alpha is 0
    with context(cf.precision_bits):
        partial = []
        q = approximants(cf).q
        s = mpfr(0)
        for j in range(cf.depth):
            s += gmpy2.log(mpfr(q[j + 1])) / q[j]
            partial.append(s)
        beta, alt = [], []
        b_prev, t = mpfr(1), mpfr(0)
        for j in range(n_alpha):
            t += b_prev * -gmpy2.log(cf.alpha_seq[j])
            alt.append(t)
            b_prev = b_prev * cf.alpha_seq[j]
            beta.append(b_prev)
        logs = [log_product_sequence(cf, k) for k in range(1, n_alpha)]
        prods = [gmpy2.exp(v) for v in logs]
    return BrjunoLedger(tuple(partial), tuple(beta), tuple(alt), tuple(prods), tuple(logs))


def cf_to_dict(cf: ModifiedCF, ledger: BrjunoLedger | None = None, digits: int = 40) -> dict:
    """JSON-ready dict with a fixed key order."""
    out = {
        "a": list(cf.a),
        "eps": list(cf.eps),
        "alpha": [decimal(x, digits) for x in cf.alpha_seq],
        "q": [str(v) for v in approximants(cf).q],
        "terminated": cf.terminated,
        "precision_bits": cf.precision_bits,
    }
    if ledger is not None:
        out["brjuno_partials"] = [decimal(x, 20) for x in ledger.partial_sums]
        out["product_seq"] = [decimal(x, 20) for x in ledger.product_seq]
    return out


def cf_to_json(cf: ModifiedCF, ledger: BrjunoLedger | None = None) -> str:
    return json.dumps(cf_to_dict(cf, ledger), indent=2)


def regular_cf_alpha(quotients: Sequence[int], bits: int = DEFAULT_BITS,
                     tail: str = "golden") -> mpfr:
    """Value of the regular continued fraction [0; a_1, ..., a_m, tail].

    ``tail='golden'`` appends 1, 1, 1, ... (whose value is the golden ratio);
    ``tail='none'`` stops at a_m.
    """
    with context(bits + 32):
        x = (1 + gmpy2.sqrt(mpfr(5))) / 2 if tail == "golden" else None
        for v in reversed(quotients):
            x = mpfr(v) if x is None else v + 1 / x
        val = 1 / x
    with context(bits):
        return +val


def regular_quotients(alpha: AlphaLike, n: int, bits: int = DEFAULT_BITS) -> list[int]:
    """First ``n`` quotients a_1..a_n of the regular (floor) expansion of frac(alpha)."""
    out = []
    with context(bits):
        x = to_mpfr(alpha, bits)
        x = x - gmpy2.floor(x)
        for _ in range(n):
            if x == 0:
                break
            y = 1 / x
            a = gmpy2.floor(y)
            out.append(int(a))
            x = y - a
    return out


# ---------------------------------------------------------------------------
# Log-space ledger for quotients too large to write down.

@dataclass(frozen=True)
class GrowthRule:
    """Quotients a_{j+1} = ceil(exp(f(q_j))).

    ``exponent`` evaluates f at an (integer-valued) mpfr q; ``ratio_at_log``
    returns f(q)/q as a function of L = log q and must accept L = +inf, where
    it gives the limit.
    """
    name: str
    exponent: Callable[[mpfr], mpfr]
    ratio_at_log: Callable[[mpfr], mpfr]


def exp_linear_rule(c: float = 1.0) -> GrowthRule:
    cc = Fraction(c)
    return GrowthRule(f"ceil(exp({c}*q))",
                      lambda q: mpfr(mpq(cc.numerator, cc.denominator)) * q,
                      lambda L: mpfr(mpq(cc.numerator, cc.denominator)))


def exp_power_rule(p: float) -> GrowthRule:
    pp = Fraction(p)
    pm = mpq(pp.numerator, pp.denominator)
    return GrowthRule(f"ceil(exp(q^{p}))",
                      lambda q: q ** mpfr(pm),
                      lambda L: gmpy2.exp((mpfr(pm) - 1) * L))


# exact integers are kept while they have at most this many bits
_EXACT_BITS = 1 << 16


@dataclass(frozen=True)
class LogLevels:
    """Per-level data: log a_{j+1}, log a_{j+1}/q_j, log q_j, and exact values when known."""
    log_a: tuple[mpfr, ...]
    ratio: tuple[mpfr, ...]
    log_q: tuple[mpfr, ...]
    a: tuple[int | None, ...]
    q: tuple[int | None, ...]


def growth_levels(levels: int, rule: GrowthRule | None = None,
                  head: Sequence[int] = (), bits: int = DEFAULT_BITS) -> LogLevels:
    """Quotients a_1, a_2, ... from ``head`` and then from ``rule``."""
    log_a, ratio, log_q, a_ex, q_ex = [], [], [], [], []
    with context(bits):
        q_prev, q = 0, 1
        L_prev, L = mpfr("-inf"), mpfr(0)
        for j in range(levels):
            log_q.append(L)
            q_ex.append(q)
            a = None
            if j < len(head):
                a = int(head[j])
                la = gmpy2.log(mpfr(a))
                r = la / q if q is not None else mpfr(0)
            elif rule is None:
                raise DepthExceeded(f"no quotient for level {j + 1}")
            elif q is not None:
                f = rule.exponent(mpfr(q))
                if f < _EXACT_BITS // 2:
                    with context(int(f * 1.45) + bits):
                        a = int(gmpy2.ceil(gmpy2.exp(rule.exponent(mpfr(q)))))
                    la = gmpy2.log(mpfr(a))
                else:
                    la = f
                r = la / q
            else:
                r = rule.ratio_at_log(L)
                la = r * gmpy2.exp(L) if gmpy2.is_finite(L) else mpfr("inf")
            log_a.append(la)
            ratio.append(r)
            a_ex.append(a)
            if q is not None and a is not None and a.bit_length() + q.bit_length() < _EXACT_BITS:
                q_prev, q = q, a * q + q_prev
                L_prev, L = L, gmpy2.log(mpfr(q))
            else:
                # log q_{j+1} = log a + log q_j + log1p(q_{j-1} / (a q_j))
                if gmpy2.is_finite(la):
                    L_next = la + L + gmpy2.log1p(gmpy2.exp(L_prev - L - la))
                else:
                    L_next = mpfr("inf")
                q_prev, q = q, None
                L_prev, L = L, L_next
    return LogLevels(tuple(log_a), tuple(ratio), tuple(log_q), tuple(a_ex), tuple(q_ex))


def _guard_levels(lv: LogLevels, upto: int, bits: int) -> int:
    # how many levels past ``upto`` are needed before the unknown tail is below
    # 2^-bits in alpha_upto; each level contracts errors by about a^-2
    acc = 0.0
    for j in range(upto, len(lv.log_a)):
        acc += 2.0 * float(min(lv.log_a[j], mpfr(1e6))) / math.log(2)
        if acc > bits + 16:
            return j + 1
    return len(lv.log_a)


def growth_ledger(depth: int, rule: GrowthRule | None = None,
                  head: Sequence[int] = (), bits: int = DEFAULT_BITS,
                  max_levels: int = 4096) -> BrjunoLedger:
    """Brjuno ledger in log space for alpha = [0; a_1, a_2, ...] with all eps = +1.

    Needs every a_j >= 2.  Works for quotients far beyond any representable
    integer: once log q_j itself overflows, terms are read from the rule's
    limiting ratio.
    """
    total = depth + 2
    lv = growth_levels(total, rule, head, bits)
    if rule is not None:
        stop = _guard_levels(lv, depth + 1, bits)
        while stop >= len(lv.log_a) and len(lv.log_a) < max_levels:
            lv = growth_levels(min(2 * len(lv.log_a), max_levels), rule, head, bits)
            stop = _guard_levels(lv, depth + 1, bits)
        n = len(lv.log_a)
    else:
        n = len(lv.log_a)
    for v in lv.a:
        if v is not None and v < 2:
            raise ValueError("growth_ledger needs a_j >= 2")
    with context(bits):
        # alpha_j = 1/(a_{j+1} + alpha_{j+1}), backward from a zero tail
        log_alpha = [mpfr(0)] * n
        al_next = mpfr(0)
        for j in range(n - 1, -1, -1):
            a, la = lv.a[j], lv.log_a[j]
            if a is not None:
                al = 1 / (a + al_next)
                log_alpha[j] = gmpy2.log(al)
            elif gmpy2.is_finite(la):
                log_alpha[j] = -la - gmpy2.log1p(al_next * gmpy2.exp(-la))
                al = gmpy2.exp(log_alpha[j])
            else:
                log_alpha[j] = mpfr("-inf")
                al = mpfr(0)
            al_next = al

        partial, s = [], mpfr(0)
        for j in range(depth + 1):
            L, L1 = lv.log_q[j], lv.log_q[j + 1]
            if lv.q[j] is not None and lv.q[j + 1] is not None:
                term = gmpy2.log(mpfr(lv.q[j + 1])) / lv.q[j]
            elif gmpy2.is_finite(L) and gmpy2.is_finite(L1):
                term = L1 * gmpy2.exp(-L)
            else:
                term = lv.ratio[j]
            s += term
            partial.append(s)

        # beta_{j-1} log(1/alpha_j) = q_j beta_{j-1} * log(1/alpha_j) / q_j, and
        # q_j beta_{j-1} = 1/(1 + x_j) with x_j = alpha_j q_{j-1}/q_j
        def weighted(j: int) -> mpfr:
            L = lv.log_q[j]
            L_prev = lv.log_q[j - 1] if j > 0 else mpfr("-inf")
            if gmpy2.is_finite(L) and gmpy2.is_finite(log_alpha[j]):
                xj = gmpy2.exp(log_alpha[j] + L_prev - L) if gmpy2.is_finite(L_prev) else mpfr(0)
                return gmpy2.exp(gmpy2.log(-log_alpha[j]) - L) / (1 + xj)
            return lv.ratio[j]

        alt, t = [], mpfr(0)
        beta, lb = [], mpfr(0)
        for j in range(depth + 1):
            t += weighted(j)
            alt.append(t)
            lb += log_alpha[j]
            beta.append(gmpy2.exp(lb))

        alpha0 = gmpy2.exp(log_alpha[0])
        logs, u = [], mpfr(0)
        for k in range(1, depth + 1):
            u -= weighted(k) / alpha0
            logs.append(u)
        prods = [gmpy2.exp(v) for v in logs]
    return BrjunoLedger(tuple(partial), tuple(beta), tuple(alt), tuple(prods), tuple(logs))


def classify(ledger: BrjunoLedger, n: int = 25, k: int = 30,
             sum_threshold: float = 100.0, product_threshold: float = 1e-2) -> dict:
    """Verdicts of the two divergence classifiers."""
    if n >= len(ledger.partial_sums) or k > len(ledger.product_seq):
        raise DepthExceeded("ledger too shallow for the requested classifiers")
    by_sum = ledger.partial_sums[n] > sum_threshold
    by_product = ledger.product_seq[k - 1] < product_threshold
    return {
        "brjuno_partial": float(ledger.partial_sums[n]),
        "log_product": float(ledger.log_product_seq[k - 1]) if ledger.log_product_seq else None,
        "non_brjuno_by_sum": bool(by_sum),
        "non_brjuno_by_product": bool(by_product),
        "agree": bool(by_sum == by_product),
    }
