"""Near-parabolic renormalization, its rotation number, and tower bookkeeping."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import gmpy2
import numba

from . import maps
from .cf import (Approximants, ModifiedCF, approximants, context, expand_cf,
                 product_sequence, regular_cf_alpha, regular_quotients)
from .errors import DiskTooLarge, FatouLabError, NoReturn
from .fatou import FatouFrame
from .maps import MapSpec
from .report import VerifyReport


def reduced_inverse(alpha: float) -> float:
    """1/alpha minus its nearest integer, in [-1/2, 1/2]."""
    x = 1.0 / alpha
    return x - round(x)


@dataclass
class RenormResult:
    parent: FatouFrame
    child_alpha_expected: float
    k_h: int
    validated_disk: float
    rotation_estimate: float | None = None
    return_times: list = field(default_factory=list)

    @property
    def signed_child(self) -> float:
        return reduced_inverse(self.parent.alpha)

    @property
    def conjugate(self) -> bool:
        return _needs_conjugation(self.parent)

    def __call__(self, zeta):
        if abs(complex(zeta)) > self.validated_disk:
            raise DiskTooLarge(f"|zeta| = {abs(complex(zeta)):.3g} > {self.validated_disk:.3g}")
        value, steps = _renorm_step(self.parent, zeta, self.k_h)
        self.return_times.append(steps)
        return value

    def as_map(self) -> MapSpec:
        return MapSpec(maps.RENORM, self.child_alpha_expected, payload=self,
                       validated_radius=self.validated_disk)


def _needs_conjugation(frame: FatouFrame) -> bool:
    # The bare first-return map rotates by 1/alpha - round(1/alpha); conjugating
    # by z -> conj(z) turns a positive value into its negative, so it is applied
    # exactly when that makes the child rotation number positive.
    return reduced_inverse(frame.alpha) >= 0


def _window_lift(frame: FatouFrame, zeta, k: int):
    w = maps.exp_lift(zeta, 0, conjugate=_needs_conjugation(frame))
    left = frame.band_limit - k - 1
    shift = left - math.floor(float(w.real))
    return w + shift


def _renorm_step(frame: FatouFrame, zeta, k: int):
    if complex(zeta) == 0:
        return zeta, 0
    w0 = _window_lift(frame, zeta, k)
    try:
        w = frame.phi_inverse(w0)
        v, steps = frame.phi_with_steps(w - 1 / frame.alpha)
    except FatouLabError as exc:
        raise NoReturn(str(exc)) from exc
    if steps < 1:
        raise NoReturn(f"return time {steps} at zeta = {complex(zeta)}")
    return maps.exp_project(v, conjugate=_needs_conjugation(frame)), steps


def renormalize_eval(frame: FatouFrame, zeta, k: int = 1, return_steps: bool = False):
    """One evaluation of the renormalized map at ``zeta``.

    zeta is lifted by the conjugated exponential into the window
    floor(1/alpha) - k - 1 <= Re < floor(1/alpha) - k, sent back to the lifted
    plane by Phi^-1, moved by one deck period to the left and carried forward
    by F until it lands in the base strip; Phi of that point is projected.
    """
    value, steps = _renorm_step(frame, zeta, k)
    return (value, steps) if return_steps else value


def _probe_ok(frame: FatouFrame, k: int, radius: float, n: int = 8) -> bool:
    for j in range(n):
        zeta = radius * cmath.exp(2j * math.pi * (j + 0.5) / n)
        try:
            _renorm_step(frame, zeta, k)
        except FatouLabError:
            return False
    return True


def renormalize(frame: FatouFrame, k: int | None = None, probe_radius: float = 1e-3,
                max_radius: float = 0.5) -> RenormResult:
    """Set up the renormalized map with a measured window offset and validated disk."""
    if k is None:
        k = next((kk for kk in range(1, 6) if _probe_ok(frame, kk, probe_radius)), 1)
    radius = probe_radius
    while radius * 2 <= max_radius and _probe_ok(frame, k, radius * 2):
        radius *= 2
    return RenormResult(frame, abs(reduced_inverse(frame.alpha)), k, radius)


@dataclass(frozen=True)
class RotationEstimate:
    value: float
    steps: int
    increments: tuple
    low_confidence: bool

    def __float__(self) -> float:
        return self.value


def rotation_number_estimate(target: Callable | RenormResult, radius: float,
                             steps: int) -> RotationEstimate:
    """Mean of arg(R(zeta)/zeta)/(2 pi) along an orbit started at ``radius``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    zeta = complex(radius)
    incs = []
    for _ in range(steps):
        nxt = complex(target(zeta))
        incs.append(cmath.phase(nxt / zeta) / (2 * math.pi))
        zeta = nxt
    value = math.fsum(incs) / steps
    if isinstance(target, RenormResult):
        target.rotation_estimate = value
    return RotationEstimate(value, steps, tuple(incs), steps < 2)


def multiplier_secant(result: RenormResult, radii: Sequence[float] = (1e-3, 1e-4),
                      points: int = 16) -> list[float]:
    """Circle mean of arg(R(zeta)/zeta)/(2 pi) for each radius.

    For a holomorphic map the mean over |zeta| = r is the multiplier's
    argument exactly, so the first-order angular terms cancel; a single
    point per radius converges only like sqrt(r) here.
    """
    out = []
    for r in radii:
        vals = []
        for j in range(points):
            z = r * cmath.exp(2j * math.pi * (j + 0.5) / points)
            vals.append(cmath.phase(complex(result(z)) / z) / (2 * math.pi))
        out.append(math.fsum(vals) / points)
    return out


def rotation_report(frame: FatouFrame, radius: float = 1e-3, steps: int = 200,
                    tol: float = 1e-3, secant_tol: float = 1e-2) -> VerifyReport:
    res = renormalize(frame)
    est = rotation_number_estimate(res, radius, steps)
    expected = res.child_alpha_expected
    sec = multiplier_secant(res)
    rep = VerifyReport("rotation-number", precision_bits=53, samples=steps)
    rep.region = {"map": frame.map.kind, "alpha": frame.alpha, "radius": radius,
                  "window_offset_k": res.k_h}
    rep.region["conjugated"] = res.conjugate
    rep.fitted = {"rotation_estimate": est.value, "child_alpha_expected": expected,
                  **{f"secant_r{r:g}": v for r, v in zip((1e-3, 1e-4), sec)},
                  "validated_disk": res.validated_disk,
                  "return_time_min": min(res.return_times), "return_time_max": max(res.return_times)}
    rep.residuals = {"rotation_error": abs(est.value - expected),
                     "secant_error": max(abs(s - expected) for s in sec)}
    rep.check("rotation_within_tol", abs(est.value - expected) < tol)
    rep.check("secant_within_tol", rep.residuals["secant_error"] < secant_tol)
    hi = frame.band_limit + 1
    rep.check("return_time_window", 2 <= min(res.return_times) and max(res.return_times) <= hi)
    if est.low_confidence:
        rep.notes.append("LOW_CONFIDENCE")
    return rep


# ---------------------------------------------------------------------------
# Sector counts and the tower ledger.

def sector_count_sides(q_prev: int, q_n: int, q_next: int, k_n: int, k: int,
                       a_next: int) -> tuple[int, int]:
    lhs = (k_n * q_n + q_prev) + q_n * (a_next - k - 1)
    rhs = q_next + q_n * (k_n - k - 1)
    return lhs, rhs


def sector_count_check(q: Approximants | Sequence[int], k_n: int, k: int, a_next: int,
                       level: int) -> VerifyReport:
    """LHS <= RHS, with equality exactly when q_{n+1} = a_next q_n + q_{n-1}.

    ``level`` is n, so q_n = q[n]; q_{-1} is taken as 0.
    """
    qs = q.q if isinstance(q, Approximants) else tuple(q)
    if not 0 <= level < len(qs) - 1:
        raise ValueError("level must leave room for q_{n+1}")
    q_prev = qs[level - 1] if level >= 1 else 0
    q_n, q_next = qs[level], qs[level + 1]
    lhs, rhs = sector_count_sides(q_prev, q_n, q_next, k_n, k, a_next)
    recurrence = q_next == a_next * q_n + q_prev
    rep = VerifyReport("sector-count", precision_bits=0, samples=1)
    rep.region = {"level": level, "k_n": k_n, "k": k, "a_next": a_next,
                  "q_prev": str(q_prev), "q_n": str(q_n), "q_next": str(q_next)}
    rep.residuals = {"lhs": str(lhs), "rhs": str(rhs)}
    rep.check("bound_matches_recurrence", (lhs <= rhs) == (q_next >= a_next * q_n + q_prev))
    rep.check("equality_iff_recurrence", (lhs == rhs) == recurrence)
    return rep


@dataclass(frozen=True)
class TowerLevel:
    n: int
    alpha_n: float
    a_next: int
    q_n: int
    k_n: int
    sector_count: int
    omega_bound: int


@dataclass
class TowerLedger:
    levels: list = field(default_factory=list)
    transfer_log: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "levels": [{"n": L.n, "alpha_n": L.alpha_n, "a_next": L.a_next, "q_n": str(L.q_n),
                        "k_n": L.k_n, "sector_count": str(L.sector_count),
                        "omega_bound": str(L.omega_bound)} for L in self.levels],
            "transfer_log": self.transfer_log,
        }


def _circle_distance(x) -> float:
    return float(abs(x - gmpy2.rint(x)))


def tower_ledger(cf: ModifiedCF, k: int = 1, k_n: int | None = None,
                 levels: int | None = None) -> TowerLedger:
    """Sector counts and iterate-count correspondences along the expansion.

    ``k_n`` defaults to k + 1 (the smallest offset the counts allow).  The
    transfer log records that one level-n step stands for q_n level-0
    iterates and that q_n is a closest return of the rotation by alpha.
    """
    k_n = k + 1 if k_n is None else k_n
    q = approximants(cf).q
    qs = approximants(cf, signed=True).q
    levels = min(levels or cf.depth - 1, cf.depth - 1)
    led = TowerLedger()
    with context(cf.precision_bits):
        alpha = cf.a[0] + cf.eps[0] * cf.alpha_seq[0]
    for n in range(0, levels):
        q_prev = q[n - 1] if n >= 1 else 0
        a_next = cf.a[n + 1]
        lhs, rhs = sector_count_sides(q_prev, q[n], q[n + 1], k_n, k, a_next)
        led.levels.append(TowerLevel(n, float(cf.alpha_seq[n]), a_next, q[n], k_n, lhs, rhs))
        with context(cf.precision_bits):
            dist = _circle_distance(qs[n] * alpha)
            better = all(_circle_distance(j * alpha) >= dist * (1 - 1e-12)
                         for j in range(1, min(qs[n], 20000)))
        led.transfer_log.append({"level": n, "level0_iterates": str(q[n]),
                                 "sector_step_iterates": str(k_n * q[n] + q_prev),
                                 "closest_return_q": str(qs[n]), "closest_return": better})
    return led


# ---------------------------------------------------------------------------
# Gates.

def gate_exponent_sum(cf: ModifiedCF) -> float:
    """1 + alpha_1 + alpha_1 alpha_2 + ... over the computed depth."""
    s, w = 1.0, 1.0
    for x in cf.alpha_seq[1:]:
        w *= float(x)
        s += w
    return s


def gate_constant(M: float, cf: ModifiedCF) -> float:
    """C = M * M^alpha_1 * M^(alpha_1 alpha_2) * ..."""
    return M ** gate_exponent_sum(cf)


def gate_diameter_bound(cf: ModifiedCF, m: int, C: float) -> float:
    return float(C * product_sequence(cf, m))


@numba.njit(cache=True)
def _min_orbit(lam: complex, budget: int):
    z = -lam * lam / 4.0  # the critical value P(-lam/2)
    best = abs(z)
    arg = 0
    for k in range(1, budget + 1):
        z = lam * z + z * z
        r = abs(z)
        if r < best:
            best = r
            arg = k
        if r > 1e6:
            break
    return best, arg


def critical_min_distance(alpha: float, budget: int) -> tuple[float, int]:
    """min over k <= budget of |P^k(cv)| and its argmin (double precision)."""
    lam = cmath.exp(2j * math.pi * alpha)
    best, arg = _min_orbit(lam, int(budget))
    return float(best), int(arg)


@dataclass
class GateRecord:
    depth: int
    budget: int
    min_abs: float
    argmin_iter: int
    gate_bound: float
    alpha: float
    quotients: list

    def to_dict(self) -> dict:
        return {"depth": self.depth, "budget": self.budget, "min_abs": self.min_abs,
                "argmin_iter": self.argmin_iter, "gate_bound": self.gate_bound,
                "alpha": self.alpha, "quotients": list(self.quotients)}


def critical_gate_experiment(quotients, depth_list: Sequence[int],
                             iter_budget: int, M: float = 1.0, tail: str = "golden",
                             cf_depth: int = 40) -> list[GateRecord]:
    """Critical-orbit minima for truncations of a regular continued fraction.

    ``quotients`` is either the list a_1, a_2, ... or a real alpha whose
    regular quotients are taken.  For each d the parameter is
    [0; a_1, ..., a_d, 1, 1, 1, ...]; its minimum distance to 0 over the
    budget is paired with the gate bound at depth d.
    """
    if not isinstance(quotients, (list, tuple)):
        quotients = regular_quotients(quotients, max(depth_list))
    out = []
    for d in depth_list:
        head = list(quotients[:d])
        alpha = regular_cf_alpha(head, tail=tail)
        cf = expand_cf(lambda b, h=head: regular_cf_alpha(h, b, tail=tail), cf_depth)
        best, arg = critical_min_distance(float(alpha), iter_budget)
        C = gate_constant(M, cf)
        bound = gate_diameter_bound(cf, d, C)
        out.append(GateRecord(d, int(iter_budget), best, arg, bound, float(alpha), head))
    return out


def gate_report(records: Sequence[GateRecord], factor: float = 10.0) -> VerifyReport:
    rep = VerifyReport("gate-experiment", precision_bits=53, samples=len(records))
    mins = [r.min_abs for r in records]
    rep.region = {"records": [r.to_dict() for r in records]}
    rep.residuals = {"max_ratio_to_bound": max(r.min_abs / r.gate_bound for r in records)}
    rep.check("strictly_decreasing", all(x > y for x, y in zip(mins, mins[1:])))
    rep.check("within_factor_of_bound", all(r.min_abs <= factor * r.gate_bound for r in records))
    rep.notes.append("orbits iterated in hardware doubles")
    return rep
