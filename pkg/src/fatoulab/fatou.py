"""Lifted dynamics and an approximate perturbed Fatou coordinate.

The covering tau(w) = sigma / (1 - exp(-2 pi i alpha w)) sends the lifted plane
onto the dynamical plane with deck translation w -> w + 1/alpha.  The lift F of
h satisfies h(tau(w)) = tau(F(w)); away from the deck orbit of 0 it is close
to w -> w + 1.

Phi is built from the interpolation g(s + it) = (1 - s)(a + it) + s F(a + it)
between the vertical line Re w = a and its image.  A point is moved by F or
F^{-1} into the strip between the two curves, g is inverted there, and the
step count is added back, so Phi(F(w)) = Phi(w) + 1 holds by construction.

Every function accepts gmpy2 ``mpc`` (run at the frame precision), Python
complex, or numpy complex arrays (vectorised, double precision).
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from . import maps
from .cf import context
from .errors import (BranchCutHit, DomainExit, InversionFailed, OutsideImageBand,
                     PoleHit, PullbackBranchLost, Unreachable)
from .maps import MapSpec
from .report import VerifyReport

TRANSLATION = "translation"
PRINCIPAL = "principal"


class _Ops:
    def __init__(self, exp, log, phase):
        self.exp, self.log, self.phase = exp, log, phase


_MP = _Ops(gmpy2.exp, gmpy2.log, gmpy2.phase)
_NP = _Ops(np.exp, np.log, np.angle)
_CM = _Ops(cmath.exp, cmath.log, cmath.phase)


def _in_context(method):
    """Run ``method`` at the frame precision when its argument is an mpc."""
    @functools.wraps(method)
    def wrapper(self, w, *args, **kwargs):
        if isinstance(w, mpc):
            with context(self.bits):
                return method(self, w, *args, **kwargs)
        return method(self, w, *args, **kwargs)
    return wrapper


def _ops(w) -> _Ops:
    if isinstance(w, mpc):
        return _MP
    if isinstance(w, np.ndarray):
        return _NP
    return _CM


@dataclass(frozen=True)
class _Consts:
    alpha: object
    lam: object
    sigma: object
    c: object  # 2 pi i alpha


@dataclass(frozen=True)
class ThetaSpec:
    """Complement of the disks of radius R around the deck orbit of 0."""
    R: float
    alpha: float

    def deck_distance(self, w):
        return deck_distance(w, self.alpha)

    def contains(self, w) -> bool:
        return bool(np.all(deck_distance(w, self.alpha) >= self.R))


@dataclass(frozen=True)
class SigmaStrip:
    """The strip Q <= Re w <= 1/alpha - Q together with two wedges at its ends."""
    Q: float
    alpha: float

    def contains(self, w) -> bool:
        w = complex(w)
        x, y, Q, inv = w.real, abs(w.imag), self.Q, 1.0 / self.alpha
        return ((Q <= x <= inv - Q)
                or (x <= Q and y >= -x + 2 * Q)
                or (x >= inv - Q and y >= x - inv + 2 * Q))


def theta_contains(spec: ThetaSpec, w) -> bool:
    return spec.contains(w)


def sigma_contains(strip: SigmaStrip, w) -> bool:
    return strip.contains(w)


def deck_distance(w, alpha: float):
    """Distance from w to the nearest point of (1/alpha) Z."""
    w = np.asarray(w, dtype=np.complex128)
    x = w.real - np.round(w.real * alpha) / alpha
    d = np.hypot(x, w.imag)
    return d[()] if d.ndim == 0 else d


class FatouFrame:
    """tau, F, the base line and the normalised coordinate for one map.

    Instances are not modified after construction.
    """

    def __init__(self, m: MapSpec, bits: int = 128, base_a: float | None = None,
                 branch: str = TRANSLATION, c2: float | None = None,
                 calibration_grid: int = 64, max_steps: int | None = None):
        if branch not in (TRANSLATION, PRINCIPAL):
            raise ValueError(f"unknown branch {branch!r}")
        self.map = m
        self.bits = bits
        self.branch = branch
        alpha = m.alpha_float
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.alpha = alpha
        with context(bits):
            a_mp = m.alpha_mp(bits)
            self.sigma = maps.sigma_fixed_point(m, bits)
            self.u0 = maps.u_at_zero(m, bits)
            self._kmp = _Consts(a_mp, m.lam(bits), self.sigma,
                                mpc(0, 2 * gmpy2.const_pi() * a_mp))
        self._kc = _Consts(alpha, complex(m.lam(bits)), complex(self.sigma),
                           2j * math.pi * alpha)
        self.max_steps = max_steps or int(3 / alpha) + 64
        if c2 is None and base_a is None:
            c2 = fit_c2(self, calibration_grid)
        self.c2_fitted = c2
        if base_a is None:
            base_a = min(c2 + 1.0, 0.5 / alpha - 0.5)
        self.base_a = float(base_a)
        self.strip_K = {"base_a": self.base_a, "left": "Re w = a",
                        "right": "F(Re w = a)"}
        cp = maps.critical_points(m, bits)[0]
        with context(bits):
            self.cp = cp
            self.cp_lift = _MP.log(1 - self.sigma / cp) / (-self._kmp.c)
            self.normalization_shift = mpc(0)
            raw, self.cp_steps = self._phi_raw(self.cp_lift)
            self.normalization_shift = -raw
        self._shift_c = complex(self.normalization_shift)

    # -- constants -----------------------------------------------------------
    def _k(self, w) -> _Consts:
        return self._kmp if isinstance(w, mpc) else self._kc

    def _shift(self, w):
        return self.normalization_shift if isinstance(w, mpc) else self._shift_c

    def mp(self, w) -> mpc:
        with context(self.bits):
            return mpc(w)

    # -- covering and lift ---------------------------------------------------
    @_in_context
    def tau(self, w):
        k, o = self._k(w), _ops(w)
        den = 1 - o.exp(-k.c * w)
        if not isinstance(w, np.ndarray) and den == 0:
            raise PoleHit(f"tau has a pole at {complex(w)}")
        return k.sigma / den

    @_in_context
    def tau_prime(self, w):
        k = self._k(w)
        z = self.tau(w)
        return -k.c * z * (z - k.sigma) / k.sigma

    def _u(self, z):
        return maps.u_function(self.map, z, self.bits)

    @_in_context
    def log_argument(self, w):
        """The quantity whose logarithm defines F - w on the chosen branch."""
        k = self._k(w)
        z = self.tau(w)
        u = self._u(z)
        y = 1 - k.sigma * u / (1 + z * u)
        return y / k.lam if self.branch == TRANSLATION else y

    def branch_margin(self, w):
        """Angular distance of the log argument from the cut."""
        o = _ops(w)
        return math.pi - abs(o.phase(self.log_argument(w))) if not isinstance(w, np.ndarray) \
            else np.pi - np.abs(np.angle(self.log_argument(w)))

    @_in_context
    def F(self, w):
        k, o = self._k(w), _ops(w)
        arg = self.log_argument(w)
        if not isinstance(w, np.ndarray):
            if arg.imag == 0 and arg.real <= 0:
                raise BranchCutHit(f"log argument {complex(arg)} on the cut")
            if self.map.kind == maps.CUBIC:
                z = self.tau(w)
                if abs(complex(z)) > 0.5 and not maps.in_domain_U(complex(z)):
                    raise DomainExit(f"tau(w) = {complex(z)} outside U")
        step = o.log(arg) / k.c
        return w + 1 + step if self.branch == TRANSLATION else w + step

    @_in_context
    def F_prime(self, w):
        k = self._k(w)
        z = self.tau(w)
        u = self._u(z)
        return maps.derivative(self.map, z) / ((1 + (z - k.sigma) * u) * (1 + z * u))

    def _tol(self, w) -> float:
        return 2.0 ** (-self.bits + 12) if isinstance(w, mpc) else 1e-14

    @_in_context
    def F_inverse(self, w, x0=None):
        x = w - 1 if x0 is None else x0
        tol = self._tol(w)
        for _ in range(80):
            d = (self.F(x) - w) / self.F_prime(x)
            x = x - d
            if abs(d) < tol * max(1.0, abs(complex(x))):
                return x
        raise InversionFailed(f"F^-1 did not converge at {complex(w)}")

    # -- interpolation g -----------------------------------------------------
    def _line(self, t, like):
        if isinstance(like, mpc):
            return mpc(mpfr(self.base_a), t)
        return complex(self.base_a, t) if not isinstance(like, np.ndarray) else self.base_a + 1j * t

    @_in_context
    def g(self, st):
        """(1 - s)(a + it) + s F(a + it) at st = s + it."""
        b = self._line(st.imag, st)
        return b + st.real * (self.F(b) - b)

    @_in_context
    def g_partials(self, st):
        """(g_w, g_wbar) at st."""
        b = self._line(st.imag, st)
        D = self.F(b) - b
        Fp = self.F_prime(b)
        s = st.real
        return (D + 1 + s * (Fp - 1)) / 2, (D - 1 + s * (1 - Fp)) / 2

    def dilatation(self, st):
        gw, gwb = self.g_partials(st)
        return abs(gwb) / abs(gw) if not isinstance(st, np.ndarray) else np.abs(gwb) / np.abs(gw)

    @_in_context
    def g_inverse(self, w):
        """s + it with g(s + it) = w, by Newton in t on Im[(w - b(t)) / D(t)] = 0."""
        t = w.imag
        tol = self._tol(w)
        for _ in range(60):
            b = self._line(t, w)
            D = self.F(b) - b
            Dp = 1j * (self.F_prime(b) - 1)
            q = (w - b) / D
            dq = (-1j * D - (w - b) * Dp) / (D * D)
            if dq.imag == 0:
                break
            dt = -q.imag / dq.imag
            t = t + dt
            if abs(dt) < tol * max(1.0, abs(float(t))):
                b = self._line(t, w)
                q = (w - b) / (self.F(b) - b)
                return mpc(q.real, t) if isinstance(w, mpc) else complex(q.real, t)
        raise InversionFailed(f"g^-1 did not converge at {complex(w)}")

    # -- the coordinate --------------------------------------------------------
    @_in_context
    def land(self, w):
        """Move w into the strip; returns (g^-1 of landing point, forward steps, landing point)."""
        j, direction = 0, 0
        a = self.base_a
        for _ in range(self.max_steps):
            x = float(w.real)
            if x < a - 2 and direction >= 0:
                w, j, direction = self.F(w), j + 1, 1
                continue
            if x > a + 3 and direction <= 0:
                w, j, direction = self.F_inverse(w), j - 1, -1
                continue
            st = self.g_inverse(w)
            s = float(st.real)
            if s < 0 and direction >= 0:
                w, j, direction = self.F(w), j + 1, 1
                continue
            if s >= 1 and direction <= 0:
                w, j, direction = self.F_inverse(w), j - 1, -1
                continue
            return st, j, w
        raise Unreachable(f"no landing within {self.max_steps} steps from {complex(w)}")

    def _phi_raw(self, w):
        st, j, _ = self.land(w)
        return st - j + self._shift(w), j

    def phi(self, w):
        if isinstance(w, mpc):
            with context(self.bits):
                return self._phi_raw(w)[0]
        return self._phi_raw(complex(w))[0]

    def phi_with_steps(self, w):
        if isinstance(w, mpc):
            with context(self.bits):
                return self._phi_raw(w)
        return self._phi_raw(complex(w))

    @property
    def band_limit(self) -> int:
        return int(math.floor(1 / self.alpha))

    def phi_inverse(self, zeta, check_band: bool = True):
        if check_band and not (-1e-9 <= float(zeta.real) <= self.band_limit + 1e-9):
            raise OutsideImageBand(f"Re zeta = {float(zeta.real):.6g} outside [0, {self.band_limit}]")
        mp = isinstance(zeta, mpc)
        with context(self.bits if mp else 53):
            eta = zeta - self._shift(zeta)
            j = int(math.floor(float(eta.real)))
            w = self.g(eta - j)
            for _ in range(max(j, 0)):
                w = self.F(w)
            for _ in range(max(-j, 0)):
                w = self.F_inverse(w)
            return w


# ---------------------------------------------------------------------------
# Module-level operations.

def tau_cover(frame: FatouFrame, w):
    if isinstance(w, mpc):
        with context(frame.bits):
            return frame.tau(w)
    return frame.tau(w)


def lift_F(frame: FatouFrame, w):
    if isinstance(w, mpc):
        with context(frame.bits):
            return frame.F(w)
    return frame.F(w)


def lift_F_prime(frame: FatouFrame, w):
    if isinstance(w, mpc):
        with context(frame.bits):
            return frame.F_prime(w)
    return frame.F_prime(w)


def fatou_phi(frame: FatouFrame, w):
    return frame.phi(w)


def fatou_phi_inverse(frame: FatouFrame, zeta, check_band: bool = True):
    return frame.phi_inverse(zeta, check_band)


def semiconjugacy_residual(frame: FatouFrame, w):
    """|h(tau(w)) - tau(F(w))|."""
    if isinstance(w, mpc):
        with context(frame.bits):
            return abs(maps.evaluate(frame.map, frame.tau(w)) - frame.tau(frame.F(w)))
    return np.abs(maps.evaluate(frame.map, frame.tau(w)) - frame.tau(frame.F(w)))


# ---------------------------------------------------------------------------
# Near-translation scans.

def fundamental_samples(alpha: float, grid: int, height: float | None = None,
                        r_min: float = 0.05) -> np.ndarray:
    """A rectangle over one deck period plus a log-polar net around 0."""
    half = 0.5 / alpha
    height = half if height is None else height
    n = max(int(grid), 1)
    x = -half + (np.arange(n) + 0.5) * (2 * half / n)
    y = -height + (np.arange(n) + 0.5) * (2 * height / n)
    rect = (x[None, :] + 1j * y[:, None]).ravel()
    if n == 1:
        return rect
    r = np.geomspace(r_min, min(half, height), 4 * n)
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    polar = (r[:, None] * np.exp(1j * th[None, :])).ravel()
    return np.concatenate([rect, polar])


def _deviations(frame: FatouFrame, w: np.ndarray):
    with np.errstate(all="ignore"):
        dev = np.abs(frame.F(w) - (w + 1))
        devp = np.abs(frame.F_prime(w) - 1)
        margin = frame.branch_margin(w)
    dev = np.where(np.isfinite(dev), dev, np.inf)
    devp = np.where(np.isfinite(devp), devp, np.inf)
    return dev, devp, margin


def fit_c2(frame: FatouFrame, grid: int = 64, threshold: float = 0.25) -> float:
    """Least sampled R with both deviations below ``threshold`` on Theta(R)."""
    w = fundamental_samples(frame.alpha, grid)
    dev, devp, _ = _deviations(frame, w)
    dist = deck_distance(w, frame.alpha)
    bad = ~((dev < threshold) & (devp < threshold))
    if not bad.any():
        return float(dist.min())
    return float(dist[bad].max())


def near_translation_report(frame: FatouFrame, region: ThetaSpec | None = None,
                            grid: int = 100, r: float = 0.25) -> VerifyReport:
    """Sup of |F - (w+1)| and |F' - 1| over sampled Theta(R), with fitted constants.

    C2 is the largest deck distance of a sample violating either 1/4 bound;
    C3 is the least constant making both deviations at most
    C3 (alpha/r) exp(-2 pi alpha Im w) on the samples in Theta(r/alpha + 1).
    """
    alpha = frame.alpha
    w = fundamental_samples(alpha, grid)
    dev, devp, margin = _deviations(frame, w)
    dist = deck_distance(w, alpha)
    bad = ~((dev < 0.25) & (devp < 0.25))
    c2 = float(dist[bad].max()) if bad.any() else float(dist.min())
    R = c2 if region is None else region.R
    inside = dist > R if region is None else dist >= R
    rep = VerifyReport("near-translation", precision_bits=53)
    rep.region = {"kind": "theta", "R": R, "alpha": alpha, "grid": int(grid)}
    rep.samples = int(w.size)
    sup_dev = float(dev[inside].max()) if inside.any() else 0.0
    sup_devp = float(devp[inside].max()) if inside.any() else 0.0
    rep.residuals = {"sup_F_minus_translation": sup_dev, "sup_Fprime_minus_1": sup_devp,
                     "min_branch_margin": float(np.nanmin(margin[inside])) if inside.any() else math.pi}
    far = dist >= r / alpha + 1
    c3 = 0.0
    if far.any():
        scale = (r / alpha) * np.exp(2 * np.pi * alpha * w.imag[far])
        c3 = float(np.max(np.maximum(dev[far], devp[far]) * scale))
    rep.fitted = {"C2": c2, "C3": c3, "r": r, "samples_in_region": int(inside.sum())}
    rep.check("region_nonempty", bool(inside.any()))
    rep.check("sup_F_below_quarter", sup_dev < 0.25)
    rep.check("sup_Fprime_below_quarter", sup_devp < 0.25)
    rep.check("branch_margin", rep.residuals["min_branch_margin"] > 1e-6)
    rep.notes.append("constants are fitted on samples, tag: fitted")
    return rep


def dilatation_report(frame: FatouFrame, n_s: int = 21, n_t: int = 201,
                      height: float | None = None) -> VerifyReport:
    """Dilatation |g_wbar / g_w| of the interpolation over the base strip."""
    height = 0.5 / frame.alpha if height is None else height
    s = np.linspace(0.0, 1.0, n_s)
    t = np.linspace(-height, height, n_t)
    st = (s[None, :] + 1j * t[:, None]).ravel()
    mu = frame.dilatation(st)
    rep = VerifyReport("dilatation", precision_bits=53, samples=int(st.size))
    rep.region = {"kind": "base-strip", "a": frame.base_a, "height": height}
    rep.residuals = {"sup_dilatation": float(np.max(mu))}
    rep.check("dilatation_below_third", float(np.max(mu)) < 1.0 / 3.0)
    return rep


def semiconjugacy_report(frame: FatouFrame, grid: int = 100, height: float | None = None,
                         r_excl: float = 0.5) -> VerifyReport:
    """sup |h(tau(w)) - tau(F(w))| / max(1, |tau(F(w))|) in MPFR on one deck period.

    Samples closer than ``r_excl`` to a deck translate of 0 (the poles of
    tau) are skipped, as are points where the branch of F is undefined.
    """
    alpha = frame.alpha
    height = 0.5 / alpha if height is None else height
    n = int(grid)
    xs = (np.arange(n) + 0.5) / (n * alpha)
    ys = -height + (np.arange(n) + 0.5) * (2 * height / n)
    worst, used, skipped = 0.0, 0, 0
    with context(frame.bits):
        for y in ys:
            for x in xs:
                if deck_distance(complex(x, y), alpha) < r_excl:
                    skipped += 1
                    continue
                w = mpc(float(x), float(y))
                try:
                    res = semiconjugacy_residual(frame, w)
                    scale = max(1.0, float(abs(frame.tau(frame.F(w)))))
                except (BranchCutHit, DomainExit):
                    skipped += 1
                    continue
                worst = max(worst, float(res) / scale)
                used += 1
    rep = VerifyReport("semiconjugacy", precision_bits=frame.bits, samples=used)
    rep.region = {"kind": "deck-period", "alpha": alpha, "map": frame.map.kind,
                  "height": height, "excluded_radius": r_excl, "skipped": skipped}
    rep.residuals = {"sup_residual": worst}
    rep.check("samples_present", used > 0)
    rep.check("residual_below_1e-20", worst < 1e-20)
    return rep


def abel_report(frame: FatouFrame, points: int = 1000, seed: int = 0,
                height: float | None = None, tol: float = 1e-15) -> VerifyReport:
    """|Phi(F(w)) - Phi(w) - 1| at random points near the base strip, in MPFR.

    Points are drawn with a - 3 <= Re w <= a + 4 and |Im w| <= height, outside
    the C2-disks around the deck translates of 0.  Also checks the
    normalization Phi(cp lift) = 0 and the dilatation bound of g.
    """
    alpha = frame.alpha
    a = frame.base_a
    r_excl = (frame.c2_fitted or 0.0) + 1
    if height is None:
        height = max(min(0.4 / alpha, 40.0), r_excl + 6)
    rng = np.random.default_rng(seed)
    worst, used = 0.0, 0
    with context(frame.bits):
        for _ in range(50 * points):
            if used >= points:
                break
            w = complex(rng.uniform(a - 3, a + 4), rng.uniform(-height, height))
            if deck_distance(w, alpha) < r_excl:
                continue
            wm = mpc(w.real, w.imag)
            worst = max(worst, float(abs(frame.phi(frame.F(wm)) - frame.phi(wm) - 1)))
            used += 1
        p0 = float(abs(frame.phi(frame.cp_lift)))
    dil = dilatation_report(frame)
    rep = VerifyReport("abel", precision_bits=frame.bits, samples=used)
    rep.region = {"kind": "near-base-strip", "alpha": alpha, "map": frame.map.kind,
                  "a": a, "height": height, "seed": seed}
    rep.residuals = {"sup_abel": worst, "phi_cp_lift": p0,
                     "sup_dilatation": dil.residuals["sup_dilatation"]}
    rep.check("samples_present", used == points)
    rep.check("abel_below_tol", worst < tol)
    rep.check("phi_cp_lift_zero", p0 < 1e-12)
    rep.check("dilatation_below_third", dil.passed)
    return rep


# ---------------------------------------------------------------------------
# Sectors.

@dataclass(frozen=True)
class SectorSpec:
    kind: str
    re_band: tuple = (0.5, 1.5)
    im_band: tuple | None = None
    pullback_depth: int = 0
    offset: float = 0.0

    def bands(self) -> tuple[tuple, tuple]:
        if self.im_band is not None:
            return self.re_band, self.im_band
        if self.kind == "C":
            return self.re_band, (-2.0, 2.0)
        if self.kind == "Csharp":
            return self.re_band, (2.0, 20.0)
        if self.kind == "S0":
            return self.re_band, (-2.0, 20.0)
        raise ValueError(f"unknown sector kind {self.kind!r}")


@dataclass(frozen=True)
class SectorCloud:
    spec: SectorSpec
    zeta: np.ndarray
    lifted: np.ndarray
    points: np.ndarray
    diameter: float

    def to_csv(self) -> str:
        rows = ["zeta_re,zeta_im,z_re,z_im"]
        for zt, z in zip(self.zeta, self.points):
            rows.append(f"{zt.real!r},{zt.imag!r},{z.real!r},{z.imag!r}")
        return "\n".join(rows) + "\n"


def cloud_diameter(points: np.ndarray) -> float:
    xy = np.column_stack([points.real, points.imag])
    if len(xy) < 2:
        return 0.0
    try:
        hull = ConvexHull(xy)
        xy = xy[hull.vertices]
    except (QhullError, ValueError):
        pass
    return float(pdist(xy).max())


def sector_zeta_grid(spec: SectorSpec, samples: int) -> np.ndarray:
    (x0, x1), (y0, y1) = spec.bands()
    n = max(int(samples), 2)
    x = np.linspace(x0, x1, n) + spec.offset
    # the lower edge of the imaginary band is open
    y = np.linspace(y0, y1, n + 1)[1:]
    return (x[None, :] + 1j * y[:, None]).ravel()


def sector_extract(frame: FatouFrame, spec: SectorSpec, samples: int = 12) -> SectorCloud:
    """Dynamical-plane image of a Fatou-coordinate band, optionally pulled back.

    With ``pullback_depth`` k > 0 the lift is shifted by one deck period and
    pulled back k times by the translation branch of F^-1, which keeps the
    branch whose closure contains 0.
    """
    zeta = sector_zeta_grid(spec, samples)
    lifted = np.empty_like(zeta)
    for i, zt in enumerate(zeta):
        w = frame.phi_inverse(complex(zt), check_band=False)
        if spec.pullback_depth:
            w = w + 1 / frame.alpha
            for _ in range(spec.pullback_depth):
                try:
                    w = frame.F_inverse(w)
                except InversionFailed as exc:
                    raise PullbackBranchLost(str(exc)) from exc
                if deck_distance(w, frame.alpha) < 0.5 * (frame.c2_fitted or 0.0):
                    raise PullbackBranchLost(f"pullback entered the deck disk at {w}")
        lifted[i] = w
    pts = frame.tau(lifted)
    return SectorCloud(spec, zeta, lifted, pts, cloud_diameter(pts))


# ---------------------------------------------------------------------------
# Constants.

@dataclass
class ConstantsLedger:
    """Fitted stand-ins for existence constants; never the unknown true values."""
    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    protocol: dict = field(default_factory=dict)

    def record(self, name: str, value: float, protocol: str, tag: str = "fitted") -> None:
        self.values[name] = float(value)
        self.provenance[name] = tag
        self.protocol[name] = protocol

    def to_dict(self) -> dict:
        return {k: {"value": self.values[k], "tag": self.provenance[k],
                    "protocol": self.protocol[k]} for k in sorted(self.values)}


def first_visit_index(frame: FatouFrame, threshold: float | None = None, cap: int | None = None) -> int:
    """Least i >= 0 with Re F^i(cp lift) >= threshold (default: fitted C2)."""
    threshold = frame.c2_fitted if threshold is None else threshold
    cap = cap or frame.max_steps
    w = complex(frame.cp_lift)
    for i in range(cap):
        if w.real >= threshold:
            return i
        w = frame.F(w)
    raise Unreachable("critical orbit did not cross the threshold")


def fit_M(frames: Sequence[FatouFrame], samples: int = 10) -> float:
    """Largest diam/alpha of the C band translated to Re = floor(1/(2 alpha))."""
    best = 0.0
    for fr in frames:
        spec = SectorSpec("C", offset=math.floor(0.5 / fr.alpha))
        best = max(best, sector_extract(fr, spec, samples).diameter / fr.alpha)
    return best
