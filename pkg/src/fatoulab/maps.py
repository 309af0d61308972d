"""The map family: P_alpha(z) = lambda z + z^2 and the cubic model lambda z (1+z)^2.

Scalar entry points accept either gmpy2 ``mpc`` numbers (evaluated at the
current MPFR context precision) or Python/numpy complex values.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import gmpy2
import numba
import numpy as np
from gmpy2 import mpc, mpfr
from scipy import ndimage

from .cf import AlphaLike, context, to_mpfr
from .errors import OutsideDomain, ParabolicCase, ZeroNotInImage

QUADRATIC = "quadratic"
CUBIC = "cubic"
RENORM = "renorm"
KINDS = (QUADRATIC, CUBIC, RENORM)
DEFAULT_BITS = 128

OUTER_RADIUS = 4.0 / 27.0 * math.exp(4 * math.pi)
INNER_RADIUS = 4.0 / 27.0 * math.exp(-4 * math.pi)


@dataclass(frozen=True)
class MapSpec:
    kind: str
    alpha: AlphaLike
    payload: Any = field(default=None, compare=False, hash=False)
    validated_radius: float = math.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == RENORM and self.payload is None:
            raise ValueError("a renormalized map needs a payload callable")

    def alpha_mp(self, bits: int = DEFAULT_BITS) -> mpfr:
        return _alpha_mp(self.alpha, bits)

    def lam(self, bits: int = DEFAULT_BITS) -> mpc:
        return _lam(self.alpha, bits)

    @property
    def alpha_float(self) -> float:
        return float(self.alpha_mp(64))

    @property
    def lam_c(self) -> complex:
        return complex(self.lam(64))


@lru_cache(maxsize=256)
def _alpha_mp(alpha, bits: int) -> mpfr:
    return to_mpfr(alpha, bits)


@lru_cache(maxsize=256)
def _lam(alpha, bits: int) -> mpc:
    with context(bits):
        a = _alpha_mp(alpha, bits)
        t = 2 * gmpy2.const_pi() * a
        return mpc(gmpy2.cos(t), gmpy2.sin(t))


def quadratic(alpha: AlphaLike) -> MapSpec:
    return MapSpec(QUADRATIC, alpha)


def cubic(alpha: AlphaLike) -> MapSpec:
    return MapSpec(CUBIC, alpha)


def _is_mp(z) -> bool:
    return isinstance(z, (mpc, mpfr))


def _bits_of(z) -> int:
    return z.precision[0] if isinstance(z, mpc) else z.precision


def evaluate(m: MapSpec, z):
    """h(z) for the map ``m``."""
    if m.kind == RENORM:
        if abs(complex(z)) > m.validated_radius:
            raise OutsideDomain(f"|z| = {abs(complex(z)):.3g} beyond validated radius")
        return m.payload(z)
    lam = m.lam(_bits_of(z)) if _is_mp(z) else m.lam_c
    if m.kind == QUADRATIC:
        return lam * z + z * z
    return lam * z * (1 + z) * (1 + z)


eval = evaluate  # noqa: A001  (name used by the interface)


def derivative(m: MapSpec, z):
    lam = m.lam(_bits_of(z)) if _is_mp(z) else m.lam_c
    if m.kind == QUADRATIC:
        return lam + 2 * z
    if m.kind == CUBIC:
        return lam * (1 + z) * (1 + 3 * z)
    raise NotImplementedError("no closed-form derivative for a renormalized map")


def second_derivative_at_zero(m: MapSpec, bits: int = DEFAULT_BITS):
    lam = m.lam(bits)
    with context(bits):
        return 2 + 0 * lam if m.kind == QUADRATIC else 4 * lam


def critical_points(m: MapSpec, bits: int = DEFAULT_BITS) -> list:
    with context(bits):
        if m.kind == QUADRATIC:
            return [-m.lam(bits) / 2]
        if m.kind == CUBIC:
            return [mpc(mpfr(-1) / 3), mpc(-1)]
    raise NotImplementedError("critical points of a renormalized map are not tracked")


def critical_value(m: MapSpec, bits: int = DEFAULT_BITS):
    with context(bits):
        return evaluate(m, critical_points(m, bits)[0])


def _check_alpha(m: MapSpec, bits: int) -> None:
    if m.alpha_mp(bits) == 0:
        raise ParabolicCase("alpha = 0")


def sigma_fixed_point(m: MapSpec, bits: int = DEFAULT_BITS) -> mpc:
    """The fixed point other than 0 that tends to 0 with alpha."""
    _check_alpha(m, bits)
    with context(bits):
        if m.kind == QUADRATIC:
            return 1 - m.lam(bits)
        if m.kind == CUBIC:
            t = -gmpy2.const_pi() * m.alpha_mp(bits)
            return mpc(gmpy2.cos(t), gmpy2.sin(t)) - 1
    raise NotImplementedError("sigma of a renormalized map is not tracked")


def _second_root(m: MapSpec, bits: int) -> mpc:
    # cubic: lambda (1+z)^2 = 1 has roots sigma and -e^{-pi i alpha} - 1
    with context(bits):
        t = -gmpy2.const_pi() * m.alpha_mp(bits)
        return -mpc(gmpy2.cos(t), gmpy2.sin(t)) - 1


def u_at_zero(m: MapSpec, bits: int = DEFAULT_BITS) -> mpc:
    """u(0) = (1 - lambda)/sigma."""
    sigma = sigma_fixed_point(m, bits)
    with context(bits):
        return (1 - m.lam(bits)) / sigma


def u_function(m: MapSpec, z, bits: int = DEFAULT_BITS):
    """u in h(z) = z + z (z - sigma) u(z), from the factored form."""
    _check_alpha(m, bits)
    if m.kind == QUADRATIC:
        return 1 + 0 * z
    if m.kind == CUBIC:
        if _is_mp(z):
            bits = _bits_of(z)
            with context(bits):
                return m.lam(bits) * (z - _second_root(m, bits))
        return m.lam_c * (z - complex(_second_root(m, 64)))
    raise NotImplementedError


def u_quotient(m: MapSpec, z, bits: int = DEFAULT_BITS, tol: float = 1e-8):
    """u from the quotient (h(z) - z)/(z (z - sigma)).

    Near the removable singularities at 0 and sigma the quotient is replaced by
    the derivative form: u(0) = (h'(0) - 1)/(-sigma), u(sigma) = (h'(sigma) - 1)/sigma.
    """
    with context(bits):
        sigma = sigma_fixed_point(m, bits)
        zz = mpc(z)
        if abs(zz) < tol * abs(sigma):
            return (derivative(m, mpc(0)) - 1) / (-sigma)
        if abs(zz - sigma) < tol * abs(sigma):
            return (derivative(m, sigma) - 1) / sigma
        return (evaluate(m, zz) - zz) / (zz * (zz - sigma))


# ---------------------------------------------------------------------------
# The domain U of the cubic model.

def cubic_P(z):
    return z * (1 + z) * (1 + z)


@dataclass(frozen=True)
class DomainU:
    """U = P^{-1}(disk of radius OUTER) minus the slit (-inf, -1] and the component B.

    B is the component of {|P| < INNER} containing -1.  It is a tiny disk-like
    set of radius about sqrt(INNER) ~ 7e-4, so the flood fill runs on a local
    box around -1 rather than a global grid.
    """
    resolution: int = 512
    half_width: float = 1.5 * math.sqrt(INNER_RADIUS)
    outer_radius: float = OUTER_RADIUS
    inner_radius: float = INNER_RADIUS
    grid: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", self._flood())
        self.grid.setflags(write=False)

    @property
    def pixel(self) -> float:
        return 2 * self.half_width / self.resolution

    @property
    def pixels_per_unit(self) -> float:
        return 1.0 / self.pixel

    def _centers(self):
        n = self.resolution
        t = -self.half_width + (np.arange(n) + 0.5) * self.pixel
        return t

    def _flood(self) -> np.ndarray:
        t = self._centers()
        zz = (-1.0 + t[None, :]) + 1j * t[:, None]
        small = np.abs(cubic_P(zz)) < self.inner_radius
        labels, _ = ndimage.label(small, structure=np.ones((3, 3), dtype=int))
        seed = labels[self._index(-1.0 + 0j)]
        if seed == 0:
            raise RuntimeError("seed pixel at -1 not in the sublevel set")
        return labels == seed

    def _index(self, z: complex) -> tuple[int, int]:
        col = int(math.floor((z.real + 1.0 + self.half_width) / self.pixel))
        row = int(math.floor((z.imag + self.half_width) / self.pixel))
        return row, col

    def in_B(self, z: complex) -> bool:
        z = complex(z)
        if not abs(cubic_P(z)) < self.inner_radius:
            return False
        row, col = self._index(z)
        n = self.resolution
        if not (0 <= row < n and 0 <= col < n):
            return False
        r0, r1 = max(row - 1, 0), min(row + 2, n)
        c0, c1 = max(col - 1, 0), min(col + 2, n)
        return bool(self.grid[r0:r1, c0:c1].any())

    def contains(self, z: complex) -> bool:
        z = complex(z)
        if not abs(cubic_P(z)) < self.outer_radius:
            return False
        if z.imag == 0 and z.real <= -1:
            return False
        return not self.in_B(z)

    def to_pgm(self) -> bytes:
        """Binary PGM of the B mask (white = B), row 0 at the top."""
        img = np.where(self.grid[::-1], 255, 0).astype(np.uint8)
        head = f"P5\n{self.resolution} {self.resolution}\n255\n".encode()
        return head + img.tobytes()


@lru_cache(maxsize=4)
def default_domain(resolution: int = 512) -> DomainU:
    return DomainU(resolution)


def in_domain_U(z: complex, domain: DomainU | None = None) -> bool:
    return (domain or default_domain()).contains(z)


# ---------------------------------------------------------------------------
# Orbits.

@numba.njit(cache=True)
def _orbit_kernel(kind: int, lam: complex, z0: complex, n_max: int, radius: float):
    pts = np.empty(n_max + 1, dtype=np.complex128)
    pts[0] = z0
    z = z0
    for k in range(1, n_max + 1):
        if kind == 0:
            z = lam * z + z * z
        else:
            z = lam * z * (1 + z) * (1 + z)
        pts[k] = z
        if abs(z) > radius:
            return pts[:k + 1], k
    return pts, -1


@dataclass(frozen=True)
class OrbitRecord:
    points: tuple
    escaped_at: int | None
    escape_radius: float
    map: MapSpec

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "re", "im", "abs", "escaped_at"])
        esc = "" if self.escaped_at is None else str(self.escaped_at)
        for i, p in enumerate(self.points):
            p = complex(p)
            w.writerow([i, repr(p.real), repr(p.imag), repr(abs(p)), esc])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema": "fatoulab.orbit.v1",
            "map": {"kind": self.map.kind, "alpha": repr(self.map.alpha_float)},
            "escape_radius": self.escape_radius,
            "escaped_at": self.escaped_at,
            "points": [[complex(p).real, complex(p).imag] for p in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def orbit(m: MapSpec, z0, n_max: int, escape_radius: float = 1e6,
          bits: int | None = None) -> OrbitRecord:
    """Iterate ``m`` from ``z0``.  Escape is tested on z_1, z_2, ...

    With ``bits`` the orbit runs in MPFR at that precision, otherwise in
    hardware doubles.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if m.kind == RENORM or bits is not None:
        esc = None
        with context(bits or 53):
            z = mpc(z0) if bits else complex(z0)
            pts = [z]
            for k in range(1, n_max + 1):
                z = evaluate(m, z)
                pts.append(z)
                if abs(complex(z)) > escape_radius:
                    esc = k
                    break
        return OrbitRecord(tuple(pts), esc, escape_radius, m)
    kind = 0 if m.kind == QUADRATIC else 1
    pts, esc = _orbit_kernel(kind, m.lam_c, complex(z0), int(n_max), float(escape_radius))
    return OrbitRecord(tuple(complex(p) for p in pts), None if esc < 0 else int(esc),
                       escape_radius, m)


# ---------------------------------------------------------------------------
# The exponential projection and its lifts.

FOUR_27 = 4.0 / 27.0


def exp_project(w, conjugate: bool = True):
    """-4/27 exp(-2 pi i conj(w)); with ``conjugate=False``, -4/27 exp(2 pi i w)."""
    if _is_mp(w):
        bits = _bits_of(w)
        with context(bits):
            w = mpc(w)
            if conjugate:
                arg = mpc(0, -2) * gmpy2.const_pi() * mpc(w.real, -w.imag)
            else:
                arg = mpc(0, 2) * gmpy2.const_pi() * w
            return -4 * gmpy2.exp(arg) / 27
    w = np.asarray(w, dtype=np.complex128)
    arg = -2j * np.pi * np.conj(w) if conjugate else 2j * np.pi * w
    out = -FOUR_27 * np.exp(arg)
    return out[()] if out.ndim == 0 else out


def exp_lift(z, branch: int = 0, conjugate: bool = True):
    """A preimage of ``z`` under exp_project; branches differ by integers.

    Branch 0 has real part in [-1/2, 1/2].
    """
    if _is_mp(z):
        bits = _bits_of(z)
        with context(bits):
            z = mpc(z)
            if z == 0:
                raise ZeroNotInImage("cannot lift 0")
            c = -27 * z / 4
            two_pi = 2 * gmpy2.const_pi()
            re = gmpy2.phase(c) / two_pi
            im = -gmpy2.log(abs(c)) / two_pi
            return mpc((-re if conjugate else re) + branch, im)
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z == 0):
        raise ZeroNotInImage("cannot lift 0")
    c = -27.0 * z / 4.0
    re = np.angle(c) / (2 * np.pi)
    im = -np.log(np.abs(c)) / (2 * np.pi)
    out = (-re if conjugate else re) + branch + 1j * im
    return out[()] if out.ndim == 0 else out
