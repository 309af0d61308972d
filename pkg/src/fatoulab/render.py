"""Escape-time and critical-orbit images, written as binary PPM (optionally PNG).

Rows are computed by numba kernels that release the GIL and are farmed out
to a thread pool; every row writes only its own slice of a preallocated
buffer, so the bytes do not depend on the number of threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from . import maps
from .maps import MapSpec

ESCAPE_TIME = "escape-time"
ORBIT_TRAP = "orbit-trap-origin"
MAX_RESOLUTION = 8192
_KIND_CODE = {maps.QUADRATIC: 0, maps.CUBIC: 1}


class IOFailure(OSError):
    pass


def thread_count(requested: int | None = None) -> int:
    """Worker count: ``requested`` or the CPU count, capped by FATOULAB_THREADS."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("FATOULAB_THREADS")
    if cap:
        n = min(n, max(int(cap), 1))
    return max(n, 1)


@dataclass(frozen=True)
class Viewport:
    cx: float
    cy: float
    width: float

    @classmethod
    def parse(cls, text: str) -> "Viewport":
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"viewport must be 'cx,cy,w' with w > 0, got {text!r}")
        return cls(*parts)

    def axes(self, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-centre coordinates; row 0 is the top edge."""
        h = self.width * ny / nx
        x = self.cx - self.width / 2 + (np.arange(nx) + 0.5) * (self.width / nx)
        y = self.cy + h / 2 - (np.arange(ny) + 0.5) * (h / ny)
        return x, y


def _shape(resolution) -> tuple[int, int]:
    if isinstance(resolution, int):
        nx = ny = resolution
    else:
        nx, ny = (int(v) for v in resolution)
    if not (0 < nx <= MAX_RESOLUTION and 0 < ny <= MAX_RESOLUTION):
        raise ValueError(f"resolution {nx}x{ny} outside 1..{MAX_RESOLUTION}")
    return nx, ny


@dataclass(frozen=True)
class RenderJob:
    map: MapSpec
    viewport: Viewport
    resolution: int | tuple = 512
    max_iter: int = 500
    escape_radius: float = 4.0
    coloring: str = ESCAPE_TIME

    def descriptor(self) -> dict:
        nx, ny = _shape(self.resolution)
        return {"map": {"kind": self.map.kind, "alpha": repr(self.map.alpha_float)},
                "viewport": [self.viewport.cx, self.viewport.cy, self.viewport.width],
                "resolution": [nx, ny], "max_iter": self.max_iter,
                "escape_radius": self.escape_radius, "coloring": self.coloring}


@numba.njit(nogil=True, cache=True)
def _julia_row(kind, lam, xs, y, max_iter, radius, trap, out_n, out_t):
    r2 = radius * radius
    for i in range(xs.shape[0]):
        z = complex(xs[i], y)
        n = 0
        best = abs(z)
        while n < max_iter and z.real * z.real + z.imag * z.imag <= r2:
            if kind == 0:
                z = lam * z + z * z
            else:
                z = lam * z * (1 + z) * (1 + z)
            n += 1
            if trap:
                a = abs(z)
                if a < best:
                    best = a
        out_n[i] = n
        out_t[i] = best


def _palette_escape(n: np.ndarray, max_iter: int, radius2_exceeded: np.ndarray) -> np.ndarray:
    rgb = np.zeros(n.shape + (3,), dtype=np.uint8)
    if max_iter <= 0:
        return rgb
    t = np.sqrt(n / max_iter)
    esc = radius2_exceeded
    rgb[..., 0] = np.where(esc, np.floor(255 * t), 0).astype(np.uint8)
    rgb[..., 1] = np.where(esc, np.floor(255 * t * t), 0).astype(np.uint8)
    rgb[..., 2] = np.where(esc, np.floor(96 + 159 * t), 0).astype(np.uint8)
    return rgb


def _palette_trap(dist: np.ndarray) -> np.ndarray:
    v = np.clip(1.0 + np.log10(np.maximum(dist, 1e-12)) / 4.0, 0.0, 1.0)
    g = np.floor(255 * v).astype(np.uint8)
    return np.stack([g, g, g], axis=-1)


def render_buffer(job: RenderJob, threads: int | None = None) -> np.ndarray:
    """RGB uint8 array of shape (ny, nx, 3) for the job."""
    if job.map.kind not in _KIND_CODE:
        raise ValueError(f"cannot render map kind {job.map.kind!r}")
    nx, ny = _shape(job.resolution)
    xs, ys = job.viewport.axes(nx, ny)
    counts = np.zeros((ny, nx), dtype=np.int64)
    traps = np.zeros((ny, nx), dtype=np.float64)
    kind, lam = _KIND_CODE[job.map.kind], job.map.lam_c
    trap = job.coloring == ORBIT_TRAP

    def row(j: int) -> None:
        _julia_row(kind, lam, xs, ys[j], int(job.max_iter), float(job.escape_radius),
                   trap, counts[j], traps[j])

    n = thread_count(threads)
    if n == 1:
        for j in range(ny):
            row(j)
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(row, range(ny)))
    if trap:
        return _palette_trap(traps)
    return _palette_escape(counts, int(job.max_iter), counts < job.max_iter)


@numba.njit(cache=True)
def _critical_hits(lam, z, budget, x0, y0, scale, nx, ny, hist):
    # hist[row, col]; points outside the viewport are dropped
    for _ in range(budget):
        z = lam * z + z * z
        col = int(math.floor((z.real - x0) * scale))
        row = int(math.floor((y0 - z.imag) * scale))
        if 0 <= col < nx and 0 <= row < ny:
            hist[row, col] += 1
        if abs(z) > 1e6:
            break


def critical_density(alpha: float, budget: int, viewport: Viewport, resolution=512) -> np.ndarray:
    """Hit counts of P^k(cv), k = 1..budget, on the pixel grid."""
    nx, ny = _shape(resolution)
    m = maps.quadratic(alpha)
    lam = m.lam_c
    cv = -lam * lam / 4
    scale = nx / viewport.width
    h = viewport.width * ny / nx
    hist = np.zeros((ny, nx), dtype=np.int64)
    _critical_hits(lam, complex(cv), int(budget), viewport.cx - viewport.width / 2,
                   viewport.cy + h / 2, scale, nx, ny, hist)
    return hist


def postcritical_buffer(alpha: float, budget: int, viewport: Viewport, resolution=512) -> np.ndarray:
    hist = critical_density(alpha, budget, viewport, resolution)
    top = hist.max()
    v = np.zeros(hist.shape)
    if top > 0:
        v = np.log1p(hist) / math.log1p(top)
    g = (255 - np.floor(255 * v)).astype(np.uint8)
    # the origin is marked in red
    rgb = np.stack([g, g, g], axis=-1)
    nx, ny = hist.shape[1], hist.shape[0]
    col = int((0 - (viewport.cx - viewport.width / 2)) * nx / viewport.width)
    row = int((viewport.cy + viewport.width * ny / nx / 2) * nx / viewport.width)
    if 0 <= col < nx and 0 <= row < ny:
        rgb[row, col] = (255, 0, 0)
    return rgb


def encode_ppm(rgb: np.ndarray) -> bytes:
    ny, nx, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (nx, ny) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    nx, ny = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(ny, nx, 3)


def write_image(rgb: np.ndarray, path: str | os.PathLike) -> Path:
    """Write PPM, or PNG when the suffix is .png (needs Pillow)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".png":
            from PIL import Image
            Image.fromarray(rgb, "RGB").save(path, format="PNG", optimize=False)
        else:
            path.write_bytes(encode_ppm(rgb))
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc
    return path


def render_julia(job: RenderJob, out: str | os.PathLike, threads: int | None = None) -> Path:
    return write_image(render_buffer(job, threads), out)


def render_postcritical(alpha: float, budget: int, viewport: Viewport, out: str | os.PathLike,
                        resolution=512) -> Path:
    if budget > 10**8:
        raise ValueError("budget above 1e8")
    return write_image(postcritical_buffer(alpha, budget, viewport, resolution), out)
