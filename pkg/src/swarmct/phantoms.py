"""Synthetic attenuation phantoms used as training and test corpora."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

# Modified (high-contrast) Shepp-Logan: intensity, semi-axes a, b, centre x, y, rotation in degrees.
SHEPP_LOGAN = (
    (1.0, 0.6900, 0.9200, 0.00, 0.0000, 0),
    (-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18),
    (0.1, 0.2100, 0.2500, 0.00, 0.3500, 0),
    (0.1, 0.0460, 0.0460, 0.00, 0.1000, 0),
    (0.1, 0.0460, 0.0460, 0.00, -0.1000, 0),
    (0.1, 0.0460, 0.0230, -0.08, -0.6050, 0),
    (0.1, 0.0230, 0.0230, 0.00, -0.6060, 0),
    (0.1, 0.0230, 0.0460, 0.06, -0.6050, 0),
)

KINDS = ("shepp_logan", "random_ellipses", "disks")


@dataclass(frozen=True)
class PhantomSpec:
    kind: str = "random_ellipses"
    size: int = 64
    rng_seed: int = 0
    count: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown phantom kind {self.kind!r}; choose from {KINDS}")
        if self.size < 16:
            raise ArgumentError(f"phantom size must be >= 16, got {self.size}")
        if self.count < 0:
            raise ArgumentError("count must be non-negative")


def _unit_grid(size):
    # normalised coordinates in [-1, 1] across the inscribed circle, y pointing up
    half = (size - 1) / 2
    yy, xx = np.mgrid[:size, :size]
    return (xx - half) / (size / 2), (half - yy) / (size / 2)


def ellipses(size: int, params) -> np.ndarray:
    """Sum of filled ellipses ``(value, a, b, x0, y0, phi_deg)`` on the unit disk."""
    x, y = _unit_grid(size)
    img = np.zeros((size, size))
    for value, a, b, x0, y0, phi in params:
        th = np.deg2rad(phi)
        xr = (x - x0) * np.cos(th) + (y - y0) * np.sin(th)
        yr = -(x - x0) * np.sin(th) + (y - y0) * np.cos(th)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return img


def shepp_logan(size: int) -> np.ndarray:
    return np.clip(ellipses(size, SHEPP_LOGAN), 0.0, 1.0)


def disk(size: int, radius: float, value: float = 1.0, center=(0.0, 0.0),
         supersample: int = 1) -> np.ndarray:
    """Disk of ``radius`` pixels; ``center`` is a pixel offset from the grid centre.

    With ``supersample > 1`` each pixel holds the covered area fraction,
    estimated on a ``supersample x supersample`` sub-grid.
    """
    if supersample < 1:
        raise ArgumentError("supersample must be >= 1")
    n = size * supersample
    half = (n - 1) / 2
    yy, xx = np.mgrid[:n, :n]
    cx, cy = center[0] * supersample, center[1] * supersample
    inside = (xx - half - cx) ** 2 + (yy - half - cy) ** 2 <= (radius * supersample) ** 2
    img = np.where(inside, value, 0.0)
    return img.reshape(size, supersample, size, supersample).mean(axis=(1, 3))


def _random_ellipses(size, rng):
    params = [(rng.uniform(0.3, 0.6), rng.uniform(0.55, 0.8), rng.uniform(0.6, 0.85),
               rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-90, 90))]
    for _ in range(rng.integers(3, 8)):
        a, b = rng.uniform(0.05, 0.3, size=2)
        r = rng.uniform(0, 0.75 - max(a, b))
        phi = rng.uniform(0, 2 * np.pi)
        params.append((rng.uniform(-0.25, 0.5), a, b, r * np.cos(phi), r * np.sin(phi),
                       rng.uniform(-90, 90)))
    return np.clip(ellipses(size, params), 0.0, 1.0)


def _random_disks(size, rng):
    img = np.zeros((size, size))
    for _ in range(rng.integers(1, 5)):
        radius = rng.uniform(0.08, 0.3) * size / 2
        reach = size / 2 * 0.9 - radius
        r, phi = rng.uniform(0, reach), rng.uniform(0, 2 * np.pi)
        img += disk(size, radius, rng.uniform(0.2, 0.6), (r * np.cos(phi), r * np.sin(phi)))
    return np.clip(img, 0.0, 1.0)


def make_phantoms(spec: PhantomSpec) -> list[np.ndarray]:
    """Deterministic phantom corpus; ``shepp_logan`` ignores the seed."""
    if spec.kind == "shepp_logan":
        return [shepp_logan(spec.size) for _ in range(spec.count)]
    rng = np.random.default_rng(spec.rng_seed)
    draw = _random_ellipses if spec.kind == "random_ellipses" else _random_disks
    return [draw(spec.size, rng) for _ in range(spec.count)]
