"""Parallel-beam tomography: ray-driven projector, sparse-view sampling and FBP.

Images are square ``(N, N)`` arrays with unit pixels centred on the origin;
sinograms are ``(n_angles, n_detectors)`` arrays.  Column index maps to ``x``
and row index to ``y`` (both increasing), so a ray at angle ``theta`` and
detector offset ``t`` is the line ``x cos(theta) + y sin(theta) = t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ConfigurationError

# angles per vectorised chunk; bounds peak memory at ~chunk * n_det * N floats
_CHUNK = 16


@dataclass(frozen=True)
class Geometry:
    """Full-view parallel-beam acquisition.

    Detector bins are centred, ``t_k = (k - (n_detectors - 1) / 2) * detector_spacing``,
    and angles are evenly spaced over ``angle_range`` with the end point excluded.
    """

    n_angles: int
    n_detectors: int
    angle_range: tuple[float, float] = (0.0, math.pi)
    detector_spacing: float = 1.0

    def __post_init__(self):
        if self.n_angles < 1 or self.n_detectors < 1:
            raise ConfigurationError(
                f"need n_angles >= 1 and n_detectors >= 1, got {self.n_angles}, {self.n_detectors}")
        lo, hi = self.angle_range
        if not hi > lo:
            raise ConfigurationError(f"angle_range must be increasing, got {self.angle_range}")
        if self.detector_spacing <= 0:
            raise ConfigurationError("detector_spacing must be positive")

    @classmethod
    def for_image(cls, size: int, n_angles: int, **kwargs) -> "Geometry":
        """Geometry whose detector spans the image diagonal (rounded up to an even count)."""
        spacing = kwargs.get("detector_spacing", 1.0)
        n_det = int(math.ceil(size * math.sqrt(2) / spacing))
        n_det += n_det % 2
        return cls(n_angles=n_angles, n_detectors=n_det, **kwargs)

    @property
    def angles(self) -> np.ndarray:
        lo, hi = self.angle_range
        return lo + (hi - lo) * np.arange(self.n_angles) / self.n_angles

    @property
    def detector_positions(self) -> np.ndarray:
        return (np.arange(self.n_detectors) - (self.n_detectors - 1) / 2) * self.detector_spacing

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_angles, self.n_detectors)

    def check_image(self, size: int):
        span = self.n_detectors * self.detector_spacing
        if span < size * math.sqrt(2) - 1e-9:
            raise ConfigurationError(
                f"detector span {span:g} does not cover the {size}x{size} image diagonal "
                f"{size * math.sqrt(2):.3f}")


@dataclass(frozen=True)
class SamplingOperator:
    """Keeps a subset of the angle rows of a full-view sinogram."""

    full_angles: int
    kept_indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        kept = tuple(int(i) for i in self.kept_indices)
        object.__setattr__(self, "kept_indices", kept)
        if not kept:
            raise ArgumentError("a sampling operator must keep at least one angle")
        if any(b <= a for a, b in zip(kept, kept[1:])):
            raise ArgumentError("kept_indices must be strictly increasing")
        if kept[0] < 0 or kept[-1] >= self.full_angles:
            raise ArgumentError(
                f"kept_indices must lie in [0, {self.full_angles}), got {kept[0]}..{kept[-1]}")

    @classmethod
    def uniform(cls, full_angles: int, n_kept: int) -> "SamplingOperator":
        """``n_kept`` evenly spaced angles starting at index 0."""
        if not 1 <= n_kept <= full_angles:
            raise ArgumentError(f"n_kept must be in [1, {full_angles}], got {n_kept}")
        kept = (np.arange(n_kept) * full_angles) // n_kept
        return cls(full_angles, tuple(kept))

    @property
    def n_kept(self) -> int:
        return len(self.kept_indices)

    def row_mask(self) -> np.ndarray:
        mask = np.zeros(self.full_angles, dtype=bool)
        mask[list(self.kept_indices)] = True
        return mask

    def _check(self, sino):
        if sino.shape[-2] != self.full_angles:
            raise ArgumentError(
                f"sinogram has {sino.shape[-2]} angle rows, operator expects {self.full_angles}")


def _ray_chunks(geo: Geometry, size: int):
    """Yield Joseph interpolation stencils for chunks of angles.

    For each angle the ray is stepped one pixel at a time along whichever image
    axis it is most aligned with, and the orthogonal coordinate is linearly
    interpolated.  Yields ``(angle_idx, flat_lo, flat_hi, w_lo, w_hi)`` where
    the weights already include the per-step path length; out-of-grid taps get
    weight zero and a harmless index.
    """
    half = (size - 1) / 2
    t = geo.detector_positions
    lines = np.arange(size) - half
    thetas = geo.angles
    for start in range(0, geo.n_angles, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, geo.n_angles))
        c = np.cos(thetas[idx])[:, None, None]
        s = np.sin(thetas[idx])[:, None, None]
        along_rows = np.abs(c) >= np.abs(s)
        # stepping rows: x = (t - y s) / c ; stepping columns: y = (t - x c) / s
        step_cos = np.where(along_rows, c, s)
        step_sin = np.where(along_rows, s, c)
        coord = (t[None, :, None] - lines[None, None, :] * step_sin) / step_cos + half
        lo = np.floor(coord)
        frac = coord - lo
        lo = lo.astype(np.int64)
        hi = lo + 1
        length = 1.0 / np.abs(step_cos)
        w_lo = np.where((lo >= 0) & (lo < size), (1 - frac) * length, 0.0)
        w_hi = np.where((hi >= 0) & (hi < size), frac * length, 0.0)
        lo = np.clip(lo, 0, size - 1)
        hi = np.clip(hi, 0, size - 1)
        line = np.arange(size)[None, None, :]
        # row-stepping taps image[line, col]; column-stepping taps image[row, line]
        flat_lo = np.where(along_rows, line * size + lo, lo * size + line)
        flat_hi = np.where(along_rows, line * size + hi, hi * size + line)
        yield idx, flat_lo, flat_hi, w_lo, w_hi


def _check_square(img):
    img = np.asarray(img, dtype=float)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ArgumentError(f"image must be square 2-D, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ArgumentError("image contains non-finite values")
    return img


def forward_project(img, geo: Geometry) -> np.ndarray:
    """Line integrals of ``img`` along every (angle, detector) ray.

    Joseph-style ray-driven traversal with bilinear interpolation; the result
    is linear in ``img`` and its exact adjoint is :func:`backproject`.
    """
    img = _check_square(img)
    size = img.shape[0]
    geo.check_image(size)
    flat = img.ravel()
    sino = np.empty(geo.shape)
    for idx, flat_lo, flat_hi, w_lo, w_hi in _ray_chunks(geo, size):
        sino[idx] = (flat[flat_lo] * w_lo + flat[flat_hi] * w_hi).sum(axis=-1)
    return sino


def backproject(sino, geo: Geometry, size: int) -> np.ndarray:
    """Unfiltered back-projection, the exact transpose of :func:`forward_project`."""
    sino = np.asarray(sino, dtype=float)
    if sino.shape != geo.shape:
        raise ArgumentError(f"sinogram shape {sino.shape} does not match geometry {geo.shape}")
    geo.check_image(size)
    out = np.zeros(size * size)
    for idx, flat_lo, flat_hi, w_lo, w_hi in _ray_chunks(geo, size):
        vals = sino[idx][:, :, None]
        out += np.bincount(flat_lo.ravel(), weights=(w_lo * vals).ravel(), minlength=size * size)
        out += np.bincount(flat_hi.ravel(), weights=(w_hi * vals).ravel(), minlength=size * size)
    return out.reshape(size, size)


def add_noise(sino, sigma: float, rng_seed: int) -> np.ndarray:
    """Additive white Gaussian noise with standard deviation ``sigma``."""
    if sigma < 0:
        raise ArgumentError(f"sigma must be non-negative, got {sigma}")
    sino = np.asarray(sino, dtype=float)
    if sigma == 0:
        return sino.copy()
    rng = np.random.default_rng(rng_seed)
    return sino + sigma * rng.standard_normal(sino.shape)


def subsample(sino, op: SamplingOperator) -> np.ndarray:
    """Rows of ``sino`` at the kept angles (the compact form of the sampling operator)."""
    sino = np.asarray(sino)
    op._check(sino)
    return sino[..., list(op.kept_indices), :].copy()


def mask_rows(sino, op: SamplingOperator) -> np.ndarray:
    """Full-size form of the sampling operator: non-kept rows set to zero."""
    sino = np.asarray(sino)
    op._check(sino)
    return np.where(op.row_mask()[:, None], sino, 0.0)


def embed_rows(rows, op: SamplingOperator, n_detectors: int | None = None) -> np.ndarray:
    """Place measured rows at their kept indices in a zero full-view sinogram."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape[-2] != op.n_kept:
        raise ArgumentError(f"expected {op.n_kept} rows, got {rows.shape[-2]}")
    n_det = rows.shape[-1] if n_detectors is None else n_detectors
    if rows.shape[-1] != n_det:
        raise ArgumentError(f"rows have {rows.shape[-1]} detectors, expected {n_det}")
    out = np.zeros(rows.shape[:-2] + (op.full_angles, n_det))
    out[..., list(op.kept_indices), :] = rows
    return out


def ramp_filter(n_detectors: int, spacing: float = 1.0, filter: str = "ram-lak"):
    """Frequency response of the apodised ramp filter on a zero-padded grid.

    Built from the band-limited spatial ramp kernel so the DC term is
    handled correctly.  Returns ``(response, padded_length)``.
    """
    padded = max(64, 1 << int(math.ceil(math.log2(2 * n_detectors))))
    n = np.concatenate([np.arange(0, padded // 2), np.arange(-padded // 2, 0)])
    kernel = np.zeros(padded)
    kernel[0] = 1 / (4 * spacing ** 2)
    odd = n % 2 == 1
    kernel[odd] = -1 / (np.pi * n[odd] * spacing) ** 2
    response = np.real(np.fft.fft(kernel)) * spacing
    freq = np.fft.fftfreq(padded)
    if filter == "ram-lak":
        pass
    elif filter == "shepp-logan":
        response = response * np.sinc(freq)
    elif filter == "hann":
        response = response * 0.5 * (1 + np.cos(2 * np.pi * freq))
    else:
        raise ArgumentError(f"unknown filter {filter!r}; use ram-lak, shepp-logan or hann")
    return response, padded


def filter_projections(sino, geo: Geometry, filter: str = "ram-lak") -> np.ndarray:
    sino = np.asarray(sino, dtype=float)
    n_det = sino.shape[-1]
    if n_det < 2:
        raise ConfigurationError("filtered back-projection needs at least 2 detector bins")
    response, padded = ramp_filter(n_det, geo.detector_spacing, filter)
    spectrum = np.fft.fft(sino, n=padded, axis=-1) * response
    return np.real(np.fft.ifft(spectrum, axis=-1))[..., :n_det]


def circle_mask(size: int) -> np.ndarray:
    """Pixels inside the circle inscribed in the ``size x size`` grid."""
    half = (size - 1) / 2
    yy, xx = np.mgrid[:size, :size] - half
    return xx ** 2 + yy ** 2 <= (size / 2) ** 2


def fbp(sino, geo: Geometry, size: int, filter: str = "ram-lak", angles=None) -> np.ndarray:
    """Filtered back-projection onto a ``size x size`` grid.

    ``sino`` may be the full-view sinogram of ``geo`` or, with ``angles``
    given, any subset of rows acquired at those angles (the compact output of
    :func:`subsample`).  Back-projection is pixel-driven with linear
    interpolation along the detector; pixels outside the inscribed circle are
    zeroed.
    """
    sino = np.asarray(sino, dtype=float)
    if sino.ndim != 2:
        raise ArgumentError(f"sinogram must be 2-D, got shape {sino.shape}")
    if not np.all(np.isfinite(sino)):
        raise ArgumentError("sinogram contains non-finite values")
    thetas = geo.angles if angles is None else np.asarray(angles, dtype=float)
    if sino.shape != (len(thetas), geo.n_detectors):
        raise ArgumentError(
            f"sinogram shape {sino.shape} does not match {len(thetas)} angles x {geo.n_detectors} bins")
    filtered = filter_projections(sino, geo, filter)
    lo, hi = geo.angle_range
    # the Radon inversion integrates over half a turn
    d_theta = (hi - lo) / len(thetas) * (math.pi / (hi - lo))
    half = (size - 1) / 2
    ys, xs = np.mgrid[:size, :size] - half
    centre = (geo.n_detectors - 1) / 2
    image = np.zeros((size, size))
    padded = np.pad(filtered, ((0, 0), (1, 1)))
    for start in range(0, len(thetas), _CHUNK):
        th = thetas[start:start + _CHUNK]
        pos = (xs[None] * np.cos(th)[:, None, None] + ys[None] * np.sin(th)[:, None, None])
        pos = pos / geo.detector_spacing + centre + 1
        pos = np.clip(pos, 0, geo.n_detectors + 1 - 1e-9)
        lo_i = np.floor(pos).astype(np.int64)
        frac = pos - lo_i
        rows = np.arange(start, start + len(th))[:, None, None]
        vals = padded[rows, lo_i] * (1 - frac) + padded[rows, lo_i + 1] * frac
        image += vals.sum(axis=0)
    image *= d_theta
    image[~circle_mask(size)] = 0.0
    return image
