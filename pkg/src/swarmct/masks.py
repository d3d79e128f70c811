"""Random sinogram masks and the variance-inflation Monte Carlo.

Three mask seeds are supported.  ``sparse_view`` keeps evenly spaced angle
rows and zeroes the rest, ``circles`` zeroes three randomly centred disks and
``strip`` zeroes a band of consecutive detector columns.  Masks are float
arrays holding exactly 0.0 and 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ArgumentError

KINDS = ("sparse_view", "circles", "strip")

DEFAULTS = {
    "sparse_view": {"counts": (10, 20, 30, 60, 90, 120, 180, 720)},
    # radius is given at reference_width detector bins and scaled to the target width
    "circles": {"count": 3, "radius": 48.0, "reference_width": 720},
    "strip": {"fraction": 0.2},
}


@dataclass(frozen=True)
class MaskSpec:
    """Mask recipe; ``kind=None`` draws the kind uniformly for every mask."""

    kind: str | None = None
    params: dict = field(default_factory=dict)
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind is not None and self.kind not in KINDS:
            raise ArgumentError(f"unknown mask kind {self.kind!r}; choose from {KINDS}")

    def param(self, kind, name):
        return self.params.get(name, DEFAULTS[kind][name])


@dataclass
class MaskParams:
    """Vectorised parameters for a batch of masks (one entry per mask)."""

    kind: np.ndarray  # int codes into KINDS
    kept: np.ndarray  # sparse_view kept-row count
    centers: np.ndarray  # circles, (count, n_circles, 2) integer row/col
    radius: float
    strip_start: np.ndarray
    strip_width: int

    def __len__(self):
        return len(self.kind)


def draw_params(spec: MaskSpec, shape, count: int, rng) -> MaskParams:
    """Draw parameters for ``count`` masks on a grid of ``shape``."""
    rows, cols = shape
    if rows < 1 or cols < 1:
        raise ArgumentError(f"mask shape must be positive, got {shape}")
    if spec.kind is None:
        kind = rng.integers(len(KINDS), size=count)
    else:
        kind = np.full(count, KINDS.index(spec.kind))
    counts = np.minimum(np.asarray(spec.param("sparse_view", "counts")), rows)
    kept = counts[rng.integers(len(counts), size=count)]
    n_circ = int(spec.param("circles", "count"))
    radius = spec.param("circles", "radius") * cols / spec.param("circles", "reference_width")
    centers = np.stack([rng.integers(rows, size=(count, n_circ)),
                        rng.integers(cols, size=(count, n_circ))], axis=-1)
    width = min(cols, max(1, int(np.floor(cols * spec.param("strip", "fraction")))))
    strip_start = rng.integers(cols - width + 1, size=count)
    return MaskParams(kind, kept, centers, float(radius), strip_start, width)


def rasterize(p: MaskParams, shape, index: int = 0) -> np.ndarray:
    rows, cols = shape
    mask = np.ones(shape)
    kind = KINDS[p.kind[index]]
    if kind == "sparse_view":
        k = int(p.kept[index])
        keep = np.zeros(rows, dtype=bool)
        keep[(np.arange(k) * rows) // k] = True
        mask[~keep] = 0.0
    elif kind == "circles":
        rr, cc = np.mgrid[:rows, :cols]
        for cy, cx in p.centers[index]:
            mask[(rr - cy) ** 2 + (cc - cx) ** 2 <= p.radius ** 2] = 0.0
    else:
        start = p.strip_start[index]
        mask[:, start:start + p.strip_width] = 0.0
    return mask


def random_mask(spec: MaskSpec, shape, rng) -> tuple[np.ndarray, str]:
    """One mask drawn from ``rng``; returns ``(mask, kind)``."""
    p = draw_params(spec, shape, 1, rng)
    return rasterize(p, shape), KINDS[p.kind[0]]


def generate_mask(spec: MaskSpec, shape) -> np.ndarray:
    """Binary mask reproducible from ``spec.rng_seed``."""
    return random_mask(spec, shape, np.random.default_rng(spec.rng_seed))[0]


def apply_mask(sino, mask) -> np.ndarray:
    sino = np.asarray(sino, dtype=float)
    mask = np.asarray(mask, dtype=float)
    if sino.shape[-2:] != mask.shape[-2:]:
        raise ArgumentError(f"mask shape {mask.shape} does not match sinogram {sino.shape}")
    return sino * mask


# ---------------------------------------------------------------------------
# variance inflation

@numba.njit(cache=True)
def _mix(z):
    # splitmix64 finaliser
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _fill_shipped(buf, kind, kept, centers, k, radius, width, start, rows, cols):
    if kind == 0:
        buf[:] = 0.0
        for j in range(kept):
            r = (j * rows) // kept
            buf[r * cols:(r + 1) * cols] = 1.0
    elif kind == 1:
        buf[:] = 1.0
        reach = int(np.floor(radius))
        r2 = radius * radius
        for q in range(centers.shape[1]):
            cy = centers[k, q, 0]
            cx = centers[k, q, 1]
            for r in range(max(0, cy - reach), min(rows, cy + reach + 1)):
                for c in range(max(0, cx - reach), min(cols, cx + reach + 1)):
                    if (r - cy) ** 2 + (c - cx) ** 2 <= r2:
                        buf[r * cols + c] = 0.0
    else:
        buf[:] = 1.0
        for r in range(rows):
            buf[r * cols + start:r * cols + start + width] = 0.0


@numba.njit(cache=True)
def _inflation_stats(x, mode, kinds, kepts, centers, radius, starts, width,
                     lo, hi, seed, draws, rows, cols):
    """Raw variance plus per-draw cross term, mask-variance term and perturbed variance.

    mode 0: shipped masks from the parameter arrays (indexed draw * n + i);
    mode 1: iid +-1 pixels; mode 2: iid uniform(lo, hi) pixels.
    """
    n, npix = x.shape
    mu = np.zeros(npix)
    for i in range(n):
        for p in range(npix):
            mu[p] += x[i, p]
    mu /= n
    # same E[x^2] - mu^2 formula as the perturbed variance, so m == 0 reproduces it exactly
    raw = 0.0
    for i in range(n):
        for p in range(npix):
            raw += x[i, p] * x[i, p]
    ssq_mu = 0.0
    for p in range(npix):
        ssq_mu += mu[p] * mu[p]
    var_raw = (raw / n - ssq_mu) / npix
    cross = np.empty(draws)
    mvar = np.empty(draws)
    pert = np.empty(draws)
    mu_m = np.empty(npix)
    buf = np.empty(npix)
    state = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(1)
    for d in range(draws):
        mu_m[:] = 0.0
        f = 0.0
        q = 0.0
        s2 = 0.0
        for i in range(n):
            k = d * n + i
            if mode == 0:
                _fill_shipped(buf, kinds[k], kepts[k], centers, k, radius, width, starts[k],
                              rows, cols)
            elif mode == 1:
                for p0 in range(0, npix, 64):
                    state += np.uint64(0x9E3779B97F4A7C15)
                    bits = _mix(state)
                    for p in range(p0, min(npix, p0 + 64)):
                        buf[p] = 1.0 if bits & np.uint64(1) else -1.0
                        bits >>= np.uint64(1)
            else:
                for p in range(npix):
                    state += np.uint64(0x9E3779B97F4A7C15)
                    u = (_mix(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
                    buf[p] = lo + (hi - lo) * u
            for p in range(npix):
                xv = x[i, p]
                xm = xv * buf[p]
                f += (xv - mu[p]) * xm
                q += xm * xm
                mu_m[p] += xm
                xt = xv + xm
                s2 += xt * xt
        ssq_mu_m = 0.0
        ssq_mu_t = 0.0
        for p in range(npix):
            mm = mu_m[p] / n
            ssq_mu_m += mm * mm
            mt = mu[p] + mm
            ssq_mu_t += mt * mt
        # sum_i (x_i - mu)(x_i m_i - mu_M) == sum_i (x_i - mu) x_i m_i since sum_i (x_i - mu) = 0
        cross[d] = 2.0 * f / n / npix
        mvar[d] = (q / n - ssq_mu_m) / npix
        pert[d] = (s2 / n - ssq_mu_t) / npix
    return var_raw, cross, mvar, pert


@dataclass
class InflationReport:
    var_raw: float
    var_perturbed: float  # mean over draws
    inflated: bool
    cross_mean: float
    cross_se: float
    mask_var_mean: float
    per_draw_perturbed: np.ndarray

    @property
    def cross_z(self) -> float:
        return self.cross_mean / self.cross_se if self.cross_se > 0 else 0.0


def variance_inflation_check(samples, spec: MaskSpec | None = None, trials: int = 500,
                             rng_seed: int = 0, family: str = "shipped",
                             uniform_range=(-1.0, 1.0)) -> InflationReport:
    """Monte-Carlo estimate of how random masks change the sample variance.

    Each of ``trials`` draws pairs every sample ``x_i`` with its own random
    mask ``m_i`` and forms ``x_i + x_i * m_i``.  Variances are per-pixel
    population variances averaged over pixels.  ``family`` picks the masks:
    ``"shipped"`` (binary masks from ``spec``), ``"rademacher"`` (iid +-1
    pixels, the zero-mean case) or ``"uniform"`` (iid pixels on
    ``uniform_range``).  ``inflated`` is true when the draw-averaged perturbed
    variance is at least the raw variance.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim < 2 or len(x) == 0:
        raise ArgumentError("need a non-empty stack of samples")
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    shape = x.shape[1:] if x.ndim == 3 else (1, x.shape[1])
    n = len(x)
    flat = np.ascontiguousarray(x.reshape(n, -1))
    rng = np.random.default_rng(rng_seed)
    modes = {"shipped": 0, "rademacher": 1, "uniform": 2}
    if family not in modes:
        raise ArgumentError(f"unknown mask family {family!r}")
    if family == "shipped":
        p = draw_params(spec or MaskSpec(), shape, trials * n, rng)
        args = (p.kind.astype(np.int64), p.kept.astype(np.int64), p.centers.astype(np.int64),
                p.radius, p.strip_start.astype(np.int64), p.strip_width)
    else:
        empty = np.zeros(1, dtype=np.int64)
        args = (empty, empty, np.zeros((1, 1, 2), dtype=np.int64), 0.0, empty, 0)
    seed = int(rng.integers(2 ** 62))
    var_raw, cross, mvar, pert = _inflation_stats(flat, modes[family], *args, float(uniform_range[0]),
                                         float(uniform_range[1]), seed, trials, shape[0], shape[1])
    var_pert = float(pert.mean())
    se = float(cross.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return InflationReport(var_raw=float(var_raw), var_perturbed=var_pert, inflated=var_pert >= var_raw,
                           cross_mean=float(cross.mean()), cross_se=se,
                           mask_var_mean=float(mvar.mean()), per_draw_perturbed=pert)
