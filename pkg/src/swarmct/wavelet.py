"""Single-level orthonormal 2-D Haar analysis/synthesis of sinograms.

Band naming follows the first letter for the vertical (angle-axis) filter and
the second for the horizontal (detector-axis) filter, so for a 2x2 block
``[[a, b], [c, d]]``::

    ll = (a + b + c + d) / 2      lh = (a + b - c - d) / 2
    hl = (a - b + c - d) / 2      hh = (a - b - c + d) / 2

``hl`` therefore responds to vertical edges and ``lh`` to horizontal ones.
All functions act on the last two axes, so stacks of sinograms work too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

FAMILIES = ("haar",)
HF_NAMES = ("lh", "hl", "hh")


@dataclass
class WaveletBands:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    parent_shape: tuple[int, int]
    family: str = "haar"

    @property
    def hf(self) -> "HighFrequencySet":
        return HighFrequencySet(self.lh, self.hl, self.hh)


@dataclass
class HighFrequencySet:
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __getitem__(self, i: int) -> np.ndarray:
        return (self.lh, self.hl, self.hh)[i]

    def __len__(self):
        return 3

    def stack(self) -> np.ndarray:
        """Bands stacked on a new axis just before the two spatial axes."""
        return np.stack([self.lh, self.hl, self.hh], axis=-3)

    @classmethod
    def from_stack(cls, arr) -> "HighFrequencySet":
        arr = np.asarray(arr)
        return cls(arr[..., 0, :, :], arr[..., 1, :, :], arr[..., 2, :, :])

    def replace(self, i: int, band) -> "HighFrequencySet":
        bands = [self.lh, self.hl, self.hh]
        bands[i] = band
        return HighFrequencySet(*bands)


def _pad_even(x):
    # symmetric (edge-repeat) pad of the trailing odd dimension(s)
    pad = [(0, 0)] * (x.ndim - 2) + [(0, x.shape[-2] % 2), (0, x.shape[-1] % 2)]
    return np.pad(x, pad, mode="symmetric") if any(p[1] for p in pad) else x


def dwt2(sino, family: str = "haar") -> WaveletBands:
    sino = np.asarray(sino, dtype=float)
    if family not in FAMILIES:
        raise ArgumentError(f"unsupported wavelet family {family!r}")
    if sino.ndim < 2 or sino.shape[-1] == 0 or sino.shape[-2] == 0:
        raise ArgumentError(f"need a non-empty 2-D array, got shape {sino.shape}")
    x = _pad_even(sino)
    a, b = x[..., 0::2, 0::2], x[..., 0::2, 1::2]
    c, d = x[..., 1::2, 0::2], x[..., 1::2, 1::2]
    return WaveletBands(
        ll=(a + b + c + d) / 2,
        lh=(a + b - c - d) / 2,
        hl=(a - b + c - d) / 2,
        hh=(a - b - c + d) / 2,
        parent_shape=tuple(sino.shape[-2:]),
        family=family,
    )


def idwt2(bands: WaveletBands) -> np.ndarray:
    ll, lh, hl, hh = (np.asarray(b, dtype=float) for b in (bands.ll, bands.lh, bands.hl, bands.hh))
    if not (ll.shape == lh.shape == hl.shape == hh.shape):
        raise ArgumentError(
            f"band shapes disagree: {ll.shape}, {lh.shape}, {hl.shape}, {hh.shape}")
    rows, cols = bands.parent_shape
    if ll.shape[-2:] != ((rows + 1) // 2, (cols + 1) // 2):
        raise ArgumentError(f"bands of shape {ll.shape[-2:]} cannot rebuild {bands.parent_shape}")
    out = np.empty(ll.shape[:-2] + (2 * ll.shape[-2], 2 * ll.shape[-1]))
    out[..., 0::2, 0::2] = (ll + lh + hl + hh) / 2
    out[..., 0::2, 1::2] = (ll + lh - hl - hh) / 2
    out[..., 1::2, 0::2] = (ll - lh + hl - hh) / 2
    out[..., 1::2, 1::2] = (ll - lh - hl + hh) / 2
    return out[..., :rows, :cols]


def extract_hf(sino) -> HighFrequencySet:
    """The three detail bands; the approximation band is left to the caller."""
    return dwt2(sino).hf


def merge(ll, hf: HighFrequencySet, parent_shape) -> np.ndarray:
    """Synthesise a sinogram from an approximation band and a detail set."""
    return idwt2(WaveletBands(ll, hf.lh, hf.hl, hf.hh, tuple(parent_shape)))


def select_random_hf(hfs: HighFrequencySet, rng_seed) -> tuple[np.ndarray, int]:
    """One detail band chosen uniformly; returns ``(band, index)``.

    ``rng_seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = np.random.default_rng(rng_seed)
    i = int(rng.integers(3))
    return hfs[i], i
