"""Variance-exploding SDE: noise schedule, perturbation, predictor-corrector steps
and the hard data-consistency projections used during reconstruction.

Arrays may carry leading batch axes; per-sample quantities (norms for the
Langevin step size) are taken over the last two axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ArgumentError, NumericError
from .tomo import SamplingOperator, embed_rows
from .wavelet import HighFrequencySet, extract_hf

# stream tags so predictor, corrector and initial noise never share random numbers
STREAMS = {"init": 0, "predictor": 1, "corrector": 2, "perturb": 3}


def step_rng(seed: int, t: int, kind: str, sub: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, step, stream, sub-step) tuple."""
    key = np.random.SeedSequence([int(seed), int(t), STREAMS[kind], int(sub)])
    return np.random.Generator(np.random.Philox(key))


@dataclass(frozen=True)
class NoiseSchedule:
    """Geometric grid ``sigma_t = sigma_min * (sigma_max / sigma_min) ** (t / (T - 1))``."""

    sigma_min: float = 0.01
    sigma_max: float = 50.0
    n_steps: int = 200

    def __post_init__(self):
        if not 0 < self.sigma_min < self.sigma_max:
            raise ArgumentError(
                f"need 0 < sigma_min < sigma_max, got {self.sigma_min}, {self.sigma_max}")
        if self.n_steps < 2:
            raise ArgumentError("a schedule needs at least 2 steps")

    @classmethod
    def for_data(cls, data_max_abs: float, sigma_min: float = 0.01, n_steps: int = 200,
                 factor: float = 50.0) -> "NoiseSchedule":
        return cls(sigma_min, factor * data_max_abs, n_steps)

    @cached_property
    def sigmas(self) -> np.ndarray:
        t = np.arange(self.n_steps) / (self.n_steps - 1)
        sig = self.sigma_min * (self.sigma_max / self.sigma_min) ** t
        sig[0], sig[-1] = self.sigma_min, self.sigma_max
        return sig

    def __getitem__(self, t: int) -> float:
        return float(self.sigmas[t])

    def check_index(self, t: int):
        if not 0 <= t < self.n_steps:
            raise ArgumentError(f"step index {t} outside [0, {self.n_steps})")


@dataclass(frozen=True)
class LangevinConfig:
    snr: float = 0.16
    n_corrector_steps: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.snr) and self.snr >= 0):
            raise ArgumentError(f"snr must be finite and non-negative, got {self.snr}")
        if self.n_corrector_steps < 0:
            raise ArgumentError("n_corrector_steps must be >= 0")


def _sample_norm(a):
    a = np.asarray(a)
    return np.sqrt((a * a).sum(axis=(-2, -1), keepdims=True))


def _checked_score(score, x, t):
    s = np.asarray(score(x, t), dtype=float)
    if s.shape != np.shape(x):
        raise ArgumentError(f"score returned shape {s.shape} for input {np.shape(x)}")
    if not np.all(np.isfinite(s)):
        raise NumericError(f"score produced non-finite values at step t={t}")
    return s


def perturb(x0, t: int, sched: NoiseSchedule, rng_seed) -> np.ndarray:
    """Draw from the VE kernel ``N(x0, sigma_t^2 I)``."""
    sched.check_index(t)
    x0 = np.asarray(x0, dtype=float)
    rng = np.random.default_rng(rng_seed)
    return x0 + sched[t] * rng.standard_normal(x0.shape)


def predictor_step(x, t: int, score, sched: NoiseSchedule, rng_seed=0, noise=None) -> np.ndarray:
    """Reverse-diffusion Euler-Maruyama step from level ``t`` to ``t - 1``.

    ``x + d * s(x, t) + sqrt(d) * z`` with ``d = sigma_t^2 - sigma_{t-1}^2``.
    ``noise`` overrides the Gaussian draw ``z`` (use zeros for a drift-only step).
    """
    sched.check_index(t)
    if t < 1:
        raise ArgumentError("predictor needs t >= 1")
    x = np.asarray(x, dtype=float)
    d = sched[t] ** 2 - sched[t - 1] ** 2
    if noise is None:
        noise = step_rng(rng_seed, t, "predictor").standard_normal(x.shape)
    return x + d * _checked_score(score, x, t) + np.sqrt(d) * noise


def langevin_step_size(score_value, noise, snr: float) -> np.ndarray:
    """``2 * (snr * |z| / |s|)^2`` per sample; zero where the score vanishes."""
    s_norm = _sample_norm(score_value)
    z_norm = _sample_norm(noise)
    safe = np.where(s_norm > 0, s_norm, 1.0)
    return np.where(s_norm > 0, 2 * (snr * z_norm / safe) ** 2, 0.0)


def corrector_step(x, t: int, score, cfg: LangevinConfig, rng_seed=0, noise=None,
                   sub: int = 0) -> np.ndarray:
    """One Langevin MCMC update at noise level ``t``: ``x + eps s + sqrt(2 eps) z``."""
    x = np.asarray(x, dtype=float)
    s = _checked_score(score, x, t)
    if noise is None:
        noise = step_rng(rng_seed, t, "corrector", sub).standard_normal(x.shape)
    eps = langevin_step_size(s, noise, cfg.snr)
    return x + eps * s + np.sqrt(2 * eps) * noise


def tweedie_denoise(x, t: int, score, sched: NoiseSchedule) -> np.ndarray:
    """Posterior-mean estimate ``x + sigma_t^2 s(x, t)`` of the clean sample at level ``t``."""
    sched.check_index(t)
    x = np.asarray(x, dtype=float)
    return x + sched[t] ** 2 * _checked_score(score, x, t)


def reverse_sample(score, sched: NoiseSchedule, cfg: LangevinConfig, shape, rng_seed=0,
                   x_init=None) -> np.ndarray:
    """Unconditional predictor-corrector pass from ``N(0, sigma_max^2)`` down to ``sigma_min``."""
    if x_init is None:
        x = sched.sigma_max * step_rng(rng_seed, sched.n_steps, "init").standard_normal(shape)
    else:
        x = np.array(x_init, dtype=float)
    for t in range(sched.n_steps - 1, 0, -1):
        x = predictor_step(x, t, score, sched, rng_seed)
        for j in range(cfg.n_corrector_steps):
            x = corrector_step(x, t - 1, score, cfg, rng_seed, sub=j)
    return x


def full_measurement(y_sparse, op: SamplingOperator, n_detectors: int | None = None) -> np.ndarray:
    """Full-view array holding the measured rows (accepts compact or zero-filled input)."""
    y = np.asarray(y_sparse, dtype=float)
    if y.shape[-2] == op.full_angles:
        return y
    return embed_rows(y, op, n_detectors)


def dc_sinogram(x, y_sparse, op: SamplingOperator) -> np.ndarray:
    """Replace the measured angle rows of ``x`` with the measurement; other rows untouched."""
    x = np.asarray(x, dtype=float)
    op._check(x)
    y = full_measurement(y_sparse, op, x.shape[-1])
    if y.shape[-1] != x.shape[-1]:
        raise ArgumentError(f"measurement width {y.shape[-1]} differs from sinogram {x.shape[-1]}")
    out = x.copy()
    kept = list(op.kept_indices)
    out[..., kept, :] = np.broadcast_to(y, out.shape)[..., kept, :]
    return out


def dc_wavelet_hf(x_s_half, y_sparse, op: SamplingOperator) -> HighFrequencySet:
    """Detail bands of the data-consistent sinogram."""
    return extract_hf(dc_sinogram(x_s_half, y_sparse, op))


def kept_residual(x, y_sparse, op: SamplingOperator) -> np.ndarray:
    """``|P x - P y|`` over the measured rows, one value per sample."""
    x = np.asarray(x, dtype=float)
    y = full_measurement(y_sparse, op, x.shape[-1])
    kept = list(op.kept_indices)
    diff = x[..., kept, :] - np.broadcast_to(y, x.shape)[..., kept, :]
    return np.sqrt((diff * diff).sum(axis=(-2, -1)))
