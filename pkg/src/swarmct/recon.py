"""Two-stage sparse-view reconstruction in the sinogram and sinogram-wavelet domains.

Stage one runs predictor-corrector sampling of the full-view sinogram under
the sinogram prior, with hard data consistency after every update.  Stage two
takes the detail bands of the stage-one sinogram and refines each of them
under the detail-band prior; a band's data consistency is enforced by
resynthesising the sinogram with that band swapped in, replacing the measured
rows and re-extracting the band.  After the loop the retained approximation
band and the refined details are merged and passed to FBP.

Measurements may carry leading batch axes; every slice is reconstructed
independently but the network calls are batched.  Sinograms are scaled by
the checkpoint's ``data_scale`` while sampling and scaled back at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import score as score_mod
from .errors import ArgumentError, ConfigurationError, NumericError
from .sde import (LangevinConfig, NoiseSchedule, corrector_step, dc_sinogram, full_measurement,
                  kept_residual, predictor_step, step_rng, tweedie_denoise)
from .tomo import Geometry, SamplingOperator, fbp
from .wavelet import HighFrequencySet, dwt2, merge

MODES = ("swarm", "srm_only", "shd_only")

# sub-stream offsets so every band and corrector sweep draws its own noise
_HF_SUB = 100


@dataclass
class ReconConfig:
    """Reconstruction settings.

    ``srm_ckpt`` and ``shd_ckpt`` accept a checkpoint path, loaded
    :class:`~swarmct.score.ScoreModelParams` or any ``score(x, t)`` callable
    (callables are used as-is, without data scaling).  ``geometry`` and
    ``image_size`` describe the final FBP.
    """

    sampling: SamplingOperator
    geometry: Geometry
    image_size: int
    srm_ckpt: object = None
    shd_ckpt: object = None
    schedule: NoiseSchedule = field(default_factory=lambda: NoiseSchedule.for_data(1.0))
    langevin: LangevinConfig = field(default_factory=LangevinConfig)
    rng_seed: int = 0
    snapshot_every: int = 0
    mode: str = "swarm"
    merge_every_step: bool = False
    filter: str = "ram-lak"
    denoise_final: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.schedule.n_steps < 2:
            raise ConfigurationError("schedule needs T >= 2")
        if self.sampling.full_angles != self.geometry.n_angles:
            raise ConfigurationError(
                f"sampling operator covers {self.sampling.full_angles} angles, "
                f"geometry has {self.geometry.n_angles}")
        if self.snapshot_every < 0:
            raise ConfigurationError("snapshot_every must be >= 0")
        self.geometry.check_image(self.image_size)


@dataclass
class TraceRecord:
    t: int
    stage: str
    residual_before: float
    residual_after: float

    def line(self) -> str:
        return f"{self.t}\t{self.stage}\t{self.residual_before:.9e}\t{self.residual_after:.9e}"


@dataclass
class ReconTrace:
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (t, stage-one sinogram in measurement units)
    ll_merge_error: float = 0.0  # max |LL(merged) - retained LL| over all merges

    def stages(self) -> set:
        return {r.stage for r in self.records}

    def to_text(self) -> str:
        head = "t\tstage\tresidual_before\tresidual_after\n"
        return head + "".join(r.line() + "\n" for r in self.records)

    def max_post_dc_residual(self) -> float:
        return max((r.residual_after for r in self.records), default=0.0)


# ---------------------------------------------------------------------------
# score plumbing

def _resolve_score(ckpt, family, sched, data_scale):
    """Returns ``(score_fn, model_scale)``; ``model_scale`` is None for plain callables."""
    if ckpt is None:
        raise ConfigurationError(f"{family} model required for this mode")
    if callable(ckpt) and not isinstance(ckpt, score_mod.ScoreModelParams):
        return ckpt, None
    params = ckpt
    if isinstance(ckpt, (str, Path)):
        params = score_mod.load_checkpoint(ckpt)
    if params.family != family:
        raise ConfigurationError(f"expected a {family} checkpoint, got {params.family}")
    model_scale = float(params.meta.get("data_scale", 1.0))
    # sampler runs in units of data_scale; the model expects its own units
    return score_mod.NetworkScore(params, sched, scale=data_scale / model_scale), model_scale


def _check_shape(ckpt, family, shape):
    if isinstance(ckpt, (str, Path)):
        ckpt = score_mod.load_checkpoint(ckpt)
    if isinstance(ckpt, score_mod.ScoreModelParams):
        want = ckpt.meta.get("data_shape")
        if want is not None and tuple(want) != tuple(shape):
            raise ConfigurationError(
                f"{family} checkpoint was trained on {tuple(want)} inputs, got {tuple(shape)}")
    return ckpt


# ---------------------------------------------------------------------------
# helpers

def _dc(x, y, op, trace, t, stage):
    before = kept_residual(x, y, op)
    out = dc_sinogram(x, y, op)
    after = float(np.max(kept_residual(out, y, op)))
    if after != 0.0:
        raise NumericError(f"measured rows not restored at t={t}, stage {stage}: {after}")
    trace.records.append(TraceRecord(t, stage, float(np.max(before)), after))
    return out


def _finite(x, t, stage):
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite state at t={t}, stage {stage}")
    return x


def _hf_dc(bands, ll, hf_s, y, op, shape, trace, t, stage):
    """Per-band consistency: swap band i into the stage-one details, DC the rows, re-extract."""
    out = np.empty_like(bands)
    for i in range(3):
        sino = merge(ll, hf_s.replace(i, bands[..., i, :, :]), shape)
        fixed = _dc(sino, y, op, trace, t, f"{stage}_{i + 1}")
        out[..., i, :, :] = dwt2(fixed).hf[i]
    return out


def _band_noise(seed, t, kind, sub, shape):
    # shape (..., 3, h, w); one independent stream per band
    z = np.empty(shape)
    for i in range(3):
        z[..., i, :, :] = step_rng(seed, t, kind, _HF_SUB * (i + 1) + sub).standard_normal(
            shape[:-3] + shape[-2:])
    return z


# ---------------------------------------------------------------------------
# main loop

def _reconstruct(y_sparse, cfg: ReconConfig, mode: str):
    op, sched, lcfg, seed = cfg.sampling, cfg.schedule, cfg.langevin, cfg.rng_seed
    n_det = cfg.geometry.n_detectors
    y_meas = np.asarray(y_sparse, dtype=float)
    y_full = full_measurement(y_meas, op, n_det)
    if y_full.shape[-2:] != cfg.geometry.shape:
        raise ConfigurationError(
            f"measurement shape {y_meas.shape[-2:]} does not fit geometry {cfg.geometry.shape}")
    if not np.all(np.isfinite(y_full)):
        raise ArgumentError("measurement contains non-finite values")
    shape = cfg.geometry.shape
    use_srm = mode in ("swarm", "srm_only")
    use_shd = mode in ("swarm", "shd_only")

    scale = 1.0
    srm = shd = None
    if use_srm:
        ck = _check_shape(cfg.srm_ckpt, "SRM", shape)
        if isinstance(ck, score_mod.ScoreModelParams):
            scale = float(ck.meta.get("data_scale", 1.0))
    if use_shd:
        band_shape = ((shape[0] + 1) // 2, (shape[1] + 1) // 2)
        ck_h = _check_shape(cfg.shd_ckpt, "SHD", band_shape)
        if not use_srm and isinstance(ck_h, score_mod.ScoreModelParams):
            scale = float(ck_h.meta.get("data_scale", 1.0))
    if use_srm:
        srm, _ = _resolve_score(ck, "SRM", sched, scale)
    if use_shd:
        shd, _ = _resolve_score(ck_h, "SHD", sched, scale)

    y = y_full / scale
    batch = y.shape[:-2]
    trace = ReconTrace()
    T = sched.n_steps

    if use_srm:
        x = sched.sigma_max * step_rng(seed, T, "init", 0).standard_normal(batch + shape)
    else:
        # without a sinogram prior a noise state could never be denoised; start from zero fill
        x = np.zeros(batch + shape)
    x = dc_sinogram(x, y, op)
    hf_shape = batch + (3,) + dwt2(np.zeros(shape)).ll.shape
    hf = _band_noise(seed, T, "init", 0, hf_shape) * sched.sigma_max if use_shd else None

    for t in range(T - 1, 0, -1):
        if use_srm:
            x = _finite(predictor_step(x, t, srm, sched, seed), t, "sino_pred")
            x = _dc(x, y, op, trace, t, "sino_pred")
            for j in range(lcfg.n_corrector_steps):
                x = _finite(corrector_step(x, t - 1, srm, lcfg, seed, sub=j), t, "sino_corr")
                x = _dc(x, y, op, trace, t, "sino_corr")
        # without the sinogram prior x only changes at a merge, which applies DC itself
        if use_shd:
            bands_s = dwt2(x)
            hf_s = bands_s.hf
            if t < T - 1:
                hf = hf_s.stack()
            z = _band_noise(seed, t, "predictor", 0, hf.shape)
            hf = _finite(predictor_step(hf, t, shd, sched, noise=z), t, "hf_pred")
            hf = _hf_dc(hf, bands_s.ll, hf_s, y, op, shape, trace, t, "hf_pred")
            for j in range(lcfg.n_corrector_steps):
                z = _band_noise(seed, t, "corrector", j + 1, hf.shape)
                hf = _finite(corrector_step(hf, t - 1, shd, lcfg, noise=z), t, "hf_corr")
                hf = _hf_dc(hf, bands_s.ll, hf_s, y, op, shape, trace, t, "hf_corr")
            if t == 1 and cfg.denoise_final:
                hf = _hf_dc(tweedie_denoise(hf, 0, shd, sched), bands_s.ll, hf_s, y, op, shape,
                            trace, t, "hf_denoise")
        # the loop ends at sigma_min; strip that residual noise.  The detail bands
        # above still see the noisy state, which matches the level their steps assume.
        final = t == 1 and cfg.denoise_final
        if use_srm and final:
            x = _dc(tweedie_denoise(x, 0, srm, sched), y, op, trace, t, "sino_denoise")
        if use_shd and (cfg.merge_every_step or t == 1):
            ll = dwt2(x).ll if use_srm and final else bands_s.ll
            x = _merge(ll, hf, shape, y, op, trace, t)
        if cfg.snapshot_every and t % cfg.snapshot_every == 0:
            trace.snapshots.append((t, dc_sinogram(x * scale, y_full, op)))

    # undo the scaling; measured rows are copied back so they hold y bit-exactly
    sino = dc_sinogram(x * scale, y_full, op)
    if batch:
        flat = sino.reshape(-1, *shape)
        image = np.stack([fbp(s, cfg.geometry, cfg.image_size, cfg.filter) for s in flat])
        image = image.reshape(*batch, cfg.image_size, cfg.image_size)
    else:
        image = fbp(sino, cfg.geometry, cfg.image_size, cfg.filter)
    return image, sino, trace


def _merge(ll, hf, shape, y, op, trace, t):
    merged = merge(ll, HighFrequencySet.from_stack(hf), shape)
    err = float(np.max(np.abs(dwt2(merged).ll - ll)))
    trace.ll_merge_error = max(trace.ll_merge_error, err)
    # independently corrected bands need not agree on the measured rows; restore them
    return _dc(merged, y, op, trace, t, "merge")


def swarm_reconstruct(y_sparse, cfg: ReconConfig):
    """Full two-stage reconstruction; returns ``(image, sinogram, trace)``.

    ``y_sparse`` is either the compact measurement (kept rows only) or a
    full-view array whose kept rows hold the measurement.
    """
    return _reconstruct(y_sparse, cfg, "swarm")


def srm_only_reconstruct(y_sparse, cfg: ReconConfig):
    """Sinogram stage only; the detail-band loop is skipped."""
    return _reconstruct(y_sparse, cfg, "srm_only")


def shd_only_reconstruct(y_sparse, cfg: ReconConfig):
    """Detail-band loop only; the sinogram state is updated by row replacement alone."""
    return _reconstruct(y_sparse, cfg, "shd_only")


def reconstruct(y_sparse, cfg: ReconConfig):
    """Dispatch on ``cfg.mode``."""
    return _reconstruct(y_sparse, cfg, cfg.mode)
