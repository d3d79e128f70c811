"""Score functions: an analytic Gaussian oracle, a small noise-conditioned U-Net,
denoising score matching and the SRM / SHD training loops.

Network scores are preconditioned as ``s(x, sigma) = F(x / sqrt(sigma^2 + sigma_data^2), sigma) / sigma``
so ``F`` regresses the negated unit noise; with the ``sigma^2`` weighting the
DSM loss is then ``mean((F + z)^2)``.
"""

from __future__ import annotations

import json
import math
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from . import masks as masks_mod
from .errors import ArgumentError, ConfigurationError, NumericError, StorageError
from .sde import NoiseSchedule
from .wavelet import HighFrequencySet, dwt2, select_random_hf

FAMILIES = ("SRM", "SHD")


# ---------------------------------------------------------------------------
# analytic oracle

class GaussianScore:
    """Exact score of ``N(mu, s2 I)`` convolved with the VE kernel at level ``t``.

    ``s2`` may be a scalar or a per-pixel variance broadcastable against ``mu``.
    """

    def __init__(self, mu, s2, sched: NoiseSchedule):
        s2 = np.asarray(s2, dtype=float)
        if not np.all(s2 > 0):
            raise ArgumentError("s2 must be positive")
        self.mu = np.asarray(mu, dtype=float)
        self.s2 = float(s2) if s2.ndim == 0 else s2
        self.sched = sched

    def __call__(self, x, t):
        return (self.mu - np.asarray(x, dtype=float)) / (self.s2 + self.sched[t] ** 2)

    def log_density(self, x, t):
        var = self.s2 + self.sched[t] ** 2
        r = np.asarray(x, dtype=float) - self.mu
        var = np.broadcast_to(var, r.shape)
        return float(-0.5 * (r * r / var).sum() - 0.5 * np.log(2 * math.pi * var).sum())


def analytic_gaussian_score(mu, s2: float, sched: NoiseSchedule) -> GaussianScore:
    return GaussianScore(mu, s2, sched)


# ---------------------------------------------------------------------------
# network

DEFAULT_ARCH = {
    "channels": [16, 32, 64, 96],
    "emb_dim": 64,
    "groups": 8,
    "sigma_data": 0.5,
}


def _groups(ch, groups):
    g = min(groups, ch)
    while ch % g:
        g -= 1
    return g


class _FourierEmbedding(nn.Module):
    def __init__(self, dim):
        super().__init__()
        # fixed frequencies; registered as a buffer so they are not trained
        self.register_buffer("freqs", torch.exp(torch.linspace(0.0, math.log(64.0), dim // 2)))

    def forward(self, log_sigma):
        arg = log_sigma[:, None] * self.freqs[None, :]
        return torch.cat([torch.sin(arg), torch.cos(arg)], dim=1)


class _ResBlock(nn.Module):
    def __init__(self, cin, cout, emb_dim, groups):
        super().__init__()
        self.norm1 = nn.GroupNorm(_groups(cin, groups), cin)
        self.conv1 = nn.Conv2d(cin, cout, 3, padding=1)
        self.emb = nn.Linear(emb_dim, cout)
        self.norm2 = nn.GroupNorm(_groups(cout, groups), cout)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1)
        self.skip = nn.Conv2d(cin, cout, 1) if cin != cout else nn.Identity()

    def forward(self, x, emb):
        h = self.conv1(F.silu(self.norm1(x)))
        h = h + self.emb(emb)[:, :, None, None]
        h = self.conv2(F.silu(self.norm2(h)))
        return h + self.skip(x)


class ScoreNet(nn.Module):
    """Encoder-decoder with one residual block per level and skip connections."""

    def __init__(self, channels, emb_dim=64, groups=8, sigma_data=0.5, in_channels=1):
        super().__init__()
        if len(channels) < 1 or any(c < 1 for c in channels) or emb_dim < 2 or emb_dim % 2:
            raise ConfigurationError(f"invalid architecture: channels={channels}, emb_dim={emb_dim}")
        self.levels = len(channels)
        self.sigma_data = float(sigma_data)
        self.fourier = _FourierEmbedding(emb_dim)
        self.emb_mlp = nn.Sequential(nn.Linear(emb_dim, emb_dim), nn.SiLU(), nn.Linear(emb_dim, emb_dim))
        self.head = nn.Conv2d(in_channels, channels[0], 3, padding=1)
        self.down = nn.ModuleList()
        prev = channels[0]
        for ch in channels:
            self.down.append(_ResBlock(prev, ch, emb_dim, groups))
            prev = ch
        self.mid = _ResBlock(prev, prev, emb_dim, groups)
        self.up = nn.ModuleList()
        for ch in reversed(channels):
            self.up.append(_ResBlock(prev + ch, ch, emb_dim, groups))
            prev = ch
        self.out_norm = nn.GroupNorm(_groups(prev, groups), prev)
        self.out = nn.Conv2d(prev, in_channels, 3, padding=1)

    def forward(self, x, sigma):
        """Returns ``sigma * score``, so the score is ``forward(x, sigma) / sigma``.

        Internally the network predicts a denoiser
        ``D = c_skip x + c_out F(c_in x)`` and the score is ``(D - x) / sigma^2``;
        the skip term keeps the score linear in ``x`` far from the data.
        """
        sd2 = self.sigma_data ** 2
        s = sigma[:, None, None, None]
        norm = torch.sqrt(s ** 2 + sd2)
        c_skip = sd2 / norm ** 2
        c_out = s * self.sigma_data / norm
        f = self._body(x / norm, sigma)
        return (c_skip * x + c_out * f - x) / s

    def _body(self, x, sigma):
        mult = 2 ** (self.levels - 1)
        h0, w0 = x.shape[-2:]
        ph, pw = (-h0) % mult, (-w0) % mult
        if ph or pw:
            x = F.pad(x, (0, pw, 0, ph), mode="replicate")
        emb = self.emb_mlp(self.fourier(torch.log(sigma) / 4))
        h = self.head(x)
        skips = []
        for i, block in enumerate(self.down):
            if i:
                h = F.avg_pool2d(h, 2)
            h = block(h, emb)
            skips.append(h)
        h = self.mid(h, emb)
        for i, block in enumerate(self.up):
            skip = skips.pop()
            if h.shape[-2:] != skip.shape[-2:]:
                h = F.interpolate(h, size=skip.shape[-2:], mode="nearest")
            h = block(torch.cat([h, skip], dim=1), emb)
        h = self.out(F.silu(self.out_norm(h)))
        return h[..., :h0, :w0]


def _init_weights(module: nn.Module, gen: torch.Generator):
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.Linear)):
            nn.init.kaiming_normal_(m.weight, mode="fan_in", nonlinearity="relu", generator=gen)
            nn.init.zeros_(m.bias)


@dataclass
class ScoreModelParams:
    arch: dict
    weights: np.ndarray
    family: str = "SRM"
    meta: dict = field(default_factory=dict)
    _module: nn.Module | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        self.weights = np.ascontiguousarray(self.weights)
        expected = count_parameters(self.arch)
        if self.weights.ndim != 1 or self.weights.size != expected:
            raise ConfigurationError(
                f"architecture needs {expected} weights, got array of shape {self.weights.shape}")

    @property
    def dtype(self):
        return torch.float64 if self.weights.dtype == np.float64 else torch.float32

    def module(self) -> ScoreNet:
        """Network carrying these weights (cached; do not mutate it)."""
        if self._module is None:
            net = _make_net(self.arch).to(self.dtype)
            nn.utils.vector_to_parameters(torch.from_numpy(self.weights.copy()), net.parameters())
            net.eval()
            self._module = net
        return self._module

    def with_weights(self, weights) -> "ScoreModelParams":
        return ScoreModelParams(dict(self.arch), np.asarray(weights, dtype=self.weights.dtype),
                                self.family, dict(self.meta))


def _make_net(arch) -> ScoreNet:
    try:
        return ScoreNet(list(arch["channels"]), int(arch["emb_dim"]), int(arch.get("groups", 8)),
                        float(arch.get("sigma_data", 0.5)))
    except KeyError as exc:
        raise ConfigurationError(f"architecture descriptor lacks {exc}") from None


def count_parameters(arch) -> int:
    return sum(p.numel() for p in _make_net(arch).parameters())


def build_score_network(arch: dict | None = None, rng_seed: int = 0, family: str = "SRM",
                        dtype=np.float32) -> ScoreModelParams:
    """Kaiming-initialised network weights, reproducible from ``rng_seed``."""
    arch = {**DEFAULT_ARCH, **(arch or {})}
    net = _make_net(arch)
    _init_weights(net, torch.Generator().manual_seed(int(rng_seed)))
    flat = nn.utils.parameters_to_vector(net.parameters()).detach().numpy().astype(dtype)
    return ScoreModelParams(arch, flat, family, {"init_seed": int(rng_seed)})


class NetworkScore:
    """Adapts trained weights to the ``score(x, t)`` interface used by the samplers.

    Inputs may have any number of leading batch axes; evaluation is batched
    and gradient-free.  ``scale`` maps caller units to model units
    (``x_model = scale * x``); noise levels are mapped the same way.
    """

    def __init__(self, params: ScoreModelParams, sched: NoiseSchedule, scale: float = 1.0):
        self.params = params
        self.sched = sched
        self.scale = float(scale)
        self.net = params.module()

    def __call__(self, x, t):
        x = np.asarray(x)
        lead, hw = x.shape[:-2], x.shape[-2:]
        xt = torch.from_numpy(np.ascontiguousarray(x.reshape(-1, 1, *hw) * self.scale))
        xt = xt.to(self.params.dtype)
        sigma = torch.full((xt.shape[0],), float(self.sched[t]) * self.scale, dtype=self.params.dtype)
        with torch.no_grad():
            out = self.net(xt, sigma) / sigma[:, None, None, None]
        return (out.numpy().astype(float) * self.scale).reshape(*lead, *hw)


# ---------------------------------------------------------------------------
# checkpoints

MAGIC = b"SWARMCKP"
VERSION = 1


def save_checkpoint(params: ScoreModelParams, path):
    """Write magic, version, JSON header and little-endian weights; atomic via rename."""
    path = Path(path)
    dt = "<f8" if params.weights.dtype == np.float64 else "<f4"
    header = json.dumps({"arch": params.arch, "family": params.family, "meta": params.meta,
                         "dtype": dt, "n_weights": int(params.weights.size)},
                        sort_keys=True).encode("utf-8")
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", VERSION, len(header)))
            fh.write(header)
            fh.write(params.weights.astype(dt).tobytes())
        tmp.replace(path)
    except OSError as exc:
        raise StorageError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> ScoreModelParams:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read checkpoint {path}: {exc}") from exc
    if blob[:8] != MAGIC:
        raise ConfigurationError(f"{path} is not a score checkpoint")
    version, hlen = struct.unpack("<II", blob[8:16])
    if version != VERSION:
        raise ConfigurationError(f"unsupported checkpoint version {version}")
    header = json.loads(blob[16:16 + hlen].decode("utf-8"))
    weights = np.frombuffer(blob[16 + hlen:], dtype=header["dtype"])
    if weights.size != header["n_weights"]:
        raise ConfigurationError(f"{path} is truncated")
    native = np.float64 if header["dtype"] == "<f8" else np.float32
    return ScoreModelParams(header["arch"], weights.astype(native), header["family"], header["meta"])


# ---------------------------------------------------------------------------
# denoising score matching

def _dsm_terms(net, x0, sched, rng, dtype):
    # x0: (B, H, W) numpy; returns torch (F, target) of shape (B, 1, H, W)
    t = rng.integers(sched.n_steps, size=len(x0))
    z = rng.standard_normal(x0.shape)
    sigma = sched.sigmas[t]
    xt = x0 + sigma[:, None, None] * z
    sig_t = torch.from_numpy(sigma).to(dtype)
    out = net(torch.from_numpy(xt[:, None]).to(dtype), sig_t)
    # sigma * (x0 - xt) / sigma^2 == -z
    target = torch.from_numpy(-z[:, None]).to(dtype)
    return out, target, t


def dsm_loss(params: ScoreModelParams, batch, sched: NoiseSchedule, rng_seed=0,
             output_hook=None) -> tuple[float, np.ndarray]:
    """Weighted denoising score-matching loss and its gradient w.r.t. the flat weights.

    ``t`` is drawn uniformly per batch element, the weighting is
    ``lambda_t = sigma_t^2`` and the squared error is averaged over pixels and
    batch.  ``output_hook(out, target)`` may replace the network output (test
    hook).
    """
    x0 = np.asarray(batch, dtype=float)
    if x0.ndim == 2:
        x0 = x0[None]
    if len(x0) == 0:
        raise ArgumentError("empty batch")
    net = _make_net(params.arch).to(params.dtype)
    nn.utils.vector_to_parameters(torch.from_numpy(params.weights.copy()), net.parameters())
    rng = np.random.default_rng(rng_seed)
    out, target, t = _dsm_terms(net, x0, sched, rng, params.dtype)
    if output_hook is not None:
        out = output_hook(out, target)
    loss = ((out - target) ** 2).mean()
    if not torch.isfinite(loss):
        raise NumericError(f"non-finite DSM loss; sampled steps {sorted(set(t.tolist()))}")
    net.zero_grad()
    loss.backward()
    grad = torch.cat([p.grad.reshape(-1) for p in net.parameters()])
    return loss.item(), grad.detach().numpy().astype(params.weights.dtype)


# ---------------------------------------------------------------------------
# training

@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 8
    n_iterations: int = 500
    rng_seed: int = 0
    ema_decay: float = 0.999
    arch: dict | None = None

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ArgumentError("learning_rate must be positive")
        if not 0 <= self.ema_decay < 1:
            raise ArgumentError("ema_decay must be in [0, 1)")
        if self.batch_size < 1 or self.n_iterations < 0:
            raise ArgumentError("batch_size must be >= 1 and n_iterations >= 0")


@dataclass
class TrainRecord:
    iteration: int
    loss: float
    tags: list  # mask kind or band index per batch element
    wall_time: float

    def line(self) -> str:
        return f"{self.iteration}\t{self.loss:.6g}\t{','.join(map(str, self.tags))}\t{self.wall_time:.3f}"


def _prepare(dataset):
    data = np.asarray(dataset, dtype=float)
    if data.ndim == 2:
        data = data[None]
    if data.ndim != 3 or len(data) == 0:
        raise ArgumentError("dataset must be a non-empty stack of sinograms")
    scale = float(np.abs(data).max()) or 1.0
    return data / scale, scale


def ema_update(ema, params, decay: float):
    """In place ``ema <- decay * ema + (1 - decay) * params``."""
    with torch.no_grad():
        for e, p in zip(ema, params):
            e.mul_(decay).add_(p.detach(), alpha=1 - decay)


def _train(family, samples_fn, data_shape, sigma_data, scale, cfg: TrainConfig,
           sched: NoiseSchedule, log, extra_meta):
    arch = {**DEFAULT_ARCH, **(cfg.arch or {}), "sigma_data": sigma_data}
    params = build_score_network(arch, cfg.rng_seed, family)
    meta = {**params.meta, "data_scale": scale, "data_shape": list(data_shape),
            "schedule": [sched.sigma_min, sched.sigma_max, sched.n_steps],
            "train": {"learning_rate": cfg.learning_rate, "batch_size": cfg.batch_size,
                      "n_iterations": cfg.n_iterations, "rng_seed": cfg.rng_seed,
                      "ema_decay": cfg.ema_decay}, **extra_meta}
    params.meta = meta
    if cfg.n_iterations == 0:
        return params
    torch.manual_seed(cfg.rng_seed)
    net = params.module()
    params._module = None
    net.train()
    opt = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate, betas=(0.9, 0.999))
    ema = [p.detach().clone() for p in net.parameters()]
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.n_iterations)
    start = time.perf_counter()
    for it in range(cfg.n_iterations):
        rng = np.random.default_rng(seeds[it])
        x0, tags = samples_fn(rng, cfg.batch_size)
        out, target, _ = _dsm_terms(net, x0, sched, rng, params.dtype)
        loss = ((out - target) ** 2).mean()
        if not torch.isfinite(loss):
            raise NumericError(f"non-finite loss at iteration {it}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        # warm-up keeps short runs from averaging mostly over the initial weights
        ema_update(ema, net.parameters(), min(cfg.ema_decay, (1 + it) / (10 + it)))
        if log is not None:
            log.append(TrainRecord(it, loss.item(), tags, time.perf_counter() - start))
    flat = nn.utils.parameters_to_vector(ema).detach().numpy().astype(params.weights.dtype)
    return params.with_weights(flat)


def train_srm(dataset, mask_spec: masks_mod.MaskSpec | None, cfg: TrainConfig,
              sched: NoiseSchedule | None = None, log: list | None = None) -> ScoreModelParams:
    """Sinogram model trained on masked full-view sinograms.

    Each batch element gets a freshly generated random mask.  Sinograms are
    normalised by the dataset's max magnitude, recorded as
    ``meta['data_scale']``.  Returns the EMA weights; per-iteration records
    are appended to ``log`` when given.
    """
    data, scale = _prepare(dataset)
    spec = mask_spec or masks_mod.MaskSpec()
    sched = sched or NoiseSchedule.for_data(1.0)
    shape = data.shape[1:]

    def samples(rng, n):
        idx = rng.integers(len(data), size=n)
        out, kinds = [], []
        for i in idx:
            m, kind = masks_mod.random_mask(spec, shape, rng)
            out.append(masks_mod.apply_mask(data[i], m))
            kinds.append(kind)
        return np.stack(out), kinds

    return _train("SRM", samples, shape, float(data.std()), scale, cfg, sched, log,
                  {"mask_kind": spec.kind, "mask_params": dict(spec.params)})


def train_shd(dataset, cfg: TrainConfig, sched: NoiseSchedule | None = None,
              log: list | None = None) -> ScoreModelParams:
    """Detail-band model: each element is one uniformly chosen wavelet detail band."""
    data, scale = _prepare(dataset)
    sched = sched or NoiseSchedule.for_data(1.0)
    hf = dwt2(data).hf

    def samples(rng, n):
        idx = rng.integers(len(data), size=n)
        out, bands = [], []
        for i in idx:
            band, k = select_random_hf(HighFrequencySet(hf.lh[i], hf.hl[i], hf.hh[i]), rng)
            out.append(band)
            bands.append(k)
        return np.stack(out), bands

    sigma_data = float(hf.stack().std())
    return _train("SHD", samples, hf.lh.shape[1:], sigma_data, scale, cfg, sched, log, {})


def mean_dsm_loss(params: ScoreModelParams, data, sched: NoiseSchedule, rng_seed=0,
                  repeats: int = 4) -> float:
    """Gradient-free DSM loss averaged over ``repeats`` noise draws of ``data``."""
    net = params.module()
    rng = np.random.default_rng(rng_seed)
    x0 = np.asarray(data, dtype=float)
    total = 0.0
    with torch.no_grad():
        for _ in range(repeats):
            out, target, _ = _dsm_terms(net, x0, sched, rng, params.dtype)
            total += float(((out - target) ** 2).mean())
    return total / repeats
