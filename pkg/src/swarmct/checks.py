"""Property harnesses shared by the ``check`` subcommand and the acceptance tests.

Each harness returns a :class:`CheckResult` whose ``passed`` flag applies the
stated tolerance literally; ``details`` carries the numbers behind it so a
failure can be diagnosed from the printed line alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import masks, phantoms, sde, tomo, wavelet
from .score import GaussianScore


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"{status}  {self.name}  ({info}; {self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.4g}"
    return str(v)


def wavelet_round_trip(n_inputs: int = 100, rng_seed: int = 0, max_side: int = 64,
                       budget_s: float = 5.0) -> CheckResult:
    """Perfect reconstruction (1e-10) and energy preservation (1e-9) on random even-sized inputs."""
    start = time.perf_counter()
    rng = np.random.default_rng(rng_seed)
    worst_pr = worst_parseval = 0.0
    for _ in range(n_inputs):
        h, w = 2 * rng.integers(1, max_side // 2 + 1, size=2)
        y = rng.standard_normal((h, w)) * rng.uniform(0.1, 100)
        b = wavelet.dwt2(y)
        worst_pr = max(worst_pr, float(np.abs(wavelet.idwt2(b) - y).max()))
        energy = sum(float((a ** 2).sum()) for a in (b.ll, b.lh, b.hl, b.hh))
        total = float((y ** 2).sum())
        worst_parseval = max(worst_parseval, abs(energy - total) / total)
    secs = time.perf_counter() - start
    ok = worst_pr <= 1e-10 and worst_parseval <= 1e-9 and secs < budget_s
    return CheckResult("wavelet round trip", ok,
                       {"max_pr_error": worst_pr, "max_parseval_rel": worst_parseval,
                        "inputs": n_inputs}, secs)


def sinogram_pool(count: int = 1000, phantom_size: int = 22, n_angles: int = 32,
                  rng_seed: int = 0) -> np.ndarray:
    """Stack of small sinograms of random ellipse phantoms (32x32 by default)."""
    geo = tomo.Geometry.for_image(phantom_size, n_angles)
    imgs = phantoms.make_phantoms(
        phantoms.PhantomSpec("random_ellipses", phantom_size, rng_seed=rng_seed, count=count))
    return np.stack([tomo.forward_project(im, geo) for im in imgs])


def variance_inflation(repetitions: int = 100, corpus_size: int = 200, trials: int = 500,
                       cross_repetitions: int = 10, rng_seed: int = 0, pool=None,
                       budget_s: float = 60.0) -> CheckResult:
    """Monte-Carlo check that random masking inflates the corpus variance.

    Inflation is tested with the shipped binary masks in every repetition.
    The zero-mean cross-term property is tested with symmetric +-1 masks,
    pooled over ``cross_repetitions`` corpora; the shipped masks' cross-term
    z-score is reported alongside for comparison (binary masks have a
    positive mean, so their cross term is not centred).
    """
    start = time.perf_counter()
    pool = sinogram_pool(rng_seed=rng_seed) if pool is None else np.asarray(pool)
    seeds = np.random.SeedSequence(rng_seed).spawn(repetitions + cross_repetitions)
    inflated, gains, shipped_z = 0, [], []
    for r in range(repetitions):
        rng = np.random.default_rng(seeds[r])
        corpus = pool[rng.choice(len(pool), corpus_size, replace=False)]
        rep = masks.variance_inflation_check(corpus, masks.MaskSpec(), trials,
                                             int(rng.integers(2 ** 31)))
        inflated += rep.inflated
        gains.append(rep.var_perturbed / rep.var_raw)
        shipped_z.append(rep.cross_z)
    cross, cross_var = [], []
    for r in range(cross_repetitions):
        rng = np.random.default_rng(seeds[repetitions + r])
        corpus = pool[rng.choice(len(pool), corpus_size, replace=False)]
        rep = masks.variance_inflation_check(corpus, None, trials, int(rng.integers(2 ** 31)),
                                             family="rademacher")
        # normalise by the raw variance so corpora of different spread pool fairly
        cross.append(rep.cross_mean / rep.var_raw)
        cross_var.append((rep.cross_se / rep.var_raw) ** 2)
    pooled = float(np.mean(cross))
    pooled_se = float(np.sqrt(np.sum(cross_var)) / len(cross))
    z = pooled / pooled_se
    secs = time.perf_counter() - start
    frac = inflated / repetitions
    ok = frac >= 0.99 and abs(z) <= 3 and secs < budget_s
    return CheckResult("variance inflation", ok,
                       {"inflated_fraction": frac, "min_gain": min(gains),
                        "cross_mean_rel": pooled, "cross_z": z,
                        "binary_mask_cross_z_median": float(np.median(shipped_z))}, secs)


def sampler_oracle(n_samples: int = 2000, size: int = 16, n_steps: int = 200, s2: float = 0.2,
                   rng_seed: int = 0, budget_s: float = 300.0) -> CheckResult:
    """Predictor-corrector pass with the exact Gaussian score against ``N(mu, s2 I)``.

    Literal per-pixel tests: every pixel mean within 3 standard errors of
    ``mu`` and every pixel std within 5% of the target.  Pooled statistics
    (average z-score, pixel-averaged std ratio) are reported as well.
    """
    start = time.perf_counter()
    mu = np.random.default_rng(rng_seed).uniform(-1, 1, (size, size))
    sched = sde.NoiseSchedule.for_data(float(np.abs(mu).max() + 3 * np.sqrt(s2)),
                                       n_steps=n_steps)
    out = sde.reverse_sample(GaussianScore(mu, s2, sched), sched, sde.LangevinConfig(),
                             (n_samples, size, size), rng_seed=rng_seed + 1)
    target = np.sqrt(s2 + sched.sigma_min ** 2)
    std = out.std(axis=0, ddof=1)
    z = (out.mean(axis=0) - mu) / (std / np.sqrt(n_samples))
    ratio = std / target
    secs = time.perf_counter() - start
    ok = np.abs(z).max() <= 3 and np.abs(ratio - 1).max() <= 0.05 and secs < budget_s
    return CheckResult("sampler vs Gaussian oracle", bool(ok),
                       {"max_abs_z": float(np.abs(z).max()), "pooled_z": float(z.mean() * np.sqrt(z.size)),
                        "max_std_dev": float(np.abs(ratio - 1).max()),
                        "mean_std_ratio": float(ratio.mean()),
                        "pixels_outside_5pct": int((np.abs(ratio - 1) > 0.05).sum())}, secs)


ALL = {"wavelet": wavelet_round_trip, "inflation": variance_inflation, "sampler": sampler_oracle}
