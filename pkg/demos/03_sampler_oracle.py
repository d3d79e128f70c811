"""Predictor-corrector sampling with an exact Gaussian score."""
import numpy as np

from swarmct import sde
from swarmct.score import GaussianScore

rng = np.random.default_rng(0)
mu, s2 = rng.uniform(-1, 1, (16, 16)), 0.2
sched = sde.NoiseSchedule.for_data(float(np.abs(mu).max() + 3 * np.sqrt(s2)))
print("sigma grid", sched.sigmas[:3], "...", sched.sigmas[-2:])

prior = GaussianScore(mu, s2, sched)
for snr in (0.0, 0.16):
    out = sde.reverse_sample(prior, sched, sde.LangevinConfig(snr=snr), (500, 16, 16), rng_seed=1)
    ratio = out.std(axis=0, ddof=1) / np.sqrt(s2 + sched.sigma_min ** 2)
    err = np.abs(out.mean(axis=0) - mu).max()
    print(f"snr {snr:.2f}: max mean error {err:.3f}, std ratio {ratio.mean():.3f}")

# the same pass on 4x4 images: per-sample norms get noisy and the corrector overshoots
small = GaussianScore(mu[:4, :4], s2, sched)
out = sde.reverse_sample(small, sched, sde.LangevinConfig(), (4000, 4, 4), rng_seed=2)
print("4x4 std ratio", (out.std(axis=0) / np.sqrt(s2)).mean())
