"""Toy training on 40 ellipse phantoms and a 30-of-90-view reconstruction.

Takes roughly 15 minutes on one CPU core.  Pass a smaller iteration count
as the first argument for a quick look.
"""
import sys
import time

import numpy as np
import torch

from swarmct import metrics, phantoms, recon, score, sde, tomo

torch.set_num_threads(1)
n_iter = int(sys.argv[1]) if len(sys.argv) > 1 else 1400

geo = tomo.Geometry.for_image(64, 90)
train = phantoms.make_phantoms(phantoms.PhantomSpec("random_ellipses", 64, rng_seed=1, count=40))
test = np.stack(phantoms.make_phantoms(phantoms.PhantomSpec("random_ellipses", 64, rng_seed=2, count=4)))
sinos = np.stack([tomo.forward_project(p, geo) for p in train])

t0 = time.perf_counter()
log = []
srm = score.train_srm(sinos, None, score.TrainConfig(n_iterations=n_iter), log=log)
print(f"SRM: {time.perf_counter() - t0:.0f}s, loss {np.mean([r.loss for r in log[:20]]):.3f}"
      f" -> {np.mean([r.loss for r in log[-20:]]):.3f}")
t0 = time.perf_counter()
shd = score.train_shd(sinos, score.TrainConfig(n_iterations=max(1, n_iter * 3 // 7)))
print(f"SHD: {time.perf_counter() - t0:.0f}s")

op = tomo.SamplingOperator.uniform(90, 30)
y = tomo.subsample(np.stack([tomo.forward_project(p, geo) for p in test]), op)
fbp = [tomo.fbp(r, geo, 64, angles=geo.angles[list(op.kept_indices)]) for r in y]
print("fbp      ", np.mean([metrics.psnr(a, b) for a, b in zip(fbp, test)]))
for mode in recon.MODES:
    img, sino, trace = recon.reconstruct(y, recon.ReconConfig(op, geo, 64, srm, shd, mode=mode,
                                                              langevin=sde.LangevinConfig(snr=0.5)))
    worst = max((r.residual_after for r in trace.records), default=0.0)
    print(f"{mode:9s}", np.mean([metrics.psnr(a, b) for a, b in zip(img, test)]),
          f"({len(trace.records)} DC steps, worst residual {worst})")
