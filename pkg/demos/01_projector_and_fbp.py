"""Projector and FBP tour: chords of a disk, then Shepp-Logan from fewer and fewer views."""
import math

import numpy as np

from swarmct import metrics, phantoms, tomo

# a disk of radius 40 seen from 36 angles; the centre ray should read the diameter
size, r = 128, 40.0
geo = tomo.Geometry.for_image(size, 36)
sino = tomo.forward_project(phantoms.disk(size, r, supersample=8), geo)
print("sinogram shape", sino.shape)

for k in (geo.n_detectors // 2, geo.n_detectors // 2 + 20, geo.n_detectors // 2 + 34):
    t = geo.detector_positions[k]
    chord = 2 * math.sqrt(r * r - t * t)
    print(f"offset {t:5.1f}  chord {chord:6.2f}  projector {sino[:, k].mean():6.2f}")

# FBP at a finer detector pitch, full 720 views down to 30
img = phantoms.shepp_logan(size)
geo = tomo.Geometry.for_image(size, 720, detector_spacing=0.5)
full = tomo.forward_project(img, geo)
for n in (720, 180, 90, 30):
    op = tomo.SamplingOperator.uniform(720, n)
    rec = tomo.fbp(tomo.subsample(full, op), geo, size, angles=geo.angles[list(op.kept_indices)])
    print(f"{n:4d} views  PSNR {metrics.psnr(rec, img):5.2f} dB  SSIM {metrics.ssim(rec, img):.3f}")

# the adjoint pair: <A x, y> == <x, A^T y>
rng = np.random.default_rng(0)
geo = tomo.Geometry.for_image(32, 30)
x, y = rng.random((32, 32)), rng.standard_normal(geo.shape)
print("adjoint gap", np.vdot(tomo.forward_project(x, geo), y) - np.vdot(x, tomo.backproject(y, geo, 32)))
