"""Haar bands of a sinogram and what random masking does to corpus variance."""
import numpy as np

from swarmct import checks, masks, phantoms, tomo, wavelet

geo = tomo.Geometry.for_image(64, 90)
sino = tomo.forward_project(phantoms.shepp_logan(64), geo)
b = wavelet.dwt2(sino)
print("bands", b.ll.shape, b.lh.shape, b.hl.shape, b.hh.shape)
print("round trip error", np.abs(wavelet.idwt2(b) - sino).max())

energy = {name: float((getattr(b, name) ** 2).sum()) for name in ("ll", "lh", "hl", "hh")}
total = sum(energy.values())
for name, e in energy.items():
    print(f"  {name}: {100 * e / total:6.3f}% of the energy")

# one mask of each kind
rng = np.random.default_rng(1)
for kind in masks.KINDS:
    m, _ = masks.random_mask(masks.MaskSpec(kind), sino.shape, rng)
    print(f"{kind:12s} keeps {m.mean():.2f} of the sinogram")

# masking a small corpus: the per-pixel variance goes up
pool = checks.sinogram_pool(count=300)
rep = masks.variance_inflation_check(pool[:200], masks.MaskSpec(), trials=100, rng_seed=2)
print(f"variance raw {rep.var_raw:.3f}  masked {rep.var_perturbed:.3f}")
# with {0,1} masks the cross term is not centred; with +-1 masks it is
sym = masks.variance_inflation_check(pool[:200], None, trials=100, rng_seed=2, family="rademacher")
print(f"cross term z-score: binary masks {rep.cross_z:.1f}, +-1 masks {sym.cross_z:.2f}")
