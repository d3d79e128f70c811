import numpy as np
import pytest

from swarmct import phantoms, recon, score, sde, tomo, wavelet
from swarmct.errors import ArgumentError, ConfigurationError, NumericError

SIZE = 16
GEO = tomo.Geometry.for_image(SIZE, 12)
SCHED = sde.NoiseSchedule(0.01, 5.0, 12)


def _prior(x, t):
    # unit Gaussian prior: any shape works for both stages
    return score.GaussianScore(0.0, 1.0, SCHED)(x, t)


@pytest.fixture(scope="module")
def measurement():
    img = phantoms.shepp_logan(SIZE)
    return tomo.forward_project(img, GEO)


def _cfg(op, mode="swarm", **kw):
    return recon.ReconConfig(op, GEO, SIZE, _prior, _prior, schedule=SCHED, mode=mode, **kw)


@pytest.mark.parametrize("mode", recon.MODES)
def test_full_view_is_fbp_fixed_point(measurement, mode):
    op = tomo.SamplingOperator.uniform(12, 12)
    img, sino, trace = recon.reconstruct(measurement, _cfg(op, mode))
    assert np.array_equal(sino, measurement)
    assert np.abs(img - tomo.fbp(measurement, GEO, SIZE)).max() <= 1e-6


@pytest.mark.parametrize("merge_every_step", [False, True])
def test_trace_invariants(measurement, merge_every_step):
    op = tomo.SamplingOperator.uniform(12, 4)
    y = tomo.subsample(measurement, op)
    img, sino, trace = recon.swarm_reconstruct(y, _cfg(op, merge_every_step=merge_every_step))
    assert img.shape == (SIZE, SIZE) and sino.shape == GEO.shape
    assert all(np.isfinite(r.residual_before) for r in trace.records)
    assert trace.max_post_dc_residual() == 0.0
    assert np.array_equal(sino[list(op.kept_indices)], y)
    assert trace.ll_merge_error <= 1e-10
    merges = [r for r in trace.records if r.stage == "merge"]
    assert len(merges) == (SCHED.n_steps - 1 if merge_every_step else 1)
    # every step runs predictor and corrector in both domains
    per_step = {r.t for r in trace.records if r.stage == "hf_corr_3"}
    assert per_step == set(range(1, SCHED.n_steps))


def test_merge_keeps_stage_one_approximation(measurement):
    op = tomo.SamplingOperator.uniform(12, 4)
    _, sino_srm, _ = recon.srm_only_reconstruct(tomo.subsample(measurement, op), _cfg(op))
    _, sino_sw, _ = recon.swarm_reconstruct(tomo.subsample(measurement, op), _cfg(op))
    # same seed, same stage-one stream: the swarm output differs from the SRM output
    # only in its detail bands, apart from the rows restored by the final DC
    dropped = [i for i in range(12) if i not in op.kept_indices]
    ll_srm = wavelet.dwt2(sino_srm).ll
    merged = wavelet.merge(ll_srm, wavelet.dwt2(sino_sw).hf, GEO.shape)
    assert np.abs(wavelet.dwt2(merged).ll - ll_srm).max() <= 1e-10
    assert not np.array_equal(sino_srm[dropped], sino_sw[dropped])


def test_mode_stages_partition_swarm(measurement):
    op = tomo.SamplingOperator.uniform(12, 4)
    y = tomo.subsample(measurement, op)
    stages = {m: recon.reconstruct(y, _cfg(op, m))[2].stages() for m in recon.MODES}
    assert stages["srm_only"] == {"sino_pred", "sino_corr", "sino_denoise"}
    assert not any(s.startswith("hf_") for s in stages["srm_only"])
    assert not stages["shd_only"] & {"sino_pred", "sino_corr"}
    assert stages["srm_only"] | stages["shd_only"] == stages["swarm"]
    assert not stages["srm_only"] & stages["shd_only"]


def test_final_denoise_is_optional(measurement):
    op = tomo.SamplingOperator.uniform(12, 4)
    y = tomo.subsample(measurement, op)
    on = recon.reconstruct(y, _cfg(op))
    off = recon.reconstruct(y, _cfg(op, denoise_final=False))
    assert "sino_denoise" in on[2].stages() and "hf_denoise_1" in on[2].stages()
    assert not {"sino_denoise", "hf_denoise_1"} & off[2].stages()
    # same path up to the last step, where a zero-mean unit prior shrinks by 1 / (1 + sigma_0^2)
    on = recon.reconstruct(y, _cfg(op, "srm_only"))[1]
    off = recon.reconstruct(y, _cfg(op, "srm_only", denoise_final=False))[1]
    dropped = [i for i in range(12) if i not in op.kept_indices]
    assert np.allclose(on[dropped], off[dropped] / (1 + SCHED[0] ** 2), rtol=1e-12)


def test_determinism_and_batching(measurement):
    op = tomo.SamplingOperator.uniform(12, 6)
    y = tomo.subsample(measurement, op)
    a = recon.swarm_reconstruct(y, _cfg(op, rng_seed=3))
    b = recon.swarm_reconstruct(y, _cfg(op, rng_seed=3))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert a[2].to_text() == b[2].to_text()
    c = recon.swarm_reconstruct(y, _cfg(op, rng_seed=4))
    assert not np.array_equal(a[1], c[1])
    batch = recon.swarm_reconstruct(np.stack([y, 2 * y]), _cfg(op, rng_seed=3))
    assert batch[0].shape == (2, SIZE, SIZE)
    assert np.array_equal(batch[1][1][list(op.kept_indices)], 2 * y)


def test_zero_filled_input_equals_compact(measurement):
    op = tomo.SamplingOperator.uniform(12, 6)
    a = recon.swarm_reconstruct(tomo.subsample(measurement, op), _cfg(op))
    b = recon.swarm_reconstruct(tomo.mask_rows(measurement, op), _cfg(op))
    assert np.array_equal(a[1], b[1])


def test_snapshots(measurement):
    op = tomo.SamplingOperator.uniform(12, 6)
    _, _, trace = recon.swarm_reconstruct(tomo.subsample(measurement, op), _cfg(op, snapshot_every=5))
    assert [t for t, _ in trace.snapshots] == [10, 5]
    assert trace.snapshots[0][1].shape == GEO.shape
    assert trace.to_text().splitlines()[0] == "t\tstage\tresidual_before\tresidual_after"


def test_configuration_errors(measurement, tmp_path):
    op = tomo.SamplingOperator.uniform(12, 6)
    with pytest.raises(ConfigurationError):
        recon.ReconConfig(op, GEO, SIZE, mode="both")
    with pytest.raises(ConfigurationError):
        recon.ReconConfig(tomo.SamplingOperator.uniform(10, 5), GEO, SIZE)
    with pytest.raises(ConfigurationError):
        recon.swarm_reconstruct(tomo.subsample(measurement, op),
                                recon.ReconConfig(op, GEO, SIZE, _prior, None, schedule=SCHED))
    # a checkpoint trained on other sinogram dimensions is refused
    other = np.random.default_rng(0).random((4, 20, 20))
    ck = score.train_srm(other, None, score.TrainConfig(n_iterations=0, arch={"channels": [4],
                                                                            "emb_dim": 4}))
    path = tmp_path / "srm.ckpt"
    score.save_checkpoint(ck, path)
    cfg = recon.ReconConfig(op, GEO, SIZE, path, _prior, schedule=SCHED)
    with pytest.raises(ConfigurationError):
        recon.swarm_reconstruct(tomo.subsample(measurement, op), cfg)
    shd = score.train_shd(other, score.TrainConfig(n_iterations=0, arch={"channels": [4], "emb_dim": 4}))
    cfg = recon.ReconConfig(op, GEO, SIZE, shd, _prior, schedule=SCHED)
    with pytest.raises(ConfigurationError):
        recon.swarm_reconstruct(tomo.subsample(measurement, op), cfg)


def test_non_finite_inputs_and_states(measurement):
    op = tomo.SamplingOperator.uniform(12, 6)
    y = tomo.subsample(measurement, op)
    bad = y.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ArgumentError):
        recon.swarm_reconstruct(bad, _cfg(op))
    blowup = lambda x, t: np.full_like(x, np.inf)
    cfg = recon.ReconConfig(op, GEO, SIZE, blowup, _prior, schedule=SCHED)
    with pytest.raises(NumericError, match="t=11"):
        recon.swarm_reconstruct(y, cfg)


def test_trained_checkpoints_run_end_to_end(measurement, tmp_path):
    # untrained networks still have to honour scaling, shapes and DC
    op = tomo.SamplingOperator.uniform(12, 4)
    sinos = measurement[None] * np.linspace(0.5, 1.5, 4)[:, None, None]
    arch = {"channels": [4, 8], "emb_dim": 4}
    srm = score.train_srm(sinos, None, score.TrainConfig(n_iterations=2, batch_size=2, arch=arch))
    shd = score.train_shd(sinos, score.TrainConfig(n_iterations=2, batch_size=2, arch=arch))
    score.save_checkpoint(srm, tmp_path / "s.ckpt")
    score.save_checkpoint(shd, tmp_path / "h.ckpt")
    y = tomo.subsample(measurement, op)
    for mode in recon.MODES:
        cfg = recon.ReconConfig(op, GEO, SIZE, tmp_path / "s.ckpt", tmp_path / "h.ckpt",
                                schedule=SCHED, mode=mode)
        img, sino, trace = recon.reconstruct(y, cfg)
        assert np.all(np.isfinite(img))
        assert np.array_equal(sino[list(op.kept_indices)], y)
        assert trace.max_post_dc_residual() == 0.0
