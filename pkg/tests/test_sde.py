import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmct import sde, tomo, wavelet
from swarmct.errors import ArgumentError, NumericError
from swarmct.score import GaussianScore


def _zero_score(x, t):
    return np.zeros_like(x)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(1.5, 1e3), st.integers(2, 1200))
def test_schedule_monotone(smin, ratio, n):
    sched = sde.NoiseSchedule(smin, smin * ratio, n)
    s = sched.sigmas
    assert s[0] == smin and s[-1] == smin * ratio
    assert np.all(np.diff(s) > 0)
    assert np.all(np.diff(s ** 2) > 0)


def test_schedule_geometric_and_validation():
    sched = sde.NoiseSchedule(0.01, 100.0, 5)
    np.testing.assert_allclose(sched.sigmas, [0.01, 0.1, 1.0, 10.0, 100.0], rtol=1e-12)
    assert sde.NoiseSchedule.for_data(2.0).sigma_max == 100.0
    for bad in ((0.0, 1.0, 10), (1.0, 1.0, 10), (0.1, 1.0, 1)):
        with pytest.raises(ArgumentError):
            sde.NoiseSchedule(*bad)
    with pytest.raises(ArgumentError):
        sched.check_index(5)
    with pytest.raises(ArgumentError):
        sde.LangevinConfig(snr=float("nan"))
    with pytest.raises(ArgumentError):
        sde.LangevinConfig(n_corrector_steps=-1)


def test_perturb_vanishing_noise():
    x0 = np.random.default_rng(0).random((16, 16))
    sched = sde.NoiseSchedule(1e-5, 1.0, 10)
    assert np.abs(sde.perturb(x0, 0, sched, 1) - x0).max() < 1e-3
    with pytest.raises(ArgumentError):
        sde.perturb(x0, 10, sched, 1)


def test_perturb_moments():
    # 10^5 draws of a 4-pixel image at the top noise level
    sched = sde.NoiseSchedule(0.01, 3.0, 20)
    x0 = np.array([[0.5, -1.0], [2.0, 0.0]])
    draws = sde.perturb(np.broadcast_to(x0, (100_000, 2, 2)), 19, sched, 11)
    se = 3.0 / np.sqrt(100_000)
    assert np.all(np.abs(draws.mean(0) - x0) < 3 * se)
    assert np.all(np.abs(draws.std(0) / 3.0 - 1) < 0.01)


def test_step_rng_streams_are_independent_and_replayable():
    a = sde.step_rng(3, 10, "predictor").standard_normal(5)
    assert np.array_equal(a, sde.step_rng(3, 10, "predictor").standard_normal(5))
    for other in (sde.step_rng(3, 10, "corrector"), sde.step_rng(3, 9, "predictor"),
                  sde.step_rng(4, 10, "predictor"), sde.step_rng(3, 10, "predictor", 1)):
        assert not np.array_equal(a, other.standard_normal(5))


def test_predictor_identity_under_null_drift_and_noise():
    sched = sde.NoiseSchedule()
    x = np.random.default_rng(1).standard_normal((8, 8))
    out = sde.predictor_step(x, 5, _zero_score, sched, noise=np.zeros_like(x))
    assert np.array_equal(out, x)
    with pytest.raises(ArgumentError):
        sde.predictor_step(x, 0, _zero_score, sched)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 199), st.floats(1e-3, 10.0), st.integers(0, 10 ** 6))
def test_predictor_contracts_toward_mean(t, s2, seed):
    # drift coefficient d / (s2 + sigma_t^2) lies in (0, 1) because d < sigma_t^2
    sched = sde.NoiseSchedule.for_data(1.0)
    rng = np.random.default_rng(seed)
    mu = rng.standard_normal((6, 6))
    score = GaussianScore(mu, s2, sched)
    x = mu + rng.standard_normal((6, 6))
    out = sde.predictor_step(x, t, score, sched, noise=np.zeros_like(x))
    d = sched[t] ** 2 - sched[t - 1] ** 2
    coef = d / (s2 + sched[t] ** 2)
    assert 0 < coef < 1
    np.testing.assert_allclose(out - mu, (1 - coef) * (x - mu), rtol=1e-10, atol=1e-14)
    assert np.linalg.norm(out - mu) < np.linalg.norm(x - mu)


def test_corrector_null_steps():
    x = np.random.default_rng(2).standard_normal((8, 8))
    sched = sde.NoiseSchedule()
    score = GaussianScore(np.zeros((8, 8)), 1.0, sched)
    out = sde.corrector_step(x, 3, score, sde.LangevinConfig(snr=0.0))
    assert np.abs(out - x).max() <= np.finfo(float).eps * np.abs(x).max()
    out = sde.corrector_step(x, 3, _zero_score, sde.LangevinConfig(), noise=np.zeros_like(x))
    assert np.array_equal(out, x)


def test_corrector_step_size_rule():
    s = np.full((4, 4), 2.0)
    z = np.ones((4, 4))
    eps = sde.langevin_step_size(s, z, 0.16)
    assert eps.item() == pytest.approx(2 * (0.16 * 4 / 8) ** 2)
    assert sde.langevin_step_size(np.zeros((4, 4)), z, 0.16).item() == 0.0


def test_corrector_surfaces_non_finite_scores():
    bad = lambda x, t: np.full_like(x, np.nan)
    with pytest.raises(NumericError):
        sde.corrector_step(np.zeros((4, 4)), 1, bad, sde.LangevinConfig())
    with pytest.raises(ArgumentError):
        sde.predictor_step(np.zeros((4, 4)), 1, lambda x, t: np.zeros(3), sde.NoiseSchedule())


def test_langevin_stationary_std():
    # many corrector steps at a fixed level keep N(mu, s2 + sigma_t^2) roughly invariant
    sched = sde.NoiseSchedule(0.01, 5.0, 50)
    t, s2 = 20, 0.3
    mu = np.zeros((16, 16))
    score = GaussianScore(mu, s2, sched)
    target = np.sqrt(s2 + sched[t] ** 2)
    x = target * np.random.default_rng(0).standard_normal((500, 16, 16))
    cfg = sde.LangevinConfig()
    for j in range(200):
        x = sde.corrector_step(x, t, score, cfg, rng_seed=5, sub=j)
    assert abs(x.std() / target - 1) < 0.05
    assert abs(x.mean()) < 3 * target / np.sqrt(x.size) * 5


def test_reverse_pass_matches_gaussian_target():
    # the SNR step-size rule uses per-sample norms, so it needs a reasonably large
    # image; on 4x4 inputs the corrector inflates the std by more than 10%
    sched = sde.NoiseSchedule(0.01, 10.0, 200)
    mu = np.random.default_rng(3).uniform(-1, 1, (16, 16))
    s2 = 0.2
    score = GaussianScore(mu, s2, sched)
    out = sde.reverse_sample(score, sched, sde.LangevinConfig(), (1000, 16, 16), rng_seed=9)
    sd = np.sqrt(s2 + sched.sigma_min ** 2)
    z = (out.mean(0) - mu) / (sd / np.sqrt(1000))
    assert abs(z.mean()) * np.sqrt(z.size) < 3
    assert abs(out.std(0).mean() / sd - 1) < 0.05


def test_reverse_pass_is_replayable():
    sched = sde.NoiseSchedule(0.01, 5.0, 20)
    score = GaussianScore(np.zeros((4, 4)), 1.0, sched)
    a = sde.reverse_sample(score, sched, sde.LangevinConfig(), (3, 4, 4), rng_seed=1)
    b = sde.reverse_sample(score, sched, sde.LangevinConfig(), (3, 4, 4), rng_seed=1)
    assert np.array_equal(a, b)


@pytest.fixture
def op():
    return tomo.SamplingOperator.uniform(12, 4)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 199), st.floats(0.01, 4.0), st.integers(0, 10 ** 6))
def test_tweedie_is_gaussian_posterior_mean(t, s2, seed):
    sched = sde.NoiseSchedule.for_data(1.0)
    rng = np.random.default_rng(seed)
    mu, x = rng.standard_normal((4, 4)), rng.standard_normal((4, 4)) * 5
    out = sde.tweedie_denoise(x, t, GaussianScore(mu, s2, sched), sched)
    expect = mu + s2 / (s2 + sched[t] ** 2) * (x - mu)
    assert np.allclose(out, expect, rtol=1e-12, atol=1e-12)


def test_dc_sinogram_full_view_returns_measurement():
    full = tomo.SamplingOperator.uniform(6, 6)
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, 6, 5))
    assert np.array_equal(sde.dc_sinogram(x, y, full), y)


def test_dc_sinogram_single_row_is_local():
    one = tomo.SamplingOperator(8, (3,))
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 8, 5))
    out = sde.dc_sinogram(x, y[3:4], one)
    assert np.array_equal(out[3], y[3])
    assert np.array_equal(np.delete(out, 3, 0), np.delete(x, 3, 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10 ** 6), st.booleans())
def test_dc_sinogram_projection(k, seed, compact):
    op = tomo.SamplingOperator.uniform(12, k)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 12, 7))
    y = rng.standard_normal((12, 7))
    meas = tomo.subsample(y, op) if compact else tomo.mask_rows(y, op)
    once = sde.dc_sinogram(x, meas, op)
    assert np.array_equal(sde.dc_sinogram(once, meas, op), once)
    kept = list(op.kept_indices)
    assert np.array_equal(once[:, kept], np.broadcast_to(y[kept], once[:, kept].shape))
    dropped = [i for i in range(12) if i not in kept]
    assert np.array_equal(once[:, dropped], x[:, dropped])
    assert np.all(sde.kept_residual(once, meas, op) == 0)


def test_dc_sinogram_shape_errors(op):
    with pytest.raises(ArgumentError):
        sde.dc_sinogram(np.zeros((12, 6)), np.zeros((4, 5)), op)
    with pytest.raises(ArgumentError):
        sde.dc_sinogram(np.zeros((10, 6)), np.zeros((4, 6)), op)


def test_dc_wavelet_hf(op):
    rng = np.random.default_rng(4)
    truth = rng.standard_normal((12, 8))
    x = rng.standard_normal((12, 8))
    y = tomo.subsample(truth, op)
    hf = sde.dc_wavelet_hf(x, y, op)
    want = wavelet.extract_hf(sde.dc_sinogram(x, y, op))
    for i in range(3):
        assert np.array_equal(hf[i], want[i])
    consistent = sde.dc_sinogram(x, y, op)
    again = sde.dc_wavelet_hf(consistent, y, op)
    base = wavelet.extract_hf(consistent)
    assert all(np.array_equal(again[i], base[i]) for i in range(3))
    zero = sde.dc_wavelet_hf(np.zeros((12, 8)), np.zeros((4, 8)), op)
    assert all(np.all(zero[i] == 0) for i in range(3))
