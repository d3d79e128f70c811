import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swarmct import wavelet
from swarmct.errors import ArgumentError


def _haar_matrix(n):
    # rows 0..n/2-1: low-pass pairs, rows n/2..: high-pass pairs (orthonormal)
    m = np.zeros((n, n))
    for k in range(n // 2):
        m[k, 2 * k] = m[k, 2 * k + 1] = 1 / np.sqrt(2)
        m[n // 2 + k, 2 * k] = 1 / np.sqrt(2)
        m[n // 2 + k, 2 * k + 1] = -1 / np.sqrt(2)
    return m


def _brute(y):
    r, c = y.shape
    full = _haar_matrix(r) @ y @ _haar_matrix(c).T
    h, w = r // 2, c // 2
    return full[:h, :w], full[h:, :w], full[:h, w:], full[h:, w:]


even = st.tuples(st.integers(1, 12), st.integers(1, 12)).map(lambda s: (2 * s[0], 2 * s[1]))
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_block_formulas():
    a, b, c, d = 1.0, 2.0, 5.0, 11.0
    bands = wavelet.dwt2(np.array([[a, b], [c, d]]))
    assert bands.ll[0, 0] == pytest.approx((a + b + c + d) / 2)
    assert bands.lh[0, 0] == pytest.approx(((a + b) - (c + d)) / 2)
    assert bands.hl[0, 0] == pytest.approx(((a - b) + (c - d)) / 2)
    assert bands.hh[0, 0] == pytest.approx((a - b - c + d) / 2)


@pytest.mark.parametrize("seed", range(4))
def test_matches_matrix_transform(seed):
    y = np.random.default_rng(seed).standard_normal((10, 14))
    ll, lh, hl, hh = _brute(y)
    bands = wavelet.dwt2(y)
    for got, want in zip((bands.ll, bands.lh, bands.hl, bands.hh), (ll, lh, hl, hh)):
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_constant():
    bands = wavelet.dwt2(np.full((8, 6), 3.0))
    assert np.allclose(bands.ll, 6.0)
    for b in (bands.lh, bands.hl, bands.hh):
        assert np.all(b == 0)
    hf = wavelet.extract_hf(np.full((8, 6), 3.0))
    assert all(np.all(hf[i] == 0) for i in range(3))


@settings(max_examples=40, deadline=None)
@given(even.flatmap(lambda s: arrays(np.float64, s, elements=finite)))
def test_perfect_reconstruction_and_parseval(y):
    bands = wavelet.dwt2(y)
    assert np.abs(wavelet.idwt2(bands) - y).max() <= 1e-10 * max(1.0, np.abs(y).max())
    energy = sum((b ** 2).sum() for b in (bands.ll, bands.lh, bands.hl, bands.hh))
    total = (y ** 2).sum()
    assert abs(energy - total) <= 1e-9 * max(total, 1e-300)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 10 ** 6))
def test_odd_dims_round_trip(r, c, seed):
    y = np.random.default_rng(seed).standard_normal((r, c))
    bands = wavelet.dwt2(y)
    assert bands.ll.shape == ((r + 1) // 2, (c + 1) // 2)
    np.testing.assert_allclose(wavelet.idwt2(bands), y, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-4, 4), st.integers(0, 3))
def test_linearity_and_band_orthogonality(seed, alpha, which):
    rng = np.random.default_rng(seed)
    y1, y2 = rng.standard_normal((2, 8, 12))
    b1, b2 = wavelet.dwt2(y1), wavelet.dwt2(y2)
    bs = wavelet.dwt2(alpha * y1 + y2)
    np.testing.assert_allclose(bs.ll, alpha * b1.ll + b2.ll, atol=1e-10)
    names = ("ll", "lh", "hl", "hh")
    arrs = {n: getattr(b1, n).copy() for n in names}
    arrs[names[which]] = rng.standard_normal(arrs["ll"].shape)
    re = wavelet.dwt2(wavelet.idwt2(wavelet.WaveletBands(**arrs, parent_shape=(8, 12))))
    for n in names:
        np.testing.assert_allclose(getattr(re, n), arrs[n], atol=1e-10)


def test_zero_hh_only():
    y = np.random.default_rng(1).standard_normal((16, 16))
    b = wavelet.dwt2(y)
    z = wavelet.idwt2(wavelet.WaveletBands(b.ll, b.lh, b.hl, np.zeros_like(b.hh), b.parent_shape))
    re = wavelet.dwt2(z)
    assert np.abs(re.hh).max() < 1e-10
    for n in ("ll", "lh", "hl"):
        np.testing.assert_allclose(getattr(re, n), getattr(b, n), atol=1e-10)


def test_zero_bands_and_errors():
    z = np.zeros((4, 4))
    assert np.all(wavelet.idwt2(wavelet.WaveletBands(z, z, z, z, (8, 8))) == 0)
    with pytest.raises(ArgumentError):
        wavelet.idwt2(wavelet.WaveletBands(z, z, z, np.zeros((3, 4)), (8, 8)))
    with pytest.raises(ArgumentError):
        wavelet.idwt2(wavelet.WaveletBands(z, z, z, z, (12, 8)))
    with pytest.raises(ArgumentError):
        wavelet.dwt2(np.zeros((0, 4)))
    with pytest.raises(ArgumentError):
        wavelet.dwt2(np.zeros((4, 4)), family="db2")


def test_vertical_edge_goes_to_hl():
    # intensity jumps between columns 6 and 7, so the edge falls inside a 2x2 block
    y = np.zeros((16, 16))
    y[:, 7:] = 1.0
    hf = wavelet.extract_hf(y)
    assert np.linalg.norm(hf.hl) > 10 * np.linalg.norm(hf.lh)
    assert np.array_equal(hf.lh, wavelet.dwt2(y).lh)


def test_select_random_hf():
    rng = np.random.default_rng(0)
    hfs = wavelet.HighFrequencySet(*(rng.standard_normal((3, 4, 4))))
    draws = [wavelet.select_random_hf(hfs, np.random.default_rng(s))[1] for s in range(3000)]
    freq = np.bincount(draws, minlength=3) / len(draws)
    assert np.all(np.abs(freq - 1 / 3) < 0.03)
    band, i = wavelet.select_random_hf(hfs, 5)
    band2, i2 = wavelet.select_random_hf(hfs, 5)
    assert i == i2 and band is band2
    same = wavelet.HighFrequencySet(hfs.lh, hfs.lh, hfs.lh)
    assert np.array_equal(wavelet.select_random_hf(same, 9)[0], hfs.lh)


def test_select_random_hf_uniform_large():
    gen = np.random.default_rng(77)
    hfs = wavelet.HighFrequencySet(np.zeros(1), np.ones(1), np.full(1, 2.0))
    picks = np.array([wavelet.select_random_hf(hfs, gen)[1] for _ in range(300_000)])
    freq = np.bincount(picks, minlength=3) / len(picks)
    assert np.all(np.abs(freq - 1 / 3) < 0.01)


def test_merge_and_hf_stack():
    y = np.random.default_rng(2).standard_normal((10, 12))
    b = wavelet.dwt2(y)
    np.testing.assert_allclose(wavelet.merge(b.ll, b.hf, y.shape), y, atol=1e-12)
    st_ = b.hf.stack()
    assert st_.shape == (3, 5, 6)
    back = wavelet.HighFrequencySet.from_stack(st_)
    assert np.array_equal(back.hh, b.hh)
    rep = b.hf.replace(1, np.zeros((5, 6)))
    assert np.all(rep.hl == 0) and rep.lh is b.lh
