import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from angiotree import spectral as sp
from angiotree.synthetic import glare_image, stripe_frequency, stripe_image
from oracles import naive_butterworth, naive_dft2, naive_idft2, wedge_energies


def test_dft_of_constant_and_impulse():
    spec = sp.dft2(np.full((4, 6), 3.0))
    assert spec[0, 0] == pytest.approx(72.0)
    spec[0, 0] = 0
    assert np.allclose(spec, 0)
    imp = np.zeros((5, 5))
    imp[0, 0] = 1
    assert np.allclose(sp.dft2(imp), 1.0)


@pytest.mark.parametrize("shape", [(8, 8), (6, 10)])
def test_dft_matches_naive(rng, shape):
    img = rng.uniform(0, 255, shape)
    assert np.abs(sp.dft2(img) - naive_dft2(img)).max() < 1e-9


def test_idft_of_filtered_spectrum_matches_naive(rng):
    img = rng.uniform(0, 255, (8, 8))
    spec = sp.dft2(img) * sp.butterworth_mask(8, 8, 2.0, 2)
    assert np.abs(sp.idft2(spec) - naive_idft2(spec)).max() < 1e-9
    assert np.all(sp.idft2(np.zeros((4, 4), complex)) == 0)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 16), st.integers(1, 16)),
              elements=st.floats(0, 255, allow_nan=False)))
def test_round_trip(img):
    assert np.abs(sp.idft2(sp.dft2(img)) - img).max() < 1e-6


@pytest.mark.parametrize("kind", sp.KINDS)
@pytest.mark.parametrize("shape,d0,n", [((8, 8), 2.0, 1), ((7, 10), 3.0, 2), ((16, 12), 12.0, 4)])
def test_butterworth_matches_scalar_formula(kind, shape, d0, n):
    h, w = shape
    assert np.allclose(sp.butterworth_mask(w, h, d0, n, kind), naive_butterworth(h, w, d0, n, kind),
                       rtol=0, atol=1e-15)


def test_butterworth_checks():
    for kwargs in ({"d0": 0}, {"d0": 2, "n": 0}, {"d0": 2, "kind": "bandpass"}):
        with pytest.raises(ValueError):
            sp.butterworth_mask(8, 8, **kwargs)


def test_homomorphic_lowpass_keeps_constant():
    out = sp.homomorphic_enhance(np.full((16, 16), 90.0), kind="lowpass")
    assert np.allclose(out, 90.0)


def test_homomorphic_matches_composed_oracle(rng):
    img = rng.uniform(0, 255, (16, 16))
    logs = np.array([[math.log(1.0 + v) for v in row] for row in img])
    filt = naive_idft2(naive_dft2(logs) * naive_butterworth(16, 16, 12.0, 2, "highpass"))
    back = np.array([[math.exp(v) - 1.0 for v in row] for row in filt])
    lo, hi = back.min(), back.max()
    expected = (back - lo) * 255.0 / (hi - lo)
    assert np.allclose(sp.homomorphic_enhance(img, 12.0, 2), expected, atol=1e-7)


def test_homomorphic_invariant_to_gain_without_offset(rng):
    img = rng.uniform(1, 255, (16, 16))
    a = sp.homomorphic_enhance(img, offset=0.0)
    b = sp.homomorphic_enhance(img * 0.37, offset=0.0)
    assert np.allclose(a, b, atol=1e-8)


def test_homomorphic_checks():
    with pytest.raises(ValueError):
        sp.homomorphic_enhance(-np.ones((4, 4)))
    with pytest.raises(ValueError):
        sp.homomorphic_enhance(np.zeros((4, 4)), offset=0.0)


def _band_ratio(img, freq):
    spec = np.abs(sp.dft2(img)) ** 2
    v, u = freq
    band = spec[v, u] + spec[-v, -u]
    return band / (spec.sum() - spec[0, 0])


def test_homomorphic_highpass_suppresses_glare():
    img, freq = glare_image(32)
    out = sp.homomorphic_enhance(img, d0=4.0, n=2)
    assert _band_ratio(out, freq) > _band_ratio(img, freq)


def test_wedge_index_layout():
    idx = sp.wedge_index(16, 16, 8)
    assert idx[0, 0] == -1
    assert idx[0, 3] == 0          # pure horizontal frequency
    assert idx[3, 0] == 3          # theta = pi/2 sits on a boundary: lower wedge
    assert idx[3, 3] == 1          # theta = pi/4
    assert idx[-3, 3] == 5         # theta = 3pi/4
    assert idx[3, 1] == 3 and idx[3, -1] == 4
    counts = np.bincount(idx[idx >= 0], minlength=8)
    assert counts.min() > 0 and counts.sum() == 255


def test_separable_highpass_floor_and_passband():
    hp = sp.separable_highpass(64, 64)
    assert hp[0, 0] == pytest.approx(0.01)
    assert hp[32, 32] == pytest.approx(1.0)
    assert np.all((hp >= 0.01 - 1e-12) & (hp <= 1.0))


def test_dfb_constant_image():
    img = np.full((32, 32), 140.0)
    assert np.allclose(sp.directional_filter_bank(img), 140.0)


@pytest.mark.parametrize("wedge", range(8))
def test_dfb_stripe_lands_in_its_wedge(wedge):
    img = stripe_image(wedge, 32)
    v, u = stripe_frequency(wedge, 32)
    assert sp.wedge_index(32, 32)[v % 32, u % 32] == wedge
    oracle = wedge_energies(img)
    assert int(np.argmax(oracle)) == wedge
    bands = sp.directional_subbands(img)
    energy = (bands ** 2).sum(axis=(1, 2))
    assert int(np.argmax(energy)) == wedge


def test_dfb_max_keeps_both_orientations():
    h = stripe_image(0, 32)
    v = stripe_image(4, 32)
    both = sp.directional_filter_bank(h + v - 128)
    for single in (sp.directional_filter_bank(h), sp.directional_filter_bank(v)):
        assert np.corrcoef(both.ravel(), single.ravel())[0, 1] > 0.3
