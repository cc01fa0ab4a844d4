"""Frequency-domain filtering: Butterworth masks, homomorphic enhancement and a
decimation-free directional filter bank.

Spectra are complex arrays in numpy's unshifted layout (DC at index (0, 0)),
forward transform unnormalised, inverse scaled by 1/N.
"""
import math

import numpy as np

from .image_core import as_gray, rescale

KINDS = ("lowpass", "highpass")


def dft2(img):
    return np.fft.fft2(as_gray(img))


def idft2(spec):
    """Real part of the inverse 2-D DFT."""
    return np.fft.ifft2(np.asarray(spec, dtype=np.complex128)).real


def frequency_grid(height, width):
    """Signed integer frequency indices (v, u) for every bin, DC at (0, 0)."""
    v = np.fft.fftfreq(height) * height
    u = np.fft.fftfreq(width) * width
    return np.meshgrid(v, u, indexing="ij")


def butterworth_mask(width, height, d0, n=2, kind="lowpass"):
    """Butterworth transfer function over the unshifted frequency grid.

    Low-pass gain is 1 / (1 + (D / d0)^(2n)) with D the distance of the bin
    from DC in frequency-index units; the high-pass kind is its complement.
    Returns a (height, width) array.
    """
    if d0 <= 0:
        raise ValueError("cutoff d0 must be positive")
    if n < 1:
        raise ValueError("order n must be >= 1")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    v, u = frequency_grid(height, width)
    d = np.hypot(u, v)
    gain = 1.0 / (1.0 + (d / d0) ** (2 * n))
    return gain if kind == "lowpass" else 1.0 - gain


def homomorphic_enhance(img, d0=12.0, n=2, kind="highpass", offset=1.0):
    """Filter ln(offset + I) with a Butterworth mask and map back.

    The result exp(filtered) - offset is min-max stretched to [0, 255].
    ``offset`` = 0 gives the textbook ln(I), which then requires I > 0.
    """
    arr = as_gray(img)
    if np.any(arr < 0):
        raise ValueError("homomorphic_enhance needs non-negative intensities")
    if offset < 0:
        raise ValueError("offset must be >= 0")
    if offset == 0 and np.any(arr == 0):
        raise ValueError("offset 0 needs strictly positive intensities")
    h, w = arr.shape
    # the mask depends on |frequency| only, so the half spectrum of the real
    # input carries everything
    spec = np.fft.rfft2(np.log(offset + arr))
    mask = butterworth_mask(w, h, d0, n, kind)[:, :w // 2 + 1]
    filtered = np.fft.irfft2(spec * mask, s=(h, w))
    return rescale(np.exp(filtered) - offset)


def wedge_index(height, width, directions=8):
    """Angular wedge of every frequency bin, -1 for DC.

    Wedge i collects wave vectors whose orientation theta (mod pi, measured
    from the horizontal-frequency axis towards increasing row frequency) lies
    in (i*pi/d, (i+1)*pi/d]; theta = 0 belongs to wedge 0. A bin exactly on a
    boundary therefore goes to the lower wedge.
    """
    if directions < 2:
        raise ValueError("directions must be >= 2")
    v, u = frequency_grid(height, width)
    theta = np.mod(np.arctan2(v, u), np.pi)
    pos = theta / (np.pi / directions)
    nearest = np.rint(pos)
    on_edge = (np.abs(pos - nearest) < 1e-9) & (nearest > 0)
    idx = np.where(on_edge, nearest - 1, np.floor(pos)).astype(np.int64)
    idx = np.minimum(idx, directions - 1)
    idx[(u == 0) & (v == 0)] = -1
    return idx


def _raised_cosine_lowpass(n, cutoff, rolloff=0.5):
    omega = np.abs(2.0 * np.pi * np.fft.fftfreq(n))
    lo, hi = cutoff * (1.0 - rolloff), cutoff * (1.0 + rolloff)
    ramp = np.clip((omega - lo) / (hi - lo), 0.0, 1.0)
    return np.cos(0.5 * np.pi * ramp) ** 2


def separable_highpass(height, width, cutoff=math.pi / 16, stopband_db=40.0):
    """Complement of a rectangularly separable low-pass.

    The 1-D low-pass has half gain at ``cutoff`` (rad/sample) with a
    raised-cosine transition of +-50% around it. The high-pass floor is
    10^(-stopband_db/20), i.e. 0.01 at 40 dB.
    """
    if not 0 < cutoff < math.pi:
        raise ValueError("cutoff must lie in (0, pi)")
    if stopband_db <= 0:
        raise ValueError("stopband_db must be positive")
    floor = 10.0 ** (-stopband_db / 20.0)
    low = np.outer(_raised_cosine_lowpass(height, cutoff), _raised_cosine_lowpass(width, cutoff))
    return 1.0 - (1.0 - floor) * low


def directional_subbands(img, directions=8, cutoff=math.pi / 16, stopband_db=40.0):
    """Full-resolution directional images, shape (directions, H, W)."""
    arr = as_gray(img)
    h, w = arr.shape
    half = w // 2 + 1
    # wedges are defined modulo pi, i.e. symmetric under (v, u) -> (-v, -u),
    # so each subband is real and the half spectrum suffices
    spec = np.fft.rfft2(arr) * separable_highpass(h, w, cutoff, stopband_db)[:, :half]
    idx = wedge_index(h, w, directions)[:, :half]
    out = np.empty((directions, h, w))
    for i in range(directions):
        out[i] = np.fft.irfft2(np.where(idx == i, spec, 0), s=(h, w))
    return out


def directional_filter_bank(img, directions=8, cutoff=math.pi / 16, stopband_db=40.0):
    """Add the per-pixel maximum over the directional images to ``img``."""
    arr = as_gray(img)
    bands = directional_subbands(arr, directions, cutoff, stopband_db)
    return rescale(arr + bands.max(axis=0))
