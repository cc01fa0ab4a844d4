"""Grey images and spatial point operations.

A grey image is a 2-D float64 numpy array with nominal range [0, 255].
Everything here is pure: inputs are never modified.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class ImageStats:
    mean: float
    variance: float


def as_gray(img):
    """Validate ``img`` as a grey image and return it as float64.

    Raises ValueError for non-2-D, empty or non-finite input.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"grey image must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("grey image is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grey image contains NaN or Inf")
    return arr


def image_stats(img):
    """Mean and population variance (two-pass) of all pixels."""
    arr = as_gray(img)
    first = arr.flat[0]
    if np.all(arr == first):
        # summation round-off must not invent variance in a flat image
        return ImageStats(float(first), 0.0)
    mean = float(arr.mean())
    variance = float(np.mean((arr - mean) ** 2))
    return ImageStats(mean, variance)


def rescale(img, lo=0.0, hi=255.0, rtol=1e-9):
    """Min-max stretch onto [lo, hi].

    Images whose spread is below ``rtol`` of their magnitude are treated as
    constant (FFT round-off must not be stretched into full-range noise) and
    are only clipped into range.
    """
    arr = np.asarray(img, dtype=np.float64)
    amin, amax = float(arr.min()), float(arr.max())
    span = amax - amin
    if span <= rtol * max(1.0, abs(amax), abs(amin)):
        return np.clip(np.full_like(arr, 0.5 * (amin + amax)), lo, hi)
    return lo + (arr - amin) * ((hi - lo) / span)


def normalize(img, m0=128.0, var0=100.0):
    """Map an image to a target mean ``m0`` and variance ``var0``.

    Pixels above the image mean M go to m0 + sqrt(var0 * (p - M)^2 / VAR),
    the others to m0 - sqrt(...). A zero-variance image maps to the constant m0.
    """
    if var0 < 0:
        raise ValueError("var0 must be non-negative")
    arr = as_gray(img)
    stats = image_stats(arr)
    if stats.variance == 0.0:
        return np.full_like(arr, float(m0))
    dev = np.sqrt(var0 * (arr - stats.mean) ** 2 / stats.variance)
    return np.where(arr > stats.mean, m0 + dev, m0 - dev)


def _clip_histogram(hist, limit):
    excess = np.maximum(hist - limit, 0.0).sum()
    return np.minimum(hist, limit) + excess / hist.shape[-1]


def _tile_lut(hist, clip_count, nbins):
    present = np.flatnonzero(hist)
    clipped = _clip_histogram(hist.astype(np.float64), clip_count)
    cdf = np.cumsum(clipped)
    lo = cdf[present[0]]
    total = cdf[-1]
    if len(present) < 2 or total - lo <= 0:
        # a single occupied level has nothing to equalise
        return np.arange(nbins, dtype=np.float64) * (255.0 / (nbins - 1))
    return np.clip((cdf - lo) / (total - lo), 0.0, 1.0) * 255.0


def adaptive_equalize(img, tile=64, clip_limit=0.01, nbins=256):
    """Contrast-limited adaptive histogram equalisation.

    Intensities are quantised to ``nbins`` levels over [0, 255]. Each
    ``tile`` x ``tile`` block (the image is symmetrically padded up to a whole
    number of tiles) gets its own clipped-histogram mapping; pixels blend the
    four nearest tile mappings bilinearly. ``clip_limit`` is the bin ceiling
    as a fraction of the tile's pixel count. A tile larger than the image
    falls back to one global mapping.

    Each mapping sends the tile's darkest occupied level to 0 and the top
    level to 255, so a single-level tile is left unchanged.
    """
    arr = as_gray(img)
    tile = int(tile)
    if tile < 1:
        raise ValueError("tile must be >= 1")
    if clip_limit <= 0:
        raise ValueError("clip_limit must be positive")
    if nbins < 2:
        raise ValueError("nbins must be >= 2")
    h, w = arr.shape
    levels = np.clip(np.rint(arr * ((nbins - 1) / 255.0)), 0, nbins - 1).astype(np.int64)

    if tile > h or tile > w:
        hist = np.bincount(levels.ravel(), minlength=nbins)
        lut = _tile_lut(hist, clip_limit * levels.size, nbins)
        return lut[levels]

    ny, nx = -(-h // tile), -(-w // tile)
    padded = np.pad(levels, ((0, ny * tile - h), (0, nx * tile - w)), mode="symmetric")
    tiles = padded.reshape(ny, tile, nx, tile).transpose(0, 2, 1, 3).reshape(ny * nx, -1)
    offsets = np.arange(ny * nx)[:, None] * nbins
    hists = np.bincount((tiles + offsets).ravel(), minlength=ny * nx * nbins).reshape(ny * nx, nbins)
    clip_count = clip_limit * tile * tile
    luts = np.stack([_tile_lut(hh, clip_count, nbins) for hh in hists]).reshape(ny, nx, nbins)
    return kernels.clahe_blend(levels, luts, tile)


def gaussian_kernel1d(sigma, truncate=3.0):
    """Normalised 1-D Gaussian taps with radius ceil(truncate * sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(math.ceil(truncate * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def gaussian_smooth(img, sigma=2.0):
    """Isotropic Gaussian blur, kernel truncated at 3 sigma, mirrored borders."""
    arr = as_gray(img)
    return kernels.correlate_separable(arr, gaussian_kernel1d(sigma))
