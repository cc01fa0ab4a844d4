"""Fast guided filter (grey guide)."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .image_core import as_gray


@dataclass(frozen=True)
class GuidedFilterParams:
    radius: int = 8
    eps: float = 0.2
    subsample: int = 2

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.subsample < 1 or int(self.subsample) != self.subsample:
            raise ValueError("subsample must be a positive integer")


def _coefficients(guide, src, radius, eps):
    mean_i = kernels.box_mean(guide, radius)
    mean_p = kernels.box_mean(src, radius)
    var_i = kernels.box_mean(guide * guide, radius) - mean_i * mean_i
    cov_ip = kernels.box_mean(guide * src, radius) - mean_i * mean_p
    denom = var_i + eps
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(denom > 0, cov_ip / denom, 0.0)
    b = mean_p - a * mean_i
    return kernels.box_mean(a, radius), kernels.box_mean(b, radius)


def fast_guided_filter(src, guide=None, params=None):
    """Edge-preserving smoothing of ``src`` steered by ``guide`` (default: itself).

    ``params.eps`` is on the [0, 1] intensity scale; it is applied to the
    0..255 data as eps * 255^2, which is the same filter without the rounding
    of a divide/multiply round trip. Window statistics are computed on a grid
    subsampled by ``params.subsample`` with radius radius/subsample, and the
    averaged coefficients are upsampled bilinearly. The output is not
    clipped, so the filter stays linear in ``src``.
    """
    params = params or GuidedFilterParams()
    p = as_gray(src)
    i_full = p if guide is None else as_gray(guide)
    if i_full.shape != p.shape:
        raise ValueError(f"guide shape {i_full.shape} != input shape {p.shape}")
    eps = params.eps * 255.0 ** 2
    s = int(params.subsample)
    if s == 1:
        mean_a, mean_b = _coefficients(i_full, p, params.radius, eps)
    else:
        h, w = p.shape
        hs, ws = max(1, round(h / s)), max(1, round(w / s))
        i_low = kernels.resize_bilinear(i_full, hs, ws)
        p_low = i_low if guide is None else kernels.resize_bilinear(p, hs, ws)
        r_low = max(1, round(params.radius / s))
        a_low, b_low = _coefficients(i_low, p_low, r_low, eps)
        mean_a = kernels.resize_bilinear(a_low, h, w)
        mean_b = kernels.resize_bilinear(b_low, h, w)
    return mean_a * i_full + mean_b


def guided_filter(src, guide=None, radius=8, eps=0.2, subsample=2):
    return fast_guided_filter(src, guide, GuidedFilterParams(radius, eps, subsample))
