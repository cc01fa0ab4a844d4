"""Grey-level morphology with disk footprints and multiscale top-hat enhancement."""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .image_core import as_gray

DEFAULT_RADII = tuple(range(3, 20, 2))


@dataclass(frozen=True)
class StructuringElement:
    radius: int
    mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        r = int(self.radius)
        y, x = np.mgrid[-r:r + 1, -r:r + 1]
        mask = x * x + y * y <= r * r
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)


def disk(radius):
    return StructuringElement(int(radius))


def _radius(se):
    return se.radius if isinstance(se, StructuringElement) else int(se)


def erode(img, se):
    """Per-pixel minimum over the disk; borders replicate the edge pixels."""
    return kernels.erode_disk(as_gray(img), _radius(se))


def dilate(img, se):
    return kernels.dilate_disk(as_gray(img), _radius(se))


def opening(img, se):
    return dilate(erode(img, se), se)


def closing(img, se):
    return erode(dilate(img, se), se)


def top_hat(img, se):
    """Bright detail narrower than the footprint: img - opening(img)."""
    arr = as_gray(img)
    return arr - opening(arr, se)


def black_hat(img, se):
    """Dark detail narrower than the footprint: closing(img) - img."""
    arr = as_gray(img)
    return closing(arr, se) - arr


def _max_projection(hats):
    across = np.max(hats, axis=0)
    if len(hats) < 2:
        between = np.zeros_like(across)
    else:
        between = np.max(np.diff(hats, axis=0), axis=0)
    return across + between


def multiscale_tophat_enhance(img, radii=DEFAULT_RADII):
    """I + I_w - I_b over a set of disk radii, clamped to [0, 255].

    I_w is the per-pixel max of the top hats plus the per-pixel max of the
    differences between consecutive scales; I_b is the same for black hats.
    """
    radii = [int(r) for r in radii]
    if not radii:
        raise ValueError("radii must be non-empty")
    if any(r < 1 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    arr = as_gray(img)
    whites = np.stack([top_hat(arr, r) for r in radii])
    blacks = np.stack([black_hat(arr, r) for r in radii])
    out = arr + _max_projection(whites) - _max_projection(blacks)
    return np.clip(out, 0.0, 255.0)
