"""8-bit grey PNG / PGM (P5) reading and writing."""
from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = (".png", ".pgm", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")


def read_image(path):
    """Load an image as a float64 grey array.

    Colour images are reduced by averaging their R, G and B channels.
    """
    with Image.open(path) as im:
        im.load()
        if im.mode in ("L", "I", "I;16", "F"):
            return np.asarray(im, dtype=np.float64)
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    return rgb.mean(axis=2)


def to_uint8(img):
    return np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)


def write_image(path, img):
    """Quantise to 8 bits and save; the suffix picks PNG or binary PGM."""
    path = Path(path)
    im = Image.fromarray(to_uint8(img))
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        im.save(path, format="PPM")
    elif suffix == ".png":
        # stage outputs are written in bulk; light deflate is ~2x faster at ~5% size cost
        im.save(path, compress_level=1)
    else:
        im.save(path)
