import logging

import cv2
import numpy as np

from services.errors import InvalidSizeError

from .image import ImageRgb, Region

logger = logging.getLogger(__name__)


def resize_bilinear(img: ImageRgb, target_w: int, target_h: int) -> ImageRgb:
    """
    Bilinear resize with half-pixel-center sampling (OpenCV INTER_LINEAR).

    Identity dimensions return a pixel-identical copy.
    """
    if target_w < 1 or target_h < 1:
        raise InvalidSizeError(f"resize target must be at least 1x1, got {target_w}x{target_h}")
    if (target_w, target_h) == (img.width, img.height):
        return ImageRgb(img.pixels.copy())
    resized = cv2.resize(img.pixels, (target_w, target_h), interpolation=cv2.INTER_LINEAR)
    return ImageRgb(resized)


def crop(img: ImageRgb, region: Region) -> ImageRgb:
    return ImageRgb(img.view(region).copy())


def crop_offsets(width: int, height: int, size: int, rng_seed: int) -> tuple[int, int]:
    """Top-left offset of a seeded square crop, uniform over the valid range"""
    if size < 1 or size > min(width, height):
        raise InvalidSizeError(f"crop size {size} does not fit a {width}x{height} image")
    rng = np.random.default_rng(rng_seed)
    x = int(rng.integers(0, width - size + 1))
    y = int(rng.integers(0, height - size + 1))
    return x, y


def random_crop(img: ImageRgb, size: int, rng_seed: int) -> ImageRgb:
    x, y = crop_offsets(img.width, img.height, size, rng_seed)
    return crop(img, Region(x=x, y=y, w=size, h=size))


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 64-bit seed for one item of a seeded run"""
    state = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *keys]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])
