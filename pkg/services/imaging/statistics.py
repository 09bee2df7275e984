"""Pixel statistics used as fragment weights. Channels are normalized to [0, 1]."""

import numpy as np

from .image import ImageRgb, Region

_LEVELS = 255


def _normalized_region(img: ImageRgb, region: Region) -> np.ndarray:
    return img.view(region).reshape(-1, 3).astype(np.float64) / _LEVELS


def rgb_channel_variance(img: ImageRgb, region: Region) -> float:
    """
    Mean over R, G, B of the per-channel population variance.

    Computed exactly on the integer pixels, (N·Σx² − (Σx)²) / (N²·255²), so a
    uniform region gives exactly 0.
    """
    values = img.view(region).reshape(-1, 3).astype(np.int64)
    n = values.shape[0]
    # python ints: N·Σx² overflows int64 on large regions
    sums = [int(s) for s in values.sum(axis=0)]
    squares = [int(s) for s in np.einsum("ij,ij->j", values, values)]
    numerator = sum(n * sq - s * s for s, sq in zip(sums, squares))
    return numerator / (3 * n * n * _LEVELS * _LEVELS)


def saturation(values: np.ndarray) -> np.ndarray:
    """HSV saturation of normalized (N, 3) pixels; 0 where the max channel is 0"""
    high = values.max(axis=-1)
    low = values.min(axis=-1)
    out = np.zeros_like(high)
    np.divide(high - low, high, out=out, where=high > 0)
    return out


def saturation_variance(img: ImageRgb, region: Region) -> float:
    s = saturation(_normalized_region(img, region))
    if np.ptp(s) == 0:
        return 0.0
    return float(np.var(s))
