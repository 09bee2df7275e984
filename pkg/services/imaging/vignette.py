import numpy as np

from .image import ImageRgb, VignetteParams


def vignette_gain(width: int, height: int, params: VignetteParams) -> np.ndarray:
    """
    Per-pixel multiplicative gain of the dark ring.

    Distance is measured from the ring center to pixel centers, normalized by
    min(w, h) / 2. Gain is 1 inside ``radius_fraction``, ``floor_level`` beyond
    ``radius_fraction + feather_fraction`` and linear across the feather band.
    """
    half = min(width, height) / 2.0
    cx, cy = width / 2.0, height / 2.0
    if params.center_jitter > 0:
        rng = np.random.default_rng(params.seed)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        shift = rng.uniform(0.0, params.center_jitter) * half
        cx += shift * np.cos(angle)
        cy += shift * np.sin(angle)

    ys = np.arange(height, dtype=np.float64) + 0.5
    xs = np.arange(width, dtype=np.float64) + 0.5
    dist = np.hypot(xs[np.newaxis, :] - cx, ys[:, np.newaxis] - cy) / half

    inner = params.radius_fraction
    outer = inner + params.feather_fraction
    if params.feather_fraction > 0:
        t = np.clip((dist - inner) / params.feather_fraction, 0.0, 1.0)
    else:
        t = (dist > inner).astype(np.float64)
    gain = 1.0 - t * (1.0 - params.floor_level)
    gain[dist <= inner] = 1.0
    gain[dist > outer] = params.floor_level
    return gain


def synthesize_dark_edges(img: ImageRgb, params: VignetteParams) -> ImageRgb:
    gain = vignette_gain(img.width, img.height, params)
    out = np.rint(img.pixels.astype(np.float64) * gain[:, :, np.newaxis])
    return ImageRgb(np.clip(out, 0, 255).astype(np.uint8))
