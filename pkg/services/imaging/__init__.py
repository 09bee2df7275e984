from .image import ImageRgb, Region, VignetteParams, decode_image, load_image, save_png
from .statistics import rgb_channel_variance, saturation_variance
from .transforms import crop, derive_seed, random_crop, resize_bilinear
from .vignette import synthesize_dark_edges

__all__ = [
    'ImageRgb', 'Region', 'VignetteParams', 'decode_image', 'load_image', 'save_png',
    'rgb_channel_variance', 'saturation_variance',
    'crop', 'derive_seed', 'random_crop', 'resize_bilinear',
    'synthesize_dark_edges',
]
