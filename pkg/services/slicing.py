"""
Fixed-size fragment grid over an image.

The grid is anchored at (0, 0); partial fragments can only appear on the right
column and bottom row. Fragments are emitted row-major, and downstream
aggregation relies on that order.
"""

import logging
from enum import Enum
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from services.errors import EmptyGridError, InconsistentSpecError, InvalidSizeError
from services.imaging import ImageRgb, Region

logger = logging.getLogger(__name__)


class EdgeMode(str, Enum):
    DROP_PARTIAL = "drop_partial"
    PAD_PARTIAL = "pad_partial"


class FragmentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    grid_row: int = Field(ge=0)
    grid_col: int = Field(ge=0)
    source: Region
    patch_size: int = Field(ge=1)
    image_width: int = Field(ge=1)
    image_height: int = Field(ge=1)

    @property
    def valid_fraction(self) -> float:
        return self.source.area / float(self.patch_size * self.patch_size)


def slice_grid(width: int, height: int, patch_size: int, mode: EdgeMode) -> List[FragmentSpec]:
    if patch_size < 1:
        raise InvalidSizeError(f"patch size must be >= 1, got {patch_size}")
    mode = EdgeMode(mode)
    if mode is EdgeMode.DROP_PARTIAL:
        rows, cols = height // patch_size, width // patch_size
    else:
        rows, cols = -(-height // patch_size), -(-width // patch_size)
    if rows == 0 or cols == 0:
        raise EmptyGridError(f"patch {patch_size} leaves no full fragment in a {width}x{height} image")

    specs = []
    for r in range(rows):
        y = r * patch_size
        for c in range(cols):
            x = c * patch_size
            source = Region(x=x, y=y, w=min(patch_size, width - x), h=min(patch_size, height - y))
            specs.append(FragmentSpec(
                grid_row=r, grid_col=c, source=source, patch_size=patch_size,
                image_width=width, image_height=height,
            ))
    logger.debug(f"Sliced {width}x{height} into {rows}x{cols} fragments of {patch_size} ({mode.value})")
    return specs


def extract_fragment(img: ImageRgb, spec: FragmentSpec, mode: EdgeMode) -> ImageRgb:
    """Patch-sized copy of the fragment; padding (pad_partial only) is black"""
    if (img.width, img.height) != (spec.image_width, spec.image_height):
        raise InconsistentSpecError(
            f"spec made for {spec.image_width}x{spec.image_height}, image is {img.width}x{img.height}"
        )
    src = spec.source
    full = src.w == spec.patch_size and src.h == spec.patch_size
    if EdgeMode(mode) is EdgeMode.DROP_PARTIAL and not full:
        raise InconsistentSpecError("partial fragment cannot be extracted in drop_partial mode")
    if full:
        return ImageRgb(img.view(src).copy())
    patch = np.zeros((spec.patch_size, spec.patch_size, 3), dtype=np.uint8)
    patch[:src.h, :src.w] = img.view(src)
    return ImageRgb(patch)
