import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, ConfigDict, Field, model_validator

from services.errors import BoundsError, ImageReadError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class ImageRgb:
    """Owned 8-bit RGB raster, stored row-major as an (height, width, 3) array"""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixels, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @classmethod
    def blank(cls, width: int, height: int, rgb=(0, 0, 0)) -> "ImageRgb":
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:] = rgb
        return cls(arr)

    def normalized(self) -> np.ndarray:
        """Channels as float64 in [0, 1]"""
        return self.pixels.astype(np.float64) / 255.0

    def full_region(self) -> "Region":
        return Region(x=0, y=0, w=self.width, h=self.height)

    def view(self, region: "Region") -> np.ndarray:
        region.check_inside(self.width, self.height)
        return self.pixels[region.y:region.y + region.h, region.x:region.x + region.w]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageRgb):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"ImageRgb({self.width}x{self.height})"


class Region(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: int = Field(ge=0)
    y: int = Field(ge=0)
    w: int = Field(ge=1)
    h: int = Field(ge=1)

    def check_inside(self, width: int, height: int) -> None:
        if self.x + self.w > width or self.y + self.h > height:
            raise BoundsError(
                f"region ({self.x},{self.y},{self.w}x{self.h}) exceeds image {width}x{height}"
            )

    @property
    def area(self) -> int:
        return self.w * self.h


class VignetteParams(BaseModel):
    """Knobs of the dark surrounding ring"""

    model_config = ConfigDict(frozen=True)

    radius_fraction: float = Field(default=0.9, gt=0.0, le=1.0)
    feather_fraction: float = Field(default=0.05, ge=0.0, lt=0.5)
    floor_level: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0
    # 0 keeps the ring centered and makes the seed irrelevant
    center_jitter: float = Field(default=0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _ring_fits(self):
        if self.radius_fraction + self.feather_fraction > 1.0 + 1e-12:
            raise ValueError("radius_fraction + feather_fraction must not exceed 1")
        return self


def load_image(path: Union[PathLike, BinaryIO]) -> ImageRgb:
    """Decode a PNG or JPEG file into an RGB raster"""
    try:
        with Image.open(path) as img:
            if img.format not in ("PNG", "JPEG"):
                raise ImageReadError(f"unsupported image format {img.format} for {path}")
            return ImageRgb(np.array(img.convert("RGB")))
    except ImageReadError:
        raise
    except (OSError, UnidentifiedImageError) as e:
        raise ImageReadError(f"cannot read image {path}: {e}") from e


def decode_image(data: bytes) -> ImageRgb:
    """Decode PNG or JPEG bytes, e.g. an uploaded request body"""
    if not data:
        raise ImageReadError("empty image payload")
    return load_image(io.BytesIO(data))


def save_png(img: ImageRgb, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.pixels).save(target, format="PNG")
    logger.debug(f"Wrote {img!r} to {target}")
    return target
