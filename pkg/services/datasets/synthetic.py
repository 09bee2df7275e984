"""
Synthetic paired corpus: uniform background with a few noise-textured grid
cells, and a Gaussian-blurred copy of each image as its misfocused partner.
Used for desk-scale checks of the gates where real microscopy data is absent.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import cv2
import numpy as np

from services.imaging import ImageRgb, save_png
from services.labels import Label

from .records import SampleRecord

logger = logging.getLogger(__name__)


def textured_specimen(rng: np.random.Generator, size: int = 200, cell: int = 40, textured_cells: int = 5) -> ImageRgb:
    """``textured_cells`` random cells of a size/cell grid get uniform RGB noise; the rest is flat gray"""
    grid = size // cell
    gray = int(rng.integers(96, 160))
    pixels = np.full((size, size, 3), gray, dtype=np.uint8)
    for index in rng.choice(grid * grid, size=textured_cells, replace=False):
        row, col = divmod(int(index), grid)
        y, x = row * cell, col * cell
        pixels[y:y + cell, x:x + cell] = rng.integers(0, 256, size=(cell, cell, 3), dtype=np.uint8)
    return ImageRgb(pixels)


def gaussian_blur(img: ImageRgb, sigma: float) -> ImageRgb:
    return ImageRgb(cv2.GaussianBlur(img.pixels, (0, 0), sigmaX=sigma, sigmaY=sigma))


def make_paired_corpus(
    n_pairs: int,
    seed: int = 0,
    size: int = 200,
    cell: int = 40,
    textured_cells: int = 5,
    sigma: float = 2.5,
) -> Tuple[List[SampleRecord], Dict[str, ImageRgb]]:
    """
    In-memory corpus of ``2 * n_pairs`` records; images are keyed by record path
    so ``images.__getitem__`` works as a loader.
    """
    rng = np.random.default_rng(seed)
    records: List[SampleRecord] = []
    images: Dict[str, ImageRgb] = {}
    for i in range(n_pairs):
        name = f"{i:04d}.png"
        sharp = textured_specimen(rng, size, cell, textured_cells)
        for quality, label, img in (("high", Label.POSITIVE, sharp), ("low", Label.NEGATIVE, gaussian_blur(sharp, sigma))):
            path = f"{quality}/{name}"
            images[path] = img
            records.append(SampleRecord(sample_id=path, pair_id=name, label=label, path=path))
    return records, images


def write_paired_corpus(out_dir: Union[str, Path], n_pairs: int, seed: int = 0, **kwargs) -> Tuple[Path, Path]:
    """Writes ``high/`` and ``low/`` directories of PNGs; returns both"""
    root = Path(out_dir)
    _, images = make_paired_corpus(n_pairs, seed, **kwargs)
    for rel, img in images.items():
        save_png(img, root / rel)
    logger.info(f"Synthetic corpus: {n_pairs} pairs under {root}")
    return root / "high", root / "low"
