import logging
from typing import List, Optional, Sequence

from services.classifier import LogisticCalibration, fit_calibration, laplacian_sharpness
from services.datasets import SampleRecord
from services.errors import ImageReadError
from services.imaging import load_image, resize_bilinear
from services.labels import Label

from .config import ImageLoader

logger = logging.getLogger(__name__)


def calibrate_sharpness(
    records: Sequence[SampleRecord],
    loader: ImageLoader = load_image,
    input_size: Optional[int] = None,
) -> LogisticCalibration:
    """Fits the baseline's logistic map on whole-image Laplacian variance of a labeled manifest"""
    raw: List[float] = []
    labels: List[bool] = []
    for record in records:
        try:
            img = loader(record.path)
        except ImageReadError as e:
            logger.warning(f"⚠️ Calibration skips {record.sample_id}: {e}")
            continue
        if input_size:
            img = resize_bilinear(img, input_size, input_size)
        raw.append(laplacian_sharpness(img))
        labels.append(record.label is Label.POSITIVE)
    return fit_calibration(raw, labels)
