import logging
import math
from typing import Protocol, Sequence, runtime_checkable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from services.errors import DegenerateManifestError, LengthMismatchError
from services.imaging import ImageRgb

logger = logging.getLogger(__name__)


@runtime_checkable
class QualityScorer(Protocol):
    """
    Anything that maps an image to a probability in [0, 1].

    Higher means more likely high quality (quality gate) or more likely a cell
    image (validity gate). ``thread_safe`` tells the harness whether ``score``
    may be called from several workers at once.
    """

    thread_safe: bool

    def score(self, img: ImageRgb) -> float:
        ...


class LogisticCalibration(BaseModel):
    model_config = ConfigDict(frozen=True)

    midpoint: float = 0.0
    scale: float = Field(default=1.0, gt=0.0)


def logistic_map(raw: float, cal: LogisticCalibration) -> float:
    z = (raw - cal.midpoint) / cal.scale
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def fit_calibration(raw_scores: Sequence[float], labels: Sequence[bool]) -> LogisticCalibration:
    """
    Midpoint halfway between the class medians of raw scores.

    Scale is a quarter of the median gap so the medians map to about 0.12 and 0.88.
    """
    if len(raw_scores) != len(labels):
        raise LengthMismatchError(f"{len(raw_scores)} scores vs {len(labels)} labels")
    raw = np.asarray(raw_scores, dtype=np.float64)
    mask = np.asarray(labels, dtype=bool)
    if mask.all() or not mask.any():
        raise DegenerateManifestError("calibration needs both positive and negative samples")
    pos_median = float(np.median(raw[mask]))
    neg_median = float(np.median(raw[~mask]))
    midpoint = (pos_median + neg_median) / 2.0
    scale = max(abs(pos_median - neg_median) / 4.0, 1e-12)
    logger.info(f"Calibration fitted: medians pos={pos_median:.6g} neg={neg_median:.6g}, "
                f"midpoint={midpoint:.6g} scale={scale:.6g}")
    return LogisticCalibration(midpoint=midpoint, scale=scale)
