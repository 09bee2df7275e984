"""Variance-of-Laplacian focus measure, the model-free quality scorer."""

import cv2
import numpy as np

from services.errors import TooSmallError
from services.imaging import ImageRgb

from .base import LogisticCalibration, logistic_map


def laplacian_sharpness(img: ImageRgb) -> float:
    """Population variance of the 4-neighbour Laplacian over interior pixels of the gray image"""
    if img.width < 3 or img.height < 3:
        raise TooSmallError(f"sharpness needs at least 3x3 pixels, got {img.width}x{img.height}")
    gray = img.normalized().mean(axis=2)
    response = cv2.Laplacian(gray, cv2.CV_64F, ksize=1)[1:-1, 1:-1]
    return float(np.var(response))


class SharpnessScorer:
    """Pure and stateless, so safe for any number of concurrent callers"""

    thread_safe = True

    def __init__(self, calibration: LogisticCalibration = LogisticCalibration()):
        self.calibration = calibration

    def raw(self, img: ImageRgb) -> float:
        return laplacian_sharpness(img)

    def score(self, img: ImageRgb) -> float:
        return logistic_map(self.raw(img), self.calibration)

    def __repr__(self) -> str:
        return f"SharpnessScorer(midpoint={self.calibration.midpoint:.6g}, scale={self.calibration.scale:.6g})"
