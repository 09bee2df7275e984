import logging
from pathlib import Path
from typing import Optional, Union

from services.errors import InvalidConfigurationError

from .base import LogisticCalibration, QualityScorer
from .sharpness import SharpnessScorer

logger = logging.getLogger(__name__)

SCORER_KINDS = ("baseline", "onnx")


def create_scorer(
    kind: str,
    model_path: Optional[Union[str, Path]] = None,
    calibration: Optional[LogisticCalibration] = None,
) -> QualityScorer:
    """Build a scorer from its configured kind"""
    if kind == "baseline":
        if calibration is None:
            raise InvalidConfigurationError(
                "baseline scorer is uncalibrated; fit it with `calibrate --save` or score a labeled manifest"
            )
        scorer = SharpnessScorer(calibration)
    elif kind == "onnx":
        if not model_path:
            raise InvalidConfigurationError("scorer kind 'onnx' needs a model path")
        # onnxruntime is only imported when a model is actually requested
        from .onnx_model import OnnxModelScorer

        scorer = OnnxModelScorer(model_path)
    else:
        raise InvalidConfigurationError(f"unknown scorer kind {kind!r}, expected one of {SCORER_KINDS}")
    logger.info(f"Created scorer {scorer!r}")
    return scorer
