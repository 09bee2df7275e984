from .base import LogisticCalibration, QualityScorer, fit_calibration, logistic_map
from .factory import SCORER_KINDS, create_scorer
from .sharpness import SharpnessScorer, laplacian_sharpness
from .wrappers import CountingScorer, SerializedScorer, ensure_concurrent

__all__ = [
    'LogisticCalibration', 'QualityScorer', 'fit_calibration', 'logistic_map',
    'SCORER_KINDS', 'create_scorer',
    'SharpnessScorer', 'laplacian_sharpness',
    'CountingScorer', 'SerializedScorer', 'ensure_concurrent',
]
