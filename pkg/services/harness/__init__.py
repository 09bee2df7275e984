from .calibration import calibrate_sharpness
from .config import RunConfig
from .experiments import (
    BatchRow,
    CvResult,
    MagnificationResult,
    StrategyComparison,
    SweepRow,
    compare_input_sizes,
    compare_input_sizes_async,
    compare_strategies,
    compare_strategies_async,
    run_cv,
    run_cv_async,
    run_magnification,
    run_magnification_async,
    sweep_crop_sizes,
    sweep_crop_sizes_async,
)
from .reports import write_decision_log, write_report
from .runner import (
    GateResult,
    ImageDecision,
    prepare_fragments,
    run_gate,
    run_gate_async,
    score_fragments,
    score_image,
)

__all__ = [
    'calibrate_sharpness', 'RunConfig',
    'BatchRow', 'CvResult', 'MagnificationResult', 'StrategyComparison', 'SweepRow',
    'compare_input_sizes', 'compare_input_sizes_async', 'compare_strategies', 'compare_strategies_async',
    'run_cv', 'run_cv_async', 'run_magnification', 'run_magnification_async',
    'sweep_crop_sizes', 'sweep_crop_sizes_async',
    'write_decision_log', 'write_report',
    'GateResult', 'ImageDecision', 'prepare_fragments', 'run_gate', 'run_gate_async', 'score_fragments', 'score_image',
]
