from .manifest import IMAGE_SUFFIXES, ValidityManifest, build_paired_manifest, build_validity_manifest, list_images
from .plan import ExperimentPlan, class_weights, emit_experiment_plan, write_experiment_plan
from .records import Origin, SampleRecord, read_jsonl, read_manifest, write_jsonl, write_manifest
from .splits import (
    FoldAssignment,
    ShuffleMode,
    SplitPlan,
    SplitStrategy,
    group_units,
    holdout_validation,
    order_batches,
    plan_kfold,
    write_split_plan,
)

__all__ = [
    'IMAGE_SUFFIXES', 'ValidityManifest', 'build_paired_manifest', 'build_validity_manifest', 'list_images',
    'ExperimentPlan', 'class_weights', 'emit_experiment_plan', 'write_experiment_plan',
    'Origin', 'SampleRecord', 'read_jsonl', 'read_manifest', 'write_jsonl', 'write_manifest',
    'FoldAssignment', 'ShuffleMode', 'SplitPlan', 'SplitStrategy', 'group_units',
    'holdout_validation', 'order_batches', 'plan_kfold', 'write_split_plan',
]
