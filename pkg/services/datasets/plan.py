import logging
from collections import Counter
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, Field, field_validator

from services.errors import DegenerateManifestError
from services.labels import Label

from .records import SampleRecord, write_jsonl

logger = logging.getLogger(__name__)


def class_weights(records: Sequence[SampleRecord]) -> Dict[Label, float]:
    """Inverse-frequency weights normalized to sum to 1"""
    counts = Counter(r.label for r in records)
    missing = [label.value for label in Label if counts[label] == 0]
    if missing:
        raise DegenerateManifestError(f"manifest has no {', '.join(missing)} records")
    inverse = {label: 1.0 / counts[label] for label in Label}
    total = sum(inverse.values())
    return {label: inverse[label] / total for label in Label}


class ExperimentPlan(BaseModel):
    """Hyperparameter plan handed to the external trainer"""

    learning_rate: float = Field(default=1e-4, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    batch_size: int = Field(default=16, ge=1)
    patience_epochs: int = Field(default=10, ge=1)
    k_folds: int = Field(default=5, ge=2)
    validation_fraction: float = Field(default=0.15, gt=0.0, lt=1.0)
    class_weights: Dict[Label, float] = Field(
        default_factory=lambda: {Label.POSITIVE: 0.5, Label.NEGATIVE: 0.5}
    )

    @field_validator("class_weights")
    @classmethod
    def _sums_to_one(cls, v: Dict[Label, float]) -> Dict[Label, float]:
        if abs(sum(v.values()) - 1.0) > 1e-9:
            raise ValueError(f"class weights must sum to 1, got {sum(v.values())}")
        return v


def emit_experiment_plan(
    overrides: Optional[Mapping[str, Any]] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    base: Optional[ExperimentPlan] = None,
) -> ExperimentPlan:
    """
    Defaults (or ``base``) with ``overrides`` applied; class weights come from
    ``records`` when a manifest is bound.
    """
    data = (base or ExperimentPlan()).model_dump()
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if records is not None:
        data["class_weights"] = class_weights(records)
    plan = ExperimentPlan.model_validate(data)
    logger.info(f"Experiment plan: lr={plan.learning_rate} momentum={plan.momentum} "
                f"batch={plan.batch_size} folds={plan.k_folds}")
    return plan


def write_experiment_plan(plan: ExperimentPlan, path: Union[str, Path]) -> Path:
    return write_jsonl([plan], path)
