"""
Combine per-fragment probabilities into one image-level probability.

Every strategy is a weighted mean sum(w * p) / sum(w); strategies only differ
in how a fragment's weight is derived from its statistics.
"""

import logging
import math
from enum import Enum
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator

from services.errors import ArityError, EmptyInputError
from services.labels import Label
from services.slicing import EdgeMode

logger = logging.getLogger(__name__)


class StrategyId(str, Enum):
    CONTROL = "control"
    SUM = "sum"
    SUM_SIZE = "sum_size"
    RGB_VAR = "rgb_var"
    RGB_VAR_SIZE = "rgb_var_size"
    SAT_VAR = "sat_var"
    SAT_VAR_SIZE = "sat_var_size"


class PatchScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    probability: float = Field(ge=0.0, le=1.0)
    rgb_variance: float = Field(default=0.0, ge=0.0)
    saturation_variance: float = Field(default=0.0, ge=0.0)
    valid_fraction: float = Field(default=1.0, gt=0.0, le=1.0)

    @field_validator("*")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("patch score fields must be finite")
        return v


# Edge handling each strategy was designed around; control takes one random crop instead
_DEFAULT_EDGE_MODES = {
    StrategyId.SUM: EdgeMode.DROP_PARTIAL,
    StrategyId.RGB_VAR: EdgeMode.DROP_PARTIAL,
    StrategyId.SAT_VAR: EdgeMode.DROP_PARTIAL,
    StrategyId.SUM_SIZE: EdgeMode.PAD_PARTIAL,
    StrategyId.RGB_VAR_SIZE: EdgeMode.PAD_PARTIAL,
    StrategyId.SAT_VAR_SIZE: EdgeMode.PAD_PARTIAL,
}


def default_edge_mode(strategy: StrategyId) -> Optional[EdgeMode]:
    return _DEFAULT_EDGE_MODES.get(StrategyId(strategy))


def fragment_weight(strategy: StrategyId, score: PatchScore) -> float:
    strategy = StrategyId(strategy)
    if strategy in (StrategyId.CONTROL, StrategyId.SUM):
        return 1.0
    if strategy is StrategyId.SUM_SIZE:
        return score.valid_fraction
    if strategy is StrategyId.RGB_VAR:
        return score.rgb_variance
    if strategy is StrategyId.RGB_VAR_SIZE:
        return score.rgb_variance * score.valid_fraction
    if strategy is StrategyId.SAT_VAR:
        return score.saturation_variance
    return score.saturation_variance * score.valid_fraction


def aggregate(strategy: StrategyId, scores: Sequence[PatchScore]) -> float:
    strategy = StrategyId(strategy)
    if not scores:
        raise EmptyInputError("cannot aggregate an empty score list")
    if strategy is StrategyId.CONTROL and len(scores) != 1:
        raise ArityError(f"control strategy takes exactly one score, got {len(scores)}")

    weighted = 0.0
    total = 0.0
    for score in scores:
        w = fragment_weight(strategy, score)
        weighted += w * score.probability
        total += w

    if total == 0.0:
        logger.debug(f"All {strategy.value} weights are zero, using unweighted mean")
        return _clamp(sum(s.probability for s in scores) / len(scores), scores)
    return _clamp(weighted / total, scores)


def _clamp(value: float, scores: Sequence[PatchScore]) -> float:
    # keeps rounding from stepping outside the inputs' range
    probs: List[float] = [s.probability for s in scores]
    return min(max(value, min(probs)), max(probs))


def decide(probability: float, threshold: float = 0.5) -> Label:
    return Label.POSITIVE if probability >= threshold else Label.NEGATIVE
