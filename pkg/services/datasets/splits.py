"""
Pair-aware fold planning, validation holdout and batch ordering.

A "unit" is the set of records sharing a pair_id; records without one are
units of their own. All randomness comes from numpy generators seeded by the
caller, so every plan is a pure function of (records, seed).
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from services.errors import InvalidConfigurationError, OutOfRangeError, StrategyInapplicableError

from .records import SampleRecord, write_jsonl

logger = logging.getLogger(__name__)


class SplitStrategy(str, Enum):
    SAMEIDX = "sameidx"
    DIFFIDX = "diffidx"


class ShuffleMode(str, Enum):
    NONE = "none"
    NORMAL = "normal"
    PAIR = "pair"


class FoldAssignment(BaseModel):
    """Serialized split plan row"""

    fold: int
    sample_id: str


class SplitPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=2)
    assignment: Dict[str, int]
    strategy: SplitStrategy
    seed: int

    @model_validator(mode="after")
    def _folds_in_range(self):
        bad = [sid for sid, fold in self.assignment.items() if not 0 <= fold < self.k]
        if bad:
            raise ValueError(f"fold index out of range for {bad[:5]}")
        return self

    def fold_members(self, records: Sequence[SampleRecord], fold: int) -> List[SampleRecord]:
        return [r for r in records if self.assignment[r.sample_id] == fold]

    def train_members(self, records: Sequence[SampleRecord], fold: int) -> List[SampleRecord]:
        return [r for r in records if self.assignment[r.sample_id] != fold]

    def fold_sizes(self) -> List[int]:
        sizes = [0] * self.k
        for fold in self.assignment.values():
            sizes[fold] += 1
        return sizes

    def rows(self) -> List[FoldAssignment]:
        return [FoldAssignment(fold=f, sample_id=sid) for sid, f in self.assignment.items()]


def group_units(records: Sequence[SampleRecord]) -> List[List[SampleRecord]]:
    """Records grouped by pair identity, in a record-order-independent order"""
    groups: Dict[Tuple[int, str], List[SampleRecord]] = {}
    for record in records:
        key = (0, record.pair_id) if record.pair_id is not None else (1, record.sample_id)
        groups.setdefault(key, []).append(record)
    return [sorted(groups[key], key=lambda r: r.sample_id) for key in sorted(groups)]


def plan_kfold(records: Sequence[SampleRecord], k: int, strategy: SplitStrategy, seed: int) -> SplitPlan:
    if k < 2:
        raise OutOfRangeError(f"k must be >= 2, got {k}")
    strategy = SplitStrategy(strategy)
    rng = np.random.default_rng(seed)
    units = group_units(records)
    if k > len(units):
        raise OutOfRangeError(f"k={k} exceeds the {len(units)} pair-respecting unit(s) available; some folds would be empty")
    assignment: Dict[str, int] = {}

    if strategy is SplitStrategy.SAMEIDX:
        for position, unit_index in enumerate(rng.permutation(len(units))):
            for record in units[unit_index]:
                assignment[record.sample_id] = position % k
    else:
        unpaired = [u[0].sample_id for u in units if len(u) != 2]
        if unpaired:
            raise StrategyInapplicableError(
                f"diffidx needs every record in a pair; {len(unpaired)} unit(s) are not pairs, e.g. {unpaired[0]}"
            )
        order = rng.permutation(len(units))
        swaps = rng.integers(0, 2, size=len(units))
        ties = rng.random(size=len(units))
        sizes = [0] * k
        for position, unit_index in enumerate(order):
            first, second = units[unit_index]
            if swaps[position]:
                first, second = second, first
            first_fold = position % k
            # partner goes to a least-loaded other fold, seeded tie-break
            others = [f for f in range(k) if f != first_fold]
            lightest = min(sizes[f] for f in others)
            candidates = [f for f in others if sizes[f] == lightest]
            second_fold = candidates[int(ties[position] * len(candidates))]
            assignment[first.sample_id] = first_fold
            assignment[second.sample_id] = second_fold
            sizes[first_fold] += 1
            sizes[second_fold] += 1

    plan = SplitPlan(k=k, assignment=assignment, strategy=strategy, seed=seed)
    logger.info(f"Planned {k}-fold {strategy.value} split over {len(records)} records: sizes {plan.fold_sizes()}")
    return plan


def holdout_validation(
    train_records: Sequence[SampleRecord], fraction: float = 0.15, seed: int = 0
) -> Tuple[List[SampleRecord], List[SampleRecord]]:
    """Hold out round(fraction * units) whole units (round half up); input order is kept"""
    if not 0.0 < fraction < 1.0:
        raise OutOfRangeError(f"holdout fraction must be in (0, 1), got {fraction}")
    units = group_units(train_records)
    n_holdout = int(np.floor(fraction * len(units) + 0.5))
    chosen = np.random.default_rng(seed).permutation(len(units))[:n_holdout]
    held = {r.sample_id for i in chosen for r in units[i]}
    train = [r for r in train_records if r.sample_id not in held]
    validation = [r for r in train_records if r.sample_id in held]
    logger.debug(f"Holdout: {len(validation)} of {len(train_records)} records ({n_holdout} units)")
    return train, validation


def order_batches(
    records: Sequence[SampleRecord], batch_size: int, mode: ShuffleMode, seed: int = 0
) -> List[List[SampleRecord]]:
    if batch_size < 1:
        raise OutOfRangeError(f"batch size must be >= 1, got {batch_size}")
    mode = ShuffleMode(mode)
    rng = np.random.default_rng(seed)

    if mode is ShuffleMode.NONE:
        ordered = list(records)
    elif mode is ShuffleMode.NORMAL:
        ordered = [records[i] for i in rng.permutation(len(records))]
    else:
        if batch_size % 2:
            raise InvalidConfigurationError(f"pair shuffle needs an even batch size, got {batch_size}")
        units = group_units(records)
        return _pack_units(units, rng.permutation(len(units)), batch_size)

    return [ordered[i:i + batch_size] for i in range(0, len(ordered), batch_size)]


def _pack_units(units: List[List[SampleRecord]], order, batch_size: int) -> List[List[SampleRecord]]:
    """
    Greedy in shuffled order; when a unit does not fit the open batch, the next
    unit that does (a singleton) fills the gap. Only an odd singleton count can
    leave one non-final batch a record short.
    """
    batches: List[List[SampleRecord]] = []
    current: List[SampleRecord] = []
    pending = [int(i) for i in order]
    while pending:
        free = batch_size - len(current)
        pick = next((p for p, i in enumerate(pending) if len(units[i]) <= free), None)
        if pick is None and current:
            batches.append(current)
            current = []
            continue
        current.extend(units[pending.pop(pick or 0)])
        while len(current) >= batch_size:
            batches.append(current[:batch_size])
            current = current[batch_size:]
    if current:
        batches.append(current)
    return batches


def write_split_plan(plan: SplitPlan, path: Union[str, Path]) -> Path:
    return write_jsonl(plan.rows(), path)

