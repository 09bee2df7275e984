"""
Experiment drivers built on ``run_gate``: strategy comparison, crop-size and
input-size sweeps, the magnification split, and k-fold evaluation with the
artifacts an external trainer needs to reproduce the training loop.
"""

import asyncio
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from pydantic import BaseModel

from services.aggregation import StrategyId
from services.classifier import CountingScorer, QualityScorer
from services.datasets import (
    ExperimentPlan,
    SampleRecord,
    ShuffleMode,
    SplitPlan,
    SplitStrategy,
    emit_experiment_plan,
    holdout_validation,
    order_batches,
    plan_kfold,
    write_experiment_plan,
    write_jsonl,
    write_manifest,
    write_split_plan,
)
from services.errors import EmptyInputError
from services.imaging import derive_seed, load_image
from services.metrics import MetricsSummary, compute_metrics, fold_summary

from .config import RunConfig
from .runner import GateResult, ImageLoader, resolve_records, resolve_scorer, run_gate_async

logger = logging.getLogger(__name__)

_HOLDOUT_KEY = 0
_BATCH_KEY = 1


class StrategyComparison(BaseModel):
    results: Dict[StrategyId, GateResult]
    scorer_calls: Dict[StrategyId, int]

    def summaries(self) -> Dict[str, MetricsSummary]:
        return {strategy.value: result.summary for strategy, result in self.results.items()}


class SweepRow(BaseModel):
    """One point of a sweep curve; ``size`` is None for the uncropped / native run"""

    size: Optional[int]
    accuracy: float
    f1: float
    total_seconds: float
    summary: MetricsSummary

    @property
    def name(self) -> str:
        return "native" if self.size is None else f"{self.size}x{self.size}"


class BatchRow(BaseModel):
    batch: int
    position: int
    sample_id: str


class CvResult(BaseModel):
    summary: MetricsSummary
    plan: SplitPlan
    experiment_plan: ExperimentPlan
    artifacts: Optional[str] = None


class MagnificationResult(BaseModel):
    train: List[SampleRecord]
    test: List[SampleRecord]
    rows: List[SweepRow]
    validation: List[SampleRecord] = []
    train_manifest: Optional[str] = None


def _row(size: Optional[int], result: GateResult) -> SweepRow:
    return SweepRow(
        size=size,
        accuracy=result.summary.accuracy.mean,
        f1=result.summary.f1.mean,
        total_seconds=result.total_seconds,
        summary=result.summary,
    )


async def compare_strategies_async(
    config: RunConfig,
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
    strategies: Sequence[StrategyId] = tuple(StrategyId),
) -> StrategyComparison:
    """Same images, scorer and seed for every strategy; only the strategy (and its edge mode) varies"""
    records = resolve_records(config, records)
    counting = CountingScorer(resolve_scorer(config, scorer, records, loader))
    results: Dict[StrategyId, GateResult] = {}
    calls: Dict[StrategyId, int] = {}
    for strategy in map(StrategyId, strategies):
        run_config = config.with_(strategy=strategy)
        results[strategy] = await run_gate_async(run_config, counting, records, loader)
        calls[strategy] = counting.reset()
        logger.info(f"Strategy {strategy.value}: accuracy={results[strategy].summary.accuracy.mean:.4f}, "
                    f"{calls[strategy]} scorer calls")
    return StrategyComparison(results=results, scorer_calls=calls)


async def sweep_crop_sizes_async(
    config: RunConfig,
    sizes: Sequence[int],
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
) -> List[SweepRow]:
    if not sizes:
        raise EmptyInputError("crop sweep needs at least one size")
    records = resolve_records(config, records)
    scorer = resolve_scorer(config, scorer, records, loader)
    rows = []
    for size in sizes:
        result = await run_gate_async(config.with_(crop_size=size), scorer, records, loader)
        rows.append(_row(size, result))
        logger.info(f"Crop {size}: accuracy={rows[-1].accuracy:.4f} f1={rows[-1].f1:.4f}")
    return rows


async def compare_input_sizes_async(
    config: RunConfig,
    sizes: Sequence[Optional[int]],
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
) -> List[SweepRow]:
    """Each fragment resized to size x size before scoring; None keeps native resolution"""
    if not sizes:
        raise EmptyInputError("input-size comparison needs at least one size")
    records = resolve_records(config, records)
    scorer = resolve_scorer(config, scorer, records, loader)
    rows = []
    for size in sizes:
        result = await run_gate_async(config.with_(input_size=size), scorer, records, loader)
        rows.append(_row(size, result))
    return rows


async def run_magnification_async(
    config: RunConfig,
    sizes: Sequence[int],
    test_fraction: float = 0.2,
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
    out_dir: Optional[Union[str, Path]] = None,
    plan: Optional[ExperimentPlan] = None,
) -> MagnificationResult:
    """
    Pair-respecting train/test split. The train part loses a validation holdout,
    both are written out for the external trainer, and the crop sweep runs on
    the test part only. An uncalibrated baseline is fitted on the train part.
    """
    plan = plan or ExperimentPlan()
    records = resolve_records(config, records)
    train, test = holdout_validation(records, test_fraction, config.seed)
    scorer = resolve_scorer(config, scorer, train, loader)
    train, validation = holdout_validation(train, plan.validation_fraction,
                                           derive_seed(config.seed, 0, _HOLDOUT_KEY))
    train_manifest = None
    if out_dir is not None:
        train_manifest = str(write_manifest(train, Path(out_dir) / "magnification_train.jsonl"))
        write_manifest(validation, Path(out_dir) / "magnification_validation.jsonl")
        write_manifest(test, Path(out_dir) / "magnification_test.jsonl")
    rows = await sweep_crop_sizes_async(config, sizes, scorer, test, loader)
    return MagnificationResult(train=train, test=test, validation=validation, rows=rows,
                               train_manifest=train_manifest)


def _write_fold_artifacts(
    directory: Path,
    fold: int,
    train: List[SampleRecord],
    validation: List[SampleRecord],
    held_out: List[SampleRecord],
    batches: List[List[SampleRecord]],
) -> None:
    fold_dir = directory / f"fold_{fold}"
    write_manifest(train, fold_dir / "train.jsonl")
    write_manifest(validation, fold_dir / "validation.jsonl")
    write_manifest(held_out, fold_dir / "test.jsonl")
    write_jsonl(
        [BatchRow(batch=b, position=i, sample_id=r.sample_id) for b, batch in enumerate(batches)
         for i, r in enumerate(batch)],
        fold_dir / "batches.jsonl",
    )


async def run_cv_async(
    config: RunConfig,
    k: int,
    split: SplitStrategy,
    shuffle: ShuffleMode,
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
    out_dir: Optional[Union[str, Path]] = None,
    plan: Optional[ExperimentPlan] = None,
) -> CvResult:
    """
    Plans k folds and scores each held-out fold. With ``out_dir`` the split plan,
    each fold's train/validation/test manifests, the ordered training batches and
    the experiment plan are written so training can be reproduced elsewhere.
    An uncalibrated baseline is refitted on each fold's training members.
    """
    split, shuffle = SplitStrategy(split), ShuffleMode(shuffle)
    records = resolve_records(config, records)
    if scorer is None and not config.needs_calibration():
        scorer = resolve_scorer(config)
    split_plan = plan_kfold(records, k, split, config.seed)
    experiment_plan = emit_experiment_plan({"k_folds": k}, records, base=plan)

    directory = Path(out_dir) if out_dir is not None else None
    if directory is not None:
        write_split_plan(split_plan, directory / "split_plan.jsonl")
        write_experiment_plan(experiment_plan, directory / "experiment_plan.jsonl")

    per_fold = []
    fold_seconds = []
    for fold in range(k):
        held_out = split_plan.fold_members(records, fold)
        if directory is not None:
            train, validation = holdout_validation(
                split_plan.train_members(records, fold),
                experiment_plan.validation_fraction,
                derive_seed(config.seed, fold, _HOLDOUT_KEY),
            )
            batches = order_batches(train, experiment_plan.batch_size, shuffle,
                                    derive_seed(config.seed, fold, _BATCH_KEY))
            _write_fold_artifacts(directory, fold, train, validation, held_out, batches)

        fold_scorer = resolve_scorer(config, scorer, split_plan.train_members(records, fold), loader)
        t0 = time.perf_counter()
        result = await run_gate_async(config, fold_scorer, held_out, loader)
        fold_seconds.append(time.perf_counter() - t0)
        per_fold.append(compute_metrics(result.confusion))
        logger.info(f"Fold {fold + 1}/{k}: {len(held_out)} records, accuracy={per_fold[-1].accuracy:.4f}")

    summary = fold_summary(per_fold, fold_seconds)
    logger.info(f"✅ {k}-fold {split.value}/{shuffle.value}: accuracy "
                f"{summary.accuracy.mean:.4f} ± {summary.accuracy.std:.4f}")
    return CvResult(summary=summary, plan=split_plan, experiment_plan=experiment_plan,
                    artifacts=str(directory) if directory is not None else None)


def compare_strategies(config: RunConfig, **kwargs) -> StrategyComparison:
    return asyncio.run(compare_strategies_async(config, **kwargs))


def sweep_crop_sizes(config: RunConfig, sizes: Sequence[int], **kwargs) -> List[SweepRow]:
    return asyncio.run(sweep_crop_sizes_async(config, sizes, **kwargs))


def compare_input_sizes(config: RunConfig, sizes: Sequence[Optional[int]], **kwargs) -> List[SweepRow]:
    return asyncio.run(compare_input_sizes_async(config, sizes, **kwargs))


def run_magnification(config: RunConfig, sizes: Sequence[int], test_fraction: float = 0.2, **kwargs) -> MagnificationResult:
    return asyncio.run(run_magnification_async(config, sizes, test_fraction, **kwargs))


def run_cv(config: RunConfig, k: int, split: SplitStrategy, shuffle: ShuffleMode, **kwargs) -> CvResult:
    return asyncio.run(run_cv_async(config, k, split, shuffle, **kwargs))
