"""
Binary classification metrics and cross-fold summaries.

Positive is the high-quality / cell class. Precision, recall and F1 are 0
whenever their denominator is 0.
"""

import logging
import statistics
from typing import Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel, Field
from tabulate import tabulate

from services.errors import EmptyEvaluationError, EmptyInputError, LengthMismatchError
from services.labels import Label

logger = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "f1", "precision", "recall")


class ConfusionCounts(BaseModel):
    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp, fp=self.fp + other.fp, tn=self.tn + other.tn, fn=self.fn + other.fn
        )


class Metrics(BaseModel):
    accuracy: float
    precision: float
    recall: float
    f1: float


class MeanStd(BaseModel):
    mean: float
    std: float


class MetricsSummary(BaseModel):
    per_fold: List[Metrics]
    accuracy: MeanStd
    f1: MeanStd
    precision: MeanStd
    recall: MeanStd
    fold_seconds: List[float] = []
    total_seconds: float = 0.0
    time: Optional[MeanStd] = None


def compute_metrics(c: ConfusionCounts) -> Metrics:
    if c.total == 0:
        raise EmptyEvaluationError("no samples to evaluate")
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(accuracy=(c.tp + c.tn) / c.total, precision=precision, recall=recall, f1=f1)


def accumulate(labels: Sequence[Label], predictions: Sequence[Label]) -> ConfusionCounts:
    if len(labels) != len(predictions):
        raise LengthMismatchError(f"{len(labels)} labels vs {len(predictions)} predictions")
    if not labels:
        raise EmptyEvaluationError("no samples to evaluate")
    counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for truth, pred in zip(labels, predictions):
        truth_pos = Label(truth) is Label.POSITIVE
        pred_pos = Label(pred) is Label.POSITIVE
        key = ("t" if truth_pos == pred_pos else "f") + ("p" if pred_pos else "n")
        counts[key] += 1
    return ConfusionCounts(**counts)


def mean_std(values: Sequence[float]) -> MeanStd:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    # fmean can drift a ulp outside [min, max] for identical values
    return MeanStd(mean=min(max(mean, min(values)), max(values)), std=std)


def fold_summary(per_fold: Sequence[Metrics], fold_seconds: Optional[Sequence[float]] = None) -> MetricsSummary:
    """Mean and sample (n-1) standard deviation of each metric across folds"""
    if not per_fold:
        raise EmptyInputError("fold summary needs at least one fold")
    folds = [m if isinstance(m, Metrics) else Metrics.model_validate(m) for m in per_fold]
    stats = {name: mean_std([getattr(m, name) for m in folds]) for name in METRIC_NAMES}
    seconds = list(fold_seconds or [])
    return MetricsSummary(
        per_fold=folds,
        fold_seconds=seconds,
        total_seconds=sum(seconds),
        time=mean_std(seconds) if seconds else None,
        **stats,
    )


TABLE_HEADERS = ["Experiment", "Accuracy [%]", "F1 Score [%]", "Precision [%]", "Recall [%]",
                 "Total Time [s]", "Avg. Time [s]"]


def _pct(ms: MeanStd) -> str:
    return f"{100 * ms.mean:.2f} ± {100 * ms.std:.2f}"


def summary_row(name: str, summary: MetricsSummary) -> List[str]:
    avg_time = f"{summary.time.mean:.4f} ± {summary.time.std:.4f}" if summary.time else "-"
    return [name, _pct(summary.accuracy), _pct(summary.f1), _pct(summary.precision), _pct(summary.recall),
            f"{summary.total_seconds:.3f}", avg_time]


def render_table(rows: Mapping[str, MetricsSummary], tablefmt: str = "github") -> str:
    """Human-readable table, one row per experiment"""
    return tabulate([summary_row(name, s) for name, s in rows.items()], headers=TABLE_HEADERS, tablefmt=tablefmt)


def summary_record(name: str, summary: MetricsSummary) -> Dict[str, object]:
    """Flat machine-readable row for line-delimited reports"""
    record: Dict[str, object] = {"experiment": name}
    for metric in METRIC_NAMES:
        stat = getattr(summary, metric)
        record[f"{metric}_mean"] = stat.mean
        record[f"{metric}_std"] = stat.std
    record["total_seconds"] = summary.total_seconds
    if summary.time:
        record["avg_seconds_mean"] = summary.time.mean
        record["avg_seconds_std"] = summary.time.std
    return record
