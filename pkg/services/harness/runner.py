import asyncio
import logging
import time
import zlib
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel

from services.aggregation import PatchScore, StrategyId, aggregate, decide
from services.classifier import QualityScorer, SharpnessScorer, create_scorer, ensure_concurrent
from services.datasets import SampleRecord, read_manifest
from services.errors import CytogateError, ImageReadError, InvalidConfigurationError, ScorerError
from services.imaging import (
    ImageRgb,
    Region,
    derive_seed,
    load_image,
    random_crop,
    resize_bilinear,
    rgb_channel_variance,
    saturation_variance,
)
from services.imaging.transforms import crop_offsets
from services.labels import Label
from services.metrics import ConfusionCounts, MetricsSummary, accumulate, compute_metrics, fold_summary, mean_std
from services.slicing import extract_fragment, slice_grid

from .calibration import calibrate_sharpness
from .config import ImageLoader, RunConfig

logger = logging.getLogger(__name__)

_CROP_KEY = 0
_CONTROL_KEY = 1


class ImageDecision(BaseModel):
    """Decision log row; deliberately free of timing so logs are reproducible"""

    sample_id: str
    label: Label
    probability: float
    decision: Label
    fragments: int


class GateResult(BaseModel):
    summary: MetricsSummary
    confusion: ConfusionCounts
    decisions: List[ImageDecision]
    skipped: List[str] = []
    image_seconds: List[float] = []
    total_seconds: float = 0.0


def resolve_scorer(
    config: RunConfig,
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
) -> QualityScorer:
    """
    An injected scorer wins. An uncalibrated baseline is fitted on the labeled
    records it is about to score; without records that is a configuration error.
    """
    if scorer is not None:
        return scorer
    if config.needs_calibration() and records:
        calibration = calibrate_sharpness(records, loader, config.input_size)
        logger.info(f"Baseline fitted on {len(records)} records: midpoint={calibration.midpoint:.6g}, "
                    f"scale={calibration.scale:.6g}")
        return SharpnessScorer(calibration)
    return create_scorer(config.scorer, config.model, config.calibration)


def resolve_records(config: RunConfig, records: Optional[Sequence[SampleRecord]] = None) -> List[SampleRecord]:
    if records is not None:
        return list(records)
    if not config.manifest:
        raise InvalidConfigurationError("run needs a manifest path or explicit records")
    return read_manifest(config.manifest)


def _sample_key(sample_id: str) -> int:
    return zlib.crc32(sample_id.encode("utf-8"))


def prepare_fragments(
    img: ImageRgb, config: RunConfig, sample_id: str
) -> Tuple[List[ImageRgb], List[Region], List[float], ImageRgb]:
    """
    Patches to score, the regions their statistics are taken from, their valid
    fractions, and the (possibly cropped) image those regions refer to.
    """
    key = _sample_key(sample_id)
    if config.crop_size:
        img = random_crop(img, config.crop_size, derive_seed(config.seed, key, _CROP_KEY))

    if config.strategy is StrategyId.CONTROL:
        x, y = crop_offsets(img.width, img.height, config.patch_size, derive_seed(config.seed, key, _CONTROL_KEY))
        region = Region(x=x, y=y, w=config.patch_size, h=config.patch_size)
        return [ImageRgb(img.view(region).copy())], [region], [1.0], img

    mode = config.resolved_edge_mode()
    specs = slice_grid(img.width, img.height, config.patch_size, mode)
    patches = [extract_fragment(img, spec, mode) for spec in specs]
    return patches, [s.source for s in specs], [s.valid_fraction for s in specs], img


def _call_scorer(scorer: QualityScorer, patch: ImageRgb) -> float:
    try:
        return float(scorer.score(patch))
    except CytogateError:
        raise
    except Exception as e:
        raise ScorerError(f"scorer {scorer!r} failed: {e}") from e


async def _score_one(scorer: QualityScorer, patch: ImageRgb, limiter: asyncio.Semaphore) -> float:
    async with limiter:
        return await asyncio.to_thread(_call_scorer, scorer, patch)


async def score_fragments(
    img: ImageRgb, sample_id: str, config: RunConfig, scorer: QualityScorer, limiter: asyncio.Semaphore
) -> List[PatchScore]:
    patches, regions, fractions, source = prepare_fragments(img, config, sample_id)
    if config.input_size:
        patches = [resize_bilinear(p, config.input_size, config.input_size) for p in patches]

    if config.workers == 1:
        probabilities = [_call_scorer(scorer, p) for p in patches]
    else:
        # gather keeps fragment order, so aggregation is independent of worker count
        probabilities = await asyncio.gather(*[_score_one(scorer, p, limiter) for p in patches])
    scores = [
        PatchScore(
            probability=min(max(p, 0.0), 1.0),
            rgb_variance=rgb_channel_variance(source, region),
            saturation_variance=saturation_variance(source, region),
            valid_fraction=fraction,
        )
        for p, region, fraction in zip(probabilities, regions, fractions)
    ]
    return scores


async def score_image(
    img: ImageRgb, sample_id: str, config: RunConfig, scorer: QualityScorer, limiter: asyncio.Semaphore
) -> Tuple[float, int]:
    scores = await score_fragments(img, sample_id, config, scorer, limiter)
    return aggregate(config.strategy, scores), len(scores)


async def run_gate_async(
    config: RunConfig,
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
) -> GateResult:
    records = resolve_records(config, records)
    scorer = resolve_scorer(config, scorer, records, loader)
    if config.workers > 1:
        scorer = ensure_concurrent(scorer)
    limiter = asyncio.Semaphore(config.workers)

    decisions: List[ImageDecision] = []
    skipped: List[str] = []
    image_seconds: List[float] = []
    started = time.perf_counter()
    for record in records:
        try:
            img = loader(record.path)
        except ImageReadError as e:
            logger.warning(f"⚠️ Excluding {record.sample_id}: {e}")
            skipped.append(record.sample_id)
            continue
        t0 = time.perf_counter()
        probability, n_fragments = await score_image(img, record.sample_id, config, scorer, limiter)
        image_seconds.append(time.perf_counter() - t0)
        decisions.append(ImageDecision(
            sample_id=record.sample_id, label=record.label, probability=probability,
            decision=decide(probability, config.threshold), fragments=n_fragments,
        ))
    total = time.perf_counter() - started

    confusion = accumulate([d.label for d in decisions], [d.decision for d in decisions])
    summary = fold_summary([compute_metrics(confusion)]).model_copy(
        update={"total_seconds": total, "time": mean_std(image_seconds)}
    )
    logger.info(f"Gate run ({config.gate}, {config.strategy.value}): {len(decisions)} images, "
                f"{len(skipped)} skipped, accuracy={summary.accuracy.mean:.4f}, {total:.2f}s")
    return GateResult(summary=summary, confusion=confusion, decisions=decisions, skipped=skipped,
                      image_seconds=image_seconds, total_seconds=total)


def run_gate(
    config: RunConfig,
    scorer: Optional[QualityScorer] = None,
    records: Optional[Sequence[SampleRecord]] = None,
    loader: ImageLoader = load_image,
) -> GateResult:
    return asyncio.run(run_gate_async(config, scorer, records, loader))
