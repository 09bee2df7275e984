import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel

from services.errors import CytogateError, EmptyInputError, PairingError
from services.imaging import VignetteParams, derive_seed, load_image, save_png, synthesize_dark_edges
from services.labels import Label

from .records import Origin, SampleRecord

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


def list_images(directory: Union[str, Path]) -> Dict[str, Path]:
    root = Path(directory)
    if not root.is_dir():
        raise CytogateError(f"not a directory: {root}")
    return {
        p.name: p for p in sorted(root.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    }


def build_paired_manifest(high_dir: Union[str, Path], low_dir: Union[str, Path]) -> List[SampleRecord]:
    """
    Pair focused and misfocused captures by identical file name.

    High-quality files are labeled positive, low-quality negative; both members
    share the file name as pair_id.
    """
    high = list_images(high_dir)
    low = list_images(low_dir)
    orphans = sorted(
        [str(high[n]) for n in high.keys() - low.keys()] + [str(low[n]) for n in low.keys() - high.keys()]
    )
    if orphans:
        raise PairingError(f"{len(orphans)} file(s) without a partner: {', '.join(orphans)}")

    records = []
    for name in sorted(high):
        records.append(SampleRecord(
            sample_id=f"high/{name}", pair_id=name, label=Label.POSITIVE,
            origin=Origin.ORIGINAL, path=str(high[name]),
        ))
        records.append(SampleRecord(
            sample_id=f"low/{name}", pair_id=name, label=Label.NEGATIVE,
            origin=Origin.ORIGINAL, path=str(low[name]),
        ))
    logger.info(f"Paired manifest: {len(records)} records, {len(high)} pairs")
    return records


class ValidityManifest(BaseModel):
    records: List[SampleRecord]
    skipped: List[str] = []


def _readable(path: Path) -> bool:
    try:
        with Image.open(path) as img:
            img.verify()
        return True
    except (OSError, UnidentifiedImageError, SyntaxError) as e:
        logger.warning(f"⚠️ Skipping unreadable distractor {path}: {e}")
        return False


def build_validity_manifest(
    cell_records: Sequence[SampleRecord],
    distractor_dir: Union[str, Path],
    dark_edge_params: VignetteParams,
    output_dir: Union[str, Path],
) -> ValidityManifest:
    """
    Cell vs non-cell manifest: every cell image plus a dark-edge copy (both
    positive) and every readable distractor (negative).
    """
    distractors = list_images(distractor_dir)
    if not distractors:
        raise EmptyInputError(f"no distractor images in {distractor_dir}")

    out_root = Path(output_dir)
    try:
        out_root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CytogateError(f"cannot create output directory {out_root}: {e}") from e

    records: List[SampleRecord] = []
    dark_records: List[SampleRecord] = []
    for index, cell in enumerate(cell_records):
        params = dark_edge_params
        if params.center_jitter > 0:
            params = params.model_copy(update={"seed": derive_seed(params.seed, index)})
        darkened = synthesize_dark_edges(load_image(cell.path), params)
        target = out_root / (cell.sample_id.replace("/", "__") + ".png")
        try:
            save_png(darkened, target)
        except OSError as e:
            raise CytogateError(f"cannot write dark-edge image {target}: {e}") from e
        records.append(cell.model_copy(update={"label": Label.POSITIVE}))
        dark_records.append(SampleRecord(
            sample_id=f"dark_edge/{cell.sample_id}", pair_id=cell.pair_id, label=Label.POSITIVE,
            origin=Origin.DARK_EDGE, path=str(target),
        ))
    records.extend(dark_records)

    skipped = []
    for name, path in distractors.items():
        if not _readable(path):
            skipped.append(str(path))
            continue
        records.append(SampleRecord(
            sample_id=f"distractor/{name}", label=Label.NEGATIVE, origin=Origin.DISTRACTOR, path=str(path),
        ))

    positives = sum(1 for r in records if r.label is Label.POSITIVE)
    logger.info(f"Validity manifest: {positives} positive, {len(records) - positives} negative, "
                f"{len(skipped)} distractor(s) skipped")
    return ValidityManifest(records=records, skipped=skipped)
