import json
import logging
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from services.errors import CytogateError
from services.labels import Label

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class Origin(str, Enum):
    ORIGINAL = "original"
    DARK_EDGE = "dark_edge"
    DISTRACTOR = "distractor"


class SampleRecord(BaseModel):
    """One manifest row; serialized keys are sample_id, pair_id, label, origin, path"""

    model_config = ConfigDict(frozen=True)

    sample_id: str
    pair_id: Optional[str] = None
    label: Label
    origin: Origin = Origin.ORIGINAL
    path: str


def write_jsonl(rows: Iterable[BaseModel], path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(target.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(row.model_dump_json())
            f.write("\n")
    tmp.replace(target)
    return target


def read_jsonl(path: Union[str, Path], model: Type[ModelT]) -> List[ModelT]:
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rows.append(model.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise CytogateError(f"{path}:{lineno}: invalid {model.__name__} row: {e}") from e
    return rows


def write_manifest(records: Iterable[SampleRecord], path: Union[str, Path]) -> Path:
    target = write_jsonl(records, path)
    logger.info(f"Manifest written to {target}")
    return target


def read_manifest(path: Union[str, Path]) -> List[SampleRecord]:
    records = read_jsonl(path, SampleRecord)
    seen = set()
    for record in records:
        if record.sample_id in seen:
            raise CytogateError(f"{path}: duplicate sample_id {record.sample_id!r}")
        seen.add(record.sample_id)
    logger.info(f"Loaded {len(records)} records from {path}")
    return records
