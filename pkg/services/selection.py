"""
Distractor class selection: rank classifier classes by their mean raw logit
over a probe set of cell images, and keep the highest as look-alikes.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from services.errors import CytogateError, EmptyInputError, OutOfRangeError
from services.imaging import ImageRgb

logger = logging.getLogger(__name__)


class LogitMatrix(BaseModel):
    model_config = ConfigDict(frozen=True)

    labels: List[str]
    rows: List[List[float]]

    @model_validator(mode="after")
    def _shape(self):
        width = len(self.labels)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} logits, expected {width}")
        if self.rows and not np.isfinite(np.asarray(self.rows, dtype=np.float64)).all():
            raise ValueError("logits must be finite")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=np.float64).reshape(len(self.rows), len(self.labels))


def rank_classes(m: LogitMatrix, top_k: int) -> List[Tuple[str, float]]:
    """Classes by descending mean logit, ties by ascending name; first ``top_k``"""
    if not m.rows:
        raise EmptyInputError("logit matrix has no rows")
    if not 1 <= top_k <= len(m.labels):
        raise OutOfRangeError(f"top_k must be in [1, {len(m.labels)}], got {top_k}")
    means = m.as_array().mean(axis=0)
    ranked = sorted(zip(m.labels, means.tolist()), key=lambda item: (-item[1], item[0]))
    return ranked[:top_k]


def read_logit_matrix(path: Union[str, Path]) -> LogitMatrix:
    """Delimited file: header of class names, one row of logits per probe sample"""
    try:
        sep = "\t" if Path(path).suffix.lower() in (".tsv", ".tab") else ","
        frame = pd.read_csv(path, sep=sep)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise CytogateError(f"cannot read logit matrix {path}: {e}") from e
    try:
        values = frame.to_numpy(dtype=np.float64)
    except ValueError as e:
        raise CytogateError(f"non-numeric logits in {path}: {e}") from e
    logger.info(f"Loaded logit matrix {path}: {values.shape[0]} rows x {values.shape[1]} classes")
    return LogitMatrix(labels=[str(c) for c in frame.columns], rows=values.tolist())


def write_logit_matrix(m: LogitMatrix, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(m.rows, columns=m.labels).to_csv(target, index=False)
    return target


def probe_logits(model, images: Iterable[ImageRgb], labels: Sequence[str]) -> LogitMatrix:
    """Raw outputs of a classifier (an object with ``logits(img)``) over probe images"""
    rows = []
    for img in images:
        out = np.asarray(model.logits(img), dtype=np.float64).reshape(-1)
        if out.size != len(labels):
            raise OutOfRangeError(f"model emitted {out.size} logits for {len(labels)} class labels")
        rows.append(out.tolist())
    logger.info(f"Probed {len(rows)} images over {len(labels)} classes")
    return LogitMatrix(labels=list(labels), rows=rows)
