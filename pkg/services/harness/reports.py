import json
import logging
from pathlib import Path
from typing import Iterable, Mapping, Tuple, Union

from services.datasets import write_jsonl
from services.metrics import MetricsSummary, render_table, summary_record

from .runner import ImageDecision

logger = logging.getLogger(__name__)


def write_decision_log(decisions: Iterable[ImageDecision], path: Union[str, Path]) -> Path:
    target = write_jsonl(decisions, path)
    logger.info(f"Decision log written to {target}")
    return target


def write_report(rows: Mapping[str, MetricsSummary], out_dir: Union[str, Path], stem: str) -> Tuple[Path, Path]:
    """
    Writes ``<stem>.jsonl`` (one flat record per experiment) and ``<stem>.txt``
    (the same rows as a table). Returns both paths.
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    records_path = directory / f"{stem}.jsonl"
    table_path = directory / f"{stem}.txt"

    with open(records_path, "w", encoding="utf-8") as f:
        for name, summary in rows.items():
            f.write(json.dumps(summary_record(name, summary)))
            f.write("\n")
    table = render_table(rows)
    table_path.write_text(table + "\n", encoding="utf-8")
    logger.info(f"📊 Report {stem}: {len(rows)} rows -> {records_path}, {table_path}")
    return records_path, table_path
