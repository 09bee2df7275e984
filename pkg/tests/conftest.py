import threading
from typing import Dict, List, Tuple

import numpy as np
import pytest

from services.datasets import SampleRecord
from services.datasets.synthetic import make_paired_corpus
from services.imaging import ImageRgb
from services.labels import Label


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale end-to-end gate runs (deselect with -m 'not slow')")


class ConstantScorer:
    """Returns the same probability for every fragment"""

    thread_safe = True

    def __init__(self, probability: float):
        self.probability = probability

    def score(self, img: ImageRgb) -> float:
        return self.probability


class MeanBrightnessScorer:
    """Probability is the fragment's mean normalized intensity; not declared thread safe"""

    thread_safe = False

    def __init__(self):
        self._busy = threading.Lock()

    def score(self, img: ImageRgb) -> float:
        if not self._busy.acquire(blocking=False):
            raise RuntimeError("called concurrently")
        try:
            return float(img.normalized().mean())
        finally:
            self._busy.release()


class FailingScorer:
    thread_safe = True

    def score(self, img: ImageRgb) -> float:
        raise RuntimeError("model crashed")


def paired_records(n_pairs: int, singles: int = 0) -> List[SampleRecord]:
    records = []
    for i in range(n_pairs):
        name = f"p{i:05d}"
        records.append(SampleRecord(sample_id=f"high/{name}", pair_id=name, label=Label.POSITIVE, path=f"high/{name}.png"))
        records.append(SampleRecord(sample_id=f"low/{name}", pair_id=name, label=Label.NEGATIVE, path=f"low/{name}.png"))
    for i in range(singles):
        records.append(SampleRecord(sample_id=f"single/{i}", label=Label.NEGATIVE, path=f"single/{i}.png"))
    return records


def noise_image(width: int, height: int, seed: int = 0) -> ImageRgb:
    rng = np.random.default_rng(seed)
    return ImageRgb(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


@pytest.fixture
def small_corpus() -> Tuple[List[SampleRecord], Dict[str, ImageRgb]]:
    return make_paired_corpus(10, seed=7)


@pytest.fixture
def write_png(tmp_path):
    from services.imaging import save_png

    def _write(rel: str, img: ImageRgb):
        return save_png(img, tmp_path / rel)

    return _write
