import threading

from services.imaging import ImageRgb

from .base import QualityScorer


class SerializedScorer:
    """Runs a single-threaded scorer behind a lock"""

    thread_safe = True

    def __init__(self, inner: QualityScorer):
        self.inner = inner
        self._lock = threading.Lock()

    def score(self, img: ImageRgb) -> float:
        with self._lock:
            return self.inner.score(img)

    def __repr__(self) -> str:
        return f"SerializedScorer({self.inner!r})"


class CountingScorer:
    """Counts score() invocations for auditing fragment fan-out"""

    def __init__(self, inner: QualityScorer):
        self.inner = inner
        self.thread_safe = getattr(inner, "thread_safe", False)
        self._lock = threading.Lock()
        self.calls = 0

    def score(self, img: ImageRgb) -> float:
        with self._lock:
            self.calls += 1
        return self.inner.score(img)

    def reset(self) -> int:
        with self._lock:
            calls, self.calls = self.calls, 0
        return calls

    def __repr__(self) -> str:
        return f"CountingScorer({self.inner!r}, calls={self.calls})"


def ensure_concurrent(scorer: QualityScorer) -> QualityScorer:
    if getattr(scorer, "thread_safe", False):
        return scorer
    return SerializedScorer(scorer)
