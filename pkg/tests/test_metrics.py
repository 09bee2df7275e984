import numpy as np
import pytest

from services.errors import EmptyEvaluationError, EmptyInputError, LengthMismatchError
from services.labels import Label
from services.metrics import (
    ConfusionCounts,
    Metrics,
    accumulate,
    compute_metrics,
    fold_summary,
    render_table,
    summary_record,
)

P, N = Label.POSITIVE, Label.NEGATIVE


def _brute_force(tp, fp, tn, fn):
    total = tp + fp + tn + fn
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return (tp + tn) / total, precision, recall, f1


def test_worked_example():
    m = compute_metrics(ConfusionCounts(tp=8, fp=2, tn=7, fn=3))
    assert m.accuracy == 0.75
    assert m.precision == 0.8
    assert m.recall == 8 / 11
    assert m.f1 == pytest.approx(0.7619, abs=1e-4)
    assert m.f1 == pytest.approx(2 * 0.8 * (8 / 11) / (0.8 + 8 / 11), abs=1e-15)


def test_perfect_and_degenerate():
    assert compute_metrics(ConfusionCounts(tp=10, tn=10)) == Metrics(accuracy=1.0, precision=1.0, recall=1.0, f1=1.0)
    m = compute_metrics(ConfusionCounts(tn=10))
    assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 0.0, 0.0, 0.0)
    with pytest.raises(EmptyEvaluationError):
        compute_metrics(ConfusionCounts())


def test_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 50, size=4))
        if tp + fp + tn + fn == 0:
            continue
        m = compute_metrics(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))
        expected = _brute_force(tp, fp, tn, fn)
        assert (m.accuracy, m.precision, m.recall, m.f1) == pytest.approx(expected, abs=1e-12)
        for value in expected:
            assert 0.0 <= value <= 1.0



def test_accuracy_ignores_which_class_is_positive():
    rng = np.random.default_rng(1)
    for _ in range(500):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 40, size=4))
        if tp + fp + tn + fn == 0:
            continue
        swapped = ConfusionCounts(tp=tn, fp=fn, tn=tp, fn=fp)
        assert compute_metrics(swapped).accuracy == compute_metrics(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)).accuracy


def test_f1_is_one_only_without_errors():
    rng = np.random.default_rng(2)
    for _ in range(500):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 5, size=4))
        if tp == 0:
            continue
        f1 = compute_metrics(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)).f1
        assert (f1 == 1.0) == (fp == 0 and fn == 0)

def test_accumulate_examples():
    assert accumulate([P, P, N, N], [P, N, P, N]) == ConfusionCounts(tp=1, fn=1, fp=1, tn=1)
    same = accumulate([P, N, N], [P, N, N])
    assert same.fp == same.fn == 0
    allpos = accumulate([P, N, N, P], [P, P, P, P])
    assert allpos.tn == allpos.fn == 0
    assert allpos.total == 4


def test_accumulate_errors():
    with pytest.raises(LengthMismatchError):
        accumulate([P], [P, N])
    with pytest.raises(EmptyEvaluationError):
        accumulate([], [])


def test_counts_add():
    assert ConfusionCounts(tp=1, fp=2) + ConfusionCounts(tn=3, fn=4) == ConfusionCounts(tp=1, fp=2, tn=3, fn=4)


def test_fold_summary():
    a = Metrics(accuracy=0.9, precision=0.5, recall=0.5, f1=0.5)
    b = Metrics(accuracy=1.0, precision=0.5, recall=0.5, f1=0.5)
    s = fold_summary([a, b])
    assert s.accuracy.mean == pytest.approx(0.95)
    assert s.accuracy.std == pytest.approx(0.0707107, abs=1e-6)
    assert s.f1.std == 0.0

    single = fold_summary([a])
    assert single.accuracy.mean == 0.9 and single.accuracy.std == 0.0

    same = fold_summary([a, a, a])
    assert all(getattr(same, name).std == 0.0 for name in ("accuracy", "f1", "precision", "recall"))
    with pytest.raises(EmptyInputError):
        fold_summary([])


def test_fold_summary_timing():
    s = fold_summary([Metrics(accuracy=1, precision=1, recall=1, f1=1)] * 2, fold_seconds=[1.0, 3.0])
    assert s.total_seconds == 4.0
    assert s.time.mean == 2.0


def test_report_rendering():
    s = fold_summary([Metrics(accuracy=0.9, precision=0.8, recall=0.7, f1=0.75)])
    table = render_table({"rgb_var": s})
    assert "Accuracy [%]" in table and "Avg. Time [s]" in table
    assert "90.00 ± 0.00" in table
    record = summary_record("rgb_var", s)
    assert record["experiment"] == "rgb_var"
    assert record["accuracy_mean"] == 0.9
