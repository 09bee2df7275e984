import json

import pytest
from pydantic import ValidationError

from services.datasets import (
    ExperimentPlan,
    Origin,
    SampleRecord,
    build_paired_manifest,
    build_validity_manifest,
    class_weights,
    emit_experiment_plan,
    read_manifest,
    write_experiment_plan,
    write_manifest,
)
from services.datasets.synthetic import make_paired_corpus, write_paired_corpus
from services.errors import CytogateError, DegenerateManifestError, EmptyInputError, PairingError
from services.imaging import ImageRgb, VignetteParams, load_image, save_png
from services.labels import Label

from .conftest import noise_image, paired_records


def _make_dirs(tmp_path, names_high, names_low):
    for name in names_high:
        save_png(noise_image(8, 8), tmp_path / "high" / name)
    for name in names_low:
        save_png(noise_image(8, 8, seed=1), tmp_path / "low" / name)
    (tmp_path / "high").mkdir(exist_ok=True)
    (tmp_path / "low").mkdir(exist_ok=True)
    return tmp_path / "high", tmp_path / "low"


def test_paired_manifest(tmp_path):
    high, low = _make_dirs(tmp_path, ["a.png", "b.png"], ["a.png", "b.png"])
    records = build_paired_manifest(high, low)
    assert [r.sample_id for r in records] == ["high/a.png", "low/a.png", "high/b.png", "low/b.png"]
    assert {r.pair_id for r in records} == {"a.png", "b.png"}
    assert [r.label for r in records[:2]] == [Label.POSITIVE, Label.NEGATIVE]


def test_paired_manifest_empty_dirs(tmp_path):
    high, low = _make_dirs(tmp_path, [], [])
    assert build_paired_manifest(high, low) == []


def test_paired_manifest_names_orphan(tmp_path):
    high, low = _make_dirs(tmp_path, ["a.png", "b.png", "c.png"], ["a.png", "b.png"])
    with pytest.raises(PairingError, match="c.png"):
        build_paired_manifest(high, low)


def test_manifest_round_trip_and_duplicates(tmp_path):
    records = paired_records(3)
    path = write_manifest(records, tmp_path / "m.jsonl")
    assert read_manifest(path) == records
    row = json.loads(path.read_text().splitlines()[0])
    assert set(row) == {"sample_id", "pair_id", "label", "origin", "path"}

    dup = tmp_path / "dup.jsonl"
    dup.write_text(path.read_text().splitlines()[0] + "\n" + path.read_text().splitlines()[0] + "\n")
    with pytest.raises(CytogateError, match="duplicate"):
        read_manifest(dup)


def test_validity_manifest_counts(tmp_path):
    high, low = _make_dirs(tmp_path, ["a.png"], ["a.png"])
    cells = build_paired_manifest(high, low)
    distractors = tmp_path / "distractors"
    for i in range(3):
        save_png(noise_image(10, 10, seed=i), distractors / f"d{i}.png")
    (distractors / "broken.jpg").write_bytes(b"nope")

    out = tmp_path / "dark"
    result = build_validity_manifest(cells, distractors, VignetteParams(radius_fraction=0.5, feather_fraction=0.0), out)
    labels = [r.label for r in result.records]
    assert labels.count(Label.POSITIVE) == 4
    assert labels.count(Label.NEGATIVE) == 3
    assert len(result.skipped) == 1

    dark = [r for r in result.records if r.origin is Origin.DARK_EDGE]
    assert len(dark) == 2
    assert dark[0].pair_id == "a.png"
    darkened = load_image(dark[0].path)
    assert tuple(darkened.pixels[0, 0]) == (0, 0, 0)


def test_validity_manifest_without_cells(tmp_path):
    distractors = tmp_path / "distractors"
    save_png(noise_image(10, 10), distractors / "d.png")
    result = build_validity_manifest([], distractors, VignetteParams(), tmp_path / "dark")
    assert [r.origin for r in result.records] == [Origin.DISTRACTOR]

    (tmp_path / "empty").mkdir()
    with pytest.raises(EmptyInputError):
        build_validity_manifest([], tmp_path / "empty", VignetteParams(), tmp_path / "dark")


def test_class_weights_imbalanced_counts():
    records = (
        [SampleRecord(sample_id=f"p{i}", label=Label.POSITIVE, path="x") for i in range(10_400)]
        + [SampleRecord(sample_id=f"n{i}", label=Label.NEGATIVE, path="x") for i in range(21_234)]
    )
    weights = class_weights(records)
    assert weights[Label.POSITIVE] == pytest.approx(21_234 / 31_634, abs=1e-9)
    assert weights[Label.NEGATIVE] == pytest.approx(10_400 / 31_634, abs=1e-9)
    assert round(weights[Label.POSITIVE], 2) == 0.67 and round(weights[Label.NEGATIVE], 2) == 0.33
    assert sum(weights.values()) == pytest.approx(1.0, abs=1e-9)
    assert class_weights(list(reversed(records))) == weights


def test_class_weights_small_cases():
    assert class_weights(paired_records(5)) == {Label.POSITIVE: 0.5, Label.NEGATIVE: 0.5}
    records = paired_records(1, singles=2)
    weights = class_weights(records)
    assert weights[Label.POSITIVE] == pytest.approx(0.75)
    assert weights[Label.NEGATIVE] == pytest.approx(0.25)
    with pytest.raises(DegenerateManifestError):
        class_weights([r for r in records if r.label is Label.NEGATIVE])


def test_experiment_plan_defaults_and_overrides(tmp_path):
    plan = emit_experiment_plan()
    assert (plan.learning_rate, plan.momentum, plan.batch_size) == (1e-4, 0.9, 16)
    assert (plan.patience_epochs, plan.k_folds, plan.validation_fraction) == (10, 5, 0.15)

    bigger = emit_experiment_plan({"batch_size": 32})
    assert bigger.batch_size == 32
    assert bigger.model_dump(exclude={"batch_size"}) == plan.model_dump(exclude={"batch_size"})

    bound = emit_experiment_plan(records=paired_records(1, singles=2))
    assert bound.class_weights[Label.POSITIVE] == pytest.approx(0.75)

    path = write_experiment_plan(bound, tmp_path / "plan.jsonl")
    assert ExperimentPlan.model_validate_json(path.read_text().strip()) == bound

    with pytest.raises(ValidationError):
        emit_experiment_plan({"batch_size": 0})


def test_synthetic_corpus(tmp_path):
    records, images = make_paired_corpus(4, seed=1, size=60, cell=20, textured_cells=2)
    assert len(records) == 8 and len(images) == 8
    assert all(isinstance(images[r.path], ImageRgb) for r in records)
    high, low = write_paired_corpus(tmp_path, 3, seed=2, size=40, cell=20, textured_cells=1)
    assert len(build_paired_manifest(high, low)) == 6
