import math
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from pydantic import ValidationError

from services.classifier import (
    CountingScorer,
    LogisticCalibration,
    QualityScorer,
    SerializedScorer,
    SharpnessScorer,
    create_scorer,
    ensure_concurrent,
    fit_calibration,
    laplacian_sharpness,
    logistic_map,
)
from services.datasets.synthetic import gaussian_blur
from services.errors import DegenerateManifestError, InvalidConfigurationError, LengthMismatchError, TooSmallError
from services.imaging import ImageRgb

from .conftest import ConstantScorer, MeanBrightnessScorer, noise_image


def test_uniform_image_has_zero_sharpness():
    assert laplacian_sharpness(ImageRgb.blank(32, 32, (90, 90, 90))) == 0.0


def test_single_interior_response_has_zero_variance():
    pixels = np.zeros((3, 3, 3), dtype=np.uint8)
    pixels[1, 1] = 255
    assert laplacian_sharpness(ImageRgb(pixels)) == 0.0


def test_laplacian_matches_hand_convolution():
    img = noise_image(9, 7, seed=4)
    gray = img.normalized().mean(axis=2)
    response = (gray[:-2, 1:-1] + gray[2:, 1:-1] + gray[1:-1, :-2] + gray[1:-1, 2:] - 4 * gray[1:-1, 1:-1])
    assert laplacian_sharpness(img) == pytest.approx(float(np.var(response)), rel=1e-9)


def test_blurred_copy_scores_lower():
    for seed in range(5):
        img = noise_image(64, 64, seed=seed)
        assert laplacian_sharpness(gaussian_blur(img, 1.5)) < laplacian_sharpness(img)



def test_sharpness_falls_as_blur_grows():
    for seed in range(3):
        img = noise_image(96, 96, seed=seed)
        values = [laplacian_sharpness(img)] + [laplacian_sharpness(gaussian_blur(img, s)) for s in (0.5, 1.0, 2.0, 3.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

def test_sharpness_rejects_tiny_images():
    with pytest.raises(TooSmallError):
        laplacian_sharpness(ImageRgb.blank(2, 5))


def test_logistic_map_examples():
    cal = LogisticCalibration(midpoint=3.0, scale=2.0)
    assert logistic_map(3.0, cal) == 0.5
    assert logistic_map(5.0, cal) == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-12)
    assert logistic_map(1e6, cal) == pytest.approx(1.0)
    assert logistic_map(-1e6, cal) == pytest.approx(0.0)
    with pytest.raises(ValidationError):
        LogisticCalibration(scale=0.0)


def test_logistic_map_is_monotone():
    cal = LogisticCalibration(midpoint=0.01, scale=0.002)
    values = [logistic_map(x, cal) for x in np.linspace(-1, 1, 201)]
    assert values == sorted(values)



@pytest.mark.parametrize("midpoint,scale", [(0.0, 1.0), (0.01, 0.002), (-3.0, 7.5)])
def test_logistic_map_is_symmetric_about_midpoint(midpoint, scale):
    cal = LogisticCalibration(midpoint=midpoint, scale=scale)
    for d in np.linspace(0, 10 * scale, 41):
        assert logistic_map(midpoint + d, cal) + logistic_map(midpoint - d, cal) == pytest.approx(1.0, abs=1e-12)

def test_fit_calibration_between_medians():
    cal = fit_calibration([1.0, 2.0, 3.0, 9.0, 10.0, 11.0], [False, False, False, True, True, True])
    assert cal.midpoint == pytest.approx(6.0)
    assert cal.scale == pytest.approx(2.0)
    assert logistic_map(10.0, cal) > 0.8 > 0.2 > logistic_map(2.0, cal)


def test_fit_calibration_errors():
    with pytest.raises(DegenerateManifestError):
        fit_calibration([1.0, 2.0], [True, True])
    with pytest.raises(LengthMismatchError):
        fit_calibration([1.0], [True, False])


def test_sharpness_scorer_protocol():
    scorer = SharpnessScorer(LogisticCalibration(midpoint=0.01, scale=0.005))
    assert isinstance(scorer, QualityScorer)
    assert scorer.thread_safe
    sharp = noise_image(40, 40)
    assert scorer.score(sharp) > scorer.score(gaussian_blur(sharp, 2.0))
    assert 0.0 <= scorer.score(sharp) <= 1.0


def test_factory():
    assert isinstance(create_scorer("baseline", calibration=LogisticCalibration(midpoint=1.0)), SharpnessScorer)
    with pytest.raises(InvalidConfigurationError, match="uncalibrated"):
        create_scorer("baseline")
    with pytest.raises(InvalidConfigurationError):
        create_scorer("onnx")
    with pytest.raises(InvalidConfigurationError):
        create_scorer("resnet")


def test_counting_scorer_counts_concurrent_calls():
    counting = CountingScorer(ConstantScorer(0.3))
    img = ImageRgb.blank(4, 4)
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda _: counting.score(img), range(500)))
    assert counting.calls == 500
    assert counting.reset() == 500
    assert counting.calls == 0
    assert counting.thread_safe


def test_serialized_scorer_guards_unsafe_scorer():
    unsafe = MeanBrightnessScorer()
    wrapped = ensure_concurrent(unsafe)
    assert isinstance(wrapped, SerializedScorer)
    img = ImageRgb.blank(8, 8, (255, 255, 255))
    barrier = threading.Barrier(4)

    def call(_):
        barrier.wait()
        return wrapped.score(img)

    with ThreadPoolExecutor(max_workers=4) as pool:
        assert list(pool.map(call, range(4))) == [1.0] * 4

    safe = ConstantScorer(0.5)
    assert ensure_concurrent(safe) is safe
