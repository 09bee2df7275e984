import numpy as np
import pytest

from services.errors import EmptyGridError, InconsistentSpecError, InvalidSizeError
from services.imaging import ImageRgb, rgb_channel_variance, saturation_variance
from services.slicing import EdgeMode, extract_fragment, slice_grid

from .conftest import noise_image


def test_drop_mode_full_frame():
    specs = slice_grid(2592, 1944, 500, EdgeMode.DROP_PARTIAL)
    assert len(specs) == 15
    assert all(s.valid_fraction == 1.0 for s in specs)
    assert [(s.grid_row, s.grid_col) for s in specs[:6]] == [(0, 0), (0, 1), (0, 2), (0, 3), (0, 4), (1, 0)]


def test_pad_mode_full_frame():
    specs = slice_grid(2592, 1944, 500, EdgeMode.PAD_PARTIAL)
    assert len(specs) == 24
    by_cell = {(s.grid_row, s.grid_col): s for s in specs}
    assert by_cell[(0, 5)].valid_fraction == pytest.approx(0.184, abs=1e-12)
    assert by_cell[(3, 0)].valid_fraction == pytest.approx(0.888, abs=1e-12)
    assert by_cell[(3, 5)].valid_fraction == pytest.approx(0.163392, abs=1e-12)
    assert by_cell[(1, 1)].valid_fraction == 1.0


@pytest.mark.parametrize("mode", list(EdgeMode))
def test_exact_tiling_single_fragment(mode):
    specs = slice_grid(500, 500, 500, mode)
    assert len(specs) == 1 and specs[0].valid_fraction == 1.0


def test_fragments_cover_image_once():
    specs = slice_grid(37, 23, 10, EdgeMode.PAD_PARTIAL)
    covered = np.zeros((23, 37), dtype=int)
    for s in specs:
        covered[s.source.y:s.source.y + s.source.h, s.source.x:s.source.x + s.source.w] += 1
    assert (covered == 1).all()



def test_pad_mode_valid_area_sums_to_image():
    rng = np.random.default_rng(4)
    for _ in range(50):
        w, h = int(rng.integers(1, 1200)), int(rng.integers(1, 1200))
        s = int(rng.integers(25, 700))
        specs = slice_grid(w, h, s, EdgeMode.PAD_PARTIAL)
        assert sum(spec.valid_fraction * s * s for spec in specs) == pytest.approx(w * h, rel=1e-12)
        assert all(0.0 < spec.valid_fraction <= 1.0 for spec in specs)


@pytest.mark.parametrize("mode", list(EdgeMode))
def test_fragment_statistics_match_source_region(mode):
    img = noise_image(130, 95, seed=9)
    for spec in slice_grid(130, 95, 30, mode):
        if spec.valid_fraction < 1.0:
            continue
        patch = extract_fragment(img, spec, mode)
        assert rgb_channel_variance(patch, patch.full_region()) == rgb_channel_variance(img, spec.source)
        assert saturation_variance(patch, patch.full_region()) == saturation_variance(img, spec.source)


def test_slice_errors():
    with pytest.raises(EmptyGridError):
        slice_grid(400, 600, 500, EdgeMode.DROP_PARTIAL)
    with pytest.raises(InvalidSizeError):
        slice_grid(400, 600, 0, EdgeMode.PAD_PARTIAL)


def test_extract_interior_is_exact_copy():
    img = noise_image(30, 20, seed=5)
    spec = slice_grid(30, 20, 10, EdgeMode.DROP_PARTIAL)[4]
    patch = extract_fragment(img, spec, EdgeMode.DROP_PARTIAL)
    assert np.array_equal(patch.pixels, img.pixels[10:20, 10:20])


def test_extract_padded_corner():
    img = ImageRgb.blank(2592, 1944, (7, 8, 9))
    corner = slice_grid(2592, 1944, 500, EdgeMode.PAD_PARTIAL)[-1]
    patch = extract_fragment(img, corner, EdgeMode.PAD_PARTIAL).pixels
    assert patch.shape == (500, 500, 3)
    assert (patch[:444, :92] == (7, 8, 9)).all()
    assert (patch[444:, :] == 0).all()
    assert (patch[:, 92:] == 0).all()


def test_extract_full_image_fragment():
    img = noise_image(16, 16)
    spec = slice_grid(16, 16, 16, EdgeMode.DROP_PARTIAL)[0]
    assert extract_fragment(img, spec, EdgeMode.DROP_PARTIAL) == img


def test_extract_rejects_foreign_or_partial_spec():
    spec = slice_grid(30, 30, 20, EdgeMode.PAD_PARTIAL)[1]
    with pytest.raises(InconsistentSpecError):
        extract_fragment(noise_image(31, 30), spec, EdgeMode.PAD_PARTIAL)
    with pytest.raises(InconsistentSpecError):
        extract_fragment(noise_image(30, 30), spec, EdgeMode.DROP_PARTIAL)
