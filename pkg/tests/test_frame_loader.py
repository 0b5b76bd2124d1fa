import numpy as np
import pytest
from PIL import Image as PILImage

from src.domain.exceptions import EmptyStackError, FrameLoadError, ImageWriteError
from src.domain.models import FocusIndexMap
from src.infrastructure.extensions.loaders import load_stack, read_image, save_image
from src.infrastructure.extensions.loaders.frame_loader import (
    list_images,
    pattern_to_regex,
    save_index_map,
    save_mask,
)


def test_pattern_regex():
    regex = pattern_to_regex("frame_%05d")
    assert regex.match("frame_00012.png").group(1) == "00012"
    assert regex.match("frame_00012.PNG")
    assert regex.match("other_00012.png") is None


def test_pattern_needs_integer_field():
    with pytest.raises(ValueError):
        pattern_to_regex("frame")


def test_eight_bit_quantization(tmp_path, rng):
    img = rng.random((12, 10, 3))
    back = read_image(save_image(img, tmp_path / "x.png"))
    np.testing.assert_allclose(back, np.round(img * 255) / 255, atol=1e-12)


def test_gray_file_reads_single_channel(tmp_path):
    PILImage.fromarray(np.full((5, 6), 128, dtype=np.uint8)).save(tmp_path / "g.png")
    img = read_image(tmp_path / "g.png")
    assert img.shape == (5, 6, 1)
    assert img[0, 0, 0] == pytest.approx(128 / 255)


def test_sixteen_bit_file(tmp_path):
    PILImage.fromarray(np.full((4, 4), 65535, dtype=np.uint16)).save(tmp_path / "deep.png")
    assert read_image(tmp_path / "deep.png").max() == pytest.approx(1.0)


def test_unreadable_file(tmp_path):
    path = tmp_path / "frame_00000.png"
    path.write_bytes(b"not an image")
    with pytest.raises(FrameLoadError):
        read_image(path)


def test_missing_directory(tmp_path):
    with pytest.raises(FrameLoadError):
        load_stack(tmp_path / "absent")


def test_no_matching_frames(tmp_path):
    save_image(np.zeros((4, 4, 1)), tmp_path / "picture.png")
    with pytest.raises(EmptyStackError):
        load_stack(tmp_path)


def test_list_images_ignores_other_files(tmp_path):
    save_image(np.zeros((4, 4, 1)), tmp_path / "b.png")
    save_image(np.zeros((4, 4, 1)), tmp_path / "a.png")
    (tmp_path / "notes.txt").write_text("x")
    assert [p.name for p in list_images(tmp_path)] == ["a.png", "b.png"]


def test_mask_and_index_map_files(tmp_path):
    mask = np.eye(4, dtype=bool)
    written = np.asarray(PILImage.open(save_mask(mask, tmp_path / "m.png")))
    np.testing.assert_array_equal(written, np.where(mask, 255, 0))
    focus_map = FocusIndexMap(index=np.arange(12).reshape(3, 4) % 3, n_frames=3)
    with PILImage.open(save_index_map(focus_map, tmp_path / "idx.png")) as saved:
        np.testing.assert_array_equal(np.asarray(saved), focus_map.index)


def test_write_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ImageWriteError):
        save_image(np.zeros((4, 4, 1)), blocker / "out.png")
