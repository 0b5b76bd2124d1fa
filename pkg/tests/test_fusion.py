import numpy as np
import pytest

from src.domain.exceptions import (
    InvalidWaveletLevelsError,
    KernelTooLargeError,
    ShapeMismatchError,
    StackTooShortError,
)
from src.domain.models import FocusIndexMap, ZStack
from src.application.services.focusmeasure import tenengrad
from src.application.services.fusion import (
    composite_fuse,
    focus_index_map,
    fuse,
    haar_dwt2,
    haar_idwt2,
    harris_response,
    refine_mask,
    wavelet_fuse,
)
from src.application.services.quality import psnr
from src.application.services.synthetic import band_masks, complementary_stack, specimen_image

from tests.helpers import half_blurred_pair

BAND = 14


@pytest.fixture
def noise_pair(noise_image):
    return ZStack(frames=list(half_blurred_pair(noise_image)))


class TestHarris:
    def test_constant_image(self):
        assert np.abs(harris_response(np.full((32, 32, 1), 0.7))).max() == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("size", [6, 7])
    def test_image_must_exceed_window(self, size):
        with pytest.raises(KernelTooLargeError):
            harris_response(np.zeros((size, 32, 1)), window=7)

    def test_transpose(self, noise_image):
        plane = noise_image[:, :, 0]
        np.testing.assert_allclose(harris_response(plane.T), harris_response(plane).T, atol=1e-10)

    def test_corner_beats_flat(self):
        img = np.zeros((32, 32))
        img[16:, 16:] = 1.0
        response = harris_response(img)
        assert response[16, 16] > response[4, 4]


class TestFocusIndexMap:
    def test_picks_sharp_half(self, noise_pair):
        index = focus_index_map(noise_pair).index
        w = index.shape[1]
        left, right = index[:, : w // 2 - BAND], index[:, w // 2 + BAND :]
        correct = np.sum(left == 0) + np.sum(right == 1)
        assert correct >= 0.9 * (left.size + right.size)

    def test_single_frame(self, noise_image):
        focus_map = focus_index_map(ZStack(frames=[noise_image]))
        assert focus_map.n_frames == 1
        assert not focus_map.index.any()

    def test_threads_agree(self, blur_ladder):
        np.testing.assert_array_equal(
            focus_index_map(blur_ladder, threads=1).index,
            focus_index_map(blur_ladder, threads=3).index,
        )

    def test_identical_frames_tie_to_first(self, noise_image):
        focus_map = focus_index_map(ZStack(frames=[noise_image, noise_image.copy()]))
        assert not focus_map.index.any()


class TestRefineMask:
    def test_removes_speckle(self):
        index = np.zeros((20, 20), dtype=np.int64)
        index[10, 10] = 1
        refined = refine_mask(FocusIndexMap(index=index, n_frames=2), radius=2)
        assert not refined.index.any()

    def test_keeps_large_regions(self):
        index = np.zeros((20, 20), dtype=np.int64)
        index[:, 10:] = 1
        refined = refine_mask(FocusIndexMap(index=index, n_frames=2), radius=2)
        np.testing.assert_array_equal(refined.index, index)


class TestComposite:
    def test_exact_masks_recover_truth(self, specimen):
        stack = complementary_stack(specimen, n_frames=3)
        index = np.zeros(specimen.shape[:2], dtype=np.int64)
        for i, cols in enumerate(band_masks(specimen.shape[1], 3)):
            index[:, cols] = i
        fused = composite_fuse(stack, FocusIndexMap(index=index, n_frames=3), feather=0)
        # masked L1 against the truth
        assert np.abs(fused - specimen).sum() == 0

    def test_feathering_identical_frames(self, specimen):
        stack = ZStack(frames=[specimen, specimen.copy()])
        index = np.zeros(specimen.shape[:2], dtype=np.int64)
        index[:, 48:] = 1
        fused = composite_fuse(stack, FocusIndexMap(index=index, n_frames=2), feather=3.0)
        np.testing.assert_allclose(fused, specimen, atol=1e-12)

    def test_shape_mismatch(self, specimen):
        stack = ZStack(frames=[specimen, specimen])
        with pytest.raises(ShapeMismatchError):
            composite_fuse(stack, FocusIndexMap(index=np.zeros((10, 10), dtype=np.int64), n_frames=2))

    def test_frame_count_mismatch(self, specimen):
        stack = ZStack(frames=[specimen, specimen])
        with pytest.raises(ShapeMismatchError):
            composite_fuse(stack, FocusIndexMap(index=np.zeros(specimen.shape[:2], dtype=np.int64), n_frames=3))


class TestHaar:
    def test_constant_approximation(self):
        pyramid = haar_dwt2(np.full((32, 32), 0.25), levels=3)
        np.testing.assert_allclose(pyramid.approximation, 0.25 * 2**3)
        for band in pyramid.details:
            for coeffs in band:
                np.testing.assert_allclose(coeffs, 0.0, atol=1e-12)

    def test_energy_preserved(self, rng):
        plane = rng.random((32, 48))
        pyramid = haar_dwt2(plane, levels=2)
        energy = np.sum(pyramid.approximation**2) + sum(np.sum(c**2) for band in pyramid.details for c in band)
        assert energy == pytest.approx(np.sum(plane**2), rel=1e-10)

    def test_inverse_on_odd_shape(self, rng):
        plane = rng.random((37, 29))
        np.testing.assert_allclose(haar_idwt2(haar_dwt2(plane, levels=3)), plane, atol=1e-10)

    def test_levels_must_be_positive(self):
        with pytest.raises(InvalidWaveletLevelsError):
            haar_dwt2(np.zeros((8, 8)), levels=0)


class TestWaveletFuse:
    def test_same_frame_twice(self, specimen):
        fused = wavelet_fuse(ZStack(frames=[specimen, specimen.copy()]), levels=3)
        np.testing.assert_allclose(fused, specimen, atol=1e-10)

    def test_single_frame(self, specimen):
        with pytest.raises(StackTooShortError):
            wavelet_fuse(ZStack(frames=[specimen]))


class TestFuse:
    def test_sharper_than_every_frame(self, noise_pair):
        fused, focus_map = fuse(noise_pair, feather=0)
        assert focus_map is not None
        assert all(tenengrad(fused).value >= tenengrad(frame).value for frame in noise_pair.frames)

    @pytest.mark.parametrize("method", ["masks", "wavelet"])
    def test_complementary_stack(self, method):
        truth = specimen_image(96, seed=7)
        stack = complementary_stack(truth, n_frames=3)
        fused, _ = fuse(stack, method=method, wavelet_levels=3)
        assert fused.shape == truth.shape
        assert psnr(fused, truth) > max(psnr(frame, truth) for frame in stack.frames)

    def test_wavelet_returns_no_map(self, blur_ladder):
        assert fuse(blur_ladder, method="wavelet")[1] is None

    def test_unknown_method(self, blur_ladder):
        with pytest.raises(ValueError):
            fuse(blur_ladder, method="median")


class TestFusionProperties:
    def test_harris_ignores_brightness_shift(self, noise_image):
        np.testing.assert_allclose(harris_response(noise_image + 0.1), harris_response(noise_image), atol=1e-9)

    def test_frame_order_relabels_map(self, noise_pair):
        forward = focus_index_map(noise_pair).index
        swapped = focus_index_map(ZStack(frames=noise_pair.frames[::-1])).index
        # exact ties would resolve to frame 0 both times
        assert np.mean(swapped == 1 - forward) > 0.99

    def test_refine_is_idempotent(self, noise_pair):
        once = refine_mask(focus_index_map(noise_pair))
        np.testing.assert_array_equal(refine_mask(once).index, once.index)

    def test_masks_partition_pixels(self, blur_ladder):
        masks = np.stack(focus_index_map(blur_ladder).masks())
        np.testing.assert_array_equal(masks.sum(axis=0), 1)

    def test_wavelet_is_order_invariant(self, blur_ladder):
        reversed_stack = ZStack(frames=blur_ladder.frames[::-1])
        np.testing.assert_allclose(wavelet_fuse(blur_ladder, 3), wavelet_fuse(reversed_stack, 3), atol=1e-9)

    def test_wavelet_sharper_than_both_halves(self, noise_pair):
        fused = wavelet_fuse(noise_pair, levels=3)
        assert tenengrad(fused).value >= max(tenengrad(f).value for f in noise_pair.frames)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_complementary_stack_sharpness(seed):
    truth = specimen_image(128, seed=seed)
    reference = tenengrad(truth).value
    stack = complementary_stack(truth, n_frames=3)
    assert all(tenengrad(frame).value < 0.8 * reference for frame in stack.frames)
    for method in ("masks", "wavelet"):
        fused, _ = fuse(stack, method=method, wavelet_levels=3)
        assert tenengrad(fused).value >= 0.95 * reference
