import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from src.domain.exceptions import CropSizeError, InvalidLevelCountError, StackTooShortError
from src.domain.models import ClassifierConfig, FocusDecision
from src.application.services.defocusnet import (
    build_classifier,
    build_synthetic_dataset,
    build_zstack_dataset,
    classify_frame,
    dataset_loss,
    default_level_threshold,
    evaluate_accuracy,
    expected_levels,
    level_threshold_sweep,
    mean_level_error,
    predict_level,
    predict_levels,
    train_classifier,
    wilson_report,
)
from src.application.services.focusmeasure import tenengrad
from src.application.services.synthetic import defocus_stack, specimen_corpus, specimen_image
from src.application.tinynn import load_model, save_model


def tiny_config(**overrides) -> ClassifierConfig:
    values = {"n_levels": 2, "epochs": 2, "batch_size": 4, "crop_size": 16, "seed": 3}
    values.update(overrides)
    return ClassifierConfig(**values)


@pytest.fixture
def tiny_dataset(specimen):
    return build_synthetic_dataset([specimen], n_levels=2, crops_per_level=8, seed=1, crop_size=16)


class TestArchitecture:
    def test_logits_for_full_size_crop(self):
        net = build_classifier(n_levels=10)
        assert net.infer(np.zeros((1, 3, 84, 84))).shape == (1, 10)

    def test_flatten_size(self):
        net = build_classifier(n_levels=10)
        assert net.specs[7].kind == "dense"
        assert net.specs[7].in_features == 32 * 21 * 21 == 14112

    def test_parameter_count_closed_form(self):
        net = build_classifier(n_levels=5)
        assert net.parameter_count() == sum(spec.parameter_count() for spec in net.specs)

    def test_crop_size_must_divide_by_four(self):
        with pytest.raises(ValueError):
            build_classifier(crop_size=30)


class TestSyntheticDataset:
    def test_balanced_levels(self, tiny_dataset):
        assert tiny_dataset.class_counts() == [8, 8]
        assert tiny_dataset.crops.shape == (16, 16, 16, 3)
        assert tiny_dataset.provenance == "synthetic_psf"

    def test_level_zero_crops_are_raw_windows(self, specimen, tiny_dataset):
        windows = sliding_window_view(specimen, (16, 16, 3)).reshape(-1, 16, 16, 3)
        for crop in tiny_dataset.crops[tiny_dataset.levels == 0]:
            assert np.any(np.all(windows == crop, axis=(1, 2, 3)))

    def test_seeded(self, specimen, tiny_dataset):
        again = build_synthetic_dataset([specimen], n_levels=2, crops_per_level=8, seed=1, crop_size=16)
        np.testing.assert_array_equal(again.crops, tiny_dataset.crops)

    def test_blur_lowers_sharpness_per_crop(self, specimen):
        dataset = build_synthetic_dataset([specimen], n_levels=4, crops_per_level=20, seed=0, crop_size=16)
        per_level = dataset.crops.reshape(4, 20, 16, 16, 3)
        decreasing = 0
        for k in range(3):
            for i in range(20):
                decreasing += tenengrad(per_level[k, i]).value > tenengrad(per_level[k + 1, i]).value
        assert decreasing >= 0.9 * 60

    def test_needs_two_levels(self, specimen):
        with pytest.raises(InvalidLevelCountError):
            build_synthetic_dataset([specimen], n_levels=1, crops_per_level=4, crop_size=16)


class TestZStackDataset:
    def test_single_level(self, blur_ladder):
        dataset = build_zstack_dataset(blur_ladder, 0, 1, 1, crops_per_level=5, crop_size=16)
        assert len(dataset) == 5
        assert set(dataset.levels.tolist()) == {0}
        assert dataset.provenance == "real_zstack"

    def test_steps_past_the_stack(self, blur_ladder):
        with pytest.raises(StackTooShortError):
            build_zstack_dataset(blur_ladder, 0, 3, 3, crops_per_level=5, crop_size=16)

    def test_sharpness_falls_with_level(self, blur_ladder):
        dataset = build_zstack_dataset(blur_ladder, 0, 5, 1, crops_per_level=10, crop_size=16)
        means = [
            np.mean([tenengrad(c).value for c in dataset.crops[dataset.levels == k]])
            for k in range(5)
        ]
        assert all(a >= b for a, b in zip(means, means[1:]))


class TestTraining:
    def test_log_has_one_row_per_epoch(self, tiny_dataset):
        _, log = train_classifier(tiny_dataset, tiny_config(epochs=3))
        assert len(log) == 3
        assert all(np.isfinite(log))

    def test_same_seed_same_log(self, tiny_dataset):
        _, first = train_classifier(tiny_dataset, tiny_config())
        _, second = train_classifier(tiny_dataset, tiny_config())
        assert first == second

    def test_reload_reproduces_final_loss(self, tiny_dataset, tmp_path):
        net, log = train_classifier(tiny_dataset, tiny_config(loss="rps"))
        loaded = load_model(save_model(net, tmp_path / "clf.mstk"))
        value = dataset_loss(loaded, tiny_dataset.crops, tiny_dataset.levels, "rps")
        assert value == pytest.approx(log[-1], abs=1e-6)
        assert loaded.metadata["config"]["loss"] == "rps"

    def test_crop_size_mismatch(self, tiny_dataset):
        with pytest.raises(CropSizeError):
            train_classifier(tiny_dataset, tiny_config(crop_size=20))


class TestPrediction:
    def test_probabilities(self, tiny_classifier, tiny_dataset):
        probs = predict_level(tiny_classifier, tiny_dataset.crops[0])
        assert probs.shape == (2,)
        assert probs.sum() == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_array_equal(probs, predict_level(tiny_classifier, tiny_dataset.crops[0]))

    def test_wrong_crop_size(self, tiny_classifier):
        with pytest.raises(CropSizeError):
            predict_levels(tiny_classifier, np.zeros((1, 20, 20, 3)))

    def test_single_crop_frame(self, tiny_classifier, specimen):
        record = classify_frame(tiny_classifier, specimen, n_crops=1, seed=0, index=4)
        assert record.index == 4
        assert len(record.crop_levels) == 1
        assert record.min_level == record.mean_level == record.crop_levels[0]
        expected = FocusDecision.IN_FOCUS if record.min_level <= 0.25 else FocusDecision.OUT_OF_FOCUS
        assert record.decision == expected

    def test_zero_threshold_rejects(self, tiny_classifier, specimen):
        record = classify_frame(tiny_classifier, specimen, n_crops=3, seed=0, level_threshold=0.0)
        assert record.decision == FocusDecision.OUT_OF_FOCUS

    def test_seeded_decisions(self, tiny_classifier, specimen):
        a = classify_frame(tiny_classifier, specimen, n_crops=4, seed=9)
        b = classify_frame(tiny_classifier, specimen, n_crops=4, seed=9)
        assert a == b

    def test_rejection_shrinks_as_threshold_grows(self, tiny_classifier, blur_ladder):
        rejected_before = set(range(len(blur_ladder)))
        for threshold in np.linspace(0.0, 1.0, 11):
            rejected = {
                i
                for i, frame in enumerate(blur_ladder.frames)
                if classify_frame(tiny_classifier, frame, n_crops=4, seed=i, level_threshold=threshold).decision
                == FocusDecision.OUT_OF_FOCUS
            }
            assert rejected <= rejected_before
            rejected_before = rejected
        assert not rejected_before

    def test_default_threshold(self):
        assert default_level_threshold(5) == 1.0
        assert default_level_threshold(10) == 2.25


class TestAccuracy:
    def test_wilson_interval(self):
        report = wilson_report(95, 100)
        assert report.accuracy == 0.95
        assert report.lower == pytest.approx(0.8882, abs=1e-3)
        assert report.upper == pytest.approx(0.9785, abs=1e-3)

    def test_perfect_predictor_upper_bound(self):
        report = wilson_report(200, 200)
        assert report.accuracy == 1.0
        assert report.upper == pytest.approx(1.0)

    def test_coin_flip_predictor(self):
        n_correct, n_total = 0, 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            truth = rng.random(200) < 0.5
            guesses = rng.random(200) < 0.5
            n_correct += int(np.sum(truth == guesses))
            n_total += len(truth)
        report = wilson_report(n_correct, n_total, confidence=0.999)
        assert report.accuracy == pytest.approx(0.5, abs=0.05)
        assert report.lower <= 0.5 <= report.upper

    def test_accuracy_matches_threshold_rule(self, tiny_classifier, tiny_dataset):
        in_focus = tiny_dataset.levels == 0
        levels = expected_levels(predict_levels(tiny_classifier, tiny_dataset.crops))
        report = evaluate_accuracy(tiny_classifier, tiny_dataset.crops, in_focus, level_threshold=0.5)
        assert report.n_correct == int(np.sum((levels <= 0.5) == in_focus))
        assert report.lower <= report.accuracy <= report.upper

    def test_sweep_is_at_least_as_good(self, tiny_classifier, tiny_dataset):
        in_focus = tiny_dataset.levels == 0
        _, best = level_threshold_sweep(tiny_classifier, tiny_dataset.crops, in_focus)
        fixed = evaluate_accuracy(tiny_classifier, tiny_dataset.crops, in_focus, level_threshold=0.5)
        assert best >= fixed.accuracy or best == pytest.approx(fixed.accuracy)

    def test_mean_level_error_range(self, tiny_classifier, tiny_dataset):
        error = mean_level_error(tiny_classifier, tiny_dataset.crops, tiny_dataset.levels)
        assert 0.0 <= error <= 1.0


@pytest.mark.slow
def test_overfit_small_set():
    images = [specimen_image(96, seed=s) for s in range(2)]
    dataset = build_synthetic_dataset(images, n_levels=2, crops_per_level=8, seed=0, crop_size=16, level_step=2.0)
    net, _ = train_classifier(dataset, tiny_config(epochs=500, lr=1e-3, batch_size=16))
    predicted = predict_levels(net, dataset.crops).argmax(axis=1)
    np.testing.assert_array_equal(predicted, dataset.levels)


@pytest.mark.slow
def test_desk_scale_accuracy():
    train_images = specimen_corpus(4, size=256, seed=0)
    held_out = specimen_corpus(2, size=256, seed=100)
    train = build_synthetic_dataset(train_images, n_levels=5, crops_per_level=200, seed=0)
    test = build_synthetic_dataset(held_out, n_levels=5, crops_per_level=60, seed=1)
    net, log = train_classifier(train, ClassifierConfig(n_levels=5, epochs=100, lr=1e-3, seed=0))
    assert log[-1] <= log[0]
    report = evaluate_accuracy(net, test.crops, test.levels <= default_level_threshold(5))
    assert report.accuracy >= 0.90


@pytest.mark.slow
def test_rps_level_error_not_worse_than_cross_entropy():
    images = specimen_corpus(3, size=128, seed=0)
    held_out = specimen_corpus(1, size=128, seed=50)
    errors = {"cross_entropy": [], "rps": []}
    for seed in range(3):
        train = build_synthetic_dataset(images, n_levels=5, crops_per_level=60, seed=seed, crop_size=32)
        test = build_synthetic_dataset(held_out, n_levels=5, crops_per_level=30, seed=seed + 10, crop_size=32)
        for loss in errors:
            config = ClassifierConfig(n_levels=5, epochs=40, crop_size=32, loss=loss, seed=seed)
            net, _ = train_classifier(train, config)
            errors[loss].append(mean_level_error(net, test.crops, test.levels))
    assert np.mean(errors["rps"]) <= np.mean(errors["cross_entropy"]) + 0.25
