import struct

import numpy as np
import pytest

from src.domain.exceptions import (
    BackwardBeforeForwardError,
    BlobLengthMismatchError,
    EmptyMaskUnionError,
    InvalidLossInputError,
    LayerShapeError,
    MissingModelError,
    NotAModelFileError,
    OverlappingMasksError,
    UnsupportedModelVersionError,
)
from src.domain.models import conv2d, dense, flatten, maxpool2, nearest_upsample2, relu
from src.infrastructure.config import MODEL_MAGIC
from src.application.tinynn import (
    Adam,
    AdamState,
    Augmentation,
    Network,
    adam_step,
    augment,
    gradient_check,
    load_model,
    loss_bce,
    loss_cross_entropy,
    loss_masked_l1,
    loss_mse,
    loss_rps,
    loss_rps_from_logits,
    numerical_gradient,
    relative_error,
    save_model,
    softmax,
)
from src.application.tinynn.serialization import manifest_for
from tests.helpers import project_to_simplex

GRAD_TOL = 1e-4
GRAD_H = 1e-5


def conv_net(seed: int) -> Network:
    return Network(
        [conv2d(2, 3, 3), relu(), maxpool2(), flatten(), dense(12, 4)],
        seed=seed,
    )


def upsample_net(seed: int) -> Network:
    return Network([nearest_upsample2(), conv2d(1, 2, 3), relu(), flatten(), dense(32, 3)], seed=seed)


class TestForward:
    def test_relu(self):
        net = Network([relu()], dtype=np.float64)
        np.testing.assert_array_equal(net.infer(np.array([[-1.0, 0.0, 2.0]])), [[0.0, 0.0, 2.0]])

    def test_maxpool(self):
        net = Network([maxpool2()], dtype=np.float64)
        out = net.infer(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]))
        assert out.shape == (1, 1, 1, 1) and out[0, 0, 0, 0] == 4.0

    def test_identity_conv(self, rng):
        net = Network([conv2d(1, 1, 1)])
        net.layers[0].weight.data[...] = 1.0
        x = rng.random((2, 1, 5, 5)).astype(np.float32)
        np.testing.assert_array_equal(net.infer(x), x)

    def test_shape_error_names_layer(self):
        net = Network([flatten(), dense(8, 2)])
        with pytest.raises(LayerShapeError) as info:
            net.infer(np.zeros((1, 3, 2, 2)))
        assert info.value.layer_index == 1

    def test_backward_needs_forward(self):
        with pytest.raises(BackwardBeforeForwardError):
            conv_net(0).backward(np.zeros((1, 4)))

    def test_infer_leaves_cache_alone(self, rng):
        net = conv_net(0)
        net.infer(rng.random((1, 2, 4, 4)))
        with pytest.raises(BackwardBeforeForwardError):
            net.backward(np.zeros((1, 4)))

    def test_seeded_initialization(self):
        a, b = conv_net(7), conv_net(7)
        for ta, tb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(ta.data, tb.data)

    def test_parameter_count(self):
        net = conv_net(0)
        assert net.parameter_count() == sum(spec.parameter_count() for spec in net.specs)
        assert net.parameter_count() == 3 * 2 * 9 + 3 + 12 * 4 + 4


class TestBackward:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("loss", [loss_cross_entropy, loss_rps_from_logits])
    def test_conv_net_matches_finite_differences(self, seed, loss):
        x = np.random.default_rng(seed).standard_normal((2, 2, 4, 4))
        labels = np.array([1, 3])
        errors = gradient_check(conv_net(seed), x, lambda out: loss(out, labels), h=GRAD_H)
        assert max(errors.values()) < GRAD_TOL, errors

    @pytest.mark.parametrize("seed", range(5))
    def test_upsample_net_with_mse(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((2, 1, 2, 2))
        target = rng.standard_normal((2, 3))
        errors = gradient_check(upsample_net(seed), x, lambda out: loss_mse(out, target), h=GRAD_H)
        assert max(errors.values()) < GRAD_TOL, errors

    def test_gradient_check_leaves_network_untouched(self):
        net = conv_net(0)
        before = [t.data.copy() for t in net.parameters()]
        gradient_check(net, np.ones((1, 2, 4, 4)), lambda out: loss_cross_entropy(out, [0]))
        for tensor, saved in zip(net.parameters(), before):
            assert tensor.data.dtype == np.float32
            np.testing.assert_array_equal(tensor.data, saved)

    def test_zero_upstream_gradient(self, rng):
        net = conv_net(0)
        net.forward(rng.random((1, 2, 4, 4)))
        net.backward(np.zeros((1, 4)))
        assert all(not t.grad.any() for t in net.parameters())

    def test_dense_weight_gradient_by_hand(self):
        net = Network([dense(2, 2)], dtype=np.float64)
        x = np.array([[1.0, 2.0]])
        g = np.array([[3.0, -1.0]])
        net.forward(x)
        net.backward(g)
        np.testing.assert_allclose(net.layers[0].weight.grad, [[3.0, 6.0], [-1.0, -2.0]])
        np.testing.assert_allclose(net.layers[0].bias.grad, [3.0, -1.0])


class TestLosses:
    def test_uniform_cross_entropy(self):
        value, grad = loss_cross_entropy(np.zeros(10), 3)
        assert value == pytest.approx(np.log(10))
        assert grad.sum() == pytest.approx(0.0, abs=1e-9)

    def test_rps_minimum_on_the_simplex(self):
        p = np.full(5, 0.2)
        for _ in range(3000):
            _, grad = loss_rps(p, 2)
            p = project_to_simplex(p - 0.02 * grad)
        assert loss_rps(p, 2)[0] < 1e-6
        assert int(np.argmax(p)) == 2

    def test_confident_cross_entropy(self):
        logits = np.zeros(4)
        logits[2] = 20.0
        assert loss_cross_entropy(logits, 2)[0] < 1e-3

    def test_cross_entropy_bad_label(self):
        with pytest.raises(InvalidLossInputError):
            loss_cross_entropy(np.zeros(3), 3)

    def test_rps_perfect(self):
        assert loss_rps(np.eye(5)[2], 2)[0] == 0.0

    def test_rps_uniform(self):
        assert loss_rps(np.full(10, 0.1), 0)[0] == pytest.approx(2.85)

    def test_rps_penalizes_far_misses(self):
        values = [loss_rps(np.eye(6)[k], 0)[0] for k in range(6)]
        assert values == sorted(values) and len(set(values)) == 6

    def test_rps_rejects_non_distribution(self):
        with pytest.raises(InvalidLossInputError):
            loss_rps(np.array([0.5, 0.6]), 0)

    def test_rps_gradient(self, rng):
        probs = softmax(rng.standard_normal((3, 5)))
        labels = np.array([0, 2, 4])
        _, grad = loss_rps(probs, labels)
        # the simplex constraint is ignored by the finite differences, so check the unconstrained function
        def unconstrained(p):
            cdf = np.cumsum(p, axis=1)
            truth = (np.arange(5)[None, :] >= labels[:, None]).astype(float)
            return float(((cdf - truth) ** 2).sum(axis=1).mean())

        assert relative_error(grad, numerical_gradient(unconstrained, probs.copy(), 1e-6)) < GRAD_TOL

    def test_mse(self, rng):
        pred = rng.random((2, 3))
        assert loss_mse(pred, pred)[0] == 0.0
        target = rng.random((2, 3))
        _, grad = loss_mse(pred, target)
        np.testing.assert_allclose(grad, 2 * (pred - target) / pred.size)
        numeric = numerical_gradient(lambda p: loss_mse(p, target)[0], pred.copy(), 1e-6)
        assert relative_error(grad, numeric) < GRAD_TOL

    def test_bce_half(self):
        target = np.array([0.0, 1.0, 1.0, 0.0])
        assert loss_bce(np.full(4, 0.5), target)[0] == pytest.approx(np.log(2))

    def test_bce_gradient(self, rng):
        pred = rng.uniform(0.1, 0.9, size=6)
        target = (rng.random(6) > 0.5).astype(float)
        _, grad = loss_bce(pred, target)
        numeric = numerical_gradient(lambda p: loss_bce(p, target)[0], pred.copy(), 1e-6)
        assert relative_error(grad, numeric) < GRAD_TOL

    def test_masked_l1_composite_is_zero(self, rng):
        a, b = rng.random((4, 4, 1)), rng.random((4, 4, 1))
        left = np.zeros((4, 4), dtype=bool)
        left[:, :2] = True
        composite = np.where(left[:, :, None], a, b)
        assert loss_masked_l1(composite, [a, b], [left, ~left]) == 0.0

    def test_masked_l1_single_full_mask(self, rng):
        pred, source = rng.random((3, 3, 1)), rng.random((3, 3, 1))
        value = loss_masked_l1(pred, [source], [np.ones((3, 3), dtype=bool)])
        assert value == pytest.approx(np.abs(pred - source).mean())

    def test_masked_l1_by_hand(self):
        pred = np.array([[0.0, 1.0], [0.5, 0.5]])
        sources = [np.full((2, 2), 1.0), np.zeros((2, 2))]
        masks = [np.array([[True, False], [False, False]]), np.array([[False, True], [True, False]])]
        # |0-1| + |1-0| + |0.5-0| over a 3-pixel union
        assert loss_masked_l1(pred, sources, masks) == pytest.approx(2.5 / 3)

    def test_masked_l1_rejects_overlap(self):
        full = np.ones((2, 2), dtype=bool)
        with pytest.raises(OverlappingMasksError):
            loss_masked_l1(np.zeros((2, 2)), [np.zeros((2, 2))] * 2, [full, full])

    def test_masked_l1_rejects_empty_union(self):
        with pytest.raises(EmptyMaskUnionError):
            loss_masked_l1(np.zeros((2, 2)), [np.zeros((2, 2))], [np.zeros((2, 2), dtype=bool)])


class TestAdam:
    def test_first_step_is_about_lr(self):
        w = np.array([1.0, -2.0])
        state = AdamState(lr=0.01)
        adam_step(state, [w], [np.array([0.5, -3.0])])
        np.testing.assert_allclose(w, [0.99, -1.99], atol=1e-6)

    def test_zero_gradient(self):
        w = np.array([1.0, 2.0])
        adam_step(AdamState(), [w], [np.zeros(2)])
        np.testing.assert_array_equal(w, [1.0, 2.0])

    def test_quadratic_trajectory(self):
        w = np.array([1.0])
        state = AdamState(lr=0.1)
        ref_w, m, v = 1.0, 0.0, 0.0
        for t in range(1, 4):
            g = 2 * ref_w
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            ref_w -= 0.1 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
            adam_step(state, [w], [2 * w.copy()])
            assert w[0] == pytest.approx(ref_w, abs=1e-12)

    def test_optimizer_reduces_loss(self, rng):
        net = Network([dense(3, 1)], seed=0, dtype=np.float64)
        x = rng.standard_normal((16, 3))
        y = x @ np.array([[1.0], [-2.0], [0.5]])
        opt = Adam(net.parameters(), lr=0.05)
        first = loss_mse(net.infer(x), y)[0]
        for _ in range(200):
            net.zero_grad()
            _, grad = loss_mse(net.forward(x), y)
            net.backward(grad)
            opt.step()
        assert loss_mse(net.infer(x), y)[0] < 0.1 * first


class TestAugment:
    def test_seeded(self, specimen):
        a = augment(specimen, np.random.default_rng(5))
        b = augment(specimen, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_hflip_involution(self, specimen):
        flip = Augmentation(hflip=True)
        np.testing.assert_array_equal(flip.apply(flip.apply(specimen)), specimen)

    def test_quarter_turn(self):
        img = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
        turned = Augmentation(rotations=1).apply(img)[:, :, 0]
        np.testing.assert_array_equal(turned, [[2.0, 4.0], [1.0, 3.0]])


class TestModelFiles:
    def test_round_trip_is_bit_identical(self, tmp_path, rng):
        net = conv_net(3)
        x = rng.random((2, 2, 4, 4)).astype(np.float32)
        path = save_model(net, tmp_path / "m.mstk", metadata={"note": "test"})
        loaded = load_model(path)
        np.testing.assert_array_equal(loaded.infer(x), net.infer(x))
        assert loaded.metadata["note"] == "test"
        assert loaded.specs == net.specs

    def test_truncated_blob(self, tmp_path):
        path = save_model(conv_net(0), tmp_path / "m.mstk")
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(BlobLengthMismatchError):
            load_model(path)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "m.mstk"
        path.write_bytes(b"NOTAMODEL" + bytes(32))
        with pytest.raises(NotAModelFileError, match="not a microstack model"):
            load_model(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingModelError):
            load_model(tmp_path / "absent.mstk")

    def test_future_version(self, tmp_path):
        manifest = manifest_for(conv_net(0)).model_copy(update={"format_version": 99})
        payload = manifest.model_dump_json().encode("utf-8")
        path = tmp_path / "m.mstk"
        path.write_bytes(MODEL_MAGIC + struct.pack("<I", len(payload)) + payload)
        with pytest.raises(UnsupportedModelVersionError):
            load_model(path)
