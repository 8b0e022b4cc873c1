import numpy as np
import pytest

from pogd.errors import DimensionError
from pogd.nn import (
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    MaxPool,
    Model,
    Relu,
    SoftmaxCrossEntropy,
    init_params,
    reference_model,
)

from conftest import rel_err


def tiny_dense_model():
    # four parameters total: Dense(1 -> 2) has 2 weights + 2 biases
    return Model((1, 1, 1), [Flatten(), Dense(1, 2), SoftmaxCrossEntropy(2)])


def model_fd_check(model, params, images, labels, coords, h=1e-5, dropout_seed=None):
    """Compare the flat analytic gradient against central differences at the
    given parameter coordinates; dropout masks are pinned via a fixed seed."""

    def rng():
        return None if dropout_seed is None else np.random.default_rng(dropout_seed)

    train = dropout_seed is not None
    _, _, grad = model.forward_backward(params, images, labels, rng(), train=train)
    worst = 0.0
    for i in coords:
        orig = params.flat[i]
        params.flat[i] = orig + h
        up = model.forward_backward(params, images, labels, rng(), train=train)[0]
        params.flat[i] = orig - h
        down = model.forward_backward(params, images, labels, rng(), train=train)[0]
        params.flat[i] = orig
        numeric = (up - down) / (2 * h)
        worst = max(worst, rel_err(grad[i], numeric))
    return worst


class TestConstruction:
    def test_reference_model_param_counts(self):
        assert reference_model("mnist-cnn").n_params == 15770
        assert reference_model("cifar-cnn").n_params == 25578

    def test_unknown_reference_model(self):
        with pytest.raises(ValueError):
            reference_model("resnet")

    def test_shape_mismatch_caught_at_construction(self):
        with pytest.raises(DimensionError):
            Model((1, 8, 8), [Conv2d(3, 4, 3), SoftmaxCrossEntropy(10)])
        with pytest.raises(DimensionError):
            Model((1, 8, 8), [Flatten(), Dense(100, 10), SoftmaxCrossEntropy(10)])

    def test_loss_layer_rules(self):
        with pytest.raises(ValueError):
            Model((1, 2, 2), [Flatten(), Dense(4, 2)])  # no loss layer
        with pytest.raises(ValueError):
            Model((1, 2, 2), [SoftmaxCrossEntropy(4), Flatten(), Dense(4, 2),
                              SoftmaxCrossEntropy(2)])

    def test_dropout_rate_checked(self):
        with pytest.raises(ValueError):
            Model((1, 2, 2), [Flatten(), Dropout(1.0), Dense(4, 2),
                              SoftmaxCrossEntropy(2)])

    def test_flat_view_aliasing(self):
        model = reference_model("mnist-cnn")
        params = model.zero_params()
        params.flat[:] = np.arange(model.n_params, dtype=np.float64)
        w_view, b_view = params.views[0]
        assert w_view.flat[0] == 0.0
        params.flat[0] = -5.0
        assert w_view.flat[0] == -5.0  # views alias the flat vector
        assert b_view.base is params.flat.base or b_view.base is params.flat


class TestForwardBackward:
    def test_zero_weights_give_log_classes_and_chance(self):
        model = reference_model("mnist-cnn")
        params = model.zero_params()
        rng = np.random.default_rng(0)
        images = rng.random((20, 1, 28, 28))
        labels = np.repeat(np.arange(10), 2)  # balanced
        loss, acc, _ = model.forward_backward(params, images, labels, rng, train=False)
        assert abs(loss - np.log(10)) < 1e-9
        assert abs(acc - 0.1) < 1e-12  # uniform logits: argmax is class 0

    def test_tiny_model_fd_elementwise(self):
        model = tiny_dense_model()
        assert model.n_params == 4
        rng = np.random.default_rng(1)
        params = init_params(model, rng)
        images = rng.normal(size=(6, 1, 1, 1))
        labels = rng.integers(0, 2, size=6)
        worst = model_fd_check(model, params, images, labels, range(4))
        assert worst < 1e-5

    def test_duplicated_sample_mean_invariance(self):
        model = tiny_dense_model()
        rng = np.random.default_rng(2)
        params = init_params(model, rng)
        x = rng.normal(size=(1, 1, 1, 1))
        y = np.array([1])
        _, _, g1 = model.forward_backward(params, x, y, None, train=False)
        doubled = np.concatenate([x, x])
        _, _, g2 = model.forward_backward(params, doubled, np.array([1, 1]), None, train=False)
        assert np.allclose(g1, g2, rtol=1e-12)

    def test_eval_mode_deterministic_and_rng_free(self):
        model = reference_model("mnist-cnn")
        rng = np.random.default_rng(3)
        params = init_params(model, rng)
        images = rng.random((8, 1, 28, 28))
        labels = rng.integers(0, 10, size=8)
        a = model.evaluate(params, images, labels)
        b = model.evaluate(params, images, labels)
        assert a == b

    def test_batch_shape_validation(self):
        model = reference_model("mnist-cnn")
        params = model.zero_params()
        with pytest.raises(DimensionError):
            model.forward_backward(params, np.zeros((2, 3, 28, 28)), np.zeros(2, dtype=int))
        with pytest.raises(DimensionError):
            model.forward_backward(params, np.zeros((0, 1, 28, 28)), np.zeros(0, dtype=int))


class TestReferenceModelGradients:
    @pytest.mark.parametrize("name,shape", [
        ("mnist-cnn", (1, 28, 28)),
        ("cifar-cnn", (3, 32, 32)),
    ])
    def test_fd_spot_check(self, name, shape):
        model = reference_model(name)
        rng = np.random.default_rng(12)
        params = init_params(model, rng)
        images = rng.random((2, *shape))
        labels = rng.integers(0, 10, size=2)
        coords = rng.choice(model.n_params, size=12, replace=False)
        worst = model_fd_check(model, params, images, labels, coords, dropout_seed=55)
        assert worst < 1e-5


class TestInitParams:
    def test_zeros_scheme(self):
        model = tiny_dense_model()
        params = init_params(model, np.random.default_rng(0), scheme="zeros")
        assert np.array_equal(params.flat, np.zeros(4))

    def test_seed_determinism(self):
        model = reference_model("mnist-cnn")
        a = init_params(model, np.random.default_rng(9)).flat
        b = init_params(model, np.random.default_rng(9)).flat
        assert a.tobytes() == b.tobytes()

    def test_he_standard_deviation(self):
        # 100 -> 1000 dense layer gives 1e5 weight draws with fan_in 100
        model = Model((1, 10, 10), [Flatten(), Dense(100, 1000),
                                    SoftmaxCrossEntropy(1000)])
        params = init_params(model, np.random.default_rng(10))
        w = params.views[1][0]
        target = np.sqrt(2.0 / 100.0)
        assert abs(w.std() - target) / target < 0.2
        b = params.views[1][1]
        assert np.array_equal(b, np.zeros(1000))

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            init_params(tiny_dense_model(), np.random.default_rng(0), scheme="uniform")

    def test_biases_zero_under_he(self):
        model = reference_model("mnist-cnn")
        params = init_params(model, np.random.default_rng(11))
        for spec_views in params.views:
            if spec_views is not None:
                assert np.array_equal(spec_views[1], np.zeros_like(spec_views[1]))
