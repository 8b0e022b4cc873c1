"""Model assembly: layer specs, shape validation, flat parameter storage,
and the fused forward/backward pass used by the training loop.

Shapes are validated when the model is constructed, not discovered mid-run.
Parameters live in one flat float64 vector; each layer holds reshaped views
aliasing that vector, so optimizers can treat the model as a single
parameter array.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, NonFiniteError
from . import layers

Array = np.ndarray


@dataclass(frozen=True)
class Conv2d:
    in_ch: int
    out_ch: int
    kernel: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class MaxPool:
    size: int
    stride: int | None = None


@dataclass(frozen=True)
class Relu:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Dense:
    in_features: int
    out_features: int


@dataclass(frozen=True)
class Dropout:
    rate: float


@dataclass(frozen=True)
class SoftmaxCrossEntropy:
    classes: int


LayerSpec = Conv2d | MaxPool | Relu | Flatten | Dense | Dropout | SoftmaxCrossEntropy


class ModelParams:
    """One flat parameter vector plus per-layer views aliasing it."""

    def __init__(self, flat: Array, views: list):
        self.flat = flat
        self.views = views  # per layer: None or (w_view, b_view)

    @property
    def size(self) -> int:
        return self.flat.shape[0]

    def copy(self) -> "ModelParams":
        flat = self.flat.copy()
        views = _carve_views(flat, [
            None if v is None else (v[0].shape, v[1].shape) for v in self.views
        ])
        return ModelParams(flat, views)


def _carve_views(flat: Array, shapes: list) -> list:
    views, offset = [], 0
    for entry in shapes:
        if entry is None:
            views.append(None)
            continue
        w_shape, b_shape = entry
        w_n, b_n = int(np.prod(w_shape)), int(np.prod(b_shape))
        w_view = flat[offset : offset + w_n].reshape(w_shape)
        offset += w_n
        b_view = flat[offset : offset + b_n].reshape(b_shape)
        offset += b_n
        views.append((w_view, b_view))
    return views


class Model:
    """An ordered layer stack ending in exactly one loss layer."""

    def __init__(self, input_shape: tuple[int, int, int], specs: list):
        self.input_shape = tuple(input_shape)
        self.specs = list(specs)
        if not self.specs:
            raise ValueError("model needs at least one layer")
        for spec in self.specs[:-1]:
            if isinstance(spec, SoftmaxCrossEntropy):
                raise ValueError("loss layer must be last and unique")
        if not isinstance(self.specs[-1], SoftmaxCrossEntropy):
            raise ValueError("model must end with a loss layer")

        self.param_shapes = []  # per layer: None or (w_shape, b_shape)
        shape = self.input_shape  # (C,H,W) until flattened, then (D,)
        for spec in self.specs:
            shape = self._validate_layer(spec, shape)
        self.classes = self.specs[-1].classes
        self.n_params = sum(
            int(np.prod(ws) + np.prod(bs))
            for ws, bs in (e for e in self.param_shapes if e is not None)
        )

    def _validate_layer(self, spec, shape):
        if isinstance(spec, Conv2d):
            if len(shape) != 3:
                raise DimensionError(f"conv layer after flatten (shape {shape})")
            c, h, w = shape
            if c != spec.in_ch:
                raise DimensionError(f"conv expects {spec.in_ch} channels, input has {c}")
            oh = layers._out_size(h, spec.kernel, spec.stride, spec.pad)
            ow = layers._out_size(w, spec.kernel, spec.stride, spec.pad)
            if oh < 1 or ow < 1:
                raise DimensionError(f"conv output collapses on input {shape}")
            self.param_shapes.append(
                ((spec.out_ch, spec.in_ch, spec.kernel, spec.kernel), (spec.out_ch,))
            )
            return (spec.out_ch, oh, ow)
        if isinstance(spec, MaxPool):
            if len(shape) != 3:
                raise DimensionError(f"maxpool after flatten (shape {shape})")
            c, h, w = shape
            stride = spec.stride or spec.size
            if spec.size > h or spec.size > w:
                raise DimensionError(f"maxpool window {spec.size} exceeds input {shape}")
            self.param_shapes.append(None)
            return (c, layers._out_size(h, spec.size, stride, 0),
                    layers._out_size(w, spec.size, stride, 0))
        if isinstance(spec, Relu):
            self.param_shapes.append(None)
            return shape
        if isinstance(spec, Flatten):
            self.param_shapes.append(None)
            return (int(np.prod(shape)),)
        if isinstance(spec, Dense):
            if len(shape) != 1:
                raise DimensionError(f"dense needs flattened input, got shape {shape}")
            if shape[0] != spec.in_features:
                raise DimensionError(
                    f"dense expects {spec.in_features} features, input has {shape[0]}"
                )
            self.param_shapes.append(
                ((spec.in_features, spec.out_features), (spec.out_features,))
            )
            return (spec.out_features,)
        if isinstance(spec, Dropout):
            if not 0.0 <= spec.rate < 1.0:
                raise ValueError(f"dropout rate must be in [0, 1), got {spec.rate}")
            self.param_shapes.append(None)
            return shape
        if isinstance(spec, SoftmaxCrossEntropy):
            if len(shape) != 1 or shape[0] != spec.classes:
                raise DimensionError(
                    f"loss expects ({spec.classes},) logits, got shape {shape}"
                )
            self.param_shapes.append(None)
            return shape
        raise TypeError(f"unknown layer spec {spec!r}")

    def zero_params(self) -> ModelParams:
        flat = np.zeros(self.n_params)
        return ModelParams(flat, _carve_views(flat, self.param_shapes))

    def _check_batch(self, images: Array, labels: Array):
        images = np.asarray(images, dtype=np.float64)
        if images.ndim != 4 or images.shape[1:] != self.input_shape:
            raise DimensionError(
                f"batch shape {images.shape} incompatible with input {self.input_shape}"
            )
        if images.shape[0] < 1:
            raise DimensionError("batch must be nonempty")
        labels = np.asarray(labels)
        return images, labels

    def forward_backward(self, params: ModelParams, images: Array, labels: Array,
                         rng=None, train: bool = True):
        """One fused pass: returns (mean loss, accuracy, flat gradient)."""
        images, labels = self._check_batch(images, labels)
        x = images
        caches = []
        for spec, views in zip(self.specs[:-1], params.views):
            if isinstance(spec, Conv2d):
                x, cache = layers.conv2d_forward(x, views[0], views[1], spec.stride, spec.pad)
            elif isinstance(spec, MaxPool):
                x, cache = layers.maxpool_forward(x, spec.size, spec.stride)
            elif isinstance(spec, Relu):
                x, cache = layers.relu_forward(x)
            elif isinstance(spec, Flatten):
                cache = x.shape
                x = x.reshape(x.shape[0], -1)
            elif isinstance(spec, Dense):
                x, cache = layers.dense_forward(x, views[0], views[1])
            elif isinstance(spec, Dropout):
                x, cache = layers.dropout_forward(x, spec.rate, rng, train)
            caches.append(cache)

        loss, acc, dx = layers.softmax_cross_entropy(x, labels)

        grad = np.zeros(self.n_params)
        grad_views = _carve_views(grad, self.param_shapes)
        for spec, views, cache in zip(
            reversed(self.specs[:-1]), reversed(grad_views[:-1]), reversed(caches)
        ):
            if isinstance(spec, Conv2d):
                dx, dw, db = layers.conv2d_backward(dx, cache)
                views[0][:] = dw
                views[1][:] = db
            elif isinstance(spec, MaxPool):
                dx = layers.maxpool_backward(dx, cache)
            elif isinstance(spec, Relu):
                dx = layers.relu_backward(dx, cache)
            elif isinstance(spec, Flatten):
                dx = dx.reshape(cache)
            elif isinstance(spec, Dense):
                dx, dw, db = layers.dense_backward(dx, cache)
                views[0][:] = dw
                views[1][:] = db
            elif isinstance(spec, Dropout):
                dx = layers.dropout_backward(dx, cache)
        return loss, acc, grad

    def evaluate(self, params: ModelParams, images: Array, labels: Array,
                 batch_size: int = 256):
        """Mean loss and accuracy in eval mode (no dropout, no rng, no gradients)."""
        images, labels = self._check_batch(images, labels)
        n = images.shape[0]
        total_loss, correct = 0.0, 0.0
        for start in range(0, n, batch_size):
            xb = images[start : start + batch_size]
            yb = labels[start : start + batch_size]
            x = xb
            for spec, views in zip(self.specs[:-1], params.views):
                if isinstance(spec, Conv2d):
                    x, _ = layers.conv2d_forward(x, views[0], views[1], spec.stride, spec.pad)
                elif isinstance(spec, MaxPool):
                    x, _ = layers.maxpool_forward(x, spec.size, spec.stride)
                elif isinstance(spec, Relu):
                    x, _ = layers.relu_forward(x)
                elif isinstance(spec, Flatten):
                    x = x.reshape(x.shape[0], -1)
                elif isinstance(spec, Dense):
                    x, _ = layers.dense_forward(x, views[0], views[1])
                # dropout is identity in eval mode
            loss, acc, _ = layers.softmax_cross_entropy(x, yb)
            total_loss += loss * xb.shape[0]
            correct += acc * xb.shape[0]
        return total_loss / n, correct / n


def init_params(model: Model, rng, scheme: str = "he") -> ModelParams:
    """Draw initial parameters: He-scaled normals for weights, zero biases.

    scheme 'he' suits layers feeding ReLU (std = sqrt(2 / fan_in));
    scheme 'zeros' returns an all-zero vector.
    """
    params = model.zero_params()
    if scheme == "zeros":
        return params
    if scheme != "he":
        raise ValueError(f"unknown init scheme {scheme!r}")
    for spec, views in zip(model.specs, params.views):
        if views is None:
            continue
        w_view, _ = views
        if isinstance(spec, Conv2d):
            fan_in = spec.in_ch * spec.kernel * spec.kernel
        else:  # Dense
            fan_in = spec.in_features
        w_view[:] = rng.standard_normal(w_view.shape) * np.sqrt(2.0 / fan_in)
    return params


def reference_model(name: str) -> Model:
    """The two stock CNNs the experiment harness trains."""
    if name == "mnist-cnn":
        return Model((1, 28, 28), [
            Conv2d(1, 8, kernel=3, stride=1, pad=1),
            Relu(),
            MaxPool(2),
            Flatten(),
            Dropout(0.5),
            Dense(8 * 14 * 14, 10),
            SoftmaxCrossEntropy(10),
        ])
    if name == "cifar-cnn":
        return Model((3, 32, 32), [
            Conv2d(3, 16, kernel=3, stride=1, pad=1),
            Relu(),
            MaxPool(2),
            Conv2d(16, 32, kernel=3, stride=1, pad=1),
            Relu(),
            MaxPool(2),
            Flatten(),
            Dropout(0.5),
            Dense(32 * 8 * 8, 10),
            SoftmaxCrossEntropy(10),
        ])
    raise ValueError(f"unknown model {name!r}; know ('mnist-cnn', 'cifar-cnn')")
