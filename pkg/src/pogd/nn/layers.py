"""Layer kernels: forward passes with caches, backward passes with exact gradients.

Everything is float64 numpy. Convolution is cross-correlation implemented
via im2col, pooling routes gradients to the first row-major argmax of each
window, and dropout is the inverted form (train-time scaling by
1/(1-rate)) so evaluation needs no rescaling.
"""

import numpy as np

from ..errors import DimensionError, NonFiniteError

Array = np.ndarray


def _out_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def im2col(x: Array, kh: int, kw: int, stride: int, pad: int):
    """Unfold (N,C,H,W) into rows of flattened windows, shape (N*OH*OW, C*kh*kw)."""
    n, c, h, w = x.shape
    oh = _out_size(h, kh, stride, pad)
    ow = _out_size(w, kw, stride, pad)
    img = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    col = np.empty((n, c, kh, kw, oh, ow), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            col[:, :, i, j] = img[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
    return col.transpose(0, 4, 5, 1, 2, 3).reshape(n * oh * ow, -1), oh, ow


def col2im(col: Array, x_shape, kh: int, kw: int, stride: int, pad: int) -> Array:
    """Fold window rows back onto the input grid, summing where windows overlap."""
    n, c, h, w = x_shape
    oh = _out_size(h, kh, stride, pad)
    ow = _out_size(w, kw, stride, pad)
    col = col.reshape(n, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
    img = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=col.dtype)
    for i in range(kh):
        for j in range(kw):
            img[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += col[:, :, i, j]
    return img[:, :, pad : pad + h, pad : pad + w] if pad else img


# --- convolution ---


def conv2d_forward(x: Array, w: Array, b: Array, stride: int = 1, pad: int = 0):
    if x.ndim != 4 or w.ndim != 4:
        raise DimensionError(f"conv2d expects 4-D x and w, got {x.shape}, {w.shape}")
    n, c, h, wid = x.shape
    out_ch, in_ch, kh, kw = w.shape
    if in_ch != c:
        raise DimensionError(f"conv2d: input has {c} channels, kernel expects {in_ch}")
    if b.shape != (out_ch,):
        raise DimensionError(f"conv2d: bias shape {b.shape} != ({out_ch},)")
    if stride < 1:
        raise DimensionError(f"conv2d: stride must be >= 1, got {stride}")
    if h + 2 * pad < kh or wid + 2 * pad < kw:
        raise DimensionError("conv2d: kernel larger than padded input")

    col, oh, ow = im2col(x, kh, kw, stride, pad)
    wmat = w.reshape(out_ch, -1)
    out = col @ wmat.T + b
    out = out.reshape(n, oh, ow, out_ch).transpose(0, 3, 1, 2)
    cache = (col, x.shape, w, stride, pad)
    return out, cache


def conv2d_backward(dout: Array, cache):
    col, x_shape, w, stride, pad = cache
    out_ch, _, kh, kw = w.shape
    wmat = w.reshape(out_ch, -1)
    dmat = dout.transpose(0, 2, 3, 1).reshape(-1, out_ch)
    db = dmat.sum(axis=0)
    dw = (dmat.T @ col).reshape(w.shape)
    dx = col2im(dmat @ wmat, x_shape, kh, kw, stride, pad)
    return dx, dw, db


# --- max pooling ---


def maxpool_forward(x: Array, size: int, stride: int | None = None):
    if x.ndim != 4:
        raise DimensionError(f"maxpool expects 4-D input, got {x.shape}")
    stride = size if stride is None else stride
    n, c, h, w = x.shape
    if size > h or size > w:
        raise DimensionError(f"maxpool: window {size} larger than input {h}x{w}")

    col, oh, ow = im2col(x.reshape(n * c, 1, h, w), size, size, stride, pad=0)
    argmax = col.argmax(axis=1)  # first index on ties, row-major within window
    out = col[np.arange(col.shape[0]), argmax].reshape(n, c, oh, ow)
    cache = (argmax, x.shape, size, stride, oh, ow)
    return out, cache


def maxpool_backward(dout: Array, cache) -> Array:
    argmax, x_shape, size, stride, oh, ow = cache
    n, c, h, w = x_shape
    dcol = np.zeros((n * c * oh * ow, size * size))
    dcol[np.arange(dcol.shape[0]), argmax] = dout.reshape(-1)
    dx = col2im(dcol, (n * c, 1, h, w), size, size, stride, pad=0)
    return dx.reshape(n, c, h, w)


# --- elementwise / dense / dropout ---


def relu_forward(x: Array):
    mask = x > 0
    return x * mask, mask


def relu_backward(dout: Array, mask: Array) -> Array:
    return dout * mask


def dense_forward(x: Array, w: Array, b: Array):
    if x.ndim != 2:
        raise DimensionError(f"dense expects 2-D input, got {x.shape}")
    if x.shape[1] != w.shape[0]:
        raise DimensionError(f"dense: input width {x.shape[1]} != weight rows {w.shape[0]}")
    if b.shape != (w.shape[1],):
        raise DimensionError(f"dense: bias shape {b.shape} != ({w.shape[1]},)")
    return x @ w + b, (x, w)


def dense_backward(dout: Array, cache):
    x, w = cache
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def dropout_forward(x: Array, rate: float, rng, train: bool):
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train:
        return x, None
    keep = rng.random(x.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    return x * keep * scale, (keep, scale)


def dropout_backward(dout: Array, cache) -> Array:
    if cache is None:  # eval mode: identity
        return dout
    keep, scale = cache
    return dout * keep * scale


# --- loss ---


def softmax_cross_entropy(logits: Array, labels: Array):
    """Mean cross-entropy over the batch, accuracy, and the exact logits gradient."""
    if logits.ndim != 2:
        raise DimensionError(f"loss expects 2-D logits, got {logits.shape}")
    n, k = logits.shape
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise DimensionError(f"labels shape {labels.shape} != ({n},)")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - log_z
    rows = np.arange(n)
    loss = -log_p[rows, labels].mean()
    if not np.isfinite(loss):
        raise NonFiniteError(f"cross-entropy loss is {loss}")

    dlogits = np.exp(log_p)
    dlogits[rows, labels] -= 1.0
    dlogits /= n
    acc = float((logits.argmax(axis=1) == labels).mean())
    return float(loss), acc, dlogits
