"""Dense tensor ops with hand-written gradients.

Tensors are C-contiguous numpy arrays, float32 in production (ops run in
whatever float dtype they are handed, which lets tests gradient-check the
math in float64). Images and activations use NCHW layout. There is no
autograd tape: every forward op has a matching *_backward function and
callers wire the chain rule themselves.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

_GELU_C = 0.7978845608028654  # sqrt(2/pi)
_GELU_A = 0.044715


def _require(cond: bool, msg: str):
    if not cond:
        raise ShapeError(msg)


# ---------------------------------------------------------------------------
# convolution


def _pad_hw(x, padding):
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def _out_extent(extent, k, stride, padding):
    span = extent + 2 * padding - k
    _require(span >= 0, f"kernel {k} exceeds padded extent {extent + 2 * padding}")
    return span // stride + 1


def _im2col(x, kh, kw, stride, padding):
    """x [N,C,H,W] -> cols [N, C*kh*kw, OH*OW]."""
    n, c, h, w = x.shape
    oh = _out_extent(h, kh, stride, padding)
    ow = _out_extent(w, kw, stride, padding)
    xp = _pad_hw(x, padding)
    cols = np.empty((n, c, kh, kw, oh, ow), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride]
    return cols.reshape(n, c * kh * kw, oh * ow), oh, ow


def _col2im(gcols, x_shape, kh, kw, stride, padding):
    """Adjoint of _im2col: gcols [N, C*kh*kw, OH*OW] -> gx [N,C,H,W]."""
    n, c, h, w = x_shape
    oh = _out_extent(h, kh, stride, padding)
    ow = _out_extent(w, kw, stride, padding)
    g = gcols.reshape(n, c, kh, kw, oh, ow)
    gxp = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=gcols.dtype)
    for i in range(kh):
        for j in range(kw):
            gxp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += g[:, :, i, j]
    if padding:
        return np.ascontiguousarray(gxp[:, :, padding:-padding, padding:-padding])
    return gxp


def conv2d(x, w, b, stride: int = 1, padding: int = 0):
    """Cross-correlation of x [N,C,H,W] with w [K,C,kh,kw] plus bias b [K]."""
    _require(x.ndim == 4 and w.ndim == 4, f"conv2d expects 4-d input and weight, got {x.shape} and {w.shape}")
    _require(x.shape[1] == w.shape[1], f"input channels {x.shape} do not match weight {w.shape}")
    _require(b.shape == (w.shape[0],), f"bias {b.shape} does not match weight {w.shape}")
    k, _, kh, kw = w.shape
    cols, oh, ow = _im2col(x, kh, kw, stride, padding)
    out = np.matmul(w.reshape(k, -1), cols)  # [N,K,OH*OW]
    out += b.reshape(1, k, 1)
    return out.reshape(x.shape[0], k, oh, ow)


def conv2d_backward(x, w, grad_output, stride: int = 1, padding: int = 0):
    """Gradients of sum(grad_output * conv2d(x, w, b)) w.r.t. (x, w, b)."""
    _require(x.shape[1] == w.shape[1], f"input channels {x.shape} do not match weight {w.shape}")
    n, _, h, wd = x.shape
    k, c, kh, kw = w.shape
    oh = _out_extent(h, kh, stride, padding)
    ow = _out_extent(wd, kw, stride, padding)
    _require(
        grad_output.shape == (n, k, oh, ow),
        f"grad_output {grad_output.shape} inconsistent with forward output {(n, k, oh, ow)}",
    )
    gy = grad_output.reshape(n, k, oh * ow)
    cols, _, _ = _im2col(x, kh, kw, stride, padding)
    grad_w = np.tensordot(gy, cols, axes=([0, 2], [0, 2])).reshape(w.shape)
    grad_b = gy.sum(axis=(0, 2))
    gcols = np.matmul(w.reshape(k, -1).T, gy)  # [N, C*kh*kw, OH*OW]
    grad_x = _col2im(gcols, x.shape, kh, kw, stride, padding)
    return grad_x, grad_w, grad_b


def conv_transpose2d(x, w, b, stride: int = 1, padding: int = 0):
    """Transposed convolution. x [N,C,H,W], w [C,K,kh,kw], output [N,K,H',W']
    with H' = (H-1)*stride - 2*padding + kh (the adjoint of conv2d)."""
    _require(x.ndim == 4 and w.ndim == 4, f"conv_transpose2d expects 4-d input and weight, got {x.shape} and {w.shape}")
    _require(x.shape[1] == w.shape[0], f"input channels {x.shape} do not match weight {w.shape}")
    c, k, kh, kw = w.shape
    _require(b.shape == (k,), f"bias {b.shape} does not match weight {w.shape}")
    n, _, h, wd = x.shape
    oh = (h - 1) * stride - 2 * padding + kh
    ow = (wd - 1) * stride - 2 * padding + kw
    _require(oh > 0 and ow > 0, f"degenerate output {(oh, ow)} for input {x.shape} kernel {w.shape}")
    gy = x.reshape(n, c, h * wd)
    gcols = np.matmul(w.reshape(c, -1).T, gy)  # [N, K*kh*kw, H*W]
    out = _col2im(gcols, (n, k, oh, ow), kh, kw, stride, padding)
    out += b.reshape(1, k, 1, 1)
    return out


def conv_transpose2d_backward(x, w, grad_output, stride: int = 1, padding: int = 0):
    """Gradients for conv_transpose2d; shapes mirror the forward contract."""
    c, k, kh, kw = w.shape
    n = x.shape[0]
    oh = (x.shape[2] - 1) * stride - 2 * padding + kh
    ow = (x.shape[3] - 1) * stride - 2 * padding + kw
    _require(
        grad_output.shape == (n, k, oh, ow),
        f"grad_output {grad_output.shape} inconsistent with forward output {(n, k, oh, ow)}",
    )
    # The forward is conv2d's grad_input with roles swapped, so its adjoints
    # are a plain conv (for grad_x) and the usual weight gradient with the
    # operands exchanged (for grad_w).
    cols, goh, gow = _im2col(grad_output, kh, kw, stride, padding)
    grad_x = np.matmul(w.reshape(c, -1), cols).reshape(n, c, goh, gow)
    gx_flat = x.reshape(n, c, x.shape[2] * x.shape[3])
    grad_w = np.tensordot(gx_flat, cols, axes=([0, 2], [0, 2])).reshape(w.shape)
    grad_b = grad_output.sum(axis=(0, 2, 3))
    return grad_x, grad_w, grad_b


# ---------------------------------------------------------------------------
# dense


def dense(x, w, b):
    """x [N,D] @ w [D,M] + b [M]."""
    _require(x.ndim == 2 and w.ndim == 2, f"dense expects 2-d operands, got {x.shape} and {w.shape}")
    _require(x.shape[1] == w.shape[0], f"inner dims of {x.shape} and {w.shape} differ")
    _require(b.shape == (w.shape[1],), f"bias {b.shape} does not match weight {w.shape}")
    return x @ w + b


def dense_backward(x, w, grad_output):
    _require(grad_output.shape == (x.shape[0], w.shape[1]), f"grad_output {grad_output.shape} inconsistent with {(x.shape[0], w.shape[1])}")
    return grad_output @ w.T, x.T @ grad_output, grad_output.sum(axis=0)


# ---------------------------------------------------------------------------
# elementwise


def relu(x):
    return np.maximum(x, 0)


def relu_backward(x, grad_output):
    return grad_output * (x > 0)


def gelu(x):
    """tanh-approximation GELU."""
    inner = _GELU_C * (x + _GELU_A * x * x * x)
    return (0.5 * x * (1.0 + np.tanh(inner))).astype(x.dtype, copy=False)


def gelu_backward(x, grad_output):
    inner = _GELU_C * (x + _GELU_A * x * x * x)
    t = np.tanh(inner)
    d_inner = _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)
    grad = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * d_inner
    return (grad_output * grad).astype(x.dtype, copy=False)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(x, grad_output):
    s = sigmoid(x)
    return grad_output * s * (1.0 - s)


def add(a, b):
    _require(a.shape == b.shape, f"add requires equal shapes, got {a.shape} and {b.shape}")
    return a + b


def mul(a, b):
    _require(a.shape == b.shape, f"mul requires equal shapes, got {a.shape} and {b.shape}")
    return a * b


def negate(x):
    return -x


def reverse(x, axis: int):
    _require(-x.ndim <= axis < x.ndim, f"axis {axis} out of range for shape {x.shape}")
    return np.ascontiguousarray(np.flip(x, axis=axis))


def transpose2d(x):
    """Swap the last two dims."""
    _require(x.ndim >= 2, f"transpose2d needs >= 2 dims, got shape {x.shape}")
    return np.ascontiguousarray(np.swapaxes(x, -1, -2))


# ---------------------------------------------------------------------------
# pooling / resampling


def avg_pool2d(x, k: int = 2):
    n, c, h, w = x.shape
    _require(h % k == 0 and w % k == 0, f"pool size {k} does not divide spatial dims of {x.shape}")
    return x.reshape(n, c, h // k, k, w // k, k).mean(axis=(3, 5))


def avg_pool2d_backward(x_shape, grad_output, k: int = 2):
    n, c, h, w = x_shape
    g = grad_output / (k * k)
    g = np.repeat(np.repeat(g, k, axis=2), k, axis=3)
    return np.ascontiguousarray(g.reshape(n, c, h, w))


def upsample_nearest2d(x, factor: int = 2):
    return np.ascontiguousarray(np.repeat(np.repeat(x, factor, axis=2), factor, axis=3))


def upsample_nearest2d_backward(grad_output, factor: int = 2):
    n, c, h, w = grad_output.shape
    _require(h % factor == 0 and w % factor == 0, f"grad shape {grad_output.shape} not divisible by factor {factor}")
    return grad_output.reshape(n, c, h // factor, factor, w // factor, factor).sum(axis=(3, 5))


def global_avg_pool(x):
    """[N,C,H,W] -> [N,C]."""
    _require(x.ndim == 4, f"global_avg_pool expects 4-d input, got {x.shape}")
    return x.mean(axis=(2, 3))


def global_avg_pool_backward(x_shape, grad_output):
    n, c, h, w = x_shape
    g = grad_output.reshape(n, c, 1, 1) / (h * w)
    return np.broadcast_to(g, x_shape).astype(grad_output.dtype).copy()


# ---------------------------------------------------------------------------
# losses (fused forward + gradient)


def softmax_cross_entropy(logits, labels):
    """Mean cross entropy over the batch. Returns (loss, grad_logits)."""
    _require(logits.ndim == 2, f"logits must be [N,K], got {logits.shape}")
    n = logits.shape[0]
    _require(labels.shape == (n,), f"labels {labels.shape} do not match logits {logits.shape}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    expv = np.exp(shifted)
    probs = expv / expv.sum(axis=1, keepdims=True)
    ll = shifted[np.arange(n), labels] - np.log(expv.sum(axis=1))
    loss = float(-ll.mean())
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, grad.astype(logits.dtype, copy=False)


def sigmoid_bce(logits, targets):
    """Mean binary cross entropy over all entries. Returns (loss, grad_logits)."""
    _require(logits.shape == targets.shape, f"logits {logits.shape} and targets {targets.shape} differ")
    # log(1+exp(x)) computed stably
    softplus = np.maximum(logits, 0) + np.log1p(np.exp(-np.abs(logits)))
    loss = float((softplus - logits * targets).mean())
    grad = (sigmoid(logits) - targets) / logits.size
    return loss, grad.astype(logits.dtype, copy=False)


def assert_finite(x, context: str = "tensor"):
    if not np.isfinite(x).all():
        raise ShapeError(f"{context} contains non-finite values")
    return x
