"""Minimal CNN building blocks in NumPy: 3x3 same-padding convolution via
im2col, 2x2 max pooling with argmax routing, global average pooling, linear
layers, and softmax cross-entropy. Every forward returns a cache consumed by
the matching backward; all operations are deterministic.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """x: (N, C, H, W); w: (F, C, 3, 3); b: (F,). Same padding, stride 1."""
    n, c, h, wd = x.shape
    f = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = np.empty((n, c, 9, h * wd), dtype=x.dtype)
    for ky in range(3):
        for kx in range(3):
            cols[:, :, ky * 3 + kx, :] = xp[:, :, ky:ky + h, kx:kx + wd].reshape(n, c, h * wd)
    cols2 = cols.reshape(n, c * 9, h * wd)
    w2 = w.reshape(f, c * 9)
    out = np.matmul(w2, cols2) + b[None, :, None]
    out = out.reshape(n, f, h, wd)
    return out, (cols2, x.shape)


def conv2d_backward(dout: np.ndarray, w: np.ndarray, cache):
    cols2, x_shape = cache
    n, c, h, wd = x_shape
    f = w.shape[0]
    dout2 = dout.reshape(n, f, h * wd)
    db = dout2.sum(axis=(0, 2))
    dw = np.matmul(dout2, cols2.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)
    w2 = w.reshape(f, c * 9)
    dcols = np.matmul(w2.T, dout2).reshape(n, c, 9, h * wd)
    dxp = np.zeros((n, c, h + 2, wd + 2), dtype=dout.dtype)
    for ky in range(3):
        for kx in range(3):
            dxp[:, :, ky:ky + h, kx:kx + wd] += dcols[:, :, ky * 3 + kx, :].reshape(n, c, h, wd)
    dx = dxp[:, :, 1:-1, 1:-1]
    return dx, dw, db


def maxpool2_forward(x: np.ndarray):
    """2x2/stride-2 max pool; an axis shorter than 2 is left unpooled and an
    odd trailing row/column is dropped (floor semantics)."""
    n, c, h, w = x.shape
    fh = 2 if h >= 2 else 1
    fw = 2 if w >= 2 else 1
    h2, w2 = h // fh, w // fw
    xc = x[:, :, : h2 * fh, : w2 * fw]
    windows = (
        xc.reshape(n, c, h2, fh, w2, fw)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h2, w2, fh * fw)
    )
    idx = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    return out, (idx, x.shape, fh, fw)


def maxpool2_backward(dout: np.ndarray, cache):
    idx, x_shape, fh, fw = cache
    n, c, h, w = x_shape
    h2, w2 = h // fh, w // fw
    dwin = np.zeros((n, c, h2, w2, fh * fw), dtype=dout.dtype)
    np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=-1)
    dxc = (
        dwin.reshape(n, c, h2, w2, fh, fw)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h2 * fh, w2 * fw)
    )
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, :, : h2 * fh, : w2 * fw] = dxc
    return dx


def relu_forward(x: np.ndarray):
    out = np.maximum(x, 0)
    return out, x > 0


def relu_backward(dout: np.ndarray, mask: np.ndarray):
    return dout * mask


def gap_forward(x: np.ndarray):
    """Global average pool over the spatial dims: (N, C, H, W) -> (N, C)."""
    return x.mean(axis=(2, 3)), x.shape


def gap_backward(dout: np.ndarray, x_shape) -> np.ndarray:
    n, c, h, w = x_shape
    return np.broadcast_to(dout[:, :, None, None], x_shape) / (h * w)


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """x: (N, in); w: (out, in); b: (out,)."""
    return x @ w.T + b, x


def linear_backward(dout: np.ndarray, w: np.ndarray, x: np.ndarray):
    dx = dout @ w
    dw = dout.T @ x
    db = dout.sum(axis=0)
    return dx, dw, db


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_xent(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy and gradient w.r.t. logits. labels: (N,) int in {0,1}."""
    n = logits.shape[0]
    z = logits - logits.max(axis=-1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=-1))
    loss = float(np.mean(logsumexp - z[np.arange(n), labels]))
    probs = softmax(logits)
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits
