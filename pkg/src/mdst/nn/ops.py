"""Layer primitives with exact forward/backward passes.

Everything operates on channels-last arrays. Convolutions are 3x3, stride 1,
zero-pad 1 cross-correlations implemented as one matmul over flattened
windows, so output spatial size always equals input spatial size. Backward
passes are exact chain rules of the forward arithmetic; dtypes follow the
inputs (tests run them in float64, training in float32).
"""

from __future__ import annotations

import numpy as np


def he_normal(rng: np.random.Generator, shape, fan_in: int, dtype=np.float64) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape).astype(dtype)


def _windows(x: np.ndarray) -> np.ndarray:
    """(B,H,W,C) -> (B*H*W, C*9) matrix of padded 3x3 windows."""
    b, h, w, c = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (3, 3), axis=(1, 2))
    return win.reshape(b * h * w, c * 9)


def _weight_matrix(kernel: np.ndarray) -> np.ndarray:
    """(3,3,Cin,Cout) -> (Cin*9, Cout) matching the window flattening order."""
    return np.ascontiguousarray(kernel.transpose(2, 0, 1, 3)).reshape(-1, kernel.shape[3])


def conv3x3_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray | None = None):
    """Returns (out, cache). x: (B,H,W,Cin), kernel: (3,3,Cin,Cout)."""
    if x.ndim != 4 or kernel.ndim != 4 or kernel.shape[:2] != (3, 3):
        raise ValueError("expected x (B,H,W,Cin) and kernel (3,3,Cin,Cout)")
    if kernel.shape[2] != x.shape[3]:
        raise ValueError("kernel input channels do not match input")
    cols = _windows(x)
    wmat = _weight_matrix(kernel).astype(x.dtype, copy=False)
    out = cols @ wmat
    if bias is not None:
        out += bias.astype(x.dtype, copy=False)
    b, h, w, _ = x.shape
    out = out.reshape(b, h, w, kernel.shape[3])
    return out, (cols, wmat, x.shape, kernel.shape)


def conv3x3_backward(dout: np.ndarray, cache):
    """Returns (dx, dkernel, dbias)."""
    cols, wmat, x_shape, k_shape = cache
    b, h, w, cin = x_shape
    cout = k_shape[3]
    dmat = dout.reshape(-1, cout)
    dw_mat = cols.T @ dmat
    dkernel = dw_mat.reshape(cin, 3, 3, cout).transpose(1, 2, 0, 3)
    dbias = dmat.sum(axis=0)
    dcols = (dmat @ wmat.T).reshape(b, h, w, cin, 3, 3)
    dxp = np.zeros((b, h + 2, w + 2, cin), dtype=dout.dtype)
    for kh in range(3):
        for kw in range(3):
            dxp[:, kh: kh + h, kw: kw + w, :] += dcols[:, :, :, :, kh, kw]
    return dxp[:, 1: h + 1, 1: w + 1, :], dkernel, dbias


def relu_forward(x: np.ndarray):
    out = np.maximum(x, 0.0)
    return out, x > 0.0


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def avgpool2_forward(x: np.ndarray):
    """2x2 average pooling, stride 2; odd trailing rows/cols are dropped."""
    b, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    v = x[:, : 2 * ho, : 2 * wo, :].reshape(b, ho, 2, wo, 2, c)
    return v.mean(axis=(2, 4)), (b, h, w, c)


def avgpool2_backward(dout: np.ndarray, cache) -> np.ndarray:
    b, h, w, c = cache
    ho, wo = h // 2, w // 2
    dx = np.zeros((b, h, w, c), dtype=dout.dtype)
    spread = np.broadcast_to(dout[:, :, None, :, None, :] * 0.25, (b, ho, 2, wo, 2, c))
    dx[:, : 2 * ho, : 2 * wo, :] = spread.reshape(b, 2 * ho, 2 * wo, c)
    return dx


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    out = x @ weight + bias
    return out, x


def dense_backward(dout: np.ndarray, cache, weight: np.ndarray):
    x = cache
    return dout @ weight.T, x.T @ dout, dout.sum(axis=0)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, onehot: np.ndarray):
    """Mean categorical cross-entropy in log space; returns (loss, dlogits)."""
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = float(-np.mean(np.sum(onehot * log_probs, axis=1)))
    dlogits = (np.exp(log_probs) - onehot) / logits.shape[0]
    return loss, dlogits


def conv_forward(input_tensor: np.ndarray, kernel: np.ndarray,
                 bias: np.ndarray | None = None) -> np.ndarray:
    """Single-image convenience wrapper: (M,N,O) in, (M,N,Cout) out."""
    if input_tensor.ndim != 3:
        raise ValueError("expected a 3-D (rows, cols, channels) tensor")
    out, _ = conv3x3_forward(input_tensor[None], kernel, bias)
    return out[0]


class Adam:
    """Adaptive moment estimation over a dict of named parameter arrays."""

    def __init__(self, params: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def update(self, grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for key, g in grads.items():
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            self.params[key] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
