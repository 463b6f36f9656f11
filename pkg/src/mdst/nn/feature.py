"""Fixed multi-scale feature extractor with named layer taps.

Five blocks of bias-free conv3x3 + ReLU with 2x2 average pooling between
blocks. Weights are drawn once from a seeded He-normal distribution and
frozen; the network is never trained. Taps sit on the post-ReLU output of
each block's convolution, so a zero image yields zero activations at every
tap. Input-gradient backpropagation through the taps supports the texture
transfer optimizer.
"""

from __future__ import annotations

import numpy as np

from ..spectra import ImageGrid
from .ops import (
    avgpool2_backward,
    avgpool2_forward,
    conv3x3_backward,
    conv3x3_forward,
    he_normal,
    relu_backward,
    relu_forward,
)

TAP_NAMES = ("conv1_1", "conv2_1", "conv3_1", "conv4_1", "conv5_1")
CHANNEL_WIDTHS = (8, 16, 32, 64, 64)
MIN_INPUT_SIZE = 32
DEFAULT_FEATURE_SEED = 1716

# Fixed input normalization. The network is bias-free and positively
# homogeneous, so this constant sets the absolute activation scale. Gram
# statistics grow with the square of activations while feature distances
# grow linearly, so the gain determines how texture and content terms
# compare at a given alpha/beta; this value makes the default ratio of
# 1e-3 give content-faithful transfers that still pick up texture.
DEFAULT_INPUT_GAIN = 0.02


class Activations:
    """Per-tap feature tensors plus their (filters x positions) flattenings."""

    def __init__(self, tensors: dict[str, np.ndarray]):
        self._tensors = dict(tensors)

    def tensor(self, tap: str) -> np.ndarray:
        return self._tensors[tap]

    def flat(self, tap: str) -> np.ndarray:
        """Flattened matrix: row i is the vectorized response of filter i."""
        t = self._tensors[tap]
        m, n, o = t.shape
        return np.ascontiguousarray(t.transpose(2, 0, 1)).reshape(o, m * n)

    def element_count(self, tap: str) -> int:
        return int(np.prod(self._tensors[tap].shape))

    def taps(self) -> tuple[str, ...]:
        return tuple(self._tensors)

    def __contains__(self, tap: str) -> bool:
        return tap in self._tensors


class FeatureNetwork:
    """Immutable stack of seeded random conv blocks with named taps."""

    def __init__(self, seed: int = DEFAULT_FEATURE_SEED, input_gain: float = DEFAULT_INPUT_GAIN):
        self.seed = seed
        self.input_gain = input_gain
        rng = np.random.default_rng(seed)
        kernels = []
        c_in = 1
        for width in CHANNEL_WIDTHS:
            k = he_normal(rng, (3, 3, c_in, width), fan_in=9 * c_in)
            k.flags.writeable = False
            kernels.append(k)
            c_in = width
        self.kernels = tuple(kernels)

    def tap_shapes(self, size: int) -> dict[str, tuple[int, int, int]]:
        shapes = {}
        s = size
        for tap, width in zip(TAP_NAMES, CHANNEL_WIDTHS):
            shapes[tap] = (s, s, width)
            s //= 2
        return shapes

    def _forward(self, x: np.ndarray):
        """x: (H,W,1) float64 raw pixels. Returns (tap tensors, caches for backward)."""
        cur = x[None] * self.input_gain
        tensors: dict[str, np.ndarray] = {}
        caches = []
        last = len(self.kernels) - 1
        for i, kernel in enumerate(self.kernels):
            z, conv_cache = conv3x3_forward(cur, kernel)
            a, relu_mask = relu_forward(z)
            tensors[TAP_NAMES[i]] = a[0]
            if i < last:
                cur, pool_cache = avgpool2_forward(a)
            else:
                cur, pool_cache = a, None
            caches.append((conv_cache, relu_mask, pool_cache))
        return tensors, caches

    def _backward(self, caches, tap_grads: dict[str, np.ndarray]) -> np.ndarray:
        """Chain rule from tap-space gradients down to the input image."""
        last = len(self.kernels) - 1
        upstream = None  # gradient at block i's pool output, i.e. block i+1's input
        for i in range(last, -1, -1):
            conv_cache, relu_mask, pool_cache = caches[i]
            if upstream is None:  # deepest block has no pool after it
                da = np.zeros(relu_mask.shape, dtype=np.float64)
            else:
                da = avgpool2_backward(upstream, pool_cache)
            tap = TAP_NAMES[i]
            if tap in tap_grads:
                da = da + tap_grads[tap][None]
            dz = relu_backward(da, relu_mask)
            upstream, _, _ = conv3x3_backward(dz, conv_cache)
        return upstream[0, :, :, 0] * self.input_gain


def _image_tensor(img: ImageGrid) -> np.ndarray:
    return img.pixels.astype(np.float64)[:, :, None]


def feature_forward(net: FeatureNetwork, img: ImageGrid) -> Activations:
    """Run an image through the network and collect all five tap tensors."""
    if img.rows != img.cols:
        raise ValueError("input image must be square")
    if img.rows < MIN_INPUT_SIZE:
        raise ValueError(f"input must be at least {MIN_INPUT_SIZE}x{MIN_INPUT_SIZE}")
    tensors, _ = net._forward(_image_tensor(img))
    return Activations(tensors)


def feature_backward(net: FeatureNetwork, img: ImageGrid,
                     tap_grads: dict[str, np.ndarray]) -> np.ndarray:
    """Gradient of sum_taps <tap_grad, activation> with respect to the pixels.

    Taps absent from `tap_grads` contribute zero. Returns an (H, W) float64
    gradient image.
    """
    if img.rows != img.cols or img.rows < MIN_INPUT_SIZE:
        raise ValueError("input image must be square and >= 32x32")
    x = _image_tensor(img)
    tensors, caches = net._forward(x)
    for tap, g in tap_grads.items():
        if tap not in tensors:
            raise ValueError(f"unknown tap {tap!r}")
        if g.shape != tensors[tap].shape:
            raise ValueError(
                f"tap gradient shape {g.shape} does not match activation "
                f"shape {tensors[tap].shape} at {tap}"
            )
    return net._backward(caches, tap_grads)
