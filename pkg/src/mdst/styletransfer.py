"""Gradient-based texture transfer between spectrogram images.

Optimizes a transfer image so its features at one tap match a clean content
image while its Gram statistics at five taps match a measured style image.
The per-layer losses are mean-squared over all tensor elements; the total is
the weighted sum alpha*content + beta*style, minimized by Adam on the pixels
with a [0,1] clamp after every step.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .nn.feature import TAP_NAMES, Activations, FeatureNetwork
from .nn.ops import Adam
from .seeding import derive_seed
from .spectra import ImageGrid

INIT_KINDS = ("white_noise", "content_copy")

DEFAULT_ITERATIONS = 2500
DEFAULT_ALPHA = 1e-3
DEFAULT_BETA = 1.0
DEFAULT_STEP = 0.02

# spectrograms are mostly dark, so the noise init starts near that regime
# instead of wasting iterations scrubbing bright speckle
WHITE_NOISE_AMPLITUDE = 0.05


@dataclass(frozen=True)
class StyleTransferConfig:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    style_layer_weights: dict[str, float] | None = None  # None -> uniform over taps
    content_layer: str = "conv2_1"
    style_layers: tuple[str, ...] = TAP_NAMES
    iterations: int = DEFAULT_ITERATIONS
    step_size: float = DEFAULT_STEP
    init: str = "white_noise"
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}")
        if self.content_layer not in TAP_NAMES:
            raise ValueError(f"unknown content layer {self.content_layer!r}")
        for layer in self.style_layers:
            if layer not in TAP_NAMES:
                raise ValueError(f"unknown style layer {layer!r}")
        if self.style_layer_weights is not None:
            total = sum(self.style_layer_weights.values())
            if any(w < 0 for w in self.style_layer_weights.values()):
                raise ValueError("style layer weights must be >= 0")
            if abs(total - 1.0) > 1e-9:
                raise ValueError("style layer weights must sum to 1")

    def layer_weights(self) -> dict[str, float]:
        if self.style_layer_weights is not None:
            return dict(self.style_layer_weights)
        w = 1.0 / len(self.style_layers)
        return {layer: w for layer in self.style_layers}


@dataclass(frozen=True)
class LossBreakdown:
    content: float
    style: float
    total: float


@dataclass(frozen=True)
class TransferResult:
    output: ImageGrid
    trace: tuple[LossBreakdown, ...]


def gram(tensor: np.ndarray) -> np.ndarray:
    """G[i,j] = sum_k F[i,k] F[j,k] over the (filters x positions) flattening."""
    if tensor.ndim != 3:
        raise ValueError("expected a (rows, cols, channels) tensor")
    m, n, o = tensor.shape
    flat = np.ascontiguousarray(tensor.transpose(2, 0, 1)).reshape(o, m * n)
    return flat @ flat.T


def _gram_of_flat(flat: np.ndarray) -> np.ndarray:
    return flat @ flat.T


def content_loss(transfer_acts: Activations, content_acts: Activations, layer: str):
    """Mean-squared feature distance at one tap; returns (loss, tap gradient)."""
    a = transfer_acts.tensor(layer)
    b = content_acts.tensor(layer)
    if a.shape != b.shape:
        raise ValueError(f"activation shape mismatch at {layer}: {a.shape} vs {b.shape}")
    count = a.size
    diff = a - b
    loss = float(np.sum(diff * diff) / count)
    grad = (2.0 / count) * diff
    return loss, grad


def style_loss(transfer_acts: Activations, style_acts: Activations,
               layers, weights: dict[str, float]):
    """Weighted Gram mismatch over the given taps; returns (loss, tap gradients)."""
    total = 0.0
    grads: dict[str, np.ndarray] = {}
    for layer in layers:
        a = transfer_acts.tensor(layer)
        b = style_acts.tensor(layer)
        if a.shape != b.shape:
            raise ValueError(f"activation shape mismatch at {layer}: {a.shape} vs {b.shape}")
        w = weights[layer]
        m, n, o = a.shape
        count = a.size
        flat = transfer_acts.flat(layer)
        g_transfer = _gram_of_flat(flat)
        g_style = _gram_of_flat(style_acts.flat(layer))
        diff = g_transfer - g_style
        total += w * float(np.sum(diff * diff)) / count
        dflat = (4.0 * w / count) * (diff @ flat)
        grads[layer] = dflat.reshape(o, m, n).transpose(1, 2, 0)
    return total, grads


def total_loss(content_part: float, style_part: float, alpha: float, beta: float) -> LossBreakdown:
    if alpha < 0 or beta < 0:
        raise ValueError("weights must be >= 0")
    if content_part < 0 or style_part < 0:
        raise ValueError("loss parts must be >= 0")
    return LossBreakdown(content_part, style_part, alpha * content_part + beta * style_part)


def transfer(content: ImageGrid, style: ImageGrid, net: FeatureNetwork,
             cfg: StyleTransferConfig = StyleTransferConfig()) -> TransferResult:
    """Optimize a transfer image against a content/style pair."""
    if content.pixels.shape != style.pixels.shape:
        raise ValueError("content and style images must share dimensions")

    weights = cfg.layer_weights()
    content_target, _ = net._forward(content.pixels.astype(np.float64)[:, :, None])
    style_target, _ = net._forward(style.pixels.astype(np.float64)[:, :, None])
    content_acts = Activations({cfg.content_layer: content_target[cfg.content_layer]})
    style_acts = Activations({k: style_target[k] for k in cfg.style_layers})

    rng = np.random.default_rng(cfg.seed)
    if cfg.init == "white_noise":
        x = rng.uniform(0.0, WHITE_NOISE_AMPLITUDE, content.pixels.shape)
    else:
        x = content.pixels.astype(np.float64).copy()

    # losses live at the feature network's activation scale, far below 1;
    # a tiny eps keeps Adam's denominator from swamping the moments
    adam = Adam({"pixels": x}, lr=cfg.step_size, eps=1e-16)
    trace = []
    for _ in range(cfg.iterations):
        tensors, caches = net._forward(x[:, :, None])
        acts = Activations(tensors)
        c_loss, c_grad = content_loss(acts, content_acts, cfg.content_layer)
        s_loss, s_grads = style_loss(acts, style_acts, cfg.style_layers, weights)
        trace.append(total_loss(c_loss, s_loss, cfg.alpha, cfg.beta))

        tap_grads = {tap: cfg.beta * g for tap, g in s_grads.items()}
        if cfg.content_layer in tap_grads:
            tap_grads[cfg.content_layer] = tap_grads[cfg.content_layer] + cfg.alpha * c_grad
        else:
            tap_grads[cfg.content_layer] = cfg.alpha * c_grad
        pixel_grad = net._backward(caches, tap_grads)
        adam.update({"pixels": pixel_grad})
        np.clip(x, 0.0, 1.0, out=x)

    return TransferResult(ImageGrid(x.astype(np.float32)), tuple(trace))


def per_image_seed(base_seed: int, activity_id: int, index: int) -> int:
    """Seed for one image inside a batch run; stable across schedulings."""
    return derive_seed("stylize", base_seed, activity_id, index)


def _stylize_job(args):
    content, exemplar, net_seed, cfg = args
    net = FeatureNetwork(seed=net_seed)
    return transfer(content, exemplar, net, cfg).output


def batch_stylize(clean_sets: dict[int, list[ImageGrid]],
                  style_exemplars: dict[int, ImageGrid],
                  net: FeatureNetwork,
                  cfg: StyleTransferConfig = StyleTransferConfig(),
                  n_jobs: int = 1) -> dict[int, list[ImageGrid]]:
    """Stylize every clean image against its activity's single exemplar.

    Results are independent of n_jobs: each image gets a derived seed from
    (cfg.seed, activity, index).
    """
    for activity in clean_sets:
        if activity not in style_exemplars:
            raise ValueError(f"missing style exemplar for activity {activity}")

    jobs = []
    slots = []
    for activity, images in clean_sets.items():
        for index, content in enumerate(images):
            job_cfg = replace(cfg, seed=per_image_seed(cfg.seed, activity, index))
            jobs.append((content, style_exemplars[activity], net.seed, job_cfg))
            slots.append(activity)

    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outputs = list(pool.map(_stylize_job, jobs, chunksize=1))
    else:
        outputs = [_stylize_job(job) for job in jobs]

    styled: dict[int, list[ImageGrid]] = {activity: [] for activity in clean_sets}
    for activity, image in zip(slots, outputs):
        styled[activity].append(image)
    return styled
