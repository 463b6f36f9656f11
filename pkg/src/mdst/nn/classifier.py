"""Trainable activity classifier and its Adam training loop.

Eight stages: conv(16)-ReLU-pool, conv(32)-ReLU-pool, conv(64)-ReLU-pool,
dense(128)-ReLU, dense(10)-softmax, on 100x100 single-channel inputs.
Parameters live in float32; training is deterministic for a fixed seed
(He init and epoch shuffles come from one Generator).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..spectra import ImageGrid
from .ops import (
    Adam,
    avgpool2_backward,
    avgpool2_forward,
    conv3x3_backward,
    conv3x3_forward,
    cross_entropy,
    dense_backward,
    dense_forward,
    he_normal,
    relu_backward,
    relu_forward,
    softmax,
)

INPUT_SIZE = 100
NUM_CLASSES = 10
_FLAT_DIM = (INPUT_SIZE // 8) ** 2 * 64  # 12*12*64 after three pools


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    batch_size: int = 64
    epochs: int = 100
    seed: int = 0


class ClassifierModel:
    def __init__(self, seed: int = 0):
        rng = np.random.default_rng(seed)
        f32 = np.float32
        self.params: dict[str, np.ndarray] = {
            "conv1_w": he_normal(rng, (3, 3, 1, 16), 9 * 1, f32),
            "conv1_b": np.zeros(16, f32),
            "conv2_w": he_normal(rng, (3, 3, 16, 32), 9 * 16, f32),
            "conv2_b": np.zeros(32, f32),
            "conv3_w": he_normal(rng, (3, 3, 32, 64), 9 * 32, f32),
            "conv3_b": np.zeros(64, f32),
            "fc1_w": he_normal(rng, (_FLAT_DIM, 128), _FLAT_DIM, f32),
            "fc1_b": np.zeros(128, f32),
            "fc2_w": he_normal(rng, (128, NUM_CLASSES), 128, f32),
            "fc2_b": np.zeros(NUM_CLASSES, f32),
        }

    def forward(self, x: np.ndarray):
        """x: (B,100,100,1) float32. Returns (logits, caches)."""
        p = self.params
        caches = []
        cur = x
        for i in (1, 2, 3):
            z, conv_cache = conv3x3_forward(cur, p[f"conv{i}_w"], p[f"conv{i}_b"])
            a, mask = relu_forward(z)
            cur, pool_cache = avgpool2_forward(a)
            caches.append((conv_cache, mask, pool_cache))
        flat = cur.reshape(cur.shape[0], -1)
        z1, fc1_cache = dense_forward(flat, p["fc1_w"], p["fc1_b"])
        a1, fc1_mask = relu_forward(z1)
        logits, fc2_cache = dense_forward(a1, p["fc2_w"], p["fc2_b"])
        caches.append((cur.shape, fc1_cache, fc1_mask, fc2_cache))
        return logits, caches

    def backward(self, dlogits: np.ndarray, caches) -> dict[str, np.ndarray]:
        p = self.params
        grads: dict[str, np.ndarray] = {}
        conv_shape, fc1_cache, fc1_mask, fc2_cache = caches[-1]
        da1, grads["fc2_w"], grads["fc2_b"] = dense_backward(dlogits, fc2_cache, p["fc2_w"])
        dz1 = relu_backward(da1, fc1_mask)
        dflat, grads["fc1_w"], grads["fc1_b"] = dense_backward(dz1, fc1_cache, p["fc1_w"])
        dcur = dflat.reshape(conv_shape)
        for i in (3, 2, 1):
            conv_cache, mask, pool_cache = caches[i - 1]
            da = avgpool2_backward(dcur, pool_cache)
            dz = relu_backward(da, mask)
            dcur, grads[f"conv{i}_w"], grads[f"conv{i}_b"] = conv3x3_backward(dz, conv_cache)
        return grads

    def predict_proba(self, x: np.ndarray, chunk: int = 256) -> np.ndarray:
        out = []
        for i in range(0, x.shape[0], chunk):
            logits, _ = self.forward(x[i: i + chunk])
            out.append(softmax(logits))
        return np.concatenate(out, axis=0)


def stack_images(items) -> tuple[np.ndarray, np.ndarray]:
    """[(ImageGrid, activity_id), ...] -> (X (N,100,100,1) f32, y (N,) int)."""
    images, labels = [], []
    for img, label in items:
        px = img.pixels if isinstance(img, ImageGrid) else np.asarray(img, np.float32)
        if px.shape != (INPUT_SIZE, INPUT_SIZE):
            raise ValueError(f"classifier inputs must be {INPUT_SIZE}x{INPUT_SIZE}")
        images.append(px)
        labels.append(int(label))
    x = np.stack(images).astype(np.float32)[..., None]
    return x, np.array(labels, dtype=np.int64)


def classifier_train(train_items, cfg: TrainConfig = TrainConfig()):
    """Train on labeled images; returns (model, per-epoch mean loss history)."""
    x, y = stack_images(train_items)
    present = set(int(v) for v in np.unique(y))
    missing = [c for c in range(1, NUM_CLASSES + 1) if c not in present]
    if missing:
        raise ValueError(f"class with no examples: {missing[0]}")
    onehot = np.zeros((y.size, NUM_CLASSES), dtype=np.float32)
    onehot[np.arange(y.size), y - 1] = 1.0

    rng = np.random.default_rng(cfg.seed)
    model = ClassifierModel(seed=int(rng.integers(2**31 - 1)))
    adam = Adam(model.params, lr=cfg.lr)
    history = []
    n = x.shape[0]
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start: start + cfg.batch_size]
            logits, caches = model.forward(x[idx])
            loss, dlogits = cross_entropy(logits, onehot[idx])
            grads = model.backward(dlogits.astype(np.float32), caches)
            adam.update(grads)
            losses.append(loss)
        history.append(float(np.mean(losses)))
    return model, history


def classifier_evaluate(model: ClassifierModel, test_items):
    """Returns (confusion matrix 10x10 row-normalized %, overall accuracy %)."""
    x, y = stack_images(test_items)
    if x.shape[0] == 0:
        raise ValueError("test set must be non-empty")
    probs = model.predict_proba(x)
    pred = probs.argmax(axis=1) + 1
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.float64)
    for true, hat in zip(y, pred):
        counts[true - 1, hat - 1] += 1.0
    row_sums = counts.sum(axis=1, keepdims=True)
    confusion = np.divide(100.0 * counts, row_sums, out=np.zeros_like(counts),
                          where=row_sums > 0)
    accuracy = float(100.0 * np.mean(pred == y))
    return confusion, accuracy


CHECKPOINT_MAGIC = b"NNCK"
CHECKPOINT_VERSION = 1


def save_checkpoint(model: ClassifierModel, path) -> None:
    """Binary container: magic, u32 version, u32 block count, named f32 blocks."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(model.params)))
        for name in sorted(model.params):
            arr = model.params[name].astype("<f4")
            encoded = name.encode("ascii")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def load_checkpoint(path) -> ClassifierModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ValueError("bad checkpoint magic")
    version, n_blocks = struct.unpack_from("<II", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    offset = 12
    params: dict[str, np.ndarray] = {}
    for _ in range(n_blocks):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset: offset + name_len].decode("ascii")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", blob, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset).reshape(shape)
        offset += 4 * count
        params[name] = arr.copy()
    model = ClassifierModel()
    expected = {k: v.shape for k, v in model.params.items()}
    got = {k: v.shape for k, v in params.items()}
    if expected != got:
        raise ValueError("checkpoint parameter blocks do not match the architecture")
    model.params = params
    return model
