"""Signal-to-image core: STFT, dB conversion, resizing, and spectrogram files.

The 2-D image in [0,1] (`ImageGrid`) is the common currency between the
simulator, the texture-transfer optimizer, the feature extractors, and the
classifier. Images persist as SGRM binaries (f32, little-endian) and export
to 8-bit P5 graymaps for reports.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

DB_FLOOR = -120.0
POWER_EPS = 1e-12

WINDOW_KINDS = ("hann", "rect")


class SgramError(ValueError):
    """Base class for SGRM file-format errors."""


class BadMagicError(SgramError):
    pass


class TruncatedPayloadError(SgramError):
    pass


class PixelValueError(SgramError):
    pass


@dataclass(frozen=True)
class IQSignal:
    """Complex baseband time series."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples.view(np.float64))):
            raise ValueError("samples must be finite")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be > 0")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)


@dataclass(frozen=True)
class StftConfig:
    window_len: int
    hop: int
    fft_len: int
    window: str = "hann"

    def __post_init__(self):
        if self.window_len < 1 or self.hop < 1:
            raise ValueError("window_len and hop must be positive")
        if self.hop > self.window_len:
            raise ValueError("hop must be <= window_len")
        if self.fft_len < self.window_len:
            raise ValueError("fft_len must be >= window_len")
        if self.fft_len & (self.fft_len - 1):
            raise ValueError("fft_len must be a power of two")
        if self.window not in WINDOW_KINDS:
            raise ValueError(f"window must be one of {WINDOW_KINDS}")


@dataclass(frozen=True)
class Spectrogram:
    """Real power grid in dB; rows are frequency (fft-shifted), cols are time."""

    values: np.ndarray
    time_step_s: float
    freq_step_hz: float
    freq_origin_hz: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("values must be a non-empty 2-D grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrogram values must be finite")
        if values.min() < DB_FLOOR:
            raise ValueError(f"values must be >= dB floor {DB_FLOOR}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ImageGrid:
    """2-D image with float32 pixels in [0,1]."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float32)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D grid")
        if not np.all(np.isfinite(pixels)):
            raise ValueError("pixels must be finite")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("pixels must lie in [0,1]")
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]


def stft(signal: IQSignal, cfg: StftConfig) -> Spectrogram:
    """Short-time Fourier transform to a dB power grid.

    Column count is floor((len - window_len)/hop) + 1; rows equal fft_len with
    0 Hz centered. Power is 10*log10(|X|^2 + eps) clamped at the -120 dB floor.
    """
    x = signal.samples
    n = x.size
    if n < cfg.window_len:
        raise ValueError("insufficient samples")
    cols = (n - cfg.window_len) // cfg.hop + 1

    starts = np.arange(cols) * cfg.hop
    frames = x[starts[:, None] + np.arange(cfg.window_len)[None, :]]
    if cfg.window == "hann":
        frames = frames * np.hanning(cfg.window_len)

    spec = np.fft.fftshift(np.fft.fft(frames, n=cfg.fft_len, axis=1), axes=1)
    power = spec.real**2 + spec.imag**2
    db = 10.0 * np.log10(power + POWER_EPS)
    np.maximum(db, DB_FLOOR, out=db)
    db[power == 0.0] = DB_FLOOR  # zero power maps to the floor exactly

    fs = signal.sample_rate_hz
    freqs = np.fft.fftshift(np.fft.fftfreq(cfg.fft_len, d=1.0 / fs))
    return Spectrogram(
        values=db.T,
        time_step_s=cfg.hop / fs,
        freq_step_hz=fs / cfg.fft_len,
        freq_origin_hz=float(freqs[0]),
    )


def to_image(spec: Spectrogram, db_min: float, db_max: float) -> ImageGrid:
    """Linear map of [db_min, db_max] onto [0,1], clamped at both ends."""
    if not db_max > db_min:
        raise ValueError("db_max must be > db_min")
    scaled = (spec.values - db_min) / (db_max - db_min)
    return ImageGrid(np.clip(scaled, 0.0, 1.0))


def resize_bilinear(img: ImageGrid, out_rows: int, out_cols: int) -> ImageGrid:
    """Bilinear resize with half-pixel-center sample positions."""
    if out_rows < 1 or out_cols < 1:
        raise ValueError("target dimensions must be positive")
    src = img.pixels.astype(np.float64)
    in_rows, in_cols = src.shape

    def axis_coords(n_out, n_in):
        coords = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        return np.clip(coords, 0.0, n_in - 1.0)

    r = axis_coords(out_rows, in_rows)
    c = axis_coords(out_cols, in_cols)
    r0 = np.floor(r).astype(np.intp)
    c0 = np.floor(c).astype(np.intp)
    r1 = np.minimum(r0 + 1, in_rows - 1)
    c1 = np.minimum(c0 + 1, in_cols - 1)
    fr = (r - r0)[:, None]
    fc = (c - c0)[None, :]

    top = src[r0[:, None], c0[None, :]] * (1.0 - fc) + src[r0[:, None], c1[None, :]] * fc
    bot = src[r1[:, None], c0[None, :]] * (1.0 - fc) + src[r1[:, None], c1[None, :]] * fc
    out = top * (1.0 - fr) + bot * fr
    return ImageGrid(np.clip(out, 0.0, 1.0))


SGRM_MAGIC = b"SGRM"
SGRM_VERSION = 1
_SGRM_HEADER = struct.Struct("<4sIII")


def save_sgram(img: ImageGrid, path) -> None:
    """Write the SGRM binary: magic, u32 version, u32 rows, u32 cols, f32 pixels."""
    header = _SGRM_HEADER.pack(SGRM_MAGIC, SGRM_VERSION, img.rows, img.cols)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.pixels.astype("<f4").tobytes())


def load_sgram(path) -> ImageGrid:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _SGRM_HEADER.size:
        raise TruncatedPayloadError("file shorter than SGRM header")
    magic, version, rows, cols = _SGRM_HEADER.unpack_from(blob)
    if magic != SGRM_MAGIC:
        raise BadMagicError("bad magic")
    if version != SGRM_VERSION:
        raise SgramError(f"unsupported SGRM version {version}")
    expected = _SGRM_HEADER.size + 4 * rows * cols
    if len(blob) < expected:
        raise TruncatedPayloadError("truncated pixel payload")
    if len(blob) > expected:
        raise SgramError("trailing bytes after pixel payload")
    pixels = np.frombuffer(blob, dtype="<f4", offset=_SGRM_HEADER.size)
    pixels = pixels.reshape(rows, cols)
    if np.isnan(pixels).any():
        raise PixelValueError("NaN pixel")
    if not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0:
        raise PixelValueError("pixel outside [0,1]")
    return ImageGrid(pixels.copy())


def save_pgm(img: ImageGrid, path) -> None:
    """Export as binary P5 graymap with pixel = round(255*value)."""
    data = np.rint(img.pixels * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.cols} {img.rows}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def normalized_cross_correlation(a: ImageGrid, b: ImageGrid) -> float:
    """Zero-mean NCC between two equally sized images."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError("images must share dimensions")
    x = a.pixels.astype(np.float64).ravel()
    y = b.pixels.astype(np.float64).ravel()
    x = x - x.mean()
    y = y - y.mean()
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx < 1e-12 or ny < 1e-12:
        return 1.0 if np.allclose(x, y, atol=1e-12) else 0.0
    return float(np.dot(x, y) / (nx * ny))
