"""Parametric point-scatterer micro-Doppler simulator.

Generates clean signatures from activity kinematics, and pseudo-measured
signatures by injecting multipath echoes, occlusion fades, a zero-Doppler
clutter tone, and receiver noise at the IQ level. Also provides the two
image-level noise stand-ins used by the benchmark: AWGN and patch-bootstrap
noise harvested from non-activity zones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .activities import ACTIVITY_IDS, TEMPLATES, ActivityTemplate
from .seeding import derive_rng
from .spectra import ImageGrid, IQSignal, Spectrogram, StftConfig, resize_bilinear, stft, to_image

C_MPS = 2.9979e8

RANGE_MIN_M = 0.3
RANGE_MAX_M = 6.0

IMAGE_SIZE = 100
DB_SPAN = 40.0

DEFAULT_STFT = StftConfig(window_len=256, hop=64, fft_len=256, window="hann")


@dataclass(frozen=True)
class RadarConfig:
    carrier_hz: float = 2.472e9
    sample_rate_hz: float = 2000.0
    duration_s: float = 10.0  # budget; profiles may be shorter
    c_mps: float = C_MPS

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.sample_rate_hz <= 0 or self.duration_s <= 0:
            raise ValueError("carrier_hz, sample_rate_hz, duration_s must be > 0")


@dataclass(frozen=True)
class ScattererTrack:
    """Piecewise-linear range trajectory plus an optional sinusoidal offset."""

    knots_t: tuple[float, ...]
    knots_r: tuple[float, ...]
    osc_amp_m: float = 0.0
    osc_hz: float = 0.0
    osc_phase: float = 0.0
    rcs_amp: float = 1.0

    def __post_init__(self):
        if len(self.knots_t) != len(self.knots_r) or len(self.knots_t) < 2:
            raise ValueError("need matching knot arrays with >= 2 knots")
        if any(b <= a for a, b in zip(self.knots_t, self.knots_t[1:])):
            raise ValueError("knot times must be strictly increasing")
        if not math.isfinite(self.rcs_amp) or self.rcs_amp < 0:
            raise ValueError("rcs_amp must be finite and >= 0")

    def range_at(self, t: np.ndarray) -> np.ndarray:
        r = np.interp(t, self.knots_t, self.knots_r)
        if self.osc_amp_m != 0.0:
            r = r + self.osc_amp_m * np.sin(2.0 * np.pi * self.osc_hz * t + self.osc_phase)
        return r


@dataclass(frozen=True)
class ActivityProfile:
    activity_id: int
    tracks: tuple[ScattererTrack, ...]  # torso first
    duration_s: float

    def __post_init__(self):
        if not self.tracks:
            raise ValueError("profile needs at least one track")


@dataclass(frozen=True)
class EnvConfig:
    """Environment injected into the pseudo-measured domain.

    multipath_echoes: (delay_s, doppler_offset_hz, gain in [0,1]) per echo.
    occlusion_windows: (t_start, t_end, attenuation in [0,1]) per fade.
    clutter_gain: amplitude of the zero-Doppler tone.
    snr_db: complex AWGN level; math.inf disables noise.
    """

    multipath_echoes: tuple[tuple[float, float, float], ...] = ()
    occlusion_windows: tuple[tuple[float, float, float], ...] = ()
    clutter_gain: float = 0.0
    snr_db: float = math.inf

    def __post_init__(self):
        for delay, _, gain in self.multipath_echoes:
            if delay < 0 or not 0.0 <= gain <= 1.0:
                raise ValueError("echo delay must be >= 0 and gain in [0,1]")
        for t0, t1, att in self.occlusion_windows:
            if t1 <= t0 or not 0.0 <= att <= 1.0:
                raise ValueError("occlusion window needs t_end > t_start, attenuation in [0,1]")
        if self.clutter_gain < 0:
            raise ValueError("clutter_gain must be >= 0")


IDENTITY_ENV = EnvConfig()


@dataclass(frozen=True)
class PatchNoiseModel:
    """Background tiles harvested from non-activity zones of measured images."""

    patches: tuple[np.ndarray, ...]
    tile_rows: int
    tile_cols: int

    def __post_init__(self):
        if not self.patches:
            raise ValueError("model needs at least one patch")
        for p in self.patches:
            if p.shape != (self.tile_rows, self.tile_cols):
                raise ValueError("patch shape mismatch")
            if p.min() < 0.0 or p.max() > 1.0:
                raise ValueError("patch pixels must lie in [0,1]")


def activity_profile(activity_id: int, subject_scale: float, seed: int) -> ActivityProfile:
    """Instantiate an activity template with seeded per-subject jitter.

    The RNG stream never depends on subject_scale, so limb amplitudes scale
    by exactly `subject_scale` between calls that share a seed. Interior
    torso knot times jitter by up to ±0.15 s; knot ranges are left untouched
    (activity 8 keeps its exact 0.8 m / 3.8 m turnaround marks).
    """
    if activity_id not in ACTIVITY_IDS:
        raise ValueError(f"unknown activity id {activity_id}")
    if not 0.8 <= subject_scale <= 1.2:
        raise ValueError("subject_scale must lie in [0.8, 1.2]")
    template: ActivityTemplate = TEMPLATES[activity_id]
    rng = np.random.default_rng(seed)

    times = np.array([t for t, _ in template.torso_knots])
    ranges = tuple(r for _, r in template.torso_knots)
    if len(times) > 2:
        jit = rng.uniform(-0.15, 0.15, size=len(times) - 2)
        interior = times[1:-1] + jit
        lo = times[:-2] + 0.05
        hi = times[2:] - 0.05
        times = times.copy()
        times[1:-1] = np.clip(interior, lo, hi)
    torso = ScattererTrack(
        knots_t=tuple(float(t) for t in times),
        knots_r=ranges,
        osc_amp_m=template.torso_osc_amp_m * subject_scale,
        osc_hz=template.torso_osc_hz,
        osc_phase=float(rng.uniform(0.0, 2.0 * np.pi)) if template.torso_osc_amp_m else 0.0,
        rcs_amp=1.0,
    )

    common_phase = float(rng.uniform(0.0, 2.0 * np.pi))
    limbs = []
    for spec in template.limbs:
        amp_jit = float(rng.uniform(0.92, 1.08))
        cad_jit = float(rng.uniform(0.92, 1.08))
        phase_jit = float(rng.uniform(-0.3, 0.3))
        limbs.append(
            ScattererTrack(
                knots_t=torso.knots_t,
                knots_r=torso.knots_r,
                osc_amp_m=spec.amp_m * amp_jit * subject_scale,
                osc_hz=spec.cadence_hz * cad_jit,
                osc_phase=spec.phase + common_phase + phase_jit,
                rcs_amp=spec.rcs,
            )
        )
    return ActivityProfile(activity_id, (torso, *limbs), template.duration_s)


def synthesize_return(profile: ActivityProfile, radar: RadarConfig) -> IQSignal:
    """Superpose quasi-monostatic returns exp(-j*4*pi*f_c*r(t)/c) of all tracks."""
    if profile.duration_s > radar.duration_s + 1e-9:
        raise ValueError("profile duration exceeds radar duration budget")
    n = int(round(profile.duration_s * radar.sample_rate_hz))
    t = np.arange(n) / radar.sample_rate_hz
    samples = np.zeros(n, dtype=np.complex128)
    for track in profile.tracks:
        r = track.range_at(t)
        if r.min() < RANGE_MIN_M or r.max() > RANGE_MAX_M:
            raise ValueError(
                f"track range [{r.min():.2f}, {r.max():.2f}] m exits "
                f"[{RANGE_MIN_M}, {RANGE_MAX_M}] m"
            )
        phase = (-4.0 * np.pi * radar.carrier_hz / radar.c_mps) * r
        samples += track.rcs_amp * np.exp(1j * phase)
    return IQSignal(samples, radar.sample_rate_hz)


def spectrogram_image(iq: IQSignal, stft_cfg: StftConfig = DEFAULT_STFT,
                      size: int = IMAGE_SIZE) -> ImageGrid:
    """STFT -> peak-referenced 40 dB window -> bilinear resize to size x size."""
    spec: Spectrogram = stft(iq, stft_cfg)
    peak = float(spec.values.max())
    img = to_image(spec, peak - DB_SPAN, peak)
    return resize_bilinear(img, size, size)


def simulate_clean(activity_id: int, subject_scale: float, radar: RadarConfig,
                   stft_cfg: StftConfig = DEFAULT_STFT, seed: int = 0) -> ImageGrid:
    profile = activity_profile(activity_id, subject_scale, seed)
    return spectrogram_image(synthesize_return(profile, radar), stft_cfg)


def simulate_measured(activity_id: int, subject_scale: float, radar: RadarConfig,
                      stft_cfg: StftConfig = DEFAULT_STFT, env: EnvConfig = IDENTITY_ENV,
                      seed: int = 0) -> ImageGrid:
    """Clean return plus environment; identity env reproduces simulate_clean exactly."""
    profile = activity_profile(activity_id, subject_scale, seed)
    base = synthesize_return(profile, radar)
    x = np.array(base.samples)
    n = x.size
    fs = radar.sample_rate_hz
    t = np.arange(n) / fs

    for delay_s, doppler_hz, gain in env.multipath_echoes:
        shift = int(round(delay_s * fs))
        echo = np.zeros_like(x)
        if shift < n:
            echo[shift:] = base.samples[: n - shift]
        x += gain * echo * np.exp(2j * np.pi * doppler_hz * t)

    for t0, t1, att in env.occlusion_windows:
        if t0 < 0 or t1 > profile.duration_s + 1e-9:
            raise ValueError("occlusion window outside [0, duration]")
        mask = (t >= t0) & (t < t1)
        x[mask] *= 1.0 - att

    if env.clutter_gain > 0.0:
        x += env.clutter_gain

    if math.isfinite(env.snr_db):
        p_signal = float(np.mean(x.real**2 + x.imag**2))
        var = p_signal / (10.0 ** (env.snr_db / 10.0))
        rng = derive_rng("awgn", seed)
        noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x += np.sqrt(var / 2.0) * noise

    return spectrogram_image(IQSignal(x, fs), stft_cfg)


def add_awgn_image(img: ImageGrid, snr_db: float, seed: int) -> ImageGrid:
    """Pixel-level Gaussian noise with variance mean(img^2)/10^(snr/10)."""
    if math.isinf(snr_db) and snr_db > 0:
        return img
    px = img.pixels.astype(np.float64)
    var = float(np.mean(px**2)) / (10.0 ** (snr_db / 10.0))
    noise = np.random.default_rng(seed).normal(0.0, np.sqrt(var), px.shape)
    return ImageGrid(np.clip(px + noise, 0.0, 1.0))


def fit_patch_noise(measured_set, energy_quantile: float, tile: tuple[int, int]) -> PatchNoiseModel:
    """Harvest background tiles from low-energy columns of measured images.

    A tile position qualifies when the mean energy of its columns is strictly
    below that image's energy quantile; all-zero tiles always qualify.
    """
    if not measured_set:
        raise ValueError("measured_set must be non-empty")
    if not 0.0 < energy_quantile < 1.0:
        raise ValueError("energy_quantile must lie in (0,1)")
    tr, tc = tile
    patches = []
    for img in measured_set:
        px = img.pixels.astype(np.float64)
        rows, cols = px.shape
        if tr > rows or tc > cols:
            raise ValueError("tile does not fit inside image")
        col_energy = np.sum(px**2, axis=0)
        threshold = float(np.quantile(col_energy, energy_quantile))
        for c0 in range(0, cols - tc + 1, tc):
            mean_energy = float(np.mean(col_energy[c0: c0 + tc]))
            if not (mean_energy < threshold or mean_energy == 0.0):
                continue
            for r0 in range(0, rows - tr + 1, tr):
                patches.append(px[r0: r0 + tr, c0: c0 + tc].astype(np.float32))
    if not patches:
        raise ValueError("no non-activity zone found")
    return PatchNoiseModel(tuple(patches), tr, tc)


def apply_patch_noise(img: ImageGrid, model: PatchNoiseModel, gain: float, seed: int) -> ImageGrid:
    """Tile randomly drawn patches over the grid and add them with the given gain."""
    if not 0.0 <= gain <= 1.0:
        raise ValueError("gain must lie in [0,1]")
    rng = np.random.default_rng(seed)
    rows, cols = img.pixels.shape
    q = np.zeros((rows, cols), dtype=np.float64)
    for r0 in range(0, rows, model.tile_rows):
        for c0 in range(0, cols, model.tile_cols):
            patch = model.patches[int(rng.integers(len(model.patches)))]
            h = min(model.tile_rows, rows - r0)
            w = min(model.tile_cols, cols - c0)
            q[r0: r0 + h, c0: c0 + w] = patch[:h, :w]
    out = img.pixels.astype(np.float64) + gain * q
    return ImageGrid(np.clip(out, 0.0, 1.0))
