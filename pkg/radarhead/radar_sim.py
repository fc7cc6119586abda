"""
FMCW beat-signal synthesis for the four head-movement classes.

Each frame is one chirp. A reflector at range R contributes
(a / 2) * cos(2 pi f_b n T_s + 2 pi (2 f_c R / c) + phi) with f_b = 2 B R / (T c).
"""
from typing import Iterable, Optional, Union

import numpy as np

from radarhead.config import SPEED_OF_LIGHT, MotionParams, RadarConfig, SceneParams
from radarhead.errors import InvalidArgumentError
from radarhead.models import FloatArray, MotionProfile, Reflector, SceneSpec

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

# Observation window the head target is confined to.
TARGET_RANGE_LIMITS_M = (0.2, 1.0)


def beat_frequency_hz(config: RadarConfig, range_m: float) -> float:
    """f_b = 2 B R / (T c)."""
    return 2.0 * config.bandwidth_hz * range_m / (config.chirp_duration_s * SPEED_OF_LIGHT)


def beat_frame(config: RadarConfig, reflectors: Iterable[Reflector]) -> FloatArray:
    """Sampled beat signal of one chirp: the exact sum of every reflector's tone."""
    n = np.arange(config.samples_per_chirp, dtype=np.float64)
    t = n * config.sample_period_s
    frame = np.zeros(config.samples_per_chirp, dtype=np.float64)

    for r in reflectors:
        if not np.isfinite(r.amplitude) or r.amplitude < 0:
            raise InvalidArgumentError(f"reflector amplitude must be finite and >= 0, got {r.amplitude}")
        if not np.isfinite(r.range_m) or not np.isfinite(r.phase_rad):
            raise InvalidArgumentError("reflector range and phase must be finite")

        f_b = beat_frequency_hz(config, r.range_m)
        phase = 2.0 * np.pi * (2.0 * config.carrier_freq_hz * r.range_m / SPEED_OF_LIGHT) + r.phase_rad
        frame += (r.amplitude / 2.0) * np.cos(2.0 * np.pi * f_b * t + phase)

    return frame


def _uniform(rng: np.random.Generator, interval: tuple[float, float]) -> float:
    low, high = interval
    return float(rng.uniform(low, high))


def motion_trajectory(
    class_label: int,
    params: Optional[MotionParams] = None,
    seed: SeedLike = 0,
    config: Optional[RadarConfig] = None,
) -> MotionProfile:
    """
    Draw a per-frame head trajectory for one class.

    0 front:   base range plus Gaussian jitter
    1 nod:     base + A sin(2 pi f t + phase)
    2 shake:   amplitude (1 + depth sin(2 pi f t)), range wobble
    3 lowered: base + offset, Gaussian jitter
    """
    params = params or MotionParams()
    config = config or RadarConfig()
    rng = np.random.default_rng(seed)

    n_frames = config.frames_per_sample
    t = np.arange(n_frames, dtype=np.float64) * config.frame_interval_s
    base = params.base_range_m
    amplitudes = np.full(n_frames, params.target_amplitude, dtype=np.float64)

    if class_label == 0:
        ranges = base + params.jitter_std_m * rng.standard_normal(n_frames)
    elif class_label == 1:
        amp = _uniform(rng, params.nod_amplitude_m)
        freq = _uniform(rng, params.nod_freq_hz)
        phase = _uniform(rng, params.nod_phase_rad)
        ranges = base + amp * np.sin(2.0 * np.pi * freq * t + phase)
    elif class_label == 2:
        freq = _uniform(rng, params.shake_freq_hz)
        amplitudes = amplitudes * (1.0 + params.shake_depth * np.sin(2.0 * np.pi * freq * t))
        ranges = base + params.shake_wobble_std_m * rng.standard_normal(n_frames)
    elif class_label == 3:
        offset = _uniform(rng, params.lower_offset_m)
        ranges = base + offset + params.jitter_std_m * rng.standard_normal(n_frames)
    else:
        raise InvalidArgumentError(f"unknown class label {class_label}")

    low, high = TARGET_RANGE_LIMITS_M
    return MotionProfile(
        class_label=class_label,
        ranges_m=np.clip(ranges, low, high),
        amplitudes=amplitudes,
    )


def make_scene(
    config: RadarConfig,
    class_label: int,
    params: Optional[SceneParams] = None,
    seed: SeedLike = 0,
) -> SceneSpec:
    """Draw motion, clutter amplitudes/phases and a noise seed for one sample."""
    params = params or SceneParams()
    rng = np.random.default_rng(seed)

    motion = motion_trajectory(class_label, params.motion, rng, config)
    clutter = tuple(
        Reflector(
            range_m=r,
            amplitude=_uniform(rng, params.clutter_amplitude),
            phase_rad=float(rng.uniform(0.0, 2.0 * np.pi)),
        )
        for r in params.clutter_ranges_m
    )
    return SceneSpec(
        motion=motion,
        clutter=clutter,
        noise_std=params.noise_std,
        seed=int(rng.integers(0, 2**63)),
        target_phase_rad=float(rng.uniform(0.0, 2.0 * np.pi)),
    )


def simulate_sample(config: RadarConfig, scene: SceneSpec) -> FloatArray:
    """Synthesise the N_f x N_s raw frames of a scene; row k is frame k."""
    if len(scene.motion) != config.frames_per_sample:
        raise InvalidArgumentError(
            f"motion has {len(scene.motion)} frames, config expects {config.frames_per_sample}"
        )

    rng = np.random.default_rng(scene.seed)
    frames = np.empty((config.frames_per_sample, config.samples_per_chirp), dtype=np.float64)

    for k in range(config.frames_per_sample):
        reflectors: list[Reflector] = []
        if scene.include_target:
            reflectors.append(
                Reflector(
                    range_m=float(scene.motion.ranges_m[k]),
                    amplitude=float(scene.motion.amplitudes[k]),
                    phase_rad=scene.target_phase_rad,
                )
            )
        reflectors.extend(scene.clutter)
        frames[k] = beat_frame(config, reflectors)
        if scene.noise_std > 0:
            frames[k] += rng.normal(0.0, scene.noise_std, config.samples_per_chirp)

    return frames
