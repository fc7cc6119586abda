"""
Range processing: DFT, half-spectrum magnitude, mean-subtraction clutter
removal, cropping and normalisation into the N_f x N_s' spectrum matrix.
"""
from typing import Literal

import numpy as np
import numpy.typing as npt

from radarhead.config import RadarConfig
from radarhead.errors import InvalidArgumentError
from radarhead.models import FloatArray, SpectrumMatrix

ComplexArray = npt.NDArray[np.complex128]
Normalization = Literal["linear", "log"]


def _as_frame(frame: npt.ArrayLike) -> FloatArray:
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"a frame is a 1-D vector, got shape {arr.shape}")
    n = arr.shape[0]
    if n == 0 or n & (n - 1):
        raise InvalidArgumentError(f"frame length must be a power of two, got {n}")
    return arr


def dft(frame: npt.ArrayLike) -> ComplexArray:
    """M[k] = sum_n m[n] exp(-j 2 pi k n / N_s), via the FFT."""
    return np.fft.fft(_as_frame(frame))


def naive_dft(frame: npt.ArrayLike) -> ComplexArray:
    """O(N^2) reference summation of the same transform."""
    m = _as_frame(frame)
    n = m.shape[0]
    idx = np.arange(n)
    # reduce k*n mod N first so the twiddle angles stay small
    kn = np.outer(idx, idx) % n
    twiddle = np.exp(-2j * np.pi * kn / n)
    return twiddle @ m


def half_magnitude(spectrum: npt.ArrayLike) -> FloatArray:
    """[|M[0]|, ..., |M[N_s/2 - 1]|]."""
    s = np.asarray(spectrum)
    if s.ndim != 1:
        raise InvalidArgumentError(f"spectrum must be 1-D, got shape {s.shape}")
    return np.abs(s[: s.shape[0] // 2]).astype(np.float64)


def bin_to_range(k: int, config: RadarConfig) -> float:
    """Distance of range bin k: (c T / (2 B)) (k / N_s) f_s."""
    if not 0 <= k < config.samples_per_chirp // 2:
        raise InvalidArgumentError(f"bin {k} outside [0, {config.samples_per_chirp // 2})")
    return k * config.bin_spacing_m


def range_axis(config: RadarConfig) -> FloatArray:
    """Distances of the kept bins 0 .. N_s' - 1."""
    return np.arange(config.used_bins, dtype=np.float64) * config.bin_spacing_m


def mean_subtract(frames: npt.ArrayLike) -> FloatArray:
    """Remove the per-sample-index mean over frames, nulling static echoes."""
    arr = np.asarray(frames, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"frames must be a 2-D stack, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise InvalidArgumentError("mean subtraction needs at least 2 frames")
    return arr - arr.mean(axis=0, keepdims=True)


def spectrum_stack(frames: npt.ArrayLike, config: RadarConfig) -> FloatArray:
    """Clutter-removed half-spectrum magnitudes, cropped to N_s' bins (unnormalised)."""
    arr = np.asarray(frames, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != config.frames_per_sample:
        raise InvalidArgumentError(
            f"expected {config.frames_per_sample} frames, got shape {arr.shape}"
        )
    if arr.shape[1] != config.samples_per_chirp:
        raise InvalidArgumentError(
            f"expected frames of {config.samples_per_chirp} samples, got {arr.shape[1]}"
        )

    cleaned = mean_subtract(arr)
    rows = [half_magnitude(dft(frame))[: config.used_bins] for frame in cleaned]
    return np.stack(rows)


def normalize(matrix: npt.ArrayLike, mode: Normalization = "linear") -> tuple[FloatArray, float, float]:
    """Min-max scale the whole matrix to [0, 1]; a constant matrix maps to zeros."""
    values = np.asarray(matrix, dtype=np.float64)
    if mode == "log":
        values = np.log1p(values)
    elif mode != "linear":
        raise InvalidArgumentError(f"unknown normalization {mode!r}")

    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return np.zeros_like(values), lo, hi
    return (values - lo) / (hi - lo), lo, hi


def build_matrix(
    frames: npt.ArrayLike,
    config: RadarConfig,
    label: int,
    normalization: Normalization = "linear",
) -> SpectrumMatrix:
    """Raw frames of one sample to its normalised spectrum matrix."""
    data, lo, hi = normalize(spectrum_stack(frames, config), normalization)
    return SpectrumMatrix(data=data, label=label, norm_min=lo, norm_max=hi)


def argmax_trace(matrix: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Strongest range bin of every frame."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"matrix must be 2-D, got shape {arr.shape}")
    return np.argmax(arr, axis=1).astype(np.int64)
