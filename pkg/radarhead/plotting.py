"""
SVG heatmaps of spectrum matrices (frames x range bins, colour-mapped over [0, 1]).
"""
import io
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import numpy.typing as npt  # noqa: E402
from matplotlib.cm import ScalarMappable  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402

from radarhead.config import CLASS_NAMES, RadarConfig  # noqa: E402
from radarhead.dsp import argmax_trace, range_axis  # noqa: E402
from radarhead.errors import InvalidArgumentError  # noqa: E402
from radarhead.storage import atomic_write_bytes  # noqa: E402

COLORMAP = "viridis"

# Fixed salt and no date so identical matrices give identical SVG bytes.
_SVG_RC = {"svg.hashsalt": "radarhead", "svg.fonttype": "path"}


def heatmap_filename(index: int, label: int) -> str:
    return f"sample_{index}_label{label}.svg"


def colorize(matrix: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """RGBA pixels of the heatmap image, one per matrix cell."""
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2:
        raise InvalidArgumentError(f"heatmaps need a 2-D matrix, got shape {data.shape}")
    return matplotlib.colormaps[COLORMAP](np.clip(data, 0.0, 1.0))


def render_heatmap(
    matrix: npt.ArrayLike,
    path: Union[str, Path],
    label: Optional[int] = None,
    radar: Optional[RadarConfig] = None,
) -> Path:
    """
    Write one heatmap; rows are frames (time upward), columns are range bins.
    The strongest bin of every frame is traced over the image.
    """
    pixels = colorize(matrix)
    n_frames, n_bins = pixels.shape[:2]
    peaks = argmax_trace(np.asarray(matrix, dtype=np.float64))
    frames = np.arange(n_frames) + 0.5

    if radar is None:
        width, xlabel = float(n_bins), "Range bin"
        trace = peaks + 0.5
    else:
        axis_cm = range_axis(radar) * 100.0
        if axis_cm.shape[0] != n_bins:
            raise InvalidArgumentError(f"matrix has {n_bins} bins, radar config keeps {axis_cm.shape[0]}")
        spacing_cm = radar.bin_spacing_m * 100.0
        width, xlabel = n_bins * spacing_cm, "Range (cm)"
        trace = axis_cm[peaks] + spacing_cm / 2.0

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        ax.imshow(
            pixels,
            aspect="auto",
            origin="lower",
            interpolation="nearest",
            extent=(0.0, width, 0.0, float(n_frames)),
        )
        ax.plot(trace, frames, color="white", linewidth=0.8)
        ax.set_xlim(0.0, width)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("Frame")
        if label is not None:
            ax.set_title(f"class {label} ({CLASS_NAMES[label]})")
        scale = ScalarMappable(norm=Normalize(0.0, 1.0), cmap=COLORMAP)
        fig.colorbar(scale, ax=ax, label="Normalised magnitude")

        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)

    return atomic_write_bytes(path, buf.getvalue())
