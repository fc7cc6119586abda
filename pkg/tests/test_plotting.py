"""
Tests for spectrum heatmap rendering.
"""
import numpy as np
import pytest

from radarhead.config import RadarConfig
from radarhead.errors import InvalidArgumentError
from radarhead.plotting import colorize, heatmap_filename, render_heatmap


def test_heatmap_filename():
    """Test heatmap file naming."""
    assert heatmap_filename(7, 2) == "sample_7_label2.svg"


def test_render_writes_an_svg(tmp_path, tiny_dataset, tiny_radar):
    """Test SVG output."""
    path = render_heatmap(tiny_dataset.matrices[0], tmp_path / "a.svg", label=0, radar=tiny_radar)
    text = path.read_text()
    assert text.lstrip().startswith("<?xml")
    assert "<svg" in text


def test_rendering_is_deterministic(tmp_path, tiny_dataset):
    """The same matrix renders to the same bytes."""
    a = render_heatmap(tiny_dataset.matrices[5], tmp_path / "a.svg", label=0)
    b = render_heatmap(tiny_dataset.matrices[5], tmp_path / "b.svg", label=0)
    assert a.read_bytes() == b.read_bytes()


def test_all_zero_matrix_is_one_colour():
    """A zero matrix renders in a single colour."""
    rgba = colorize(np.zeros((30, 40)))
    assert rgba.shape == (30, 40, 4)
    assert np.all(rgba == rgba[0, 0])


def test_colours_follow_magnitude():
    """Test colour mapping."""
    rgba = colorize(np.array([[0.0, 1.0]]))
    assert not np.array_equal(rgba[0, 0], rgba[0, 1])


def test_render_rejects_non_matrix(tmp_path):
    """Test non-matrix input."""
    with pytest.raises(InvalidArgumentError):
        render_heatmap(np.zeros(5), tmp_path / "x.svg")
    with pytest.raises(InvalidArgumentError):
        colorize(np.zeros((2, 2, 2)))


def test_render_rejects_radar_with_other_bin_count(tmp_path, tiny_dataset):
    """The range axis must cover exactly the matrix columns."""
    with pytest.raises(InvalidArgumentError):
        render_heatmap(tiny_dataset.matrices[0], tmp_path / "x.svg", radar=RadarConfig())
    assert not (tmp_path / "x.svg").exists()


def test_peak_trace_changes_the_drawing(tmp_path):
    """Identical pixels (both clip to 1) but a different strongest bin give another drawing."""
    left, right = np.ones((6, 8)), np.ones((6, 8))
    left[:, 1] = 2.0
    right[:, 6] = 2.0
    assert np.array_equal(colorize(left), colorize(right))
    a = render_heatmap(left, tmp_path / "a.svg")
    b = render_heatmap(right, tmp_path / "b.svg")
    assert a.read_bytes() != b.read_bytes()
