"""
Tests for dataset generation, stratified splitting and subsampling.
"""
import numpy as np
import pytest

from radarhead.config import DATASET_PRESETS
from radarhead.dataset import (
    Dataset,
    apportion,
    generate_dataset,
    stratified_split,
    stratified_subsample,
)
from radarhead.errors import InvalidArgumentError


def _indexed_dataset(counts):
    """Tiny 1x1 matrices whose single value is the sample index."""
    labels = np.repeat(np.arange(4), counts)
    matrices = np.arange(len(labels), dtype=np.float64).reshape(-1, 1, 1)
    return Dataset(matrices, labels)


def _ids(dataset):
    return set(dataset.matrices[:, 0, 0].astype(int).tolist())


def test_apportion_uses_largest_remainders():
    """Floors first, then the biggest fractional parts get the leftovers."""
    assert apportion(10, [5, 3, 2]) == [5, 3, 2]
    assert apportion(5, [5, 3, 2]) == [3, 1, 1]
    assert apportion(0, [4, 4]) == [0, 0]
    assert sum(apportion(438, DATASET_PRESETS["standard"])) == 438
    with pytest.raises(InvalidArgumentError):
        apportion(11, [5, 5])


def test_split_sizes_for_the_reference_dataset():
    """72/8/20 of 5481 samples: validation and test floored, train takes the rest."""
    dataset = _indexed_dataset(DATASET_PRESETS["standard"])
    assert len(dataset) == 5481
    train, val, test = stratified_split(dataset, seed=0)
    assert (len(train), len(val), len(test)) == (3947, 438, 1096)


def test_split_is_disjoint_and_complete():
    """Every sample lands in exactly one part."""
    dataset = _indexed_dataset((40, 35, 30, 25))
    parts = stratified_split(dataset, (0.6, 0.2, 0.2), seed=3)
    ids = [_ids(p) for p in parts]
    assert not (ids[0] & ids[1] or ids[0] & ids[2] or ids[1] & ids[2])
    assert ids[0] | ids[1] | ids[2] == set(range(len(dataset)))


def test_split_is_stratified():
    """Every class keeps its share in each part, within one sample."""
    counts = (40, 35, 30, 25)
    train, val, test = stratified_split(_indexed_dataset(counts), (0.6, 0.2, 0.2), seed=3)
    for c, n in enumerate(counts):
        assert abs(val.class_counts()[c] - 0.2 * n) <= 1
        assert abs(test.class_counts()[c] - 0.2 * n) <= 1


def test_split_is_seeded():
    """Test split reproducibility."""
    dataset = _indexed_dataset((20, 20, 20, 20))
    a = stratified_split(dataset, seed=5)
    b = stratified_split(dataset, seed=5)
    c = stratified_split(dataset, seed=6)
    assert [_ids(p) for p in a] == [_ids(p) for p in b]
    assert [_ids(p) for p in a] != [_ids(p) for p in c]


def test_split_rejects_bad_fractions():
    """Test fraction validation."""
    with pytest.raises(InvalidArgumentError):
        stratified_split(_indexed_dataset((4, 4, 4, 4)), (0.5, 0.5, 0.5))


def test_subsample_keeps_floor_or_ceil_per_class():
    """round(f * n) samples in total, floor or ceil of f * n_c in each class."""
    counts = DATASET_PRESETS["standard"]
    subset = stratified_subsample(_indexed_dataset(counts), 0.10, seed=1)
    assert len(subset) == 548
    for kept, n in zip(subset.class_counts(), counts):
        assert kept in (int(np.floor(0.1 * n)), int(np.ceil(0.1 * n)))


def test_subsample_draws_from_the_source():
    """Subsamples hold only source samples."""
    dataset = _indexed_dataset((30, 30, 30, 30))
    subset = stratified_subsample(dataset, 0.5, seed=2)
    assert len(subset) == 60
    assert _ids(subset) <= _ids(dataset)
    assert len(_ids(subset)) == 60


def test_full_fraction_keeps_everything():
    """Fraction 1.0 keeps the whole set."""
    dataset = _indexed_dataset((3, 4, 5, 6))
    assert _ids(stratified_subsample(dataset, 1.0)) == _ids(dataset)


def test_subsample_refuses_to_starve_a_class():
    """Fewer than two samples of a class would make pairs impossible."""
    with pytest.raises(InvalidArgumentError):
        stratified_subsample(_indexed_dataset((10, 10, 10, 10)), 0.1)
    with pytest.raises(InvalidArgumentError):
        stratified_subsample(_indexed_dataset((10, 10, 10, 10)), 0.0)


def test_dataset_rejects_inconsistent_labels():
    """Test dataset validation."""
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((3, 2, 2)), np.array([0, 1]))
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((2, 2, 2)), np.array([0, 4]))


def test_empty_subset_is_allowed():
    """An empty subset keeps the matrix shape."""
    empty = _indexed_dataset((2, 2, 2, 2)).subset([])
    assert len(empty) == 0
    assert empty.class_counts() == (0, 0, 0, 0)


def test_generated_dataset_layout(tiny_dataset, tiny_radar):
    """Samples are grouped by class, normalised to [0, 1] and carry provenance."""
    assert tiny_dataset.matrices.shape == (48, 12, 32)
    assert tiny_dataset.class_counts() == (12, 12, 12, 12)
    assert np.all(np.diff(tiny_dataset.labels) >= 0)
    assert tiny_dataset.matrices.min() >= 0.0 and tiny_dataset.matrices.max() <= 1.0
    assert tiny_dataset.provenance["seed"] == 11
    assert tiny_dataset.provenance["radar"]["used_bins"] == tiny_radar.used_bins
    assert tiny_dataset.sample(13).label == 1


def test_generation_is_independent_of_worker_count(tiny_radar):
    """Thread count does not change the generated samples."""
    one = generate_dataset(tiny_radar, (3, 2, 2, 3), seed=5, workers=1)
    four = generate_dataset(tiny_radar, (3, 2, 2, 3), seed=5, workers=4)
    assert np.array_equal(one.matrices, four.matrices)
    assert np.array_equal(one.labels, four.labels)


def test_generation_depends_on_seed(tiny_radar):
    """Different seeds give different samples."""
    a = generate_dataset(tiny_radar, (2, 2, 2, 2), seed=1)
    b = generate_dataset(tiny_radar, (2, 2, 2, 2), seed=2)
    assert not np.array_equal(a.matrices, b.matrices)


def test_generation_rejects_bad_counts(tiny_radar):
    """Test class count validation."""
    with pytest.raises(InvalidArgumentError):
        generate_dataset(tiny_radar, (1, 2, 3))
    with pytest.raises(InvalidArgumentError):
        generate_dataset(tiny_radar, (1, -2, 3, 4))


def test_empty_generation(tiny_radar):
    """Zero counts give an empty dataset."""
    empty = generate_dataset(tiny_radar, (0, 0, 0, 0))
    assert empty.matrices.shape == (0, 12, 32)
