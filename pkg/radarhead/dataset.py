"""
Labelled spectrum-matrix collections: synthetic generation, stratified
train/validation/test splits and stratified subsampling.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import numpy.typing as npt

from radarhead.config import NUM_CLASSES, RadarConfig, SceneParams, config
from radarhead.dsp import Normalization, build_matrix
from radarhead.errors import InvalidArgumentError
from radarhead.models import FloatArray, IntArray, SpectrumMatrix
from radarhead.radar_sim import make_scene, simulate_sample

# Slack absorbing float error in fraction * count before flooring.
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class Dataset:
    """``matrices`` is (n, N_f, N_s'); ``labels`` holds the class of each row."""

    matrices: FloatArray
    labels: IntArray
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.matrices.ndim != 3:
            raise InvalidArgumentError(f"dataset matrices must be 3-D, got shape {self.matrices.shape}")
        if self.labels.shape != (self.matrices.shape[0],):
            raise InvalidArgumentError("one label per matrix is required")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= NUM_CLASSES):
            raise InvalidArgumentError("labels must lie in 0..3")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def matrix_shape(self) -> tuple[int, int]:
        return self.matrices.shape[1], self.matrices.shape[2]

    def class_counts(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.labels, minlength=NUM_CLASSES))

    def indices_by_class(self) -> list[IntArray]:
        return [np.flatnonzero(self.labels == c) for c in range(NUM_CLASSES)]

    def subset(self, indices: npt.ArrayLike) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.matrices[idx], self.labels[idx], dict(self.provenance))

    def sample(self, index: int) -> SpectrumMatrix:
        if not 0 <= index < len(self):
            raise InvalidArgumentError(f"sample index {index} outside [0, {len(self)})")
        return SpectrumMatrix(data=self.matrices[index], label=int(self.labels[index]))


def apportion(total: int, sizes: Sequence[int]) -> list[int]:
    """
    Split ``total`` across groups in proportion to ``sizes``: floors first,
    then one extra each to the largest remainders (ties to the lower index).
    """
    n = sum(sizes)
    if not 0 <= total <= n:
        raise InvalidArgumentError(f"cannot apportion {total} over {n} items")
    if n == 0:
        return [0] * len(sizes)

    shares = [total * s // n for s in sizes]
    remainders = [total * s % n for s in sizes]
    left = total - sum(shares)
    order = sorted(range(len(sizes)), key=lambda i: (-remainders[i], i))
    for i in order[:left]:
        shares[i] += 1
    return shares


def _floor_count(fraction: float, n: int) -> int:
    return math.floor(fraction * n + _FLOOR_EPS)


def stratified_split(
    dataset: Dataset,
    fractions: tuple[float, float, float] = (0.72, 0.08, 0.20),
    seed: int = 0,
) -> tuple[Dataset, Dataset, Dataset]:
    """
    Train/validation/test split. Validation and test totals are floored and
    the remainder goes to train; each total is apportioned across classes.
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidArgumentError("split fractions must be three non-negative values summing to 1")

    counts = dataset.class_counts()
    n = len(dataset)
    val_counts = apportion(_floor_count(fractions[1], n), counts)
    test_counts = apportion(_floor_count(fractions[2], n), counts)

    rng = np.random.default_rng(seed)
    train_idx, val_idx, test_idx = [], [], []
    for c, members in enumerate(dataset.indices_by_class()):
        shuffled = rng.permutation(members)
        n_val = val_counts[c]
        n_test = min(test_counts[c], len(shuffled) - n_val)
        val_idx.append(shuffled[:n_val])
        test_idx.append(shuffled[n_val : n_val + n_test])
        train_idx.append(shuffled[n_val + n_test :])

    return tuple(dataset.subset(np.sort(np.concatenate(part))) for part in (train_idx, val_idx, test_idx))  # type: ignore[return-value]


def stratified_subsample(dataset: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """
    Keep round(fraction * n) samples with floor or ceil of fraction * n_c per
    class; every present class keeps at least two so pairs can still be drawn.
    """
    if not 0.0 < fraction <= 1.0:
        raise InvalidArgumentError(f"fraction {fraction} outside (0, 1]")

    counts = dataset.class_counts()
    exact = [fraction * c for c in counts]
    keep = [_floor_count(fraction, c) for c in counts]
    extra = math.floor(fraction * len(dataset) + 0.5) - sum(keep)
    order = sorted(range(NUM_CLASSES), key=lambda i: (-(exact[i] - keep[i]), i))
    for i in order[: max(extra, 0)]:
        if exact[i] > keep[i]:
            keep[i] += 1

    for c, k in enumerate(keep):
        if counts[c] and k < 2:
            raise InvalidArgumentError(
                f"fraction {fraction} leaves {k} sample(s) of class {c}; at least 2 are needed"
            )

    rng = np.random.default_rng(seed)
    chosen = [
        rng.choice(members, size=k, replace=False)
        for members, k in zip(dataset.indices_by_class(), keep)
    ]
    return dataset.subset(np.sort(np.concatenate(chosen)))


def generate_dataset(
    radar: RadarConfig,
    counts: Sequence[int],
    params: Optional[SceneParams] = None,
    normalization: Normalization = "linear",
    seed: int = 0,
    workers: Optional[int] = None,
) -> Dataset:
    """
    Simulate ``counts[c]`` samples of every class and run them through the
    range pipeline. Each sample draws from its own child seed, so the result
    does not depend on the worker count.
    """
    if len(counts) != NUM_CLASSES or any(c < 0 for c in counts):
        raise InvalidArgumentError(f"counts must be {NUM_CLASSES} non-negative integers")
    params = params or SceneParams()
    workers = workers or config.WORKERS

    labels = np.repeat(np.arange(NUM_CLASSES, dtype=np.int64), counts)
    children = np.random.SeedSequence(seed).spawn(len(labels))

    def one(i: int) -> FloatArray:
        label = int(labels[i])
        scene = make_scene(radar, label, params, children[i])
        frames = simulate_sample(radar, scene)
        return build_matrix(frames, radar, label, normalization).data

    if len(labels) == 0:
        matrices = np.zeros((0, *radar.matrix_shape), dtype=np.float64)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            matrices = np.stack(list(pool.map(one, range(len(labels)))))

    provenance = {
        "seed": int(seed),
        "normalization": normalization,
        "radar": radar.model_dump(),
    }
    return Dataset(matrices, labels, provenance)
