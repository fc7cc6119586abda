"""
Domain value types: scene description, spectrum matrices, pair batches,
support sets and the report records written by the CLI.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from radarhead.config import MAX_RANGE_M, NUM_CLASSES
from radarhead.errors import InvalidArgumentError

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# One sampled chirp: a real vector of N_s samples.
FrameSignal = FloatArray


def round_metric(value: float) -> float:
    """Six significant digits, the fixed precision of report metrics."""
    return float(f"{value:.6g}")


class Reflector(BaseModel):
    """A point scatterer seen by the radar for one frame."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    range_m: float = Field(..., ge=0.0, le=MAX_RANGE_M, allow_inf_nan=False)
    amplitude: float = Field(..., gt=0.0, allow_inf_nan=False)
    phase_rad: float = Field(0.0, allow_inf_nan=False)


@dataclass(frozen=True)
class MotionProfile:
    """Per-frame range and amplitude of the head target."""

    class_label: int
    ranges_m: FloatArray
    amplitudes: FloatArray

    def __post_init__(self) -> None:
        if self.class_label not in range(NUM_CLASSES):
            raise InvalidArgumentError(f"unknown class label {self.class_label}")
        if self.ranges_m.shape != self.amplitudes.shape or self.ranges_m.ndim != 1:
            raise InvalidArgumentError("range and amplitude sequences must be equal-length vectors")

    def __len__(self) -> int:
        return int(self.ranges_m.shape[0])


@dataclass(frozen=True)
class SceneSpec:
    """Everything needed to synthesise one labelled sample."""

    motion: MotionProfile
    clutter: tuple[Reflector, ...] = ()
    noise_std: float = 0.0
    seed: int = 0
    target_phase_rad: float = 0.0
    include_target: bool = True

    def __post_init__(self) -> None:
        if not np.isfinite(self.noise_std) or self.noise_std < 0:
            raise InvalidArgumentError(f"noise_std must be >= 0, got {self.noise_std}")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SpectrumMatrix:
    """N_f x N_s' normalised range-spectrum image of one sample."""

    data: FloatArray
    label: int
    norm_min: Optional[float] = None
    norm_max: Optional[float] = None

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise InvalidArgumentError(f"spectrum matrix must be 2-D, got shape {self.data.shape}")
        if self.label not in range(NUM_CLASSES):
            raise InvalidArgumentError(f"unknown class label {self.label}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class PairBatch:
    """Index pairs into a dataset with same-class targets (b = 1 iff labels match)."""

    left: IntArray
    right: IntArray
    targets: FloatArray

    def __len__(self) -> int:
        return int(self.left.shape[0])


@dataclass(frozen=True)
class SupportSet:
    """One exemplar matrix per class, row v holding class v."""

    matrices: FloatArray
    labels: tuple[int, ...] = field(default_factory=lambda: tuple(range(NUM_CLASSES)))

    def __post_init__(self) -> None:
        if self.matrices.ndim != 3 or self.matrices.shape[0] != NUM_CLASSES:
            raise InvalidArgumentError(
                f"support set needs {NUM_CLASSES} matrices, got shape {self.matrices.shape}"
            )
        if tuple(self.labels) != tuple(range(NUM_CLASSES)):
            raise InvalidArgumentError("support labels must be distinct and cover every class")

    @classmethod
    def from_matrices(cls, matrices: list[SpectrumMatrix]) -> "SupportSet":
        by_label = {m.label: m for m in matrices}
        if len(matrices) != NUM_CLASSES or sorted(by_label) != list(range(NUM_CLASSES)):
            raise InvalidArgumentError("support set needs exactly one matrix per class")
        return cls(np.stack([by_label[v].data for v in range(NUM_CLASSES)]))


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_loss: Optional[float] = None
    val_accuracy: Optional[float] = None


class TrainingHistory(BaseModel):
    """Loss/accuracy trajectory of one training run."""

    kind: str
    initial_val_loss: Optional[float] = None
    initial_val_accuracy: Optional[float] = None
    epochs: list[EpochRecord] = []
    best_epoch: int = 0
    best_val_accuracy: Optional[float] = None
    stopped_early: bool = False
    batches: int = 0


class ClassificationReport(BaseModel):
    """Accuracy and confusion matrix (rows true, columns predicted)."""

    accuracy: float
    confusion_matrix: list[list[int]]
    per_class_accuracy: list[Optional[float]]
    query_count: int


class EvalReport(ClassificationReport):
    """One-shot protocol result accumulated over support-set episodes."""

    episode_count: int
    episode_accuracy_mean: float
    episode_accuracy_std: float
    seed: int


class AblationRow(BaseModel):
    fraction: float
    samples: int
    siamese_acc: float
    cnn_acc: float
    seed: int


class AblationReport(BaseModel):
    rows: list[AblationRow]
