"""
Configuration management for the radarhead toolkit.
Loads environment variables with defaults, and the JSON experiment document
whose defaults echo the radar parameter table and the reference training setup.
"""
import json
import os
from pathlib import Path
from typing import Annotated, Literal, Optional

from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from radarhead.errors import InvalidInputError

# Propagation speed used by every range/beat conversion.
SPEED_OF_LIGHT = 3e8

# Maximum detectable range of the sensor.
MAX_RANGE_M = 2.0

CLASS_NAMES = ("front", "nod", "shake", "lowered")
NUM_CLASSES = len(CLASS_NAMES)

DATASET_PRESETS: dict[str, tuple[int, ...]] = {
    "standard": (1395, 1346, 1378, 1362),
    "extended": (4195, 4146, 4178, 4162),
}


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


class Config:
    """Process configuration from environment variables."""

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Experiment document used when --config is not given
    DEFAULT_CONFIG_PATH: Optional[str] = os.getenv("RADARHEAD_CONFIG")

    # Threads used for sample generation
    WORKERS: int = _env_int("RADARHEAD_WORKERS", 1)

    APP_NAME: str = "radarhead"
    APP_VERSION: str = "1.0.0"

    @classmethod
    def validate(cls) -> tuple[bool, Optional[str]]:
        """
        Validate process configuration.
        Returns: (is_valid, error_message)
        """
        if cls.LOG_LEVEL not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            return False, f"LOG_LEVEL {cls.LOG_LEVEL!r} is not a logging level"

        if cls.WORKERS < 1:
            return False, "RADARHEAD_WORKERS must be at least 1"

        if cls.DEFAULT_CONFIG_PATH and not Path(cls.DEFAULT_CONFIG_PATH).is_file():
            return False, f"RADARHEAD_CONFIG {cls.DEFAULT_CONFIG_PATH} does not exist"

        return True, None


config = Config()


def _check_interval(value: tuple[float, float]) -> tuple[float, float]:
    low, high = value
    if low > high:
        raise ValueError(f"interval lower bound {low} exceeds upper bound {high}")
    return value


Interval = Annotated[tuple[float, float], AfterValidator(_check_interval)]


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class RadarConfig(_Section):
    """FMCW sensor parameters: one chirp per frame, N_f frames per sample."""

    carrier_freq_hz: float = Field(61e9, gt=0)
    bandwidth_hz: float = Field(6e9, gt=0)
    chirp_duration_s: float = Field(128e-6, gt=0)
    sample_rate_hz: float = Field(2e6, gt=0)
    samples_per_chirp: int = Field(256, gt=1)
    frame_interval_s: float = Field(50e-3, gt=0)
    frames_per_sample: int = Field(30, ge=2)
    used_bins: int = Field(40, ge=1)

    @model_validator(mode="after")
    def check_sampling(self) -> "RadarConfig":
        expected = round(self.chirp_duration_s * self.sample_rate_hz)
        if self.samples_per_chirp != expected:
            raise ValueError(
                f"samples_per_chirp must equal round(chirp_duration_s * sample_rate_hz) = {expected}"
            )
        if self.used_bins > self.samples_per_chirp // 2:
            raise ValueError("used_bins cannot exceed half the samples per chirp")
        return self

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def range_resolution_m(self) -> float:
        """c / (2 B)."""
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def bin_spacing_m(self) -> float:
        """Distance between adjacent range bins: c T / (2 B) * (f_s / N_s)."""
        return self.range_resolution_m * (
            self.chirp_duration_s * self.sample_rate_hz / self.samples_per_chirp
        )

    @property
    def crop_range_m(self) -> float:
        return self.used_bins * self.bin_spacing_m

    @property
    def observation_time_s(self) -> float:
        return self.frames_per_sample * self.frame_interval_s

    @property
    def matrix_shape(self) -> tuple[int, int]:
        return self.frames_per_sample, self.used_bins


class MotionParams(_Section):
    """Ranges the per-sample head-motion parameters are drawn from."""

    base_range_m: float = Field(0.40, ge=0.2, le=1.0)
    jitter_std_m: float = Field(0.005, ge=0)
    nod_amplitude_m: Interval = (0.03, 0.07)
    nod_freq_hz: Interval = (0.5, 1.5)
    nod_phase_rad: Interval = (0.0, 0.0)
    shake_depth: float = Field(0.5, ge=0, lt=1)
    shake_freq_hz: Interval = (0.5, 1.5)
    shake_wobble_std_m: float = Field(0.01, ge=0)
    lower_offset_m: Interval = (0.10, 0.20)
    target_amplitude: float = Field(1.0, gt=0)


class SceneParams(_Section):
    motion: MotionParams = MotionParams()
    clutter_ranges_m: tuple[float, ...] = (0.25, 0.70, 0.95)
    clutter_amplitude: Interval = (0.3, 0.8)
    noise_std: float = Field(0.02, ge=0)

    @field_validator("clutter_ranges_m")
    @classmethod
    def check_clutter_ranges(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        for r in value:
            if not 0.0 <= r <= MAX_RANGE_M:
                raise ValueError(f"clutter range {r} outside [0, {MAX_RANGE_M}] m")
        return value


class DspParams(_Section):
    normalization: Literal["linear", "log"] = "linear"


class DatasetParams(_Section):
    preset: Literal["standard", "extended"] = "standard"
    class_counts: Optional[tuple[int, ...]] = None
    split: tuple[float, float, float] = (0.72, 0.08, 0.20)

    @field_validator("class_counts")
    @classmethod
    def check_counts(cls, value: Optional[tuple[int, ...]]) -> Optional[tuple[int, ...]]:
        if value is not None:
            if len(value) != NUM_CLASSES:
                raise ValueError(f"class_counts needs {NUM_CLASSES} entries")
            if any(c < 0 for c in value):
                raise ValueError("class_counts must be non-negative")
        return value

    @field_validator("split")
    @classmethod
    def check_split(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(f < 0 for f in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ValueError("split fractions must be non-negative and sum to 1")
        return value

    @property
    def counts(self) -> tuple[int, ...]:
        return self.class_counts if self.class_counts is not None else DATASET_PRESETS[self.preset]


class ModelParams(_Section):
    distance: Literal["abs_diff", "l2_norm"] = "abs_diff"
    bn_position: Literal["after_relu", "before_relu"] = "after_relu"
    channel_scale: float = Field(1.0, gt=0, le=1.0)
    dense_units: tuple[int, int] = (64, 32)
    dropout_rate: float = Field(0.5, ge=0, lt=1)


class TrainConfig(_Section):
    batch_size: int = Field(64, ge=2)
    # zero is accepted so a run can be replayed with frozen weights
    learning_rate: float = Field(0.006, ge=0)
    epochs: int = Field(50, ge=0)
    pairs_per_epoch: Optional[int] = Field(None, ge=2)
    patience: int = Field(10, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)


class EvalParams(_Section):
    episodes: int = Field(20, ge=1)


class AblationParams(_Section):
    fractions: tuple[float, ...] = (0.10, 0.20, 0.30, 0.50)
    repeats: int = Field(1, ge=1)

    @field_validator("fractions")
    @classmethod
    def check_fractions(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("at least one fraction is required")
        for f in value:
            if not 0.0 < f <= 1.0:
                raise ValueError(f"fraction {f} outside (0, 1]")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("fractions must be strictly increasing")
        return value


class ExperimentConfig(_Section):
    """The JSON experiment document; an empty object selects every default."""

    radar: RadarConfig = RadarConfig()
    scene: SceneParams = SceneParams()
    dsp: DspParams = DspParams()
    dataset: DatasetParams = DatasetParams()
    model: ModelParams = ModelParams()
    train: TrainConfig = TrainConfig()
    evaluation: EvalParams = EvalParams()
    ablation: AblationParams = AblationParams()


def load_experiment_config(path: Optional[str] = None) -> ExperimentConfig:
    """
    Load the experiment document from ``path`` (or RADARHEAD_CONFIG).
    Missing files raise OSError; malformed documents raise InvalidInputError.
    """
    path = path or Config.DEFAULT_CONFIG_PATH
    if path is None:
        return ExperimentConfig()

    text = Path(path).read_text(encoding="utf-8")
    try:
        return ExperimentConfig.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"config {path} is not valid JSON: {e}") from e
    except ValidationError as e:
        raise InvalidInputError(f"config {path} is invalid: {e}") from e
