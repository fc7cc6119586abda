"""
Tests for environment and experiment configuration.
"""
import json

import pytest

from radarhead.config import (
    DATASET_PRESETS,
    AblationParams,
    Config,
    DatasetParams,
    ExperimentConfig,
    RadarConfig,
    TrainConfig,
    load_experiment_config,
)
from radarhead.errors import InvalidInputError


def test_default_radar_parameters():
    """61 GHz carrier, 6 GHz sweep, 128 us chirp, 2 MHz sampling, 256 samples."""
    radar = RadarConfig()
    assert radar.samples_per_chirp == 256
    assert radar.range_resolution_m == pytest.approx(0.025)
    assert radar.bin_spacing_m == pytest.approx(0.025)
    assert radar.crop_range_m == pytest.approx(1.0)
    assert radar.observation_time_s == pytest.approx(1.5)
    assert radar.matrix_shape == (30, 40)


def test_radar_rejects_inconsistent_sampling():
    """Test sample count and bin range validation."""
    with pytest.raises(ValueError):
        RadarConfig(samples_per_chirp=128)
    with pytest.raises(ValueError):
        RadarConfig(used_bins=129)


def test_training_defaults():
    """Default batch size, learning rate and epoch count."""
    cfg = TrainConfig()
    assert (cfg.batch_size, cfg.learning_rate, cfg.epochs) == (64, 0.006, 50)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=1)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-0.1)


def test_dataset_presets():
    """Test dataset presets and explicit counts."""
    assert sum(DATASET_PRESETS["standard"]) == 5481
    assert DatasetParams().counts == DATASET_PRESETS["standard"]
    assert DatasetParams(class_counts=(1, 2, 3, 4)).counts == (1, 2, 3, 4)
    with pytest.raises(ValueError):
        DatasetParams(split=(0.5, 0.5, 0.5))


def test_ablation_fractions_must_increase():
    """Test ablation fraction ordering."""
    assert AblationParams().fractions == (0.10, 0.20, 0.30, 0.50)
    with pytest.raises(ValueError):
        AblationParams(fractions=(0.5, 0.2))


def test_empty_document_selects_defaults(tmp_path):
    """An empty document is the default experiment."""
    path = tmp_path / "exp.json"
    path.write_text("{}")
    assert load_experiment_config(str(path)) == ExperimentConfig()


def test_partial_document_overrides_sections(tmp_path):
    """Test partial overrides keep the other defaults."""
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"radar": {"frames_per_sample": 12}, "train": {"epochs": 3}}))
    cfg = load_experiment_config(str(path))
    assert cfg.radar.frames_per_sample == 12
    assert cfg.radar.used_bins == 40
    assert cfg.train.epochs == 3


def test_malformed_documents_are_invalid_input(tmp_path):
    """Bad JSON and unknown keys raise InvalidInputError."""
    path = tmp_path / "exp.json"
    path.write_text("{not json")
    with pytest.raises(InvalidInputError):
        load_experiment_config(str(path))
    path.write_text(json.dumps({"radar": {"colour": "blue"}}))
    with pytest.raises(InvalidInputError):
        load_experiment_config(str(path))


def test_missing_document_is_an_os_error(tmp_path):
    """Test missing config file."""
    with pytest.raises(OSError):
        load_experiment_config(str(tmp_path / "absent.json"))


def test_environment_validation(monkeypatch):
    """validate() reports the first bad setting."""
    monkeypatch.setattr(Config, "LOG_LEVEL", "INFO")
    monkeypatch.setattr(Config, "WORKERS", 1)
    monkeypatch.setattr(Config, "DEFAULT_CONFIG_PATH", None)
    assert Config.validate() == (True, None)
    monkeypatch.setattr(Config, "LOG_LEVEL", "LOUD")
    valid, error = Config.validate()
    assert not valid and "LOG_LEVEL" in error


def test_worker_count_must_be_positive(monkeypatch):
    """Test worker count validation."""
    monkeypatch.setattr(Config, "LOG_LEVEL", "INFO")
    monkeypatch.setattr(Config, "WORKERS", 0)
    valid, error = Config.validate()
    assert not valid and "RADARHEAD_WORKERS" in error
