"""
Tests for structured JSON logging and the training metrics collector.
"""
import json

from radarhead.logging_utils import LogContext, setup_logging
from radarhead.metrics import TrainingMetrics


def _lines(capsys):
    return [json.loads(line) for line in capsys.readouterr().out.splitlines() if line]


def test_log_lines_are_json(capsys):
    """Each log line is a JSON object."""
    logger = setup_logging("INFO")
    logger.info("hello")
    (record,) = _lines(capsys)
    assert record["level"] == "INFO"
    assert record["logger"] == "radarhead"
    assert record["message"] == "hello"
    assert record["ts"].endswith("Z")


def test_epoch_records_carry_their_fields(capsys):
    """Epoch records carry rounded loss and accuracy."""
    setup_logging("INFO")
    LogContext().log_epoch("siamese", 3, 0.1234567, None, 0.75)
    (record,) = _lines(capsys)
    assert record["kind"] == "siamese"
    assert record["epoch"] == 3
    assert record["loss"] == 0.123457
    assert record["val_loss"] is None
    assert record["val_accuracy"] == 0.75


def test_failed_commands_log_at_error_level(capsys):
    """Non-zero exits log at ERROR."""
    setup_logging("INFO")
    LogContext().log_command("train", 3, 12.5)
    (record,) = _lines(capsys)
    assert record["level"] == "ERROR"
    assert record["exit_code"] == 3
    assert record["command"] == "train"


def test_training_summary_carries_wall_time(capsys):
    """The end-of-training record holds the best epoch and elapsed time."""
    setup_logging("INFO")
    LogContext().log_training("cnn", 4, 812.5)
    (record,) = _lines(capsys)
    assert record["message"] == "cnn training finished"
    assert (record["epoch"], record["elapsed_ms"]) == (4, 812.5)


def test_level_filters_records(capsys):
    """Records below the logger level are dropped."""
    logger = setup_logging("WARNING")
    LogContext(logger).log_evaluation("cnn", 0.5, 10)
    assert _lines(capsys) == []


def test_metrics_snapshot():
    """Test history snapshot of the metrics collector."""
    metrics = TrainingMetrics("cnn")
    metrics.record_initial(1.2, 0.25)
    metrics.mark_best(0, 0.25)
    metrics.record_batch()
    metrics.record_batch()
    metrics.record_epoch(1, 0.9, 1.0, 0.5)
    metrics.mark_best(1, 0.5)

    history = metrics.as_history()
    assert history.kind == "cnn"
    assert history.initial_val_accuracy == 0.25
    assert history.batches == 2
    assert [e.epoch for e in history.epochs] == [1]
    assert (history.best_epoch, history.best_val_accuracy) == (1, 0.5)
    assert not history.stopped_early
    assert metrics.elapsed_ms() >= 0.0
