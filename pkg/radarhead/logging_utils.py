"""
Structured JSON logging utilities for the radarhead toolkit.
"""
import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Optional

from radarhead.config import config

LOGGER_NAME = "radarhead"

# Extra record attributes copied into the JSON line when present.
_EXTRA_FIELDS = (
    "command",
    "kind",
    "epoch",
    "loss",
    "val_loss",
    "val_accuracy",
    "accuracy",
    "fraction",
    "samples",
    "seed",
    "elapsed_ms",
    "exit_code",
)


class JSONFormatter(logging.Formatter):
    """Custom formatter that outputs JSON per line."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_data = {
            "ts": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        for key in _EXTRA_FIELDS:
            if hasattr(record, key):
                log_data[key] = getattr(record, key)

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data)


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """Set up structured JSON logging."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level or config.LOG_LEVEL)

    # Remove existing handlers
    logger.handlers = []

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(JSONFormatter())
    logger.addHandler(handler)
    logger.propagate = False

    return logger


def get_logger() -> logging.Logger:
    """Get the configured logger."""
    return logging.getLogger(LOGGER_NAME)


class LogContext:
    """Helper to add structured context to logs."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or get_logger()

    def _emit(self, level: int, msg: str, **fields: Any) -> None:
        self.logger.log(level, msg, extra=fields)

    def log_command(self, command: str, exit_code: int, elapsed_ms: float, **kwargs: Any) -> None:
        """Log the completion of a CLI command."""
        level = logging.INFO if exit_code == 0 else logging.ERROR
        self._emit(
            level,
            f"{command} exited {exit_code}",
            command=command,
            exit_code=exit_code,
            elapsed_ms=elapsed_ms,
            **kwargs,
        )

    def log_epoch(
        self,
        kind: str,
        epoch: int,
        loss: float,
        val_loss: Optional[float],
        val_accuracy: Optional[float],
    ) -> None:
        """Log one finished training epoch."""
        self._emit(
            logging.INFO,
            f"{kind} epoch {epoch}",
            kind=kind,
            epoch=epoch,
            loss=round(loss, 6),
            val_loss=None if val_loss is None else round(val_loss, 6),
            val_accuracy=None if val_accuracy is None else round(val_accuracy, 6),
        )

    def log_evaluation(self, kind: str, accuracy: float, samples: int, **kwargs: Any) -> None:
        """Log an evaluation result."""
        self._emit(
            logging.INFO,
            f"{kind} evaluation",
            kind=kind,
            accuracy=round(accuracy, 6),
            samples=samples,
            **kwargs,
        )

    def log_training(self, kind: str, best_epoch: int, elapsed_ms: float) -> None:
        """Log the end of a training run."""
        self._emit(
            logging.INFO,
            f"{kind} training finished",
            kind=kind,
            epoch=best_epoch,
            elapsed_ms=elapsed_ms,
        )
