"""
Training metrics collection for the radarhead toolkit.
"""
import time
from threading import Lock
from typing import Optional

from radarhead.models import EpochRecord, TrainingHistory


class TrainingMetrics:
    """Thread-safe collector of per-epoch training statistics."""

    def __init__(self, kind: str):
        self._lock = Lock()
        self.kind = kind
        self.initial_val_loss: Optional[float] = None
        self.initial_val_accuracy: Optional[float] = None
        self.epochs: list[EpochRecord] = []
        self.batches = 0
        self.best_epoch = 0
        self.best_val_accuracy: Optional[float] = None
        self.stopped_early = False
        self._started = time.perf_counter()

    def record_initial(self, val_loss: Optional[float], val_accuracy: Optional[float]) -> None:
        """Record validation metrics of the untrained model."""
        with self._lock:
            self.initial_val_loss = val_loss
            self.initial_val_accuracy = val_accuracy

    def record_batch(self) -> None:
        with self._lock:
            self.batches += 1

    def record_epoch(
        self,
        epoch: int,
        train_loss: float,
        val_loss: Optional[float],
        val_accuracy: Optional[float],
    ) -> None:
        """Record one finished epoch."""
        with self._lock:
            self.epochs.append(
                EpochRecord(
                    epoch=epoch,
                    train_loss=train_loss,
                    val_loss=val_loss,
                    val_accuracy=val_accuracy,
                )
            )

    def mark_best(self, epoch: int, val_accuracy: Optional[float]) -> None:
        with self._lock:
            self.best_epoch = epoch
            self.best_val_accuracy = val_accuracy

    def mark_stopped_early(self) -> None:
        with self._lock:
            self.stopped_early = True

    def elapsed_ms(self) -> float:
        return round((time.perf_counter() - self._started) * 1000, 2)

    def as_history(self) -> TrainingHistory:
        """Snapshot the collected values (wall time excluded, so histories are reproducible)."""
        with self._lock:
            return TrainingHistory(
                kind=self.kind,
                initial_val_loss=self.initial_val_loss,
                initial_val_accuracy=self.initial_val_accuracy,
                epochs=list(self.epochs),
                best_epoch=self.best_epoch,
                best_val_accuracy=self.best_val_accuracy,
                stopped_early=self.stopped_early,
                batches=self.batches,
            )
