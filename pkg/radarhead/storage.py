"""
Storage layer for the binary dataset and checkpoint files and the JSON/CSV
reports. Every write goes to a temporary file that is renamed into place.
"""
import csv
import io
import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np
from pydantic import ValidationError

from radarhead.config import NUM_CLASSES, TrainConfig
from radarhead.dataset import Dataset
from radarhead.errors import InvalidArgumentError, InvalidInputError
from radarhead.models import AblationReport, AblationRow, TrainingHistory
from radarhead.siamese import BackboneSpec, Model, SiameseModel, build_model

PathLike = Union[str, Path]

DATASET_MAGIC = b"RHMDAT01"
CHECKPOINT_MAGIC = b"RHMCKP01"
FORMAT_VERSION = 1

_LENGTH = struct.Struct("<Q")
ABLATION_COLUMNS = ("fraction", "samples", "siamese_acc", "cnn_acc", "seed")


def _canonical_json(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Write ``data`` to a sibling temp file, then rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _split_sections(data: bytes, magic: bytes, what: str) -> tuple[dict[str, Any], memoryview]:
    """Check the magic, then return the JSON header and the bytes after it."""
    prefix = len(magic) + _LENGTH.size
    if len(data) < prefix or data[: len(magic)] != magic:
        raise InvalidInputError(f"not a {what} file (bad magic)")
    (header_len,) = _LENGTH.unpack_from(data, len(magic))
    if header_len > len(data) - prefix:
        raise InvalidInputError(f"{what} header length {header_len} exceeds the file size")
    try:
        header = json.loads(data[prefix : prefix + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"{what} header is not valid JSON: {e}") from e
    if not isinstance(header, dict):
        raise InvalidInputError(f"{what} header must be a JSON object")
    if header.get("format_version") != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported {what} format version {header.get('format_version')!r}")
    return header, memoryview(data)[prefix + header_len :]


# ============================================================================
# Dataset files
# ============================================================================


def encode_dataset(dataset: Dataset) -> bytes:
    """
    Magic, u64 header length, JSON header, one u8 label per sample, then the
    matrices as little-endian float32 in sample/frame/bin order.
    """
    n_frames, n_bins = dataset.matrix_shape
    header = {
        "format_version": FORMAT_VERSION,
        "sample_count": len(dataset),
        "n_frames": n_frames,
        "n_bins": n_bins,
        "class_count": NUM_CLASSES,
        "class_counts": list(dataset.class_counts()),
        "provenance": dataset.provenance,
    }
    header_bytes = _canonical_json(header)
    return b"".join([
        DATASET_MAGIC,
        _LENGTH.pack(len(header_bytes)),
        header_bytes,
        dataset.labels.astype(np.uint8).tobytes(),
        np.ascontiguousarray(dataset.matrices, dtype="<f4").tobytes(),
    ])


def decode_dataset(data: bytes) -> Dataset:
    header, body = _split_sections(data, DATASET_MAGIC, "dataset")
    try:
        n = int(header["sample_count"])
        n_frames = int(header["n_frames"])
        n_bins = int(header["n_bins"])
        class_counts = [int(c) for c in header["class_counts"]]
        class_count = int(header["class_count"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"dataset header is missing or has a malformed field: {e}") from e

    if class_count != NUM_CLASSES or len(class_counts) != NUM_CLASSES:
        raise InvalidInputError(f"dataset declares {class_count} classes, expected {NUM_CLASSES}")
    if min(n, n_frames, n_bins) < 0:
        raise InvalidInputError("dataset dimensions must be non-negative")

    payload_values = n * n_frames * n_bins
    expected = n + 4 * payload_values
    if len(body) != expected:
        raise InvalidInputError(f"dataset body has {len(body)} bytes, expected {expected}")

    labels = np.frombuffer(body[:n], dtype=np.uint8).astype(np.int64)
    if labels.size and labels.max() >= NUM_CLASSES:
        raise InvalidInputError("dataset contains a label outside 0..3")
    if list(np.bincount(labels, minlength=NUM_CLASSES)) != class_counts:
        raise InvalidInputError("dataset class counts disagree with its labels")

    matrices = np.frombuffer(body[n:], dtype="<f4").astype(np.float64).reshape(n, n_frames, n_bins)
    if not np.all(np.isfinite(matrices)):
        raise InvalidInputError("dataset contains non-finite values")

    return Dataset(matrices, labels, dict(header.get("provenance") or {}))


def write_dataset(path: PathLike, dataset: Dataset) -> Path:
    return atomic_write_bytes(path, encode_dataset(dataset))


def read_dataset(path: PathLike) -> Dataset:
    return decode_dataset(Path(path).read_bytes())


# ============================================================================
# Checkpoints
# ============================================================================


@dataclass
class Checkpoint:
    """A trained model with the configuration and history that produced it."""

    model: Model
    train_config: TrainConfig
    history: TrainingHistory
    split: dict[str, Any] = field(default_factory=dict)


def _manifest(checkpoint: Checkpoint) -> dict[str, Any]:
    model = checkpoint.model
    params = model.parameters()
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "backbone": model.spec.to_dict(),
        "distance": model.distance if isinstance(model, SiameseModel) else None,
        "parameters": [{"name": name, "shape": list(p.shape)} for name, p in params.items()],
        "param_count": model.param_count(),
        "buffers": {name: b.tolist() for name, b in model.buffers().items()},
        "train": checkpoint.train_config.model_dump(),
        "seeds": {"init": model.seed, "train": checkpoint.train_config.seed},
        "history": checkpoint.history.model_dump(),
        "split": checkpoint.split,
    }


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    """
    Magic, u64 manifest length, JSON manifest, then every parameter as
    little-endian float64 in manifest order. Batch-norm running statistics
    live in the manifest.
    """
    manifest = _canonical_json(_manifest(checkpoint))
    payload = b"".join(
        np.ascontiguousarray(p, dtype="<f8").tobytes() for p in checkpoint.model.parameters().values()
    )
    return b"".join([CHECKPOINT_MAGIC, _LENGTH.pack(len(manifest)), manifest, payload])


def decode_checkpoint(data: bytes) -> Checkpoint:
    manifest, body = _split_sections(data, CHECKPOINT_MAGIC, "checkpoint")
    try:
        spec = BackboneSpec.from_dict(manifest["backbone"])
        model = build_model(
            manifest["kind"],
            spec,
            distance=manifest["distance"] or "abs_diff",
            seed=int(manifest["seeds"]["init"]),
        )
        train_config = TrainConfig.model_validate(manifest["train"])
        history = TrainingHistory.model_validate(manifest["history"])
        declared = [(entry["name"], tuple(entry["shape"])) for entry in manifest["parameters"]]
        buffers = manifest["buffers"]
        param_count = int(manifest["param_count"])
    except (KeyError, TypeError, ValueError, InvalidArgumentError, ValidationError) as e:
        raise InvalidInputError(f"checkpoint manifest is invalid: {e}") from e

    params = model.parameters()
    if declared != [(name, p.shape) for name, p in params.items()]:
        raise InvalidInputError("checkpoint parameters do not match its declared architecture")
    if param_count != model.param_count() or len(body) != 8 * param_count:
        raise InvalidInputError(
            f"checkpoint payload holds {len(body) // 8} values, architecture needs {model.param_count()}"
        )

    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    state: dict[str, np.ndarray] = {}
    offset = 0
    for name, p in params.items():
        state[name] = values[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    try:
        state.update({name: np.asarray(v, dtype=np.float64) for name, v in buffers.items()})
        model.load_state_dict(state)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"checkpoint state is invalid: {e}") from e

    return Checkpoint(model, train_config, history, dict(manifest.get("split") or {}))


def write_checkpoint(path: PathLike, checkpoint: Checkpoint) -> Path:
    return atomic_write_bytes(path, encode_checkpoint(checkpoint))


def read_checkpoint(path: PathLike) -> Checkpoint:
    return decode_checkpoint(Path(path).read_bytes())


# ============================================================================
# Reports
# ============================================================================


def write_json_report(path: PathLike, payload: dict[str, Any]) -> Path:
    """Sorted-key, indented JSON so identical runs give identical bytes."""
    return atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def encode_ablation_csv(report: AblationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ABLATION_COLUMNS)
    for row in report.rows:
        writer.writerow([
            f"{row.fraction:.6g}",
            row.samples,
            f"{row.siamese_acc:.6g}",
            f"{row.cnn_acc:.6g}",
            row.seed,
        ])
    return buf.getvalue()


def decode_ablation_csv(text: str) -> AblationReport:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != ABLATION_COLUMNS:
        raise InvalidInputError(f"ablation CSV columns must be {','.join(ABLATION_COLUMNS)}")
    try:
        rows = [AblationRow.model_validate(record) for record in reader]
    except ValidationError as e:
        raise InvalidInputError(f"ablation CSV row is invalid: {e}") from e
    return AblationReport(rows=rows)


def write_ablation_csv(path: PathLike, report: AblationReport) -> Path:
    return atomic_write_text(path, encode_ablation_csv(report))


def read_ablation_csv(path: PathLike) -> AblationReport:
    return decode_ablation_csv(Path(path).read_text(encoding="utf-8"))
