"""
Siamese one-shot model and softmax CNN baseline built on the shared
convolutional backbone, with pair sampling and the training loops.
"""
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Union

import numpy as np
import numpy.typing as npt

from radarhead.config import NUM_CLASSES, ModelParams, TrainConfig
from radarhead.dataset import Dataset
from radarhead.errors import InvalidArgumentError, TrainingError
from radarhead.logging_utils import LogContext
from radarhead.metrics import TrainingMetrics
from radarhead.models import FloatArray, IntArray, PairBatch, SpectrumMatrix, TrainingHistory
from radarhead.tensor_nn import (
    AdamState,
    LayerSpec,
    Network,
    Tensor,
    adam_step,
    bce_loss,
    layer_output_shape,
    layer_param_shapes,
    sigmoid,
    softmax,
    softmax_cross_entropy,
)

Distance = Literal["abs_diff", "l2_norm"]
ModelKind = Literal["siamese", "cnn"]

# Published totals the derived counts are reported against.
REFERENCE_SIAMESE_PARAMS = 2_598_161
REFERENCE_CNN_PARAMS = 2_598_612

# Conv rows of the backbone: (kernel, stride, filters).
_CONV_ROWS = ((2, 1, 16), (5, 2, 32), (5, 1, 64), (3, 1, 128))

# Samples per forward pass when embedding whole datasets.
EMBED_CHUNK = 64

_SEED_BOUND = 2**63


@dataclass(frozen=True)
class BackboneSpec:
    """Ordered layer list of the embedding network and the tensor it expects."""

    layers: tuple[LayerSpec, ...]
    input_shape: tuple[int, int, int] = (40, 30, 1)

    @classmethod
    def standard(
        cls,
        input_shape: tuple[int, int, int] = (40, 30, 1),
        channel_scale: float = 1.0,
        dense_units: tuple[int, int] = (64, 32),
        dropout_rate: float = 0.5,
        bn_position: Literal["after_relu", "before_relu"] = "after_relu",
    ) -> "BackboneSpec":
        """
        Four conv / batch-norm / dropout blocks, flatten, dense 64 (ReLU), dense 32.
        ``before_relu`` moves each ReLU from the conv onto the batch-norm output.
        """
        layers: list[LayerSpec] = []
        for kernel, stride, filters in _CONV_ROWS:
            channels = max(1, round(filters * channel_scale))
            after = bn_position == "after_relu"
            layers.append(LayerSpec.conv(kernel, stride, channels, activation=after))
            layers.append(LayerSpec.batchnorm(activation=not after))
            layers.append(LayerSpec.dropout(dropout_rate))
        layers.append(LayerSpec.flatten())
        layers.append(LayerSpec.dense(dense_units[0], activation=True))
        layers.append(LayerSpec.dense(dense_units[1]))
        return cls(tuple(layers), tuple(input_shape))  # type: ignore[arg-type]

    @classmethod
    def from_params(cls, params: ModelParams, matrix_shape: tuple[int, int]) -> "BackboneSpec":
        """Backbone for N_f x N_s' matrices, whose network view is N_s' x N_f x 1."""
        frames, bins = matrix_shape
        return cls.standard(
            input_shape=(bins, frames, 1),
            channel_scale=params.channel_scale,
            dense_units=params.dense_units,
            dropout_rate=params.dropout_rate,
            bn_position=params.bn_position,
        )

    @property
    def embedding_dim(self) -> int:
        return self.shape_trace()[-1][-1]

    def shape_trace(self) -> list[tuple[int, ...]]:
        """Per-sample output shape of every layer."""
        shapes = []
        shape: tuple[int, ...] = self.input_shape
        for spec in self.layers:
            shape = layer_output_shape(spec, shape)
            shapes.append(shape)
        return shapes

    def to_dict(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "layers": [spec.to_dict() for spec in self.layers],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackboneSpec":
        return cls(
            layers=tuple(LayerSpec.from_dict(d) for d in data["layers"]),
            input_shape=tuple(data["input_shape"]),  # type: ignore[arg-type]
        )


def head_inputs(distance: Distance, embedding_dim: int) -> int:
    return embedding_dim if distance == "abs_diff" else 1


def backbone_param_count(
    spec: BackboneSpec,
    head: Literal["none", "siamese", "cnn"] = "none",
    distance: Distance = "abs_diff",
) -> int:
    """Trainable scalars (conv/dense weights and biases, batch-norm gamma/beta)."""
    total = 0
    shape: tuple[int, ...] = spec.input_shape
    for layer in spec.layers:
        total += sum(math.prod(s) for s in layer_param_shapes(layer, shape).values())
        shape = layer_output_shape(layer, shape)

    if head == "siamese":
        total += head_inputs(distance, spec.embedding_dim) + 1
    elif head == "cnn":
        total += spec.embedding_dim * NUM_CLASSES + NUM_CLASSES
    elif head != "none":
        raise InvalidArgumentError(f"unknown head {head!r}")
    return total


def to_input(matrices: npt.ArrayLike, spec: BackboneSpec) -> Tensor:
    """(n, N_f, N_s') spectrum matrices to the (n, N_s', N_f, 1) network view."""
    arr = np.asarray(matrices, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    if arr.ndim != 3:
        raise InvalidArgumentError(f"expected spectrum matrices, got shape {arr.shape}")
    x = np.transpose(arr, (0, 2, 1))[..., np.newaxis]
    if x.shape[1:] != spec.input_shape:
        raise InvalidArgumentError(
            f"matrices of shape {arr.shape[1:]} do not fit a network expecting {spec.input_shape}"
        )
    return x


def _matrix_data(x: Union[SpectrumMatrix, npt.ArrayLike]) -> FloatArray:
    return x.data if isinstance(x, SpectrumMatrix) else np.asarray(x, dtype=np.float64)


class _BackboneModel:
    """Backbone plus a dense head, with one flat parameter namespace."""

    kind: ModelKind

    def __init__(self, spec: BackboneSpec, head_in: int, head_out: int, seed: int = 0):
        backbone_seed, head_seed = np.random.SeedSequence(seed).spawn(2)
        self.spec = spec
        self.seed = seed
        self.backbone = Network(list(spec.layers), spec.input_shape, seed=np.random.default_rng(backbone_seed))
        self.head = Network([LayerSpec.dense(head_out)], (head_in,), seed=np.random.default_rng(head_seed))

    def _parts(self) -> tuple[tuple[str, Network], ...]:
        return (("backbone", self.backbone), ("head", self.head))

    def parameters(self) -> dict[str, Tensor]:
        return {
            f"{prefix}.{name}": value
            for prefix, net in self._parts()
            for name, value in net.parameters().items()
        }

    def buffers(self) -> dict[str, Tensor]:
        return {
            f"{prefix}.{name}": value
            for prefix, net in self._parts()
            for name, value in net.buffers().items()
        }

    def param_count(self) -> int:
        return sum(int(p.size) for p in self.parameters().values())

    def state_dict(self) -> dict[str, Tensor]:
        return {
            f"{prefix}.{name}": value
            for prefix, net in self._parts()
            for name, value in net.state_dict().items()
        }

    def load_state_dict(self, state: dict[str, Tensor]) -> None:
        for prefix, net in self._parts():
            marker = f"{prefix}."
            net.load_state_dict({k[len(marker):]: v for k, v in state.items() if k.startswith(marker)})

    def _merge_grads(self, backbone_grads: dict[str, Tensor], head_grads: dict[str, Tensor]) -> dict[str, Tensor]:
        grads = {f"backbone.{k}": v for k, v in backbone_grads.items()}
        grads.update({f"head.{k}": v for k, v in head_grads.items()})
        return grads

    def embed_batch(self, matrices: npt.ArrayLike) -> FloatArray:
        """Infer-mode embeddings of a stack of matrices, (n, embedding_dim)."""
        x = to_input(matrices, self.spec)
        if x.shape[0] == 0:
            return np.zeros((0, self.spec.embedding_dim))
        parts = [
            self.backbone.forward(x[start : start + EMBED_CHUNK], "infer")[0]
            for start in range(0, x.shape[0], EMBED_CHUNK)
        ]
        return np.concatenate(parts)


class SiameseModel(_BackboneModel):
    """
    Twin embedding networks sharing one parameter set, compared by a learned
    distance head: P = sigmoid(FC(|f(X1) - f(X2)|)).
    """

    kind: ModelKind = "siamese"

    def __init__(self, spec: BackboneSpec, distance: Distance = "abs_diff", seed: int = 0):
        if distance not in ("abs_diff", "l2_norm"):
            raise InvalidArgumentError(f"unknown distance {distance!r}")
        super().__init__(spec, head_inputs(distance, spec.embedding_dim), 1, seed)
        self.distance: Distance = distance

    def embed(
        self,
        x: Union[SpectrumMatrix, npt.ArrayLike],
        mode: Literal["train", "infer"] = "infer",
        rng: Optional[int] = None,
    ) -> FloatArray:
        """Embedding of one matrix (or a stack of them, which train mode requires)."""
        data = _matrix_data(x)
        out, _ = self.backbone.forward(to_input(data, self.spec), mode, rng)
        return out[0] if data.ndim == 2 else out

    def distance_forward(self, e1: Tensor, e2: Tensor) -> Tensor:
        diff = e1 - e2
        if self.distance == "abs_diff":
            return np.abs(diff)
        return np.linalg.norm(diff, axis=-1, keepdims=True)

    def distance_backward(self, grad: Tensor, e1: Tensor, e2: Tensor) -> tuple[Tensor, Tensor]:
        diff = e1 - e2
        if self.distance == "abs_diff":
            g = grad * np.sign(diff)
        else:
            norm = np.linalg.norm(diff, axis=-1, keepdims=True)
            safe = np.where(norm > 0, norm, 1.0)
            g = grad * np.where(norm > 0, diff / safe, 0.0)
        return g, -g

    def score_embeddings(self, e1: npt.ArrayLike, e2: npt.ArrayLike) -> FloatArray:
        """Same-class probabilities for rows of precomputed embeddings."""
        e1 = np.atleast_2d(np.asarray(e1, dtype=np.float64))
        e2 = np.atleast_2d(np.asarray(e2, dtype=np.float64))
        logits, _ = self.head.forward(self.distance_forward(e1, e2), "infer")
        return np.asarray(sigmoid(logits[:, 0]))

    def pair_scores(
        self,
        x1: npt.ArrayLike,
        x2: npt.ArrayLike,
        mode: Literal["train", "infer"] = "infer",
        seed: int = 0,
    ) -> FloatArray:
        """
        Scores of matched rows of two matrix stacks. In train mode both twins
        reuse one dropout seed, and batch-norm running statistics are updated.
        """
        if mode == "infer":
            return self.score_embeddings(self.embed_batch(x1), self.embed_batch(x2))
        e1, _ = self.backbone.forward(to_input(x1, self.spec), mode, seed)
        e2, _ = self.backbone.forward(to_input(x2, self.spec), mode, seed)
        logits, _ = self.head.forward(self.distance_forward(e1, e2), mode)
        return np.asarray(sigmoid(logits[:, 0]))

    def pair_score(
        self,
        x1: Union[SpectrumMatrix, npt.ArrayLike],
        x2: Union[SpectrumMatrix, npt.ArrayLike],
    ) -> float:
        """Infer-mode probability that two matrices show the same movement."""
        return float(self.pair_scores(_matrix_data(x1), _matrix_data(x2))[0])

    def train_batch(
        self,
        left: FloatArray,
        right: FloatArray,
        targets: FloatArray,
        rng: np.random.Generator,
    ) -> tuple[float, dict[str, Tensor]]:
        """Mean BCE of a pair batch and its parameter gradients (twin gradients summed)."""
        seed = int(rng.integers(0, _SEED_BOUND))
        e1, c1 = self.backbone.forward(to_input(left, self.spec), "train", seed)
        e2, c2 = self.backbone.forward(to_input(right, self.spec), "train", seed)
        d = self.distance_forward(e1, e2)
        logits, head_cache = self.head.forward(d, "train")
        p = np.asarray(sigmoid(logits[:, 0]))

        losses, _ = bce_loss(p, targets)
        n = targets.shape[0]
        # sigmoid followed by BCE differentiates to p - b w.r.t. the logit
        grad_logits = ((p - targets) / n)[:, np.newaxis]

        grad_d, head_grads = self.head.backward(grad_logits, head_cache)
        g1, g2 = self.distance_backward(grad_d, e1, e2)
        _, grads1 = self.backbone.backward(g1, c1)
        _, grads2 = self.backbone.backward(g2, c2)
        shared = {name: grads1[name] + grads2[name] for name in grads1}
        return float(np.mean(losses)), self._merge_grads(shared, head_grads)


class CnnClassifier(_BackboneModel):
    """The same backbone ending in a 4-way softmax classifier."""

    kind: ModelKind = "cnn"

    def __init__(self, spec: BackboneSpec, seed: int = 0):
        super().__init__(spec, spec.embedding_dim, NUM_CLASSES, seed)

    def logits(self, matrices: npt.ArrayLike) -> FloatArray:
        return self.head.forward(self.embed_batch(matrices), "infer")[0]

    def predict_proba(self, matrices: npt.ArrayLike) -> FloatArray:
        return softmax(self.logits(matrices))

    def predict(self, matrices: npt.ArrayLike) -> IntArray:
        return np.argmax(self.logits(matrices), axis=1).astype(np.int64)

    def train_batch(
        self,
        matrices: FloatArray,
        labels: IntArray,
        rng: np.random.Generator,
    ) -> tuple[float, dict[str, Tensor]]:
        emb, cache = self.backbone.forward(to_input(matrices, self.spec), "train", int(rng.integers(0, _SEED_BOUND)))
        logits, head_cache = self.head.forward(emb, "train")
        loss, grad_logits = softmax_cross_entropy(logits, labels)
        grad_emb, head_grads = self.head.backward(grad_logits, head_cache)
        _, backbone_grads = self.backbone.backward(grad_emb, cache)
        return loss, self._merge_grads(backbone_grads, head_grads)


Model = Union[SiameseModel, CnnClassifier]


def build_model(
    kind: ModelKind,
    spec: BackboneSpec,
    distance: Distance = "abs_diff",
    seed: int = 0,
) -> Model:
    if kind == "siamese":
        return SiameseModel(spec, distance=distance, seed=seed)
    if kind == "cnn":
        return CnnClassifier(spec, seed=seed)
    raise InvalidArgumentError(f"unknown model kind {kind!r}")


def sample_pairs(dataset: Union[Dataset, npt.ArrayLike], count: int, seed: int = 0) -> PairBatch:
    """
    ceil(count/2) same-class and floor(count/2) different-class index pairs in
    shuffled order. Classes are drawn uniformly, then members uniformly without
    replacement within a pair.
    """
    labels = dataset.labels if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=np.int64)
    if count < 0:
        raise InvalidArgumentError(f"pair count must be >= 0, got {count}")

    members = [np.flatnonzero(labels == c) for c in range(NUM_CLASSES)]
    same_classes = [c for c, m in enumerate(members) if len(m) >= 2]
    present = [c for c, m in enumerate(members) if len(m) >= 1]
    if len(same_classes) < 2:
        raise InvalidArgumentError("pair sampling needs at least 2 classes with at least 2 samples each")

    rng = np.random.default_rng(seed)
    n_same = (count + 1) // 2
    rows = []
    for _ in range(n_same):
        c = same_classes[rng.integers(len(same_classes))]
        i, j = rng.choice(members[c], size=2, replace=False)
        rows.append((i, j, 1.0))
    for _ in range(count - n_same):
        c1, c2 = rng.choice(present, size=2, replace=False)
        rows.append((rng.choice(members[c1]), rng.choice(members[c2]), 0.0))

    order = rng.permutation(count)
    table = np.array(rows, dtype=np.float64).reshape(count, 3)[order]
    return PairBatch(
        left=table[:, 0].astype(np.int64),
        right=table[:, 1].astype(np.int64),
        targets=table[:, 2].copy(),
    )


Validator = Callable[[], Optional[tuple[float, float]]]


def _fit(
    model: Model,
    cfg: TrainConfig,
    draw_epoch: Callable[[np.random.Generator], np.ndarray],
    run_batch: Callable[[np.ndarray, np.random.Generator], tuple[float, dict[str, Tensor]]],
    validate: Validator,
) -> TrainingHistory:
    """
    Minibatch Adam loop with best-validation checkpointing and early stopping.
    ``validate`` returns (loss, accuracy) of the current weights, or None when
    there is no validation set.
    """
    metrics = TrainingMetrics(model.kind)
    log = LogContext()
    optimizer = AdamState(learning_rate=cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)

    initial = validate()
    if initial is not None:
        metrics.record_initial(*initial)
        metrics.mark_best(0, initial[1])
    best_accuracy = None if initial is None else initial[1]
    best_state = model.state_dict()
    stale = 0

    for epoch in range(1, cfg.epochs + 1):
        items = draw_epoch(rng)
        total_loss, seen = 0.0, 0
        for start in range(0, len(items), cfg.batch_size):
            batch = items[start : start + cfg.batch_size]
            if len(batch) < 2:
                continue
            loss, grads = run_batch(batch, rng)
            if not math.isfinite(loss):
                raise TrainingError(f"{model.kind} loss became non-finite in epoch {epoch}")
            adam_step(model.parameters(), grads, optimizer)
            metrics.record_batch()
            total_loss += loss * len(batch)
            seen += len(batch)

        train_loss = total_loss / seen if seen else 0.0
        result = validate()
        val_loss, val_accuracy = result if result is not None else (None, None)
        metrics.record_epoch(epoch, train_loss, val_loss, val_accuracy)
        log.log_epoch(model.kind, epoch, train_loss, val_loss, val_accuracy)

        if val_accuracy is None:
            continue
        if best_accuracy is None or val_accuracy > best_accuracy:
            best_accuracy = val_accuracy
            best_state = model.state_dict()
            metrics.mark_best(epoch, val_accuracy)
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                metrics.mark_stopped_early()
                break

    if initial is not None:
        model.load_state_dict(best_state)
    history = metrics.as_history()
    log.log_training(model.kind, history.best_epoch, metrics.elapsed_ms())
    return history


def _check_training_set(train_set: Dataset) -> None:
    if len(train_set) < 2:
        raise InvalidArgumentError("training needs at least 2 samples")


def _pairable(dataset: Optional[Dataset]) -> bool:
    """At least two classes with two or more samples, so pairs of both kinds exist."""
    return dataset is not None and sum(c >= 2 for c in dataset.class_counts()) >= 2


def train(
    model: SiameseModel,
    train_set: Dataset,
    val_set: Optional[Dataset],
    cfg: TrainConfig,
) -> tuple[SiameseModel, TrainingHistory]:
    """
    Train the Siamese model on freshly sampled pairs each epoch. Validation
    uses one fixed pair set scored in infer mode (same-class iff P > 0.5).
    A validation set too small to pair disables early stopping and the final
    weights are kept.
    """
    _check_training_set(train_set)
    pairs_per_epoch = cfg.pairs_per_epoch or len(train_set)
    val_pairs = sample_pairs(val_set, len(val_set), cfg.seed) if _pairable(val_set) else None

    def draw_epoch(rng: np.random.Generator) -> np.ndarray:
        pairs = sample_pairs(train_set, pairs_per_epoch, int(rng.integers(0, _SEED_BOUND)))
        return np.column_stack([pairs.left, pairs.right, pairs.targets.astype(np.int64)])

    def run_batch(batch: np.ndarray, rng: np.random.Generator) -> tuple[float, dict[str, Tensor]]:
        return model.train_batch(
            train_set.matrices[batch[:, 0]],
            train_set.matrices[batch[:, 1]],
            batch[:, 2].astype(np.float64),
            rng,
        )

    def validate() -> Optional[tuple[float, float]]:
        if val_pairs is None:
            return None
        emb = model.embed_batch(val_set.matrices)
        p = model.score_embeddings(emb[val_pairs.left], emb[val_pairs.right])
        losses, _ = bce_loss(p, val_pairs.targets)
        correct = (p > 0.5) == (val_pairs.targets == 1.0)
        return float(np.mean(losses)), float(np.mean(correct))

    history = _fit(model, cfg, draw_epoch, run_batch, validate)
    return model, history


def train_cnn_baseline(
    model: CnnClassifier,
    train_set: Dataset,
    val_set: Optional[Dataset],
    cfg: TrainConfig,
) -> tuple[CnnClassifier, TrainingHistory]:
    """
    Train the softmax baseline with categorical cross-entropy and the same
    optimizer settings. Test accuracy and the confusion matrix come from
    evaluation.evaluate_classifier.
    """
    _check_training_set(train_set)
    has_val = val_set is not None and len(val_set) > 0

    def draw_epoch(rng: np.random.Generator) -> np.ndarray:
        return rng.permutation(len(train_set))

    def run_batch(batch: np.ndarray, rng: np.random.Generator) -> tuple[float, dict[str, Tensor]]:
        return model.train_batch(train_set.matrices[batch], train_set.labels[batch], rng)

    def validate() -> Optional[tuple[float, float]]:
        if not has_val:
            return None
        logits = model.logits(val_set.matrices)
        loss, _ = softmax_cross_entropy(logits, val_set.labels)
        return loss, float(np.mean(np.argmax(logits, axis=1) == val_set.labels))

    history = _fit(model, cfg, draw_epoch, run_batch, validate)
    return model, history


def train_model(
    model: Model,
    train_set: Dataset,
    val_set: Optional[Dataset],
    cfg: TrainConfig,
) -> tuple[Model, TrainingHistory]:
    """Dispatch to the trainer matching the model kind."""
    if isinstance(model, SiameseModel):
        return train(model, train_set, val_set, cfg)
    return train_cnn_baseline(model, train_set, val_set, cfg)
