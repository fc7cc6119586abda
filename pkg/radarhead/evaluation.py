"""
One-shot support-set classification, accuracy and confusion matrices, and
the training-fraction ablation comparing the Siamese model with the CNN
baseline.
"""
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from radarhead.config import NUM_CLASSES, ExperimentConfig
from radarhead.dataset import Dataset, stratified_split, stratified_subsample
from radarhead.errors import InvalidArgumentError
from radarhead.logging_utils import LogContext
from radarhead.models import (
    AblationReport,
    AblationRow,
    ClassificationReport,
    EvalReport,
    FloatArray,
    IntArray,
    SpectrumMatrix,
    SupportSet,
    round_metric,
)
from radarhead.siamese import (
    BackboneSpec,
    CnnClassifier,
    SiameseModel,
    train,
    train_cnn_baseline,
)

_SEED_BOUND = 2**63


def argmax_decision(scores: npt.ArrayLike) -> int:
    """Index of the highest score; ties go to the lowest index."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError("scores must be a non-empty vector")
    return int(np.argmax(arr))


def _support_scores(model: SiameseModel, query_emb: FloatArray, support_emb: FloatArray) -> FloatArray:
    """Head scores of every query embedding against each exemplar, one column per class."""
    return np.column_stack([
        model.score_embeddings(query_emb, np.broadcast_to(exemplar, query_emb.shape))
        for exemplar in support_emb
    ])


def classify_one_shot(
    model: SiameseModel,
    query: Union[SpectrumMatrix, npt.ArrayLike],
    support: SupportSet,
) -> int:
    """Label of the support exemplar the query scores highest against (infer mode)."""
    if not isinstance(support, SupportSet):
        raise InvalidArgumentError("support must be a SupportSet")
    data = query.data if isinstance(query, SpectrumMatrix) else np.asarray(query, dtype=np.float64)
    scores = _support_scores(model, model.embed_batch(data), model.embed_batch(support.matrices))
    return argmax_decision(scores[0])


def accuracy(predictions: npt.ArrayLike, truths: npt.ArrayLike) -> float:
    pred = np.asarray(predictions)
    true = np.asarray(truths)
    if pred.shape != true.shape or pred.ndim != 1:
        raise InvalidArgumentError("predictions and truths must be equal-length vectors")
    if pred.size == 0:
        raise InvalidArgumentError("accuracy of an empty set is undefined")
    return float(np.mean(pred == true))


def confusion_matrix(
    predictions: npt.ArrayLike,
    truths: npt.ArrayLike,
    num_classes: int = NUM_CLASSES,
) -> IntArray:
    """Counts with rows indexed by the true class and columns by the prediction."""
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truths, dtype=np.int64)
    if pred.shape != true.shape:
        raise InvalidArgumentError("predictions and truths must have the same length")
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (true, pred), 1)
    return matrix


def _per_class_accuracy(matrix: IntArray) -> list[Optional[float]]:
    rows = matrix.sum(axis=1)
    return [
        round_metric(matrix[c, c] / rows[c]) if rows[c] else None
        for c in range(matrix.shape[0])
    ]


def classification_report(matrix: IntArray) -> ClassificationReport:
    total = int(matrix.sum())
    if total == 0:
        raise InvalidArgumentError("no queries were classified")
    return ClassificationReport(
        accuracy=round_metric(np.trace(matrix) / total),
        confusion_matrix=matrix.tolist(),
        per_class_accuracy=_per_class_accuracy(matrix),
        query_count=total,
    )


def evaluate_episodes(
    model: SiameseModel,
    test_set: Dataset,
    episodes: int = 20,
    seed: int = 0,
) -> EvalReport:
    """
    Per episode draw one support sample per class, classify every other test
    sample against it and accumulate confusion counts. Test embeddings are
    computed once; each episode embeds only its four exemplars.
    """
    if episodes < 1:
        raise InvalidArgumentError("at least one episode is required")
    counts = test_set.class_counts()
    if min(counts) < 2:
        raise InvalidArgumentError(f"every class needs at least 2 test samples, got {counts}")

    emb = model.embed_batch(test_set.matrices)
    members = test_set.indices_by_class()
    rng = np.random.default_rng(seed)
    total = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    episode_acc = []

    for _ in range(episodes):
        picks = [int(rng.choice(m)) for m in members]
        support = SupportSet(test_set.matrices[picks])
        scores = _support_scores(model, emb, model.embed_batch(support.matrices))
        # ties resolve to the lowest class, as in argmax_decision
        predictions = np.argmax(scores, axis=1)

        queries = np.ones(len(test_set), dtype=bool)
        queries[picks] = False
        matrix = confusion_matrix(predictions[queries], test_set.labels[queries])
        total += matrix
        episode_acc.append(np.trace(matrix) / matrix.sum())

    base = classification_report(total)
    return EvalReport(
        **base.model_dump(),
        episode_count=episodes,
        episode_accuracy_mean=round_metric(float(np.mean(episode_acc))),
        episode_accuracy_std=round_metric(float(np.std(episode_acc))),
        seed=seed,
    )


def evaluate_classifier(model: CnnClassifier, test_set: Dataset) -> ClassificationReport:
    """Test accuracy, per-class accuracy and confusion matrix of the baseline."""
    predictions = model.predict(test_set.matrices)
    return classification_report(confusion_matrix(predictions, test_set.labels))


def run_ablation(
    dataset: Dataset,
    fractions: Optional[Sequence[float]] = None,
    experiment: Optional[ExperimentConfig] = None,
    seed: int = 0,
    repeats: Optional[int] = None,
) -> AblationReport:
    """
    Train both models from scratch on stratified subsamples of the training
    split, with identical hyperparameters, and report paired test accuracies.
    Validation and test splits stay fixed. Repeats use derived seeds and are
    averaged.
    """
    experiment = experiment or ExperimentConfig()
    fractions = tuple(fractions or experiment.ablation.fractions)
    repeats = repeats or experiment.ablation.repeats
    if any(not 0.0 < f <= 1.0 for f in fractions) or any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise InvalidArgumentError("fractions must be strictly increasing values in (0, 1]")

    spec = BackboneSpec.from_params(experiment.model, dataset.matrix_shape)
    train_set, val_set, test_set = stratified_split(dataset, experiment.dataset.split, seed)
    log = LogContext()
    rows = []

    for index, fraction in enumerate(fractions):
        siamese_acc, cnn_acc = [], []
        samples = 0
        for repeat in range(repeats):
            run_seed = int(np.random.default_rng([seed, index, repeat]).integers(0, _SEED_BOUND))
            subset = stratified_subsample(train_set, fraction, run_seed)
            samples = len(subset)
            cfg = experiment.train.model_copy(update={"seed": run_seed})

            siamese = SiameseModel(spec, distance=experiment.model.distance, seed=run_seed)
            train(siamese, subset, val_set, cfg)
            report = evaluate_episodes(siamese, test_set, experiment.evaluation.episodes, run_seed)
            siamese_acc.append(report.accuracy)

            cnn = CnnClassifier(spec, seed=run_seed)
            train_cnn_baseline(cnn, subset, val_set, cfg)
            cnn_acc.append(evaluate_classifier(cnn, test_set).accuracy)

        row = AblationRow(
            fraction=fraction,
            samples=samples,
            siamese_acc=round_metric(float(np.mean(siamese_acc))),
            cnn_acc=round_metric(float(np.mean(cnn_acc))),
            seed=seed,
        )
        log.log_evaluation("ablation", row.siamese_acc, samples, fraction=fraction, seed=seed)
        rows.append(row)

    return AblationReport(rows=rows)
