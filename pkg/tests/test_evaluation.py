"""
Tests for one-shot classification, confusion matrices, episode evaluation
and the training-fraction ablation.
"""
import numpy as np
import pytest

from radarhead.config import (
    DatasetParams,
    EvalParams,
    ExperimentConfig,
    ModelParams,
    TrainConfig,
)
from radarhead.dataset import Dataset
from radarhead.errors import InvalidArgumentError
from radarhead.evaluation import (
    accuracy,
    argmax_decision,
    classification_report,
    classify_one_shot,
    confusion_matrix,
    evaluate_classifier,
    evaluate_episodes,
    run_ablation,
)
from radarhead.models import SpectrumMatrix, SupportSet
from radarhead.siamese import CnnClassifier, SiameseModel

TINY_EXPERIMENT = ExperimentConfig(
    dataset=DatasetParams(split=(0.5, 0.0, 0.5)),
    model=ModelParams(channel_scale=0.25, dense_units=(16, 8), dropout_rate=0.0),
    train=TrainConfig(epochs=1, batch_size=8, learning_rate=1e-3),
    evaluation=EvalParams(episodes=2),
)


class _LabelEchoModel:
    """Embeds a matrix as its first cell and scores pairs by negative distance."""

    def embed_batch(self, matrices):
        return np.asarray(matrices)[:, 0, :1]

    def score_embeddings(self, e1, e2):
        return -np.abs(np.asarray(e1) - np.asarray(e2))[:, 0]


def _label_coded_dataset(counts):
    labels = np.repeat(np.arange(4), counts)
    matrices = np.zeros((len(labels), 2, 2))
    matrices[:, 0, 0] = labels
    return Dataset(matrices, labels)


def _support(dataset):
    first = [int(np.flatnonzero(dataset.labels == c)[0]) for c in range(4)]
    return SupportSet(dataset.matrices[first])


def test_argmax_ties_go_to_the_lowest_index():
    """Ties resolve to the lowest class index."""
    assert argmax_decision([0.2, 0.9, 0.9, 0.1]) == 1
    assert argmax_decision([0.5, 0.5, 0.5, 0.5]) == 0
    with pytest.raises(InvalidArgumentError):
        argmax_decision([])


def test_accuracy():
    """Test accuracy of predictions."""
    assert accuracy([0, 1, 2, 3], [0, 1, 2, 3]) == 1.0
    assert accuracy([0, 1, 2, 3], [3, 2, 1, 0]) == 0.0
    assert accuracy([0, 1, 1, 3], [0, 1, 2, 3]) == 0.75
    with pytest.raises(InvalidArgumentError):
        accuracy([], [])
    with pytest.raises(InvalidArgumentError):
        accuracy([0, 1], [0])


def test_confusion_matrix_rows_are_true_classes():
    """Rows index true classes, columns predictions."""
    matrix = confusion_matrix([0, 1, 2, 3, 1], [0, 1, 2, 3, 2])
    assert np.trace(matrix) == 4
    assert matrix[2, 1] == 1
    assert matrix.sum() == 5


def test_classification_report_marks_absent_classes():
    """Classes without queries report no accuracy."""
    report = classification_report(confusion_matrix([0, 0, 1], [0, 1, 1]))
    assert report.accuracy == pytest.approx(2 / 3, rel=1e-5)
    assert report.per_class_accuracy == [1.0, 0.5, None, None]
    assert report.query_count == 3
    with pytest.raises(InvalidArgumentError):
        classification_report(np.zeros((4, 4), dtype=np.int64))


def test_perfect_scorer_is_always_right():
    """A label-aware scorer reaches full accuracy."""
    dataset = _label_coded_dataset((5, 4, 6, 3))
    report = evaluate_episodes(_LabelEchoModel(), dataset, episodes=7, seed=1)
    assert report.accuracy == 1.0
    assert report.episode_accuracy_mean == 1.0
    assert report.episode_accuracy_std == 0.0
    assert report.episode_count == 7


def test_supports_are_excluded_from_the_queries():
    """Each episode classifies n_c - 1 queries of every class."""
    counts = (5, 4, 6, 3)
    report = evaluate_episodes(_LabelEchoModel(), _label_coded_dataset(counts), episodes=3, seed=2)
    row_sums = np.asarray(report.confusion_matrix).sum(axis=1)
    assert row_sums.tolist() == [3 * (n - 1) for n in counts]
    assert report.query_count == 3 * (sum(counts) - 4)


def test_episode_evaluation_is_seeded(tiny_dataset, tiny_spec):
    """Test episode reproducibility."""
    model = SiameseModel(tiny_spec, seed=1)
    a = evaluate_episodes(model, tiny_dataset, episodes=3, seed=4)
    b = evaluate_episodes(model, tiny_dataset, episodes=3, seed=4)
    assert a == b


def test_episode_evaluation_needs_two_samples_per_class():
    """Test episode validation."""
    with pytest.raises(InvalidArgumentError):
        evaluate_episodes(_LabelEchoModel(), _label_coded_dataset((2, 2, 1, 2)))
    with pytest.raises(InvalidArgumentError):
        evaluate_episodes(_LabelEchoModel(), _label_coded_dataset((2, 2, 2, 2)), episodes=0)


def test_one_shot_decision_ignores_the_head_bias(tiny_dataset, tiny_spec):
    """Shifting the logit by a constant changes no argmax decision."""
    model = SiameseModel(tiny_spec, seed=2)
    support = _support(tiny_dataset)
    bias = model.parameters()["head.00_dense.bias"]

    bias[...] = -2.0
    low = [classify_one_shot(model, m, support) for m in tiny_dataset.matrices]
    low_report = evaluate_episodes(model, tiny_dataset, episodes=2, seed=0)
    bias[...] = 2.0
    high = [classify_one_shot(model, m, support) for m in tiny_dataset.matrices]
    high_report = evaluate_episodes(model, tiny_dataset, episodes=2, seed=0)

    assert low == high
    assert low_report.confusion_matrix == high_report.confusion_matrix


def test_exemplar_queries_match_themselves_when_distance_lowers_the_score(tiny_dataset, tiny_spec):
    """With non-positive head weights a zero distance is the best possible score."""
    model = SiameseModel(tiny_spec, seed=3)
    weights = model.parameters()["head.00_dense.weights"]
    weights[...] = -np.abs(weights) - 0.1
    support = _support(tiny_dataset)
    for v in range(4):
        query = SpectrumMatrix(data=support.matrices[v], label=v)
        assert classify_one_shot(model, query, support) == v


def test_classify_one_shot_needs_a_support_set(tiny_dataset, tiny_spec):
    """Test support set type check."""
    model = SiameseModel(tiny_spec, seed=0)
    with pytest.raises(InvalidArgumentError):
        classify_one_shot(model, tiny_dataset.matrices[0], tiny_dataset.matrices[:4])


def test_episode_predictions_agree_with_single_queries(tiny_dataset, tiny_spec):
    """One episode scores every query exactly as classify_one_shot does against the same exemplars."""
    model = SiameseModel(tiny_spec, seed=5)
    rng = np.random.default_rng(8)
    picks = [int(rng.choice(m)) for m in tiny_dataset.indices_by_class()]
    support = SupportSet(tiny_dataset.matrices[picks])

    queries = [i for i in range(len(tiny_dataset)) if i not in picks]
    predictions = [classify_one_shot(model, tiny_dataset.matrices[i], support) for i in queries]
    expected = confusion_matrix(predictions, tiny_dataset.labels[queries])

    report = evaluate_episodes(model, tiny_dataset, episodes=1, seed=8)
    assert report.confusion_matrix == expected.tolist()


def test_classifier_evaluation(tiny_dataset, tiny_spec):
    """Test CNN evaluation on a labelled set."""
    report = evaluate_classifier(CnnClassifier(tiny_spec, seed=0), tiny_dataset)
    assert report.query_count == 48
    assert np.asarray(report.confusion_matrix).sum(axis=1).tolist() == [12, 12, 12, 12]
    assert 0.0 <= report.accuracy <= 1.0


def test_ablation_reports_one_row_per_fraction(tiny_dataset):
    """Each fraction trains on its share of the training split."""
    report = run_ablation(tiny_dataset, (0.5, 1.0), TINY_EXPERIMENT, seed=3)
    assert [row.fraction for row in report.rows] == [0.5, 1.0]
    assert [row.samples for row in report.rows] == [12, 24]
    for row in report.rows:
        assert 0.0 <= row.siamese_acc <= 1.0
        assert 0.0 <= row.cnn_acc <= 1.0
        assert row.seed == 3


def test_ablation_is_reproducible(tiny_dataset):
    """Test ablation reproducibility."""
    a = run_ablation(tiny_dataset, (1.0,), TINY_EXPERIMENT, seed=4)
    b = run_ablation(tiny_dataset, (1.0,), TINY_EXPERIMENT, seed=4)
    assert a == b


def test_ablation_rejects_unordered_fractions(tiny_dataset):
    """Test ablation fraction validation."""
    with pytest.raises(InvalidArgumentError):
        run_ablation(tiny_dataset, (0.5, 0.3), TINY_EXPERIMENT)
    with pytest.raises(InvalidArgumentError):
        run_ablation(tiny_dataset, (0.0, 0.5), TINY_EXPERIMENT)
