"""
Command-line entry point: simulate | train | eval | ablation | plot.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 runtime/training failure.
"""
import argparse
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from radarhead.config import (
    CLASS_NAMES,
    DATASET_PRESETS,
    NUM_CLASSES,
    Config,
    ExperimentConfig,
    RadarConfig,
    load_experiment_config,
)
from radarhead.dataset import Dataset, generate_dataset, stratified_split
from radarhead.errors import InvalidInputError, RadarHeadError
from radarhead.evaluation import evaluate_classifier, evaluate_episodes, run_ablation
from radarhead.logging_utils import LogContext, get_logger, setup_logging
from radarhead.models import round_metric
from radarhead.plotting import heatmap_filename, render_heatmap
from radarhead.siamese import (
    REFERENCE_CNN_PARAMS,
    REFERENCE_SIAMESE_PARAMS,
    BackboneSpec,
    SiameseModel,
    build_model,
    train_model,
)
from radarhead.storage import (
    Checkpoint,
    read_checkpoint,
    read_dataset,
    write_ablation_csv,
    write_checkpoint,
    write_dataset,
    write_json_report,
)

_U64_MAX = 2**64 - 1


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors become InvalidInputError so they share exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise InvalidInputError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if not 0 <= value <= _U64_MAX:
        raise argparse.ArgumentTypeError(f"{value} is not an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = _u64(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _rounded(value: Any) -> Any:
    """Report copy of ``value`` with every float at six significant digits."""
    if isinstance(value, float):
        return round_metric(value)
    if isinstance(value, dict):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_rounded(v) for v in value]
    return value


def _require_out(args: argparse.Namespace) -> Path:
    if args.out is None:
        raise InvalidInputError(f"{args.command} needs --out")
    return Path(args.out)


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    return load_experiment_config(args.config)


def _seed(args: argparse.Namespace, experiment: ExperimentConfig) -> int:
    return experiment.train.seed if args.seed is None else args.seed


# ============================================================================
# Commands
# ============================================================================


def cmd_simulate(args: argparse.Namespace) -> None:
    """Synthesise a labelled dataset and write it as a dataset file."""
    out = _require_out(args)
    experiment = _experiment(args)
    seed = _seed(args, experiment)

    if args.counts is not None:
        counts = tuple(args.counts)
    elif args.preset is not None:
        counts = DATASET_PRESETS[args.preset]
    else:
        counts = experiment.dataset.counts

    dataset = generate_dataset(
        experiment.radar,
        counts,
        experiment.scene,
        experiment.dsp.normalization,
        seed=seed,
        workers=args.workers,
    )
    write_dataset(out, dataset)
    print(" ".join(f"{name}={n}" for name, n in zip(CLASS_NAMES, dataset.class_counts())))
    get_logger().info(f"wrote {len(dataset)} samples to {out}")


def _split_record(fractions: tuple[float, ...], seed: int, parts: Sequence[Dataset]) -> dict[str, Any]:
    return {
        "fractions": list(fractions),
        "seed": seed,
        "sizes": [len(p) for p in parts],
        "rounding": "validation and test floored, remainder to train",
    }


def cmd_train(args: argparse.Namespace) -> None:
    """Split the dataset, train a Siamese model or the CNN baseline, write checkpoint and history."""
    out = _require_out(args)
    experiment = _experiment(args)
    seed = _seed(args, experiment)
    dataset = read_dataset(args.dataset)

    fractions = experiment.dataset.split
    train_set, val_set, test_set = stratified_split(dataset, fractions, seed)

    update: dict[str, Any] = {"seed": seed}
    if args.epochs is not None:
        update["epochs"] = args.epochs
    cfg = experiment.train.model_copy(update=update)

    spec = BackboneSpec.from_params(experiment.model, dataset.matrix_shape)
    model = build_model(args.kind, spec, distance=experiment.model.distance, seed=seed)
    model, history = train_model(model, train_set, val_set, cfg)

    split = _split_record(fractions, seed, (train_set, val_set, test_set))
    write_checkpoint(out, Checkpoint(model, cfg, history, split))

    reference = REFERENCE_SIAMESE_PARAMS if args.kind == "siamese" else REFERENCE_CNN_PARAMS
    report: dict[str, Any] = {
        "kind": args.kind,
        "history": _rounded(history.model_dump()),
        "split": split,
        "param_count": model.param_count(),
        "reference_param_count": reference,
        "param_count_delta": model.param_count() - reference,
    }
    if args.kind == "cnn" and len(test_set) > 0:
        test_report = evaluate_classifier(model, test_set)  # type: ignore[arg-type]
        report["test"] = test_report.model_dump()
        LogContext().log_evaluation("cnn", test_report.accuracy, test_report.query_count, seed=seed)

    history_path = Path(args.history) if args.history else out.with_name(out.name + ".history.json")
    write_json_report(history_path, report)


def _test_split(checkpoint: Checkpoint, dataset: Dataset) -> Dataset:
    """The checkpoint's held-out test split, or the whole dataset when none was recorded."""
    split = checkpoint.split
    if not split.get("fractions"):
        return dataset
    _, _, test_set = stratified_split(dataset, tuple(split["fractions"]), int(split["seed"]))
    return test_set


def cmd_eval(args: argparse.Namespace) -> None:
    """Evaluate a checkpoint on its test split and export the test embeddings."""
    out = _require_out(args)
    experiment = _experiment(args)
    seed = _seed(args, experiment)
    episodes = args.episodes or experiment.evaluation.episodes

    checkpoint = read_checkpoint(args.checkpoint)
    dataset = read_dataset(args.dataset)
    model = checkpoint.model
    frames, bins = dataset.matrix_shape
    if model.spec.input_shape != (bins, frames, 1):
        raise InvalidInputError(
            f"checkpoint expects {model.spec.input_shape[1]}x{model.spec.input_shape[0]} matrices, "
            f"dataset holds {frames}x{bins}"
        )

    test_set = _test_split(checkpoint, dataset)
    if isinstance(model, SiameseModel):
        report = evaluate_episodes(model, test_set, episodes, seed)
    else:
        report = evaluate_classifier(model, test_set)
    LogContext().log_evaluation(model.kind, report.accuracy, report.query_count, seed=seed)

    write_json_report(
        out,
        {
            "kind": model.kind,
            "report": report.model_dump(),
            "embeddings": {
                "labels": test_set.labels.tolist(),
                "vectors": model.embed_batch(test_set.matrices).tolist(),
            },
        },
    )


def cmd_ablation(args: argparse.Namespace) -> None:
    """Train both models on growing training fractions and write the paired accuracies as CSV."""
    out = _require_out(args)
    experiment = _experiment(args)
    seed = _seed(args, experiment)
    dataset = read_dataset(args.dataset)
    fractions = tuple(args.fractions) if args.fractions else None
    report = run_ablation(dataset, fractions, experiment, seed=seed, repeats=args.repeats)
    write_ablation_csv(out, report)


def _dataset_radar(dataset: Dataset) -> Optional[RadarConfig]:
    radar = dataset.provenance.get("radar")
    if radar is None:
        return None
    try:
        return RadarConfig.model_validate(radar)
    except ValidationError as e:
        raise InvalidInputError(f"dataset provenance holds an invalid radar config: {e}") from e


def cmd_plot(args: argparse.Namespace) -> None:
    """Render one SVG heatmap per requested sample."""
    out = _require_out(args)
    dataset = read_dataset(args.dataset)
    samples = [(index, dataset.sample(index)) for index in args.indices]
    radar = _dataset_radar(dataset)

    out.mkdir(parents=True, exist_ok=True)
    for index, matrix in samples:
        render_heatmap(matrix.data, out / heatmap_filename(index, matrix.label), matrix.label, radar)


# ============================================================================
# Parser and exit-code mapping
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="RNG seed (default: train.seed of the config)")
    common.add_argument("--config", default=None, help="experiment config JSON (default: $RADARHEAD_CONFIG)")
    common.add_argument("--out", default=None, help="output file (directory for plot)")
    common.add_argument("--quiet", action="store_true", help="only log warnings and errors")

    parser = _ArgumentParser(prog="radarhead", description="FMCW head-movement one-shot toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="synthesise a dataset file")
    simulate.add_argument("--counts", type=_u64, nargs=NUM_CLASSES, metavar="N",
                          help="samples per class (front nod shake lowered)")
    simulate.add_argument("--preset", choices=sorted(DATASET_PRESETS), default=None)
    simulate.add_argument("--workers", type=_positive, default=None)
    simulate.set_defaults(handler=cmd_simulate)

    train = sub.add_parser("train", parents=[common], help="train a model on a dataset file")
    train.add_argument("dataset")
    train.add_argument("--kind", choices=("siamese", "cnn"), default="siamese")
    train.add_argument("--epochs", type=_u64, default=None)
    train.add_argument("--history", default=None, help="history JSON path (default: <out>.history.json)")
    train.set_defaults(handler=cmd_train)

    evaluate = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    evaluate.add_argument("checkpoint")
    evaluate.add_argument("dataset")
    evaluate.add_argument("--episodes", type=_positive, default=None)
    evaluate.set_defaults(handler=cmd_eval)

    ablation = sub.add_parser("ablation", parents=[common], help="training-fraction ablation")
    ablation.add_argument("dataset")
    ablation.add_argument("--fractions", type=float, nargs="+", default=None)
    ablation.add_argument("--repeats", type=_positive, default=None)
    ablation.set_defaults(handler=cmd_ablation)

    plot = sub.add_parser("plot", parents=[common], help="render spectrum heatmaps")
    plot.add_argument("dataset")
    plot.add_argument("indices", type=int, nargs="+")
    plot.set_defaults(handler=cmd_plot)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    valid, error = Config.validate()
    logger = setup_logging(None if valid else "INFO")
    start = time.perf_counter()
    command = "radarhead"
    exit_code = 0

    try:
        if not valid:
            raise InvalidInputError(error)
        args = build_parser().parse_args(argv)
        command = args.command
        if args.quiet:
            logger.setLevel("WARNING")
        args.handler(args)
    except RadarHeadError as e:
        exit_code = e.exit_code
        print(f"error: {e}", file=sys.stderr)
    except OSError as e:
        exit_code = 2
        print(f"error: {e}", file=sys.stderr)
    except (RuntimeError, ArithmeticError, MemoryError) as e:
        exit_code = 3
        print(f"error: {e}", file=sys.stderr)

    elapsed_ms = round((time.perf_counter() - start) * 1000, 2)
    LogContext(logger).log_command(command, exit_code, elapsed_ms)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
