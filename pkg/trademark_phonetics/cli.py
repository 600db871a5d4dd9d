"""
Command-line interface.

    python -m trademark_phonetics featurize --text 아디다스 --script hangul
    python -m trademark_phonetics compare --a XCEED --b X-SEED
    python -m trademark_phonetics train --data pairs.jsonl --out model.ckpt

Machine-readable output goes to standard output, logs to standard error.
Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""
import sys
import json
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from trademark_phonetics import config
from trademark_phonetics.checkpoint import load_checkpoint, save_checkpoint
from trademark_phonetics.dataset import dump_jsonl, read_jsonl, write_jsonl
from trademark_phonetics.errors import FormatVersionMismatch, IoError, PhoneticFeatureError
from trademark_phonetics.evaluation import (
    SPLITS,
    SPLIT_VALIDATION,
    cosine_distance,
    evaluate_baseline,
    evaluate_cnn,
    histogram_from_distances,
    pair_distances,
    summarize_distances,
)
from trademark_phonetics.featurizer import FeaturizationPool, Featurizer
from trademark_phonetics.neuralnet import CnnConfig, predict, train_with_state
from trademark_phonetics.pairing import compose_pair, export_channel_views, export_rgb_png, overlap_pixels
from trademark_phonetics.phoneme_codec import load_dictionary
from trademark_phonetics.raster import IntensityMode, RasterConfig, dump_raw, export_feature_png
from trademark_phonetics.synthetic import default_dissimilar_count, generate_synthetic
from trademark_phonetics.transcription import ScriptTag, load_lexicon

logger = logging.getLogger(__name__)

SCHEMA = "pf/1"
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    """Bad command-line arguments."""


class RuntimeFailure(Exception):
    """A step failed for reasons other than the input data (e.g. an unusable checkpoint)."""


class _ArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting with argparse's status 2, which means a data error here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _script(value: str) -> ScriptTag:
    try:
        return ScriptTag.parse(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dict", dest="dictionary", help="Symbol dictionary file (default: PF_DICT or bundled)")
    common.add_argument("--lexicon", help="Pronunciation lexicon file (default: PF_LEXICON or bundled)")
    common.add_argument("--z", type=float, default=255.0, help="Intensity scale factor")
    common.add_argument("--gamma", type=float, default=0.9, help="Intensity discount factor")
    common.add_argument(
        "--intensity-mode",
        choices=[mode.value for mode in IntensityMode],
        default=IntensityMode.CUMULATIVE_PRODUCT.value,
    )
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(
        prog="trademark_phonetics",
        description="2-gram phonetic features and pair similarity for trademarks.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    featurize = commands.add_parser("featurize", parents=[common], help="Featurize one text")
    featurize.add_argument("--text", required=True)
    featurize.add_argument("--script", type=_script, default=ScriptTag.LATIN_ENGLISH)
    featurize.add_argument("--out", type=Path, help="Grayscale PNG path")
    featurize.add_argument("--raw", type=Path, help="Raw PF1 dump path")
    featurize.set_defaults(handler=cmd_featurize)

    compare = commands.add_parser("compare", parents=[common], help="Score one pair")
    _pair_arguments(compare)
    compare.add_argument("--model", type=Path, help="CNN checkpoint")
    compare.add_argument("--viz", type=Path, help="RGB overlay PNG path")
    compare.set_defaults(handler=cmd_compare)

    viz = commands.add_parser("viz", parents=[common], help="Write R, G and overlay PNGs for a pair")
    _pair_arguments(viz)
    viz.add_argument("--out-dir", type=Path, required=True)
    viz.add_argument("--stem", default="pair")
    viz.set_defaults(handler=cmd_viz)

    dataset_gen = commands.add_parser("dataset-gen", parents=[common], help="Generate synthetic pairs")
    dataset_gen.add_argument("--similar", type=int, required=True)
    dataset_gen.add_argument("--dissimilar", type=int, help="Default: similar x 2.71")
    dataset_gen.add_argument("--seed", type=int, default=0)
    dataset_gen.add_argument("--out", type=Path, help="JSONL path (default: standard output)")
    dataset_gen.set_defaults(handler=cmd_dataset_gen)

    train = commands.add_parser("train", parents=[common], help="Train the CNN")
    train.add_argument("--data", type=Path, required=True)
    train.add_argument("--out", type=Path, required=True, help="Checkpoint path")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--epochs", type=int, default=CnnConfig.epochs)
    train.add_argument("--batch", type=int, default=CnnConfig.batch_size)
    train.add_argument("--lr", type=float, default=CnnConfig.learning_rate)
    train.add_argument("--max-steps", type=int)
    train.add_argument("--fc1-units", type=int, default=CnnConfig.fc1_units)
    train.add_argument("--conv1-filters", type=int, default=CnnConfig.conv1_filters)
    train.add_argument("--conv2-filters", type=int, default=CnnConfig.conv2_filters)
    train.add_argument("--report", type=Path, help="Also write the report JSON here")
    train.add_argument("--timing", action="store_true", help="Include wall time in the report")
    train.set_defaults(handler=cmd_train)

    evaluate = commands.add_parser("eval", parents=[common], help="Score a dataset")
    evaluate.add_argument("--data", type=Path, required=True)
    method = evaluate.add_mutually_exclusive_group(required=True)
    method.add_argument("--model", type=Path, help="CNN checkpoint")
    method.add_argument("--baseline", choices=["cosine"])
    evaluate.add_argument("--seed", type=int, help="Split seed (default: the checkpoint's, or 0)")
    evaluate.add_argument("--split", choices=SPLITS, default=SPLIT_VALIDATION)
    evaluate.add_argument("--threshold", type=float, help="Fixed cosine threshold")
    evaluate.set_defaults(handler=cmd_eval)

    stats = commands.add_parser("stats", parents=[common], help="Cosine distance histogram")
    stats.add_argument("--data", type=Path, required=True)
    stats.add_argument("--bins", type=int, default=20)
    stats.add_argument("--out", type=Path, help="CSV path (default: standard output)")
    stats.set_defaults(handler=cmd_stats)

    return parser


def _pair_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--a", required=True)
    parser.add_argument("--b", required=True)
    parser.add_argument("--script-a", type=_script, default=ScriptTag.LATIN_ENGLISH)
    parser.add_argument("--script-b", type=_script, default=ScriptTag.LATIN_ENGLISH)


def _emit(payload: Dict[str, Any]):
    print(json.dumps({"schema": SCHEMA, **payload}, ensure_ascii=False, indent=2))


def _featurizer(args: argparse.Namespace) -> Featurizer:
    raster_cfg = RasterConfig(z=args.z, gamma=args.gamma, intensity_mode=IntensityMode(args.intensity_mode))
    return Featurizer(load_dictionary(args.dictionary), load_lexicon(args.lexicon), raster_cfg)


def _require_text(*texts: str):
    if any(not text.strip() for text in texts):
        raise UsageError("text arguments must not be empty")


def _load_model(path: Path):
    try:
        return load_checkpoint(path)
    except (IoError, FormatVersionMismatch) as e:
        raise RuntimeFailure(f"Cannot load model: {e}") from e


def cmd_featurize(args: argparse.Namespace) -> int:
    _require_text(args.text)
    result = _featurizer(args).featurize(args.text, args.script)
    if args.out:
        export_feature_png(result.feature, args.out)
    if args.raw:
        dump_raw(result.feature.grid, args.raw)
    _emit(result.to_dict())
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    _require_text(args.a, args.b)
    featurizer = _featurizer(args)
    a = featurizer.featurize(args.a, args.script_a)
    b = featurizer.featurize(args.b, args.script_b)
    pair = compose_pair(a.feature, b.feature)
    payload: Dict[str, Any] = {
        "a": {"text": args.a, "symbols": list(a.sequence.symbols), "mapping": list(a.mapping)},
        "b": {"text": args.b, "symbols": list(b.sequence.symbols), "mapping": list(b.mapping)},
        "cosine_distance": cosine_distance(a.feature, b.feature),
        "overlap_pixels": overlap_pixels(pair),
    }
    if args.model:
        params, _, _ = _load_model(args.model)
        label, probability = predict(params, pair)
        payload["cnn"] = {"label": label, "probability": probability}
    if args.viz:
        export_rgb_png(pair, args.viz)
        payload["viz"] = str(args.viz)
    _emit(payload)
    return EXIT_OK


def cmd_viz(args: argparse.Namespace) -> int:
    _require_text(args.a, args.b)
    featurizer = _featurizer(args)
    pair = compose_pair(featurizer.feature(args.a, args.script_a), featurizer.feature(args.b, args.script_b))
    paths = export_channel_views(pair, args.out_dir, args.stem)
    _emit({
        "red": str(paths[0]),
        "green": str(paths[1]),
        "overlay": str(paths[2]),
        "overlap_pixels": overlap_pixels(pair),
    })
    return EXIT_OK


def cmd_dataset_gen(args: argparse.Namespace) -> int:
    dissimilar = args.dissimilar if args.dissimilar is not None else default_dissimilar_count(args.similar)
    if args.similar <= 0 or dissimilar <= 0:
        raise UsageError("--similar and --dissimilar must be positive")
    records = generate_synthetic(
        args.similar, dissimilar, args.seed, load_dictionary(args.dictionary), load_lexicon(args.lexicon)
    )
    if args.out:
        write_jsonl(records, args.out)
        _emit({"out": str(args.out), "n_similar": args.similar, "n_dissimilar": dissimilar, "seed": args.seed})
    else:
        dump_jsonl(records, sys.stdout)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    try:
        cnn_config = CnnConfig(
            fc1_units=args.fc1_units,
            conv1_filters=args.conv1_filters,
            conv2_filters=args.conv2_filters,
            learning_rate=args.lr,
            batch_size=args.batch,
            epochs=args.epochs,
            max_steps=args.max_steps,
            rng_seed=args.seed,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e

    records = read_jsonl(args.data)
    samples = FeaturizationPool(_featurizer(args)).build_samples(records)
    params, state, report = train_with_state(samples, cnn_config)
    save_checkpoint(params, state, cnn_config, args.out)

    payload = {"config": cnn_config.to_dict(), "report": report.to_dict(include_timing=args.timing)}
    if args.report:
        try:
            args.report.write_text(
                json.dumps({"schema": SCHEMA, **payload}, ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        except OSError as e:
            raise RuntimeFailure(f"Cannot write report {args.report}: {e}") from e
    _emit(payload)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    featurizer = _featurizer(args)
    records = read_jsonl(args.data)
    pool = FeaturizationPool(featurizer)
    if args.model:
        params, _, cnn_config = _load_model(args.model)
        seed = args.seed if args.seed is not None else cnn_config.rng_seed
        report = evaluate_cnn(params, records, seed=seed, split=args.split, pool=pool)
    else:
        seed = args.seed if args.seed is not None else 0
        report = evaluate_baseline(records, seed=seed, threshold=args.threshold, split=args.split, pool=pool)
    _emit({"split": args.split, "seed": seed, **report.to_dict()})
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    if args.bins < 2:
        raise UsageError("--bins must be at least 2")
    records = read_jsonl(args.data)
    pool = FeaturizationPool(_featurizer(args))
    distances, labels = pair_distances(records, pool)
    histogram = histogram_from_distances(distances, labels, args.bins)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as handle:
                histogram.write_csv(handle)
        except OSError as e:
            raise RuntimeFailure(f"Cannot write {args.out}: {e}") from e
        summary = {}
        if 0 < labels.sum() < len(labels):
            summary = summarize_distances(distances, labels).to_dict()
        _emit({"out": str(args.out), "bins": args.bins, "summary": summary})
    else:
        histogram.write_csv(sys.stdout)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        config.configure_logging()
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK

    config.configure_logging(logging.DEBUG if args.verbose else None)
    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except (RuntimeFailure, IoError) as e:
        logger.error(str(e))
        return EXIT_RUNTIME
    except (PhoneticFeatureError, ValueError) as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
