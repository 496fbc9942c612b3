"""Command line entry points: init-model, run, finalize."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import DatasetError, JobError, LayerOutOfRange, ModelLoadError
from .export import finalize, run_export
from .job import load_job
from .model import ModelConfig, new_model, save_bundle

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igap-export",
        description=(
            "Run a text-classifier checkpoint over labeled datasets and "
            "emit predictions, sentence embeddings, and pool manifest "
            "fragments."
        ),
    )
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    init_cmd = commands.add_parser(
        "init-model", help="write a freshly initialized model bundle"
    )
    init_cmd.add_argument("--out", required=True, help="bundle directory")
    init_cmd.add_argument("--num-labels", type=int, default=3)
    init_cmd.add_argument("--vocab-size", type=int, default=512)
    init_cmd.add_argument("--hidden", type=int, default=16)
    init_cmd.add_argument("--layers", type=int, default=2)
    init_cmd.add_argument("--seed", type=int, default=0, help="init seed")
    init_cmd.add_argument(
        "--use-specials",
        action="store_true",
        help="wrap token sequences in begin/end marker tokens",
    )

    run_cmd = commands.add_parser(
        "run", help="export one checkpoint over the job's datasets"
    )
    run_cmd.add_argument("--job", required=True, help="job description JSON")
    run_cmd.add_argument("--checkpoint-id", required=True)
    run_cmd.add_argument("--seed", type=int, required=True)
    run_cmd.add_argument("--step", type=int, required=True)
    run_cmd.add_argument(
        "--layer",
        type=int,
        default=None,
        help="hidden layer for sentence embeddings (overrides the job)",
    )
    run_cmd.add_argument("--batch-size", type=int, default=None)
    run_cmd.add_argument(
        "--exclude-specials",
        action="store_true",
        help="leave marker tokens out of the embedding mean",
    )

    finalize_cmd = commands.add_parser(
        "finalize", help="assemble exported fragments into a pool manifest"
    )
    finalize_cmd.add_argument("--out-dir", required=True)
    finalize_cmd.add_argument("--pool-id", required=True)
    finalize_cmd.add_argument("--model-name", required=True)
    finalize_cmd.add_argument("--algorithm-name", required=True)
    return parser


def cmd_init_model(args: argparse.Namespace) -> int:
    config = ModelConfig(
        vocab_size=args.vocab_size,
        hidden_size=args.hidden,
        num_layers=args.layers,
        num_labels=args.num_labels,
        use_specials=args.use_specials,
    )
    bundle_dir = save_bundle(new_model(config, args.seed), args.out)
    print(f"wrote model bundle to {bundle_dir}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    job = load_job(args.job)
    if args.layer is not None:
        job = dataclasses.replace(job, embedding_layer=args.layer)
    if args.batch_size is not None:
        job = dataclasses.replace(job, batch_size=args.batch_size)
    if args.exclude_specials:
        job = dataclasses.replace(job, pool_specials=False)
    result = run_export(job, args.checkpoint_id, args.seed, args.step)
    print(
        f"wrote {len(result.prediction_paths)} prediction files, embeddings, "
        f"and fragment for checkpoint {args.checkpoint_id!r} to {result.out_dir}"
    )
    return EXIT_OK


def cmd_finalize(args: argparse.Namespace) -> int:
    manifest_path = finalize(
        args.out_dir, args.pool_id, args.model_name, args.algorithm_name
    )
    print(f"wrote {manifest_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handlers = {
        "init-model": cmd_init_model,
        "run": cmd_run,
        "finalize": cmd_finalize,
    }
    try:
        return handlers[args.command](args)
    except JobError as exc:
        print(f"igap-export: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelLoadError, DatasetError, LayerOutOfRange, OSError) as exc:
        print(f"igap-export: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
