"""Command-line front door for the transferability metrics engine.

Exit codes: 0 success, 1 usage error, 2 validation or schema failure,
3 scalar IGap requested over an empty qualifying window. Outputs are
written atomically after all computation succeeds, so failed runs leave
no partial files. Data goes to --out when given, else to stdout;
per-direction summary lines go to stdout, or to stderr when stdout
carries data.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import corpus, figures, fileio, loader, metrics, ranking, report, simulator
from .errors import (
    ConfigError,
    DegenerateRanking,
    DirectionError,
    EmptyQualifyingWindow,
    EngineError,
)
from .types import ROLE_GENERIC, SEVERITY_ERROR, CheckpointPool, EvalSet

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_EMPTY_WINDOW = 3

DEFAULT_EPSILON = "0.001"
DEFAULT_CURVE_EPSILON = "0.025"
DEFAULT_E_PRIME = "0"
DEFAULT_GRID = "0.2:0:0.025"
PROFILE_LARGE_SCALE = "large-scale"
PROFILES = {PROFILE_LARGE_SCALE: {"e_prime": "0.03", "epsilon": "0.025"}}

FORMAT_CSV = "csv"
FORMAT_PLOT_JSON = "plot-json"


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """One parsed invocation; every knob the subcommands read."""

    command: str
    manifest: Path | None = None
    source: str | None = None
    sources: tuple[str, ...] = ()
    targets: tuple[str, ...] = ()
    e_prime: Fraction = Fraction(0)
    epsilon: Fraction = Fraction(1, 1000)
    grid: tuple[Fraction, ...] = ()
    metric: str = "igap"
    seed: int = 0
    ratio: Fraction = Fraction(0)
    num_labels: int = 2
    out: Path | None = None
    format: str = FORMAT_CSV
    percent: bool = False
    per_seed: bool = False
    embeddings: Path | None = None
    labels: tuple[Path, ...] = ()
    corpus_tsv: Path | None = None
    ids_file: Path | None = None
    text_a: Path | None = None
    text_b: Path | None = None
    lang_a: str = "a"
    lang_b: str = "b"
    sim_config: Path | None = None


def _fraction_flag(
    text: str,
    name: str,
    *,
    minimum: Fraction = Fraction(0),
    maximum: Fraction = Fraction(1),
    exclusive_minimum: bool = False,
) -> Fraction:
    try:
        value = metrics.as_fraction(text, name)
    except ConfigError as exc:
        raise UsageError(str(exc))
    if exclusive_minimum and value <= minimum:
        raise UsageError(f"{name} must be greater than {minimum}, got {text}")
    if not exclusive_minimum and value < minimum:
        raise UsageError(f"{name} must be at least {minimum}, got {text}")
    if value > maximum:
        raise UsageError(f"{name} must be at most {maximum}, got {text}")
    return value


def _parse_grid(spec: str) -> tuple[Fraction, ...]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {spec!r}")
    try:
        return metrics.make_grid(parts[0], parts[1], parts[2])
    except ConfigError as exc:
        raise UsageError(str(exc))


def build_parser() -> _Parser:
    parser = _Parser(
        prog="igap",
        description=(
            "Cross-lingual transferability metrics over checkpoint pools: "
            "transfer-error decomposition, windowed-minimum IGap, direction "
            "ranking, representation baselines, and a planted-truth simulator."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text)

    def manifest_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", required=True, help="pool manifest JSON")

    def direction_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--source", required=True, help="source language code")
        p.add_argument(
            "--target",
            action="append",
            default=[],
            help="target language code (repeatable; default: all available)",
        )

    def output_flags(p: argparse.ArgumentParser, formats: bool = True) -> None:
        p.add_argument("--out", help="output path (default: stdout)")
        if formats:
            p.add_argument(
                "--format",
                choices=[FORMAT_CSV, FORMAT_PLOT_JSON],
                default=FORMAT_CSV,
                help="output format",
            )
        p.add_argument(
            "--percent",
            action="store_true",
            help="print error/accuracy values as percentages",
        )

    def window_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--eprime", help="target training error (default 0)")
        p.add_argument(
            "--epsilon", help="window width above eprime (default 0.001)"
        )
        p.add_argument(
            "--profile",
            choices=sorted(PROFILES),
            help="named parameter preset",
        )

    p = add("validate", "check a pool for schema and alignment issues")
    manifest_flag(p)

    p = add("decompose", "split transfer error into its three components")
    manifest_flag(p)
    direction_flags(p)
    output_flags(p)

    p = add("gap", "accuracy gap between source and target validation sets")
    manifest_flag(p)
    direction_flags(p)
    output_flags(p)

    p = add("igap", "windowed-minimum inter-language error component")
    manifest_flag(p)
    direction_flags(p)
    window_flags(p)
    p.add_argument(
        "--per-seed", action="store_true", help="one result per seed, not pooled"
    )
    output_flags(p, formats=False)

    p = add("igap-curve", "sweep igap over a grid of training-error targets")
    manifest_flag(p)
    direction_flags(p)
    p.add_argument(
        "--grid",
        default=DEFAULT_GRID,
        help=f"descending grid start:stop:step (default {DEFAULT_GRID})",
    )
    p.add_argument(
        "--epsilon", help=f"window width (default {DEFAULT_CURVE_EPSILON})"
    )
    p.add_argument("--profile", choices=sorted(PROFILES), help="named preset")
    p.add_argument(
        "--per-seed", action="store_true", help="one curve per seed, not pooled"
    )
    output_flags(p)

    p = add("tdr", "score metric-predicted direction rankings against gold")
    manifest_flag(p)
    p.add_argument(
        "--source",
        action="append",
        default=[],
        help="source language (repeatable; default: all with training sets)",
    )
    p.add_argument(
        "--metric",
        choices=[ranking.METRIC_L2, ranking.METRIC_DOT, ranking.METRIC_COS, "igap"],
        default="igap",
        help="ranking metric",
    )
    p.add_argument("--embeddings", help="vectors JSONL (for l2/dot/cos)")
    window_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--percent", action="store_true")

    p = add("baseline", "mean representation similarity per direction")
    p.add_argument("--embeddings", required=True, help="vectors JSONL")
    p.add_argument("--source", required=True)
    p.add_argument(
        "--target",
        action="append",
        default=[],
        help="target language (repeatable; default: all in the file)",
    )
    p.add_argument(
        "--metric",
        choices=list(ranking.SIMILARITY_METRICS),
        default=ranking.METRIC_COS,
    )
    p.add_argument("--out", help="output CSV path (default: stdout)")

    p = add("gen-labels", "plant shared random labels over a parallel corpus")
    p.add_argument("--corpus", help="TSV of (example_id, text_a, text_b)")
    p.add_argument("--ids", help="id file (one per line), with --text-a/--text-b")
    p.add_argument("--text-a", help="side-a text file aligned with --ids")
    p.add_argument("--text-b", help="side-b text file aligned with --ids")
    p.add_argument("--lang-a", default="a", help="language code of side a")
    p.add_argument("--lang-b", default="b", help="language code of side b")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-labels", type=int, default=2)
    p.add_argument("--out", required=True, help="output directory")

    p = add("corrupt", "resample a seeded fraction of labels")
    p.add_argument(
        "--labels",
        action="append",
        required=True,
        help="labels JSONL (repeat for translation-linked joint corruption)",
    )
    p.add_argument("--num-labels", type=int, required=True)
    p.add_argument("--ratio", required=True, help="fraction of labels to resample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--out",
        required=True,
        help="output file (single input) or directory",
    )

    p = add("simulate", "generate a pool with planted transferability")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--out", required=True, help="output directory")

    p = add("report", "all metrics for a pool, with figures")
    manifest_flag(p)
    direction_flags(p)
    p.add_argument("--grid", default=DEFAULT_GRID)
    p.add_argument("--epsilon", help=f"curve window (default {DEFAULT_CURVE_EPSILON})")
    p.add_argument("--eprime", help="scalar window start for the summary (default 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--percent", action="store_true")

    return parser


def _resolve_window(
    args: argparse.Namespace, default_epsilon: str
) -> tuple[Fraction, Fraction]:
    profile = PROFILES.get(getattr(args, "profile", None) or "", {})
    e_prime_text = (
        getattr(args, "eprime", None)
        or profile.get("e_prime")
        or DEFAULT_E_PRIME
    )
    epsilon_text = (
        getattr(args, "epsilon", None) or profile.get("epsilon") or default_epsilon
    )
    e_prime = _fraction_flag(e_prime_text, "eprime")
    epsilon = _fraction_flag(epsilon_text, "epsilon", exclusive_minimum=True)
    return e_prime, epsilon


def parse_args(argv: list[str]) -> RunConfig:
    args = build_parser().parse_args(argv)
    command = args.command

    e_prime = Fraction(DEFAULT_E_PRIME)
    epsilon = Fraction(DEFAULT_EPSILON)
    if command in ("igap", "tdr"):
        e_prime, epsilon = _resolve_window(args, DEFAULT_EPSILON)
    elif command in ("igap-curve", "report"):
        e_prime, epsilon = _resolve_window(args, DEFAULT_CURVE_EPSILON)

    grid: tuple[Fraction, ...] = ()
    if command in ("igap-curve", "report"):
        grid = _parse_grid(args.grid)

    ratio = Fraction(0)
    if command == "corrupt":
        try:
            ratio = metrics.as_fraction(args.ratio, "ratio")
        except ConfigError as exc:
            raise UsageError(str(exc))

    sources: tuple[str, ...] = ()
    source = getattr(args, "source", None)
    if command == "tdr":
        sources = tuple(dict.fromkeys(source or []))
        source = None

    targets = tuple(dict.fromkeys(getattr(args, "target", []) or []))
    num_labels = getattr(args, "num_labels", 2)
    if num_labels < 1:
        raise UsageError(f"num-labels must be positive, got {num_labels}")

    out = getattr(args, "out", None)
    return RunConfig(
        command=command,
        manifest=Path(args.manifest) if getattr(args, "manifest", None) else None,
        source=source,
        sources=sources,
        targets=targets,
        e_prime=e_prime,
        epsilon=epsilon,
        grid=grid,
        metric=getattr(args, "metric", "igap"),
        seed=getattr(args, "seed", 0),
        ratio=ratio,
        num_labels=num_labels,
        out=Path(out) if out else None,
        format=getattr(args, "format", FORMAT_CSV),
        percent=getattr(args, "percent", False),
        per_seed=getattr(args, "per_seed", False),
        embeddings=Path(args.embeddings)
        if getattr(args, "embeddings", None)
        else None,
        labels=tuple(Path(p) for p in getattr(args, "labels", []) or []),
        corpus_tsv=Path(args.corpus) if getattr(args, "corpus", None) else None,
        ids_file=Path(args.ids) if getattr(args, "ids", None) else None,
        text_a=Path(args.text_a) if getattr(args, "text_a", None) else None,
        text_b=Path(args.text_b) if getattr(args, "text_b", None) else None,
        lang_a=getattr(args, "lang_a", "a"),
        lang_b=getattr(args, "lang_b", "b"),
        sim_config=Path(args.config) if getattr(args, "config", None) else None,
    )


def _say(config: RunConfig, message: str) -> None:
    stream = sys.stderr if config.out is None else sys.stdout
    print(message, file=stream)


def _emit_file_or_stdout(config: RunConfig, text: str) -> None:
    if config.out is None:
        sys.stdout.write(text)
        return
    if config.out.is_dir():
        raise UsageError(f"--out must be a file path, got directory {config.out}")
    fileio.atomic_write_text(config.out, text)


def _write_artifacts(out_dir: Path, artifacts: dict[str, str | bytes]) -> None:
    for name, payload in sorted(artifacts.items()):
        path = out_dir / name
        if isinstance(payload, bytes):
            fileio.atomic_write_bytes(path, payload)
        else:
            fileio.atomic_write_text(path, payload)


def _resolve_targets(pool: CheckpointPool, config: RunConfig) -> tuple[str, ...]:
    if config.targets:
        return config.targets
    targets = pool.targets_of(config.source)
    if not targets:
        raise DirectionError(
            f"pool {pool.pool_id!r}: no target languages available for "
            f"source {config.source!r}"
        )
    return targets


def _window_text(e_prime: Fraction, epsilon: Fraction) -> str:
    return f"[{float(e_prime):g}, {float(e_prime + epsilon):g})"


def _fmt(value: float | None, config: RunConfig) -> str:
    return report.format_value(value, config.percent) or "absent"


def cmd_validate(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest, strict=False)
    issues = list(pool.load_issues) + list(loader.validate_pool(pool))
    print(f"{len(issues)} issues")
    for issue in issues:
        print(str(issue))
    has_errors = any(issue.severity == SEVERITY_ERROR for issue in issues)
    return EXIT_INVALID if has_errors else EXIT_OK


def _direction_decompositions(
    pool: CheckpointPool, config: RunConfig, require_source_val: bool = False
) -> list[tuple[str, tuple[metrics.DecompositionReport, ...]]]:
    out = []
    for target in _resolve_targets(pool, config):
        sets = pool.direction_sets(
            config.source, target, require_source_val=require_source_val
        )
        reports = metrics.pool_decompositions(
            pool,
            config.source,
            target,
            with_transfer_gap=sets.source_val is not None,
        )
        out.append((target, reports))
    return out


def cmd_decompose(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest)
    by_target = _direction_decompositions(pool, config)
    if config.format == FORMAT_CSV:
        text = report.decompose_csv(
            [r for _, reports in by_target for r in reports], config.percent
        )
    else:
        text = report.decompose_plot_json(
            [(f"{config.source}->{t}", reports) for t, reports in by_target],
            config.percent,
        )
    _emit_file_or_stdout(config, text)
    for target, reports in by_target:
        means = metrics.mean_decomposition(reports)
        _say(
            config,
            f"{config.source}->{target}: {len(reports)} checkpoints, "
            f"mean e={_fmt(means['e'], config)} "
            f"(e_train={_fmt(means['e_train'], config)}, "
            f"g_inter={_fmt(means['g_inter'], config)}, "
            f"g_intra={_fmt(means['g_intra'], config)})",
        )
    return EXIT_OK


def cmd_gap(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest)
    by_target = _direction_decompositions(pool, config, require_source_val=True)
    if config.format == FORMAT_CSV:
        text = report.gap_csv(
            [r for _, reports in by_target for r in reports], config.percent
        )
    else:
        text = report.gap_plot_json(
            [(f"{config.source}->{t}", reports) for t, reports in by_target],
            config.percent,
        )
    _emit_file_or_stdout(config, text)
    for target, reports in by_target:
        mean_gap = sum(r.transfer_gap for r in reports) / len(reports)
        _say(
            config,
            f"{config.source}->{target}: {len(reports)} checkpoints, "
            f"mean transfer_gap={_fmt(mean_gap, config)}",
        )
    return EXIT_OK


def _scalar_igap_results(
    pool: CheckpointPool, config: RunConfig
) -> list[tuple[str, metrics.IGapResult]]:
    results = []
    for target in _resolve_targets(pool, config):
        decompositions = metrics.pool_decompositions(pool, config.source, target)
        if config.per_seed:
            for seed in pool.seeds:
                results.append(
                    (
                        target,
                        metrics.igap_from_decompositions(
                            [d for d in decompositions if d.seed == seed],
                            config.e_prime,
                            config.epsilon,
                            seed=seed,
                        ),
                    )
                )
        else:
            results.append(
                (
                    target,
                    metrics.igap_from_decompositions(
                        decompositions, config.e_prime, config.epsilon
                    ),
                )
            )
    return results


def cmd_igap(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest)
    results = _scalar_igap_results(pool, config)
    window = _window_text(config.e_prime, config.epsilon)
    for target, result in results:
        if result.value is None:
            seed_note = "" if result.seed is None else f" (seed {result.seed})"
            raise EmptyQualifyingWindow(
                f"{config.source}->{target}{seed_note}: no checkpoint with "
                f"training error in {window}"
            )
    text = report.igap_csv(
        [(config.source, target, r) for target, r in results], config.percent
    )
    _emit_file_or_stdout(config, text)
    for target, r in results:
        seed_note = "" if r.seed is None else f" seed {r.seed}"
        _say(
            config,
            f"{config.source}->{target}{seed_note}: igap={_fmt(r.value, config)} "
            f"in {window} (witness {r.witness}, {r.qualifying_count} qualifying)",
        )
    if not config.per_seed and len(results) > 1:
        mean_value = sum(r.value for _, r in results) / len(results)
        _say(
            config,
            f"{config.source}: mean igap over {len(results)} targets = "
            f"{_fmt(mean_value, config)}",
        )
    return EXIT_OK


def _curves(
    pool: CheckpointPool, config: RunConfig
) -> list[tuple[str, int | None, metrics.IGapCurve]]:
    curves = []
    for target in _resolve_targets(pool, config):
        if config.per_seed:
            for seed in pool.seeds:
                curves.append(
                    (
                        target,
                        seed,
                        metrics.igap_curve(
                            pool,
                            config.source,
                            target,
                            config.grid,
                            config.epsilon,
                            seed=seed,
                        ),
                    )
                )
        else:
            curves.append(
                (
                    target,
                    None,
                    metrics.igap_curve(
                        pool, config.source, target, config.grid, config.epsilon
                    ),
                )
            )
    return curves


def _curve_name(config: RunConfig, target: str, seed: int | None) -> str:
    name = f"{config.source}->{target}"
    return name if seed is None else f"{name} seed={seed}"


def cmd_igap_curve(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest)
    curves = _curves(pool, config)
    if config.format == FORMAT_CSV:
        text = report.igap_curve_csv(
            [(config.source, target, curve) for target, _, curve in curves],
            config.percent,
        )
    else:
        text = report.curve_plot_json(
            [
                (_curve_name(config, target, seed), curve)
                for target, seed, curve in curves
            ],
            config.percent,
        )
    _emit_file_or_stdout(config, text)
    for target, seed, curve in curves:
        present = sum(1 for p in curve.points if p.value is not None)
        _say(
            config,
            f"{_curve_name(config, target, seed)}: {present}/{len(curve.points)} "
            f"grid points present (epsilon {float(config.epsilon):g})",
        )
    return EXIT_OK


def cmd_baseline(config: RunConfig) -> int:
    targets = config.targets
    if not targets:
        by_language = fileio.load_embeddings_file(config.embeddings)
        targets = tuple(
            sorted(lang for lang in by_language if lang != config.source)
        )
        if not targets:
            raise DirectionError(
                f"{config.embeddings}: no languages besides {config.source!r}"
            )
    rows = []
    for target in targets:
        pairs = loader.load_embedding_pairs(config.embeddings, config.source, target)
        score = ranking.similarity_score(pairs, config.metric)
        rows.append(
            (
                config.source,
                target,
                config.metric,
                pairs.n_pairs,
                score,
                ranking.SIMILARITY_DIRECTION[config.metric],
            )
        )
    _emit_file_or_stdout(config, report.baseline_csv(rows))
    for _, target, metric_name, n_pairs, score, _direction in rows:
        _say(
            config,
            f"{config.source}->{target}: {metric_name}="
            f"{report.format_value(score)} over {n_pairs} pairs",
        )
    return EXIT_OK


def cmd_tdr(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest)
    if config.metric in ranking.SIMILARITY_METRICS and config.embeddings is None:
        raise UsageError(f"--embeddings is required with --metric {config.metric}")
    sources = config.sources or pool.source_languages()
    if not sources:
        raise DirectionError(
            f"pool {pool.pool_id!r} has no source-training eval sets"
        )
    window = _window_text(config.e_prime, config.epsilon)
    languages = list(pool.languages)
    cells: dict[tuple[str, str], float] = {}
    accuracy_rows = []
    summaries = []
    for source in sources:
        targets = pool.targets_of(source)
        golds = ranking.gold_accuracies(pool, source, targets) if targets else {}
        cells.update({(source, t): v for t, v in golds.items()})
        if len(targets) < 2:
            summaries.append(
                f"{source}: skipped ({len(targets)} target(s), need 2 to rank)"
            )
            continue
        gold_table = ranking.ScoreTable(
            source_language=source, scores=golds, direction=ranking.HIGHER_IS_BETTER
        )
        if config.metric == "igap":
            scores = {}
            for target in targets:
                result = metrics.igap(
                    pool, source, target, config.e_prime, config.epsilon
                )
                if result.value is None:
                    raise EmptyQualifyingWindow(
                        f"{source}->{target}: cannot rank, no checkpoint with "
                        f"training error in {window}"
                    )
                scores[target] = result.value
            predicted_table = ranking.ScoreTable(
                source_language=source,
                scores=scores,
                direction=ranking.LOWER_IS_BETTER,
            )
        else:
            scores = {}
            for target in targets:
                pairs = loader.load_embedding_pairs(
                    config.embeddings, source, target
                )
                scores[target] = ranking.similarity_score(pairs, config.metric)
            predicted_table = ranking.ScoreTable(
                source_language=source,
                scores=scores,
                direction=ranking.SIMILARITY_DIRECTION[config.metric],
            )
        gold_rank = ranking.rank_by_scores(gold_table)
        predicted_rank = ranking.rank_by_scores(predicted_table)
        value = ranking.tdr_accuracy(gold_rank, predicted_rank)
        gold_ties = gold_table.tie_count()
        predicted_ties = predicted_table.tie_count()
        accuracy_rows.append(
            (source, config.metric, value, len(targets), gold_ties, predicted_ties)
        )
        tie_note = (
            f" [warning: {gold_ties} gold tie(s), broken lexicographically]"
            if gold_ties
            else ""
        )
        summaries.append(
            f"{source}: tdr[{config.metric}]={_fmt(value, config)} over "
            f"{len(targets)} targets{tie_note}"
        )
    if not accuracy_rows:
        raise DegenerateRanking("no source language has 2 or more ranked targets")
    artifacts = {
        "accuracy_matrix.csv": report.accuracy_matrix_csv(
            languages, cells, config.percent
        ),
        "tdr_accuracy.csv": report.tdr_accuracy_csv(accuracy_rows, config.percent),
    }
    _write_artifacts(config.out, artifacts)
    for line in summaries:
        _say(config, line)
    _say(config, f"wrote {', '.join(sorted(artifacts))} -> {config.out}")
    return EXIT_OK


def cmd_gen_labels(config: RunConfig) -> int:
    if config.corpus_tsv is not None:
        parallel = corpus.read_parallel_tsv(
            config.corpus_tsv, config.lang_a, config.lang_b
        )
    elif config.ids_file and config.text_a and config.text_b:
        parallel = corpus.read_parallel_texts(
            config.ids_file,
            config.text_a,
            config.text_b,
            config.lang_a,
            config.lang_b,
        )
    else:
        raise UsageError("provide --corpus, or --ids together with --text-a/--text-b")
    labeled = corpus.gen_random_labels(parallel, config.seed, config.num_labels)
    source_set, translated_set = labeled.to_eval_sets()
    set_entries = []
    artifacts: dict[str, str | bytes] = {}
    for eval_set in (source_set, translated_set):
        name = f"{eval_set.eval_set_id}.jsonl"
        artifacts[name] = "".join(
            json.dumps(
                {"example_id": rec.example_id, "label": rec.label}, sort_keys=True
            )
            + "\n"
            for rec in eval_set.labels
        )
        entry = {
            "eval_set_id": eval_set.eval_set_id,
            "language": eval_set.language,
            "role": eval_set.role,
            "labels_path": name,
        }
        if eval_set.translation_of is not None:
            entry["translation_of"] = eval_set.translation_of
        set_entries.append(entry)
    artifacts["eval_sets.json"] = (
        json.dumps(
            {
                "num_labels": config.num_labels,
                "generator_seed": config.seed,
                "eval_sets": set_entries,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    _write_artifacts(config.out, artifacts)
    _say(
        config,
        f"labeled {len(parallel)} pairs over {config.num_labels} classes "
        f"(seed {config.seed}) -> {config.out}",
    )
    return EXIT_OK


def cmd_corrupt(config: RunConfig) -> int:
    eval_sets = []
    for path in config.labels:
        records = fileio.load_labels_file(path, config.num_labels)
        eval_sets.append(
            EvalSet(
                eval_set_id=path.stem,
                language="und",
                role=ROLE_GENERIC,
                num_labels=config.num_labels,
                labels=records,
            )
        )
    if len(eval_sets) > 1:
        corrupted = corpus.corrupt_jointly(eval_sets, config.ratio, config.seed)
    else:
        corrupted = (corpus.corrupt_labels(eval_sets[0], config.ratio, config.seed),)
    single_file = len(corrupted) == 1 and config.out.suffix == ".jsonl"
    outputs = []
    for original_path, eval_set in zip(config.labels, corrupted):
        out_path = config.out if single_file else config.out / original_path.name
        outputs.append((out_path, eval_set))
    for out_path, eval_set in outputs:
        fileio.write_jsonl(
            out_path,
            [
                {"example_id": rec.example_id, "label": rec.label}
                for rec in eval_set.labels
            ],
        )
    count = corpus.corruption_count(config.ratio, len(corrupted[0]))
    for out_path, eval_set in outputs:
        _say(
            config,
            f"resampled {count}/{len(eval_set)} labels "
            f"(ratio {float(config.ratio):g}, seed {config.seed}) -> {out_path}",
        )
    return EXIT_OK


def cmd_simulate(config: RunConfig) -> int:
    sim_config = simulator.SimConfig.from_json_file(config.sim_config)
    pool = simulator.simulate_pool(sim_config)
    manifest_path = loader.write_pool(pool, config.out)
    _say(
        config,
        f"pool {pool.pool_id}: {len(pool.checkpoints)} checkpoints, "
        f"{len(pool.eval_sets)} eval sets -> {manifest_path}",
    )
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    pool = loader.load_pool(config.manifest)
    artifacts: dict[str, str | bytes] = {}
    summaries = []
    for target in _resolve_targets(pool, config):
        sets = pool.direction_sets(config.source, target)
        reports = metrics.pool_decompositions(
            pool,
            config.source,
            target,
            with_transfer_gap=sets.source_val is not None,
        )
        curve = metrics.igap_curve(
            pool, config.source, target, config.grid, config.epsilon
        )
        direction = f"{config.source}->{target}"
        stem = f"{config.source}_{target}"
        title = f"{pool.pool_id}: {direction}"
        artifacts[f"{stem}_decompose.csv"] = report.decompose_csv(
            reports, config.percent
        )
        artifacts[f"{stem}_igap_curve.csv"] = report.igap_curve_csv(
            [(config.source, target, curve)], config.percent
        )
        artifacts[f"{stem}_igap_curve.json"] = report.curve_plot_json(
            [(direction, curve)], config.percent
        )
        artifacts[f"{stem}_components.png"] = figures.components_figure(
            title, reports, config.percent
        )
        artifacts[f"{stem}_igap_curve.png"] = figures.curve_figure(
            title, [(direction, curve)], config.percent
        )
        scalar = metrics.igap_from_decompositions(
            reports, config.e_prime, Fraction(DEFAULT_EPSILON)
        )
        present = sum(1 for p in curve.points if p.value is not None)
        summaries.append(
            f"{direction}: igap={_fmt(scalar.value, config)} at "
            f"{_window_text(config.e_prime, Fraction(DEFAULT_EPSILON))}, "
            f"curve {present}/{len(curve.points)} points, "
            f"{len(reports)} checkpoints"
        )
    _write_artifacts(config.out, artifacts)
    for line in summaries:
        _say(config, line)
    _say(config, f"wrote {len(artifacts)} files -> {config.out}")
    return EXIT_OK


_DISPATCH = {
    "validate": cmd_validate,
    "decompose": cmd_decompose,
    "gap": cmd_gap,
    "igap": cmd_igap,
    "igap-curve": cmd_igap_curve,
    "tdr": cmd_tdr,
    "baseline": cmd_baseline,
    "gen-labels": cmd_gen_labels,
    "corrupt": cmd_corrupt,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
        return _DISPATCH[config.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EmptyQualifyingWindow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_WINDOW
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
