"""Manifest-driven pool loading, validation, and writing.

``load_pool`` is strict by default: the first invariant violation raises
(metric values on partially covered pools are not meaningful quantities).
With ``strict=False`` it repairs what it can (dropping duplicates, keeping
first occurrences) and records every problem, so the ``validate`` command
can list all issues of a broken pool in one pass instead of stopping at
the first.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from . import fileio
from .errors import AlignmentError, MissingFile, SchemaError
from .types import (
    CATEGORY_ALIGNMENT,
    CATEGORY_SCHEMA,
    ROLE_TRANSLATED_TRAIN,
    ROLES,
    SEVERITY_ERROR,
    CheckpointEval,
    CheckpointPool,
    EmbeddingPairSet,
    EvalSet,
    ExampleLabel,
    PredictionRecord,
    ValidationIssue,
    ValidationReport,
)

_ISSUE_EXCEPTIONS = {
    CATEGORY_SCHEMA: SchemaError,
    CATEGORY_ALIGNMENT: AlignmentError,
}


def _error(
    issues: list[ValidationIssue],
    location: str,
    message: str,
    category: str = CATEGORY_SCHEMA,
) -> None:
    issues.append(
        ValidationIssue(
            severity=SEVERITY_ERROR,
            location=location,
            message=message,
            category=category,
        )
    )


def _read_manifest(manifest_path: Path) -> dict:
    if not manifest_path.is_file():
        raise MissingFile(f"no such file: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{manifest_path}: invalid JSON ({exc.msg})")
    if not isinstance(manifest, dict):
        raise SchemaError(f"{manifest_path}: manifest must be a JSON object")
    return manifest


def _manifest_str(manifest: dict, key: str, where: str) -> str:
    value = manifest.get(key)
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{where}: {key!r} must be a non-empty string")
    return value


def _manifest_int(obj: dict, key: str, where: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: {key!r} must be an integer")
    return value


def _parse_label_map(manifest: dict, where: str) -> dict[str, int] | None:
    raw = manifest.get("label_map")
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: 'label_map' must be an object")
    label_map: dict[str, int] = {}
    for name, index in raw.items():
        if isinstance(index, bool) or not isinstance(index, int):
            raise SchemaError(f"{where}: label_map[{name!r}] must be an integer")
        label_map[name] = index
    return label_map


def _dedupe_labels(
    records: tuple[ExampleLabel, ...],
    location: str,
    issues: list[ValidationIssue],
) -> tuple[ExampleLabel, ...]:
    seen: set[str] = set()
    kept = []
    for rec in records:
        if rec.example_id in seen:
            _error(issues, location, f"duplicate id {rec.example_id!r}")
            continue
        seen.add(rec.example_id)
        kept.append(rec)
    return tuple(kept)


def _dedupe_predictions(
    records: tuple[PredictionRecord, ...],
    location: str,
    issues: list[ValidationIssue],
) -> tuple[PredictionRecord, ...]:
    seen: set[str] = set()
    kept = []
    for rec in records:
        if rec.example_id in seen:
            _error(
                issues,
                location,
                f"duplicate prediction for {rec.example_id!r}",
                CATEGORY_ALIGNMENT,
            )
            continue
        seen.add(rec.example_id)
        kept.append(rec)
    return tuple(kept)


def load_pool(manifest_path: str | Path, *, strict: bool = True) -> CheckpointPool:
    """Build a :class:`CheckpointPool` from a manifest file.

    Referenced label and prediction files are resolved relative to the
    manifest's directory. In strict mode the first invariant violation
    raises; otherwise violations are repaired where possible and recorded
    on ``pool.load_issues``.
    """
    manifest_path = Path(manifest_path)
    manifest = _read_manifest(manifest_path)
    where = str(manifest_path)
    base_dir = manifest_path.parent

    pool_id = _manifest_str(manifest, "pool_id", where)
    model_name = _manifest_str(manifest, "model_name", where)
    algorithm_name = _manifest_str(manifest, "algorithm_name", where)
    num_labels = _manifest_int(manifest, "num_labels", where)
    if num_labels < 1:
        raise SchemaError(f"{where}: 'num_labels' must be positive")
    label_map = _parse_label_map(manifest, where)

    raw_sets = manifest.get("eval_sets")
    if not isinstance(raw_sets, list) or not raw_sets:
        raise SchemaError(f"{where}: 'eval_sets' must be a non-empty array")
    raw_ckpts = manifest.get("checkpoints")
    if not isinstance(raw_ckpts, list):
        raise SchemaError(f"{where}: 'checkpoints' must be an array")

    issues: list[ValidationIssue] = []
    eval_sets: list[EvalSet] = []
    seen_set_ids: set[str] = set()
    for idx, entry in enumerate(raw_sets):
        entry_where = f"{where}: eval_sets[{idx}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{entry_where}: must be an object")
        set_id = _manifest_str(entry, "eval_set_id", entry_where)
        language = _manifest_str(entry, "language", entry_where)
        role = _manifest_str(entry, "role", entry_where)
        if role not in ROLES:
            raise SchemaError(
                f"{entry_where}: unknown role {role!r} "
                f"(expected one of {sorted(ROLES)})"
            )
        translation_of = entry.get("translation_of")
        if translation_of is not None and not isinstance(translation_of, str):
            raise SchemaError(f"{entry_where}: 'translation_of' must be a string")
        labels_path = base_dir / _manifest_str(entry, "labels_path", entry_where)
        if set_id in seen_set_ids:
            if strict:
                raise SchemaError(f"{entry_where}: duplicate eval_set_id {set_id!r}")
            _error(issues, entry_where, f"duplicate eval_set_id {set_id!r}")
            continue
        seen_set_ids.add(set_id)
        try:
            labels = fileio.load_labels_file(labels_path, num_labels, label_map)
            if not strict:
                labels = _dedupe_labels(labels, str(labels_path), issues)
            eval_sets.append(
                EvalSet(
                    eval_set_id=set_id,
                    language=language,
                    role=role,
                    num_labels=num_labels,
                    labels=labels,
                    translation_of=translation_of,
                )
            )
        except (MissingFile, SchemaError) as exc:
            if strict:
                raise
            _error(issues, entry_where, str(exc))

    checkpoints: list[CheckpointEval] = []
    seen_ck_ids: set[str] = set()
    seen_seed_steps: set[tuple[int, int]] = set()
    for idx, entry in enumerate(raw_ckpts):
        entry_where = f"{where}: checkpoints[{idx}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{entry_where}: must be an object")
        ck_id = _manifest_str(entry, "checkpoint_id", entry_where)
        seed = _manifest_int(entry, "seed", entry_where)
        step = _manifest_int(entry, "step", entry_where)
        raw_preds = entry.get("predictions")
        if not isinstance(raw_preds, dict):
            raise SchemaError(f"{entry_where}: 'predictions' must be an object")
        if ck_id in seen_ck_ids:
            if strict:
                raise SchemaError(f"{entry_where}: duplicate checkpoint_id {ck_id!r}")
            _error(issues, entry_where, f"duplicate checkpoint_id {ck_id!r}")
            continue
        if (seed, step) in seen_seed_steps:
            if strict:
                raise SchemaError(
                    f"{entry_where}: duplicate (seed, step) pair ({seed}, {step})"
                )
            _error(
                issues, entry_where, f"duplicate (seed, step) pair ({seed}, {step})"
            )
            continue
        predictions: dict[str, tuple[PredictionRecord, ...]] = {}
        failed = False
        for set_id, rel_path in raw_preds.items():
            if not isinstance(rel_path, str) or not rel_path:
                raise SchemaError(
                    f"{entry_where}: predictions[{set_id!r}] must be a path string"
                )
            pred_path = base_dir / rel_path
            try:
                records = fileio.load_predictions_file(
                    pred_path, num_labels, label_map
                )
                if not strict:
                    records = _dedupe_predictions(records, str(pred_path), issues)
                predictions[set_id] = records
            except (MissingFile, SchemaError) as exc:
                if strict:
                    raise
                _error(issues, entry_where, str(exc))
                failed = True
        if failed and not predictions:
            continue
        seen_ck_ids.add(ck_id)
        seen_seed_steps.add((seed, step))
        checkpoints.append(
            CheckpointEval(
                checkpoint_id=ck_id, seed=seed, step=step, predictions=predictions
            )
        )

    pool = CheckpointPool(
        pool_id=pool_id,
        model_name=model_name,
        algorithm_name=algorithm_name,
        eval_sets=tuple(eval_sets),
        checkpoints=tuple(checkpoints),
        load_issues=tuple(issues),
    )
    if strict:
        report = validate_pool(pool)
        for issue in report:
            if issue.severity == SEVERITY_ERROR:
                exc_type = _ISSUE_EXCEPTIONS.get(issue.category, SchemaError)
                raise exc_type(f"{issue.location}: {issue.message}")
    return pool


def validate_pool(pool: CheckpointPool) -> ValidationReport:
    """Check every cross-object invariant of a loaded pool.

    Returns issues as data; an empty report means every metric operation
    is defined on the pool.
    """
    issues: list[ValidationIssue] = []
    sets_by_id = pool.sets_by_id

    num_labels_values = {s.num_labels for s in pool.eval_sets}
    if len(num_labels_values) > 1:
        _error(
            issues,
            f"pool {pool.pool_id!r}",
            f"num_labels differs across eval sets: {sorted(num_labels_values)}",
        )

    for eval_set in pool.eval_sets:
        loc = f"eval set {eval_set.eval_set_id!r}"
        if not eval_set.labels:
            _error(issues, loc, "empty eval set")
        if eval_set.translation_of is not None:
            original = sets_by_id.get(eval_set.translation_of)
            if original is None:
                _error(
                    issues,
                    loc,
                    f"translation_of references unknown eval set "
                    f"{eval_set.translation_of!r}",
                )
                continue
            shared = eval_set.example_ids & original.example_ids
            if len(shared) != len(original.example_ids) or len(shared) != len(
                eval_set.example_ids
            ):
                _error(
                    issues,
                    loc,
                    f"translation coverage {len(shared)}/{len(original.example_ids)}",
                    CATEGORY_ALIGNMENT,
                )
            mismatched = sorted(
                ex_id
                for ex_id in shared
                if eval_set.label_by_id[ex_id] != original.label_by_id[ex_id]
            )
            if mismatched:
                _error(
                    issues,
                    loc,
                    f"{len(mismatched)} translation pairs with differing labels "
                    f"(first: {mismatched[0]!r})",
                    CATEGORY_ALIGNMENT,
                )

    for ckpt in pool.checkpoints:
        for set_id in sorted(ckpt.predictions):
            loc = f"checkpoint {ckpt.checkpoint_id!r}, eval set {set_id!r}"
            eval_set = sets_by_id.get(set_id)
            if eval_set is None:
                _error(issues, loc, f"predictions reference unknown eval set {set_id!r}")
                continue
            predicted_ids = {
                rec.example_id for rec in ckpt.predictions[set_id]
            }
            unknown = sorted(predicted_ids - eval_set.example_ids)
            if unknown:
                _error(
                    issues,
                    loc,
                    f"prediction for unknown example_id {unknown[0]!r}"
                    + (f" (+{len(unknown) - 1} more)" if len(unknown) > 1 else ""),
                    CATEGORY_ALIGNMENT,
                )
            missing = sorted(eval_set.example_ids - predicted_ids)
            if missing:
                _error(
                    issues,
                    loc,
                    f"prediction coverage "
                    f"{len(predicted_ids & eval_set.example_ids)}"
                    f"/{len(eval_set.example_ids)} "
                    f"(first missing: {missing[0]!r})",
                    CATEGORY_ALIGNMENT,
                )
        uncovered = sorted(set(sets_by_id) - set(ckpt.predictions))
        for set_id in uncovered:
            _error(
                issues,
                f"checkpoint {ckpt.checkpoint_id!r}",
                f"no predictions for eval set {set_id!r}",
                CATEGORY_ALIGNMENT,
            )
    return ValidationReport(issues=tuple(issues))


def write_pool(pool: CheckpointPool, out_dir: str | Path) -> Path:
    """Write a pool to ``out_dir`` in the manifest/JSONL layout.

    Returns the manifest path. ``load_pool`` on that path reconstructs an
    equal pool (round-trip stability).
    """
    out_dir = Path(out_dir)
    labels_dir = out_dir / "labels"
    preds_dir = out_dir / "predictions"
    num_labels = pool.eval_sets[0].num_labels if pool.eval_sets else 1

    set_entries = []
    for eval_set in pool.eval_sets:
        rel = f"labels/{eval_set.eval_set_id}.jsonl"
        fileio.write_jsonl(
            out_dir / rel,
            [
                {"example_id": rec.example_id, "label": rec.label}
                for rec in eval_set.labels
            ],
        )
        entry: dict = {
            "eval_set_id": eval_set.eval_set_id,
            "language": eval_set.language,
            "role": eval_set.role,
            "labels_path": rel,
        }
        if eval_set.translation_of is not None:
            entry["translation_of"] = eval_set.translation_of
        set_entries.append(entry)

    ckpt_entries = []
    for ckpt in pool.checkpoints:
        pred_paths = {}
        for set_id, records in sorted(ckpt.predictions.items()):
            rel = f"predictions/{ckpt.checkpoint_id}/{set_id}.jsonl"
            fileio.write_jsonl(
                out_dir / rel,
                [
                    {
                        "example_id": rec.example_id,
                        "predicted_label": rec.predicted_label,
                    }
                    for rec in records
                ],
            )
            pred_paths[set_id] = rel
        ckpt_entries.append(
            {
                "checkpoint_id": ckpt.checkpoint_id,
                "seed": ckpt.seed,
                "step": ckpt.step,
                "predictions": pred_paths,
            }
        )

    labels_dir.mkdir(parents=True, exist_ok=True)
    preds_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "pool_id": pool.pool_id,
        "model_name": pool.model_name,
        "algorithm_name": pool.algorithm_name,
        "num_labels": num_labels,
        "eval_sets": set_entries,
        "checkpoints": ckpt_entries,
    }
    manifest_path = out_dir / "manifest.json"
    fileio.atomic_write_text(
        manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest_path


def load_embedding_pairs(
    path: str | Path, language_a: str, language_b: str
) -> EmbeddingPairSet:
    """Assemble translation-aligned vector pairs for two languages.

    The file may carry additional languages; the two requested ones must
    cover the identical example-id set.
    """
    by_language = fileio.load_embeddings_file(Path(path))
    for language in (language_a, language_b):
        if language not in by_language:
            raise AlignmentError(f"{path}: no vectors for language {language!r}")
    side_a: Mapping[str, list[float]] = {}
    side_b: Mapping[str, list[float]] = {}
    for language, target in ((language_a, side_a), (language_b, side_b)):
        for example_id, vector in by_language[language]:
            if example_id in target:
                raise SchemaError(
                    f"{path}: duplicate vector for ({language!r}, {example_id!r})"
                )
            target[example_id] = vector  # type: ignore[index]
    only_a = sorted(set(side_a) - set(side_b))
    only_b = sorted(set(side_b) - set(side_a))
    if only_a or only_b:
        missing = (only_a or only_b)[0]
        raise AlignmentError(
            f"{path}: vector ids differ between {language_a!r} and "
            f"{language_b!r} (e.g. {missing!r})"
        )
    return EmbeddingPairSet.from_pairs(
        language_a,
        language_b,
        [(ex_id, side_a[ex_id], side_b[ex_id]) for ex_id in sorted(side_a)],
    )
