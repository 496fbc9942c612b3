"""Export job descriptions.

A job is a JSON file naming the model bundle, the output pool directory,
and one entry per eval set: where its gold labels live and where its
sentence texts come from (either one column of a translation-pair TSV or
a JSONL of per-example texts). Relative paths are resolved against the
job file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import JobError

DEFAULT_EMBEDDING_LAYER = 7
DEFAULT_BATCH_SIZE = 16

# Roles understood by the pool manifest format this package emits.
MANIFEST_ROLES = frozenset(
    {"source_train", "translated_train", "target_val", "source_val", "generic"}
)
TEXT_COLUMNS = ("a", "b")


@dataclass(frozen=True)
class DatasetSpec:
    """One eval set: identity, gold labels, and a text source."""

    set_id: str
    language: str
    role: str
    labels_path: Path
    corpus_path: Path | None = None
    text_column: str | None = None
    texts_path: Path | None = None
    translation_of: str | None = None

    def __post_init__(self) -> None:
        if self.role not in MANIFEST_ROLES:
            raise JobError(
                f"dataset {self.set_id!r}: unknown role {self.role!r} "
                f"(expected one of {sorted(MANIFEST_ROLES)})"
            )
        has_corpus = self.corpus_path is not None
        has_texts = self.texts_path is not None
        if has_corpus == has_texts:
            raise JobError(
                f"dataset {self.set_id!r}: provide exactly one of "
                "'corpus' (with 'text_column') or 'texts'"
            )
        if has_corpus and self.text_column not in TEXT_COLUMNS:
            raise JobError(
                f"dataset {self.set_id!r}: 'text_column' must be one of "
                f"{list(TEXT_COLUMNS)}"
            )
        if has_texts and self.text_column is not None:
            raise JobError(
                f"dataset {self.set_id!r}: 'text_column' only applies to 'corpus'"
            )


@dataclass(frozen=True)
class ExportJob:
    """Everything one ``run`` invocation needs except checkpoint identity."""

    model_path: Path
    out_dir: Path
    datasets: tuple[DatasetSpec, ...]
    embedding_layer: int = DEFAULT_EMBEDDING_LAYER
    batch_size: int = DEFAULT_BATCH_SIZE
    pool_specials: bool = True

    def __post_init__(self) -> None:
        if not self.datasets:
            raise JobError("job has no datasets")
        if self.embedding_layer < 0:
            raise JobError("embedding_layer must be non-negative")
        if self.batch_size < 1:
            raise JobError("batch_size must be positive")
        seen = set()
        for spec in self.datasets:
            if spec.set_id in seen:
                raise JobError(f"duplicate dataset set_id {spec.set_id!r}")
            seen.add(spec.set_id)


def _require_str(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise JobError(f"{where}: {key!r} must be a non-empty string")
    return value


def _optional_str(obj: dict, key: str, where: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str) or not value:
        raise JobError(f"{where}: {key!r} must be a non-empty string")
    return value


def _optional_int(obj: dict, key: str, where: str, default: int) -> int:
    value = obj.get(key)
    if value is None:
        return default
    if isinstance(value, bool) or not isinstance(value, int):
        raise JobError(f"{where}: {key!r} must be an integer")
    return value


def load_job(job_path: str | Path) -> ExportJob:
    """Parse a job JSON file, resolving paths relative to it."""
    job_path = Path(job_path)
    if not job_path.is_file():
        raise JobError(f"no such job file: {job_path}")
    try:
        raw = json.loads(job_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise JobError(f"{job_path}: invalid JSON ({exc.msg})")
    if not isinstance(raw, dict):
        raise JobError(f"{job_path}: job must be a JSON object")
    where = str(job_path)
    base = job_path.parent

    raw_sets = raw.get("datasets")
    if not isinstance(raw_sets, list) or not raw_sets:
        raise JobError(f"{where}: 'datasets' must be a non-empty array")
    datasets = []
    for idx, entry in enumerate(raw_sets):
        entry_where = f"{where}: datasets[{idx}]"
        if not isinstance(entry, dict):
            raise JobError(f"{entry_where}: must be an object")
        corpus = _optional_str(entry, "corpus", entry_where)
        texts = _optional_str(entry, "texts", entry_where)
        datasets.append(
            DatasetSpec(
                set_id=_require_str(entry, "set_id", entry_where),
                language=_require_str(entry, "language", entry_where),
                role=_require_str(entry, "role", entry_where),
                labels_path=base / _require_str(entry, "labels", entry_where),
                corpus_path=base / corpus if corpus else None,
                text_column=_optional_str(entry, "text_column", entry_where),
                texts_path=base / texts if texts else None,
                translation_of=_optional_str(entry, "translation_of", entry_where),
            )
        )

    pool_specials = raw.get("pool_specials", True)
    if not isinstance(pool_specials, bool):
        raise JobError(f"{where}: 'pool_specials' must be a boolean")
    return ExportJob(
        model_path=base / _require_str(raw, "model", where),
        out_dir=base / _require_str(raw, "out_dir", where),
        datasets=tuple(datasets),
        embedding_layer=_optional_int(
            raw, "embedding_layer", where, DEFAULT_EMBEDDING_LAYER
        ),
        batch_size=_optional_int(raw, "batch_size", where, DEFAULT_BATCH_SIZE),
        pool_specials=pool_specials,
    )
