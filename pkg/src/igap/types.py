"""Domain types for checkpoint pools, eval sets, and embedding pairs.

All types are immutable after construction and canonically ordered (eval
sets by id, examples by example id, checkpoints by seed/step/id), so two
pools built from the same data compare equal regardless of input order.
Constructors enforce the invariants that are local to one object; cross
object invariants (prediction coverage, translation linkage) are checked
by :func:`igap.loader.validate_pool` and by the metric operations
themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import AlignmentError, DimensionMismatch, DirectionError, SchemaError

ROLE_SOURCE_TRAIN = "source_train"
ROLE_TRANSLATED_TRAIN = "translated_train"
ROLE_SOURCE_VAL = "source_val"
ROLE_TARGET_VAL = "target_val"
ROLE_GENERIC = "generic"

ROLES = frozenset(
    {
        ROLE_SOURCE_TRAIN,
        ROLE_TRANSLATED_TRAIN,
        ROLE_SOURCE_VAL,
        ROLE_TARGET_VAL,
        ROLE_GENERIC,
    }
)

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"


@dataclass(frozen=True)
class ExampleLabel:
    """One labelled example: an id and a dense class index."""

    example_id: str
    label: int


@dataclass(frozen=True)
class PredictionRecord:
    """One model prediction: an id and the predicted class index."""

    example_id: str
    predicted_label: int


@dataclass(frozen=True)
class EvalSet:
    """A labelled example collection in one language.

    ``translation_of`` links a translated set to its original by shared
    example ids; the two id sets must be identical for the pairing to be
    valid (checked by validation and the metric operations, not here).
    """

    eval_set_id: str
    language: str
    role: str
    num_labels: int
    labels: tuple[ExampleLabel, ...]
    translation_of: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise SchemaError(
                f"eval set {self.eval_set_id!r}: unknown role {self.role!r}"
            )
        if self.num_labels < 1:
            raise SchemaError(
                f"eval set {self.eval_set_id!r}: num_labels must be positive"
            )
        if self.role == ROLE_TRANSLATED_TRAIN and self.translation_of is None:
            raise SchemaError(
                f"eval set {self.eval_set_id!r}: role {ROLE_TRANSLATED_TRAIN} "
                "requires translation_of"
            )
        ordered = tuple(sorted(self.labels, key=lambda r: r.example_id))
        seen: set[str] = set()
        for rec in ordered:
            if rec.example_id in seen:
                raise SchemaError(
                    f"eval set {self.eval_set_id!r}: duplicate id {rec.example_id!r}"
                )
            seen.add(rec.example_id)
            if not 0 <= rec.label < self.num_labels:
                raise SchemaError(
                    f"eval set {self.eval_set_id!r}: label {rec.label} for "
                    f"{rec.example_id!r} outside [0, {self.num_labels})"
                )
        object.__setattr__(self, "labels", ordered)

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def label_by_id(self) -> dict[str, int]:
        return {rec.example_id: rec.label for rec in self.labels}

    @cached_property
    def example_ids(self) -> frozenset[str]:
        return frozenset(rec.example_id for rec in self.labels)


@dataclass(frozen=True)
class CheckpointEval:
    """Prediction logs of one fine-tuned checkpoint, keyed by eval set id."""

    checkpoint_id: str
    seed: int
    step: int
    predictions: Mapping[str, tuple[PredictionRecord, ...]]

    def __post_init__(self) -> None:
        if self.step < 0:
            raise SchemaError(
                f"checkpoint {self.checkpoint_id!r}: step must be non-negative"
            )
        canonical: dict[str, tuple[PredictionRecord, ...]] = {}
        for set_id in sorted(self.predictions):
            records = tuple(
                sorted(self.predictions[set_id], key=lambda r: r.example_id)
            )
            seen: set[str] = set()
            for rec in records:
                if rec.example_id in seen:
                    raise AlignmentError(
                        f"checkpoint {self.checkpoint_id!r}, eval set {set_id!r}: "
                        f"duplicate prediction for {rec.example_id!r}"
                    )
                seen.add(rec.example_id)
            canonical[set_id] = records
        object.__setattr__(self, "predictions", canonical)

    @cached_property
    def predicted_by_set(self) -> dict[str, dict[str, int]]:
        return {
            set_id: {rec.example_id: rec.predicted_label for rec in records}
            for set_id, records in self.predictions.items()
        }


@dataclass(frozen=True)
class DirectionSets:
    """The eval sets backing one transfer direction."""

    source_train: EvalSet
    translated_train: EvalSet
    target_val: EvalSet
    source_val: EvalSet | None = None


CATEGORY_SCHEMA = "schema"
CATEGORY_ALIGNMENT = "alignment"


@dataclass(frozen=True)
class ValidationIssue:
    severity: str
    location: str
    message: str
    category: str = CATEGORY_SCHEMA

    def __str__(self) -> str:
        return f"[{self.severity}] {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of pool validation; empty issue list means all invariants hold."""

    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)


@dataclass(frozen=True)
class CheckpointPool:
    """All fine-tuned checkpoints of one model/algorithm run family, plus the
    eval sets their prediction logs refer to."""

    pool_id: str
    model_name: str
    algorithm_name: str
    eval_sets: tuple[EvalSet, ...]
    checkpoints: tuple[CheckpointEval, ...]
    load_issues: tuple[ValidationIssue, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        sets = tuple(sorted(self.eval_sets, key=lambda s: s.eval_set_id))
        ids = [s.eval_set_id for s in sets]
        if len(ids) != len(set(ids)):
            raise SchemaError(f"pool {self.pool_id!r}: duplicate eval_set_id")
        ckpts = tuple(
            sorted(self.checkpoints, key=lambda c: (c.seed, c.step, c.checkpoint_id))
        )
        ck_ids = [c.checkpoint_id for c in ckpts]
        if len(ck_ids) != len(set(ck_ids)):
            raise SchemaError(f"pool {self.pool_id!r}: duplicate checkpoint_id")
        seed_steps = [(c.seed, c.step) for c in ckpts]
        if len(seed_steps) != len(set(seed_steps)):
            raise SchemaError(f"pool {self.pool_id!r}: duplicate (seed, step) pair")
        object.__setattr__(self, "eval_sets", sets)
        object.__setattr__(self, "checkpoints", ckpts)

    @cached_property
    def sets_by_id(self) -> dict[str, EvalSet]:
        return {s.eval_set_id: s for s in self.eval_sets}

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted({s.language for s in self.eval_sets}))

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(sorted({c.seed for c in self.checkpoints}))

    def source_languages(self) -> tuple[str, ...]:
        return tuple(
            sorted({s.language for s in self.eval_sets if s.role == ROLE_SOURCE_TRAIN})
        )

    def targets_of(self, source: str) -> tuple[str, ...]:
        """Languages reachable from ``source``: they have a translated copy
        of its training set and a validation set of their own."""
        train_ids = {
            s.eval_set_id
            for s in self.eval_sets
            if s.role == ROLE_SOURCE_TRAIN and s.language == source
        }
        candidates = {
            s.language
            for s in self.eval_sets
            if s.role == ROLE_TRANSLATED_TRAIN and s.translation_of in train_ids
        }
        return tuple(
            sorted(
                lang
                for lang in candidates
                if self._find_val_set(lang, ROLE_TARGET_VAL) is not None
            )
        )

    def _find_val_set(self, language: str, preferred_role: str) -> EvalSet | None:
        other = ROLE_TARGET_VAL if preferred_role == ROLE_SOURCE_VAL else ROLE_SOURCE_VAL
        for role in (preferred_role, other, ROLE_GENERIC):
            hits = [
                s
                for s in self.eval_sets
                if s.role == role and s.language == language
            ]
            if len(hits) > 1:
                raise DirectionError(
                    f"pool {self.pool_id!r}: {len(hits)} {role} sets for "
                    f"language {language!r}"
                )
            if hits:
                return hits[0]
        return None

    def direction_sets(
        self, source: str, target: str, *, require_source_val: bool = False
    ) -> DirectionSets:
        """Resolve the eval sets of the (source, target) direction.

        Validation-set lookup falls back across the two val roles, so a pool
        whose per-language val sets are all tagged ``target_val`` still
        resolves a source-side val set for the transfer-gap baseline.
        """
        trains = [
            s
            for s in self.eval_sets
            if s.role == ROLE_SOURCE_TRAIN and s.language == source
        ]
        if not trains:
            raise DirectionError(
                f"pool {self.pool_id!r}: no {ROLE_SOURCE_TRAIN} set for "
                f"language {source!r}"
            )
        if len(trains) > 1:
            raise DirectionError(
                f"pool {self.pool_id!r}: {len(trains)} {ROLE_SOURCE_TRAIN} sets "
                f"for language {source!r}"
            )
        source_train = trains[0]
        translated = [
            s
            for s in self.eval_sets
            if s.role == ROLE_TRANSLATED_TRAIN
            and s.language == target
            and s.translation_of == source_train.eval_set_id
        ]
        if not translated:
            raise DirectionError(
                f"pool {self.pool_id!r}: no {ROLE_TRANSLATED_TRAIN} set in "
                f"{target!r} linked to {source_train.eval_set_id!r}"
            )
        if len(translated) > 1:
            raise DirectionError(
                f"pool {self.pool_id!r}: ambiguous {ROLE_TRANSLATED_TRAIN} sets "
                f"for direction {source!r}->{target!r}"
            )
        target_val = self._find_val_set(target, ROLE_TARGET_VAL)
        if target_val is None:
            raise DirectionError(
                f"pool {self.pool_id!r}: no validation set in language {target!r}"
            )
        source_val = self._find_val_set(source, ROLE_SOURCE_VAL)
        if require_source_val and source_val is None:
            raise DirectionError(
                f"pool {self.pool_id!r}: no validation set in language {source!r}"
            )
        return DirectionSets(
            source_train=source_train,
            translated_train=translated[0],
            target_val=target_val,
            source_val=source_val,
        )


@dataclass(frozen=True, eq=False)
class EmbeddingPairSet:
    """Translation-aligned sentence vectors for one language pair.

    Rows of ``vectors_a`` and ``vectors_b`` are aligned by ``example_ids``;
    all vectors share one dimension.
    """

    language_a: str
    language_b: str
    example_ids: tuple[str, ...]
    vectors_a: np.ndarray
    vectors_b: np.ndarray

    @classmethod
    def from_pairs(
        cls,
        language_a: str,
        language_b: str,
        pairs: Iterable[tuple[str, Iterable[float], Iterable[float]]],
    ) -> "EmbeddingPairSet":
        ordered = sorted(pairs, key=lambda p: p[0])
        ids = tuple(p[0] for p in ordered)
        if len(ids) != len(set(ids)):
            raise SchemaError(
                f"embedding pairs {language_a}/{language_b}: duplicate example id"
            )
        rows_a = [np.asarray(p[1], dtype=float) for p in ordered]
        rows_b = [np.asarray(p[2], dtype=float) for p in ordered]
        dims = {r.shape for r in rows_a} | {r.shape for r in rows_b}
        if len(dims) > 1:
            raise DimensionMismatch(
                f"embedding pairs {language_a}/{language_b}: mixed vector "
                f"dimensions {sorted(d[0] for d in dims if d)}"
            )
        if rows_a and (rows_a[0].ndim != 1 or rows_a[0].shape[0] < 1):
            raise DimensionMismatch(
                f"embedding pairs {language_a}/{language_b}: vectors must be "
                "one-dimensional with d > 0"
            )
        dim = rows_a[0].shape[0] if rows_a else 0
        return cls(
            language_a=language_a,
            language_b=language_b,
            example_ids=ids,
            vectors_a=np.array(rows_a, dtype=float).reshape(len(ids), dim),
            vectors_b=np.array(rows_b, dtype=float).reshape(len(ids), dim),
        )

    @property
    def n_pairs(self) -> int:
        return len(self.example_ids)

    @property
    def dimension(self) -> int:
        return int(self.vectors_a.shape[1]) if self.n_pairs else 0
