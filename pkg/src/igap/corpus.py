"""Synthetic label construction over parallel corpora.

Random labels are keyed per example id, never drawn from a sequential
stream: an example's label depends only on (seed, example_id), so adding
or removing other examples never reshuffles existing labels, and the two
sides of a translation pair agree by construction. Corruption uses the
same keying, which makes corrupted positions nested across ratios (a
higher ratio corrupts a superset of a lower one) and keeps translation-
linked sets consistent whenever they are corrupted with one seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import (
    AlignmentError,
    EmptySet,
    LabelMismatch,
    MissingFile,
    RatioOutOfRange,
    SchemaError,
)
from .keyed_rng import keyed_int, keyed_unit
from .metrics import RationalLike, as_fraction
from .types import (
    ROLE_SOURCE_TRAIN,
    ROLE_TRANSLATED_TRAIN,
    EvalSet,
    ExampleLabel,
)

_LABEL_TAG = "label-gen"
_PRIORITY_TAG = "corrupt-priority"
_REPLACE_TAG = "corrupt-label"


@dataclass(frozen=True)
class ParallelCorpus:
    """Sentence pairs aligned across two languages."""

    language_a: str
    language_b: str
    sentence_pairs: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.sentence_pairs, key=lambda p: p[0]))
        seen: set[str] = set()
        for example_id, text_a, text_b in ordered:
            if example_id in seen:
                raise SchemaError(f"parallel corpus: duplicate id {example_id!r}")
            seen.add(example_id)
            if not text_a or not text_b:
                raise SchemaError(
                    f"parallel corpus: empty text for {example_id!r}"
                )
        object.__setattr__(self, "sentence_pairs", ordered)

    def __len__(self) -> int:
        return len(self.sentence_pairs)

    @property
    def example_ids(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.sentence_pairs)


@dataclass(frozen=True)
class LabeledParallelCorpus:
    """A parallel corpus with one shared random label per pair."""

    base: ParallelCorpus
    num_labels: int
    labels: dict[str, int]
    generator_seed: int

    def to_eval_sets(
        self,
        set_id_a: str | None = None,
        set_id_b: str | None = None,
    ) -> tuple[EvalSet, EvalSet]:
        """Materialize the two label sets, linked as source and translation."""
        set_id_a = set_id_a or f"train_{self.base.language_a}"
        set_id_b = set_id_b or f"train_{self.base.language_b}"
        records = tuple(
            ExampleLabel(example_id=ex_id, label=self.labels[ex_id])
            for ex_id in self.base.example_ids
        )
        source = EvalSet(
            eval_set_id=set_id_a,
            language=self.base.language_a,
            role=ROLE_SOURCE_TRAIN,
            num_labels=self.num_labels,
            labels=records,
        )
        translated = EvalSet(
            eval_set_id=set_id_b,
            language=self.base.language_b,
            role=ROLE_TRANSLATED_TRAIN,
            num_labels=self.num_labels,
            labels=records,
            translation_of=set_id_a,
        )
        return source, translated


def read_parallel_tsv(
    path: str | Path, language_a: str, language_b: str
) -> ParallelCorpus:
    """Read tab-separated (example_id, text_a, text_b) lines."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    pairs = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            fields = stripped.split("\t")
            if len(fields) != 3:
                raise SchemaError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, "
                    f"got {len(fields)}"
                )
            pairs.append((fields[0], fields[1], fields[2]))
    return ParallelCorpus(
        language_a=language_a, language_b=language_b, sentence_pairs=tuple(pairs)
    )


def read_parallel_texts(
    ids_path: str | Path,
    text_a_path: str | Path,
    text_b_path: str | Path,
    language_a: str,
    language_b: str,
) -> ParallelCorpus:
    """Read paired text files aligned line-by-line with a shared id file."""
    columns = []
    for path in (ids_path, text_a_path, text_b_path):
        path = Path(path)
        if not path.is_file():
            raise MissingFile(f"no such file: {path}")
        columns.append(path.read_text(encoding="utf-8").splitlines())
    ids, texts_a, texts_b = columns
    if not len(ids) == len(texts_a) == len(texts_b):
        raise AlignmentError(
            f"line counts differ: {len(ids)} ids, {len(texts_a)} / "
            f"{len(texts_b)} texts"
        )
    return ParallelCorpus(
        language_a=language_a,
        language_b=language_b,
        sentence_pairs=tuple(zip(ids, texts_a, texts_b)),
    )


def gen_random_labels(
    corpus: ParallelCorpus, seed: int, num_labels: int = 2
) -> LabeledParallelCorpus:
    """Draw one uniform label per pair, keyed by (seed, example_id).

    Both sides of a pair share the label by construction; re-running with
    the same seed reproduces the labeling exactly.
    """
    if len(corpus) == 0:
        raise EmptySet("parallel corpus is empty")
    if num_labels < 1:
        raise SchemaError(f"num_labels must be positive, got {num_labels}")
    labels = {
        ex_id: keyed_int(num_labels, seed, _LABEL_TAG, ex_id)
        for ex_id in corpus.example_ids
    }
    return LabeledParallelCorpus(
        base=corpus, num_labels=num_labels, labels=labels, generator_seed=seed
    )


def corruption_count(ratio: RationalLike, n: int) -> int:
    """round(ratio * n) with half-to-even rounding, in exact arithmetic."""
    ratio_frac = as_fraction(ratio, "ratio")
    if not 0 <= ratio_frac <= 1:
        raise RatioOutOfRange(f"ratio must lie in [0, 1], got {float(ratio_frac)}")
    return round(ratio_frac * n)


def corrupt_labels(eval_set: EvalSet, ratio: RationalLike, seed: int) -> EvalSet:
    """Resample the labels of a seeded fraction of examples.

    Exactly round(ratio * n) ids are corrupted, chosen by keyed priority,
    so the corrupted set at a lower ratio is a subset of the one at any
    higher ratio with the same seed. Replacements are uniform over all
    classes and may coincide with the original.
    """
    if len(eval_set) == 0:
        raise EmptySet(f"eval set {eval_set.eval_set_id!r} is empty")
    count = corruption_count(ratio, len(eval_set))
    by_priority = sorted(
        eval_set.example_ids,
        key=lambda ex_id: (keyed_unit(seed, _PRIORITY_TAG, ex_id), ex_id),
    )
    chosen = set(by_priority[:count])
    records = tuple(
        ExampleLabel(
            example_id=rec.example_id,
            label=keyed_int(eval_set.num_labels, seed, _REPLACE_TAG, rec.example_id)
            if rec.example_id in chosen
            else rec.label,
        )
        for rec in eval_set.labels
    )
    return EvalSet(
        eval_set_id=eval_set.eval_set_id,
        language=eval_set.language,
        role=eval_set.role,
        num_labels=eval_set.num_labels,
        labels=records,
        translation_of=eval_set.translation_of,
    )


def corrupt_jointly(
    sets: Sequence[EvalSet], ratio: RationalLike, seed: int
) -> tuple[EvalSet, ...]:
    """Corrupt translation-linked sets so pairs stay label-consistent.

    All sets must share the identical id set, labels, and class count;
    keyed corruption then resamples the same positions to the same values
    on every side.
    """
    if not sets:
        raise EmptySet("no eval sets to corrupt")
    first = sets[0]
    for other in sets[1:]:
        if other.num_labels != first.num_labels:
            raise SchemaError(
                f"eval sets {first.eval_set_id!r} and {other.eval_set_id!r} "
                "disagree on num_labels"
            )
        if other.example_ids != first.example_ids:
            only = sorted(other.example_ids ^ first.example_ids)
            raise AlignmentError(
                f"eval sets {first.eval_set_id!r} and {other.eval_set_id!r} "
                f"cover different ids (e.g. {only[0]!r})"
            )
        for rec in first.labels:
            if other.label_by_id[rec.example_id] != rec.label:
                raise LabelMismatch(
                    f"example {rec.example_id!r}: label differs between "
                    f"{first.eval_set_id!r} and {other.eval_set_id!r}"
                )
    return tuple(corrupt_labels(s, ratio, seed) for s in sets)


@dataclass(frozen=True)
class TranslationPair:
    """One aligned example with its shared label and the two set ids."""

    example_id: str
    label: int
    source_set_id: str
    translated_set_id: str


def pair_translations(
    source: EvalSet, translated: EvalSet
) -> tuple[TranslationPair, ...]:
    """Zip a set with its translation, verifying ids and labels agree."""
    if translated.translation_of != source.eval_set_id:
        raise AlignmentError(
            f"eval set {translated.eval_set_id!r} is not a translation of "
            f"{source.eval_set_id!r}"
        )
    if translated.example_ids != source.example_ids:
        only = sorted(translated.example_ids ^ source.example_ids)
        raise AlignmentError(
            f"id {only[0]!r} present on only one side of "
            f"{source.eval_set_id!r}/{translated.eval_set_id!r}"
        )
    pairs = []
    for rec in source.labels:
        other = translated.label_by_id[rec.example_id]
        if other != rec.label:
            raise LabelMismatch(
                f"example {rec.example_id!r}: label {rec.label} vs {other}"
            )
        pairs.append(
            TranslationPair(
                example_id=rec.example_id,
                label=rec.label,
                source_set_id=source.eval_set_id,
                translated_set_id=translated.eval_set_id,
            )
        )
    return tuple(pairs)
