"""Transfer-direction ranking and its baselines.

A source language induces a gold ordering of target languages by realized
transfer accuracy; a metric induces a predicted ordering. The two are
compared by the fraction of unordered language pairs placed in the same
relative order. Ties in scores are broken by ascending language code
before comparison (the pairwise statistic cannot score index ties), and a
tie count is reported alongside so callers can judge stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import metrics
from .errors import (
    DegenerateRanking,
    EmptySet,
    LanguageSetMismatch,
    NonFiniteScore,
    ZeroVector,
)
from .types import CheckpointPool, EmbeddingPairSet

import numpy as np

LOWER_IS_BETTER = "lower_is_better"
HIGHER_IS_BETTER = "higher_is_better"

METRIC_L2 = "l2"
METRIC_DOT = "dot"
METRIC_COS = "cos"

SIMILARITY_METRICS = (METRIC_L2, METRIC_DOT, METRIC_COS)

SIMILARITY_DIRECTION = {
    METRIC_L2: LOWER_IS_BETTER,
    METRIC_DOT: HIGHER_IS_BETTER,
    METRIC_COS: HIGHER_IS_BETTER,
}


@dataclass(frozen=True)
class Ranking:
    """Best-first ordering of target languages for one source language."""

    source_language: str
    ordered_targets: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.ordered_targets)) != len(self.ordered_targets):
            raise DegenerateRanking(
                f"ranking for {self.source_language!r} repeats a target"
            )
        if self.source_language in self.ordered_targets:
            raise DegenerateRanking(
                f"ranking for {self.source_language!r} contains the source itself"
            )

    def index_of(self, language: str) -> int:
        return self.ordered_targets.index(language)


@dataclass(frozen=True)
class ScoreTable:
    """Per-target scores plus the direction in which better points."""

    source_language: str
    scores: Mapping[str, float]
    direction: str

    def __post_init__(self) -> None:
        if self.direction not in (LOWER_IS_BETTER, HIGHER_IS_BETTER):
            raise NonFiniteScore(f"unknown score direction {self.direction!r}")
        if not self.scores:
            raise EmptySet(
                f"score table for {self.source_language!r} has no targets"
            )
        canonical = dict(sorted(self.scores.items()))
        for language, value in canonical.items():
            if not math.isfinite(value):
                raise NonFiniteScore(
                    f"score for target {language!r} is not finite: {value!r}"
                )
        object.__setattr__(self, "scores", canonical)

    def tie_count(self) -> int:
        """Number of unordered target pairs with exactly equal scores."""
        values = sorted(self.scores.values())
        ties = 0
        run = 1
        for prev, cur in zip(values, values[1:]):
            if cur == prev:
                run += 1
            else:
                ties += run * (run - 1) // 2
                run = 1
        ties += run * (run - 1) // 2
        return ties


def rank_by_scores(table: ScoreTable) -> Ranking:
    """Sort targets best-first; exact ties break by ascending language code."""
    reverse = table.direction == HIGHER_IS_BETTER
    ordered = sorted(
        table.scores,
        key=lambda language: (
            -table.scores[language] if reverse else table.scores[language],
            language,
        ),
    )
    return Ranking(
        source_language=table.source_language, ordered_targets=tuple(ordered)
    )


def gold_ranking(table: ScoreTable) -> Ranking:
    """Rank targets by realized transfer accuracy, best first."""
    if table.direction != HIGHER_IS_BETTER:
        raise NonFiniteScore("gold accuracies rank higher-is-better")
    return rank_by_scores(table)


def tdr_accuracy(gold: Ranking, predicted: Ranking) -> float:
    """Fraction of unordered language pairs ordered consistently.

    With positions I(l) in each sequence, a pair counts when
    (I_gold(l1) - I_gold(l2)) * (I_pred(l1) - I_pred(l2)) > 0.
    """
    gold_set = set(gold.ordered_targets)
    pred_set = set(predicted.ordered_targets)
    if gold_set != pred_set:
        only_gold = sorted(gold_set - pred_set)
        only_pred = sorted(pred_set - gold_set)
        raise LanguageSetMismatch(
            "rankings cover different language sets "
            f"(gold-only: {only_gold}, predicted-only: {only_pred})"
        )
    n = len(gold.ordered_targets)
    if n < 2:
        raise DegenerateRanking(f"need at least 2 targets to compare, got {n}")
    gold_index = {lang: i for i, lang in enumerate(gold.ordered_targets)}
    pred_index = {lang: i for i, lang in enumerate(predicted.ordered_targets)}
    languages = sorted(gold_set)
    concordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            a, b = languages[i], languages[j]
            if (gold_index[a] - gold_index[b]) * (pred_index[a] - pred_index[b]) > 0:
                concordant += 1
    return concordant / (n * (n - 1) // 2)


def gold_accuracies(
    pool: CheckpointPool, source: str, targets: Sequence[str]
) -> dict[str, float]:
    """Realized transfer accuracy per target: final-step checkpoint of each
    seed evaluated on the target validation set, averaged over seeds."""
    if not targets:
        raise EmptySet(f"no targets for source {source!r}")
    finals = {}
    for ckpt in pool.checkpoints:
        best = finals.get(ckpt.seed)
        if best is None or ckpt.step > best.step:
            finals[ckpt.seed] = ckpt
    if not finals:
        raise EmptySet(f"pool {pool.pool_id!r} has no checkpoints")
    out = {}
    for target in targets:
        sets = pool.direction_sets(source, target)
        values = [
            metrics.accuracy(
                ckpt.predicted_by_set[sets.target_val.eval_set_id], sets.target_val
            )
            for _, ckpt in sorted(finals.items())
        ]
        out[target] = sum(values) / len(values)
    return out


def similarity_score(pairs: EmbeddingPairSet, metric: str) -> float:
    """Mean pairwise L2 distance, dot product, or cosine over aligned vectors."""
    if metric not in SIMILARITY_METRICS:
        raise NonFiniteScore(f"unknown similarity metric {metric!r}")
    if pairs.n_pairs == 0:
        raise EmptySet(
            f"no vector pairs for {pairs.language_a!r}/{pairs.language_b!r}"
        )
    a = pairs.vectors_a
    b = pairs.vectors_b
    if metric == METRIC_L2:
        values = np.linalg.norm(a - b, axis=1)
    elif metric == METRIC_DOT:
        values = np.einsum("ij,ij->i", a, b)
    else:
        norms_a = np.linalg.norm(a, axis=1)
        norms_b = np.linalg.norm(b, axis=1)
        zero = np.flatnonzero((norms_a == 0) | (norms_b == 0))
        if zero.size:
            raise ZeroVector(
                f"cosine undefined for zero vector at pair "
                f"{pairs.example_ids[int(zero[0])]!r}"
            )
        values = np.einsum("ij,ij->i", a, b) / (norms_a * norms_b)
    result = float(np.mean(values))
    if not math.isfinite(result):
        raise NonFiniteScore(f"{metric} similarity is not finite")
    return result


def predict_ranking_from_similarity(
    source: str, pairs_by_target: Mapping[str, EmbeddingPairSet], metric: str
) -> Ranking:
    """Rank targets by mean representation similarity to the source."""
    if not pairs_by_target:
        raise EmptySet(f"no targets for source {source!r}")
    scores = {}
    for target, pairs in sorted(pairs_by_target.items()):
        if source not in (pairs.language_a, pairs.language_b):
            raise LanguageSetMismatch(
                f"pair set {pairs.language_a!r}/{pairs.language_b!r} does not "
                f"involve source {source!r}"
            )
        scores[target] = similarity_score(pairs, metric)
    table = ScoreTable(
        source_language=source,
        scores=scores,
        direction=SIMILARITY_DIRECTION[metric],
    )
    return rank_by_scores(table)
