"""Transfer-error metrics.

Every rate here is an integer mismatch count divided at the last step, so
the decomposition identity

    e == g_inter + g_intra + e_train

holds exactly in rational arithmetic: the report keeps the raw counts and
exposes exact ``Fraction`` views next to the float fields.

The headline statistic scans a checkpoint pool for the minimum
inter-language error component among checkpoints whose training error
falls in a half-open window ``[e_prime, e_prime + epsilon)``. An empty
window is a first-class absent result, not an exception: curve sweeps may
legitimately have holes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import AlignmentError, ConfigError, EmptySet, LabelMismatch
from .types import CheckpointEval, CheckpointPool, EvalSet, PredictionRecord

RationalLike = float | int | Fraction | str


def as_fraction(value: RationalLike, name: str) -> Fraction:
    """Convert a parameter to an exact rational.

    Strings parse as exact decimals ("0.025" means 1/40, not the nearest
    binary float), which keeps window boundaries sharp for CLI inputs.
    """
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ConfigError(f"{name} must be a number, got {value!r}")


def mismatch_counts(
    predicted_by_id: Mapping[str, int], golds: EvalSet
) -> tuple[int, int]:
    """Count wrong predictions over a fully covered gold set.

    Returns (wrong, total). Coverage must be exact: a missing or extra
    prediction id raises rather than silently shifting the denominator.
    """
    if not golds.labels:
        raise EmptySet(f"eval set {golds.eval_set_id!r} is empty")
    if len(predicted_by_id) != len(golds.labels) or any(
        rec.example_id not in predicted_by_id for rec in golds.labels
    ):
        gold_ids = golds.example_ids
        extra = sorted(set(predicted_by_id) - gold_ids)
        if extra:
            raise AlignmentError(
                f"eval set {golds.eval_set_id!r}: prediction for unknown "
                f"example_id {extra[0]!r}"
            )
        missing = sorted(gold_ids - set(predicted_by_id))
        raise AlignmentError(
            f"eval set {golds.eval_set_id!r}: missing prediction for "
            f"{missing[0]!r}"
        )
    wrong = sum(
        1 for rec in golds.labels if predicted_by_id[rec.example_id] != rec.label
    )
    return wrong, len(golds.labels)


def error_rate(
    predictions: Iterable[PredictionRecord] | Mapping[str, int], golds: EvalSet
) -> float:
    """Fraction of examples whose prediction differs from the gold label."""
    if isinstance(predictions, Mapping):
        predicted_by_id = dict(predictions)
    else:
        predicted_by_id = {rec.example_id: rec.predicted_label for rec in predictions}
    wrong, total = mismatch_counts(predicted_by_id, golds)
    return wrong / total


def accuracy(
    predictions: Iterable[PredictionRecord] | Mapping[str, int], golds: EvalSet
) -> float:
    """Fraction of examples predicted correctly (1 - error_rate, exactly)."""
    if isinstance(predictions, Mapping):
        predicted_by_id = dict(predictions)
    else:
        predicted_by_id = {rec.example_id: rec.predicted_label for rec in predictions}
    wrong, total = mismatch_counts(predicted_by_id, golds)
    return (total - wrong) / total


@dataclass(frozen=True)
class ErrorCounts:
    """Raw mismatch counts behind one decomposition."""

    source_train_wrong: int
    source_train_total: int
    translated_train_wrong: int
    translated_train_total: int
    target_val_wrong: int
    target_val_total: int


@dataclass(frozen=True)
class DecompositionReport:
    """One checkpoint's transfer error split into three additive parts.

    ``e_train`` is the error on the source-language training set,
    ``g_inter`` the extra error incurred on its translation, ``g_intra``
    the further change moving to unseen target-language examples, and
    ``e`` the total target-validation error. ``transfer_gap`` (source
    validation accuracy minus target validation accuracy) is attached when
    a source-side validation set is available.
    """

    checkpoint_id: str
    seed: int
    step: int
    source_language: str
    target_language: str
    e_train: float
    g_inter: float
    g_intra: float
    e: float
    counts: ErrorCounts
    transfer_gap: float | None = None

    @property
    def e_train_exact(self) -> Fraction:
        return Fraction(self.counts.source_train_wrong, self.counts.source_train_total)

    @property
    def translated_error_exact(self) -> Fraction:
        return Fraction(
            self.counts.translated_train_wrong, self.counts.translated_train_total
        )

    @property
    def e_exact(self) -> Fraction:
        return Fraction(self.counts.target_val_wrong, self.counts.target_val_total)

    @property
    def g_inter_exact(self) -> Fraction:
        return self.translated_error_exact - self.e_train_exact

    @property
    def g_intra_exact(self) -> Fraction:
        return self.e_exact - self.translated_error_exact

    def identity_residual(self) -> Fraction:
        """e - (g_inter + g_intra + e_train) in exact arithmetic."""
        return self.e_exact - (
            self.g_inter_exact + self.g_intra_exact + self.e_train_exact
        )


def _require_predictions(ckpt: CheckpointEval, eval_set: EvalSet) -> Mapping[str, int]:
    predicted = ckpt.predicted_by_set.get(eval_set.eval_set_id)
    if predicted is None:
        raise AlignmentError(
            f"checkpoint {ckpt.checkpoint_id!r}: no predictions for eval set "
            f"{eval_set.eval_set_id!r}"
        )
    return predicted


def _check_translation_pairing(source_train: EvalSet, translated_train: EvalSet) -> None:
    if translated_train.translation_of != source_train.eval_set_id:
        raise AlignmentError(
            f"eval set {translated_train.eval_set_id!r} is not a translation of "
            f"{source_train.eval_set_id!r}"
        )
    if translated_train.example_ids != source_train.example_ids:
        shared = translated_train.example_ids & source_train.example_ids
        raise AlignmentError(
            f"eval set {translated_train.eval_set_id!r}: translation coverage "
            f"{len(shared)}/{len(source_train.example_ids)}"
        )
    for rec in source_train.labels:
        if translated_train.label_by_id[rec.example_id] != rec.label:
            raise LabelMismatch(
                f"example {rec.example_id!r}: label differs between "
                f"{source_train.eval_set_id!r} and {translated_train.eval_set_id!r}"
            )


def decompose(
    ckpt: CheckpointEval,
    source_train: EvalSet,
    translated_train: EvalSet,
    target_val: EvalSet,
    source_val: EvalSet | None = None,
) -> DecompositionReport:
    """Split one checkpoint's target-validation error into three parts.

    The translated training set must be id- and label-aligned with the
    source training set; all rates come from integer counts so the parts
    sum to the total exactly.
    """
    _check_translation_pairing(source_train, translated_train)
    sw, st = mismatch_counts(_require_predictions(ckpt, source_train), source_train)
    tw, tt = mismatch_counts(
        _require_predictions(ckpt, translated_train), translated_train
    )
    vw, vt = mismatch_counts(_require_predictions(ckpt, target_val), target_val)
    counts = ErrorCounts(
        source_train_wrong=sw,
        source_train_total=st,
        translated_train_wrong=tw,
        translated_train_total=tt,
        target_val_wrong=vw,
        target_val_total=vt,
    )
    gap = None
    if source_val is not None:
        gap = transfer_gap(ckpt, source_val, target_val)
    return DecompositionReport(
        checkpoint_id=ckpt.checkpoint_id,
        seed=ckpt.seed,
        step=ckpt.step,
        source_language=source_train.language,
        target_language=target_val.language,
        e_train=sw / st,
        g_inter=tw / tt - sw / st,
        g_intra=vw / vt - tw / tt,
        e=vw / vt,
        counts=counts,
        transfer_gap=gap,
    )


def transfer_gap(
    ckpt: CheckpointEval, source_val: EvalSet, target_val: EvalSet
) -> float:
    """Source validation accuracy minus target validation accuracy."""
    acc_source = accuracy(_require_predictions(ckpt, source_val), source_val)
    acc_target = accuracy(_require_predictions(ckpt, target_val), target_val)
    return acc_source - acc_target


@dataclass(frozen=True)
class IGapResult:
    """Windowed-minimum inter-language error component.

    ``value`` is present iff at least one checkpoint's training error lies
    in ``[e_prime, e_prime + epsilon)``; ``witness`` names the minimizing
    checkpoint and ``qualifying_count`` the window population. ``seed`` is
    set when the pool was restricted to one seed.
    """

    e_prime: float
    epsilon: float
    value: float | None
    witness: str | None
    qualifying_count: int
    seed: int | None = None


@dataclass(frozen=True)
class IGapCurve:
    """IGap swept over a descending grid of target training errors."""

    epsilon: float
    points: tuple[IGapResult, ...]

    def __post_init__(self) -> None:
        values = [p.e_prime for p in self.points]
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ConfigError("curve grid must be strictly decreasing")

    def as_pairs(self) -> tuple[tuple[float, IGapResult], ...]:
        return tuple((p.e_prime, p) for p in self.points)


def pool_decompositions(
    pool: CheckpointPool,
    source: str,
    target: str,
    *,
    seed: int | None = None,
    with_transfer_gap: bool = False,
) -> tuple[DecompositionReport, ...]:
    """Decompose every checkpoint of a pool for one direction.

    Checkpoints arrive in canonical (seed, step, id) order; pass ``seed``
    to restrict to one seed.
    """
    sets = pool.direction_sets(source, target)
    source_val = sets.source_val if with_transfer_gap else None
    return tuple(
        decompose(
            ckpt,
            sets.source_train,
            sets.translated_train,
            sets.target_val,
            source_val=source_val,
        )
        for ckpt in pool.checkpoints
        if seed is None or ckpt.seed == seed
    )


def _window_parameters(
    e_prime: RationalLike, epsilon: RationalLike
) -> tuple[Fraction, Fraction]:
    ep = as_fraction(e_prime, "e_prime")
    eps = as_fraction(epsilon, "epsilon")
    if not 0 <= ep <= 1:
        raise ConfigError(f"e_prime must lie in [0, 1], got {float(ep)}")
    if eps <= 0:
        raise ConfigError(f"epsilon must be positive, got {float(eps)}")
    return ep, eps


def igap_from_decompositions(
    decompositions: Sequence[DecompositionReport],
    e_prime: RationalLike,
    epsilon: RationalLike,
    *,
    seed: int | None = None,
) -> IGapResult:
    """Windowed minimum of ``g_inter`` over precomputed decompositions.

    The window test runs in exact arithmetic (counts vs rational bounds);
    ties on the minimum break toward lower training error, then lower
    step, seed and checkpoint id, so outputs are reproducible.
    """
    ep, eps = _window_parameters(e_prime, epsilon)
    qualifying = [
        report
        for report in decompositions
        if 0 <= report.e_train_exact - ep < eps
    ]
    if not qualifying:
        return IGapResult(
            e_prime=float(ep),
            epsilon=float(eps),
            value=None,
            witness=None,
            qualifying_count=0,
            seed=seed,
        )
    best = min(
        qualifying,
        key=lambda r: (
            r.g_inter_exact,
            r.e_train_exact,
            r.step,
            r.seed,
            r.checkpoint_id,
        ),
    )
    # One rounding from the exact rational keeps the reported value monotone
    # under window widening even when a tie-break switches the witness.
    return IGapResult(
        e_prime=float(ep),
        epsilon=float(eps),
        value=float(best.g_inter_exact),
        witness=best.checkpoint_id,
        qualifying_count=len(qualifying),
        seed=seed,
    )


def igap(
    pool: CheckpointPool,
    source: str,
    target: str,
    e_prime: RationalLike = 0,
    epsilon: RationalLike = Fraction(1, 1000),
    *,
    seed: int | None = None,
) -> IGapResult:
    """Minimum inter-language error over checkpoints whose training error
    lies in ``[e_prime, e_prime + epsilon)``.

    Checkpoints from all seeds and steps are pooled unless ``seed`` is
    given. An empty window yields an absent value, not an error.
    """
    decompositions = pool_decompositions(pool, source, target, seed=seed)
    return igap_from_decompositions(decompositions, e_prime, epsilon, seed=seed)


def igap_curve(
    pool: CheckpointPool,
    source: str,
    target: str,
    grid: Sequence[RationalLike],
    epsilon: RationalLike = Fraction(1, 40),
    *,
    seed: int | None = None,
) -> IGapCurve:
    """One IGap per grid value, sharing a single decomposition pass."""
    if not grid:
        raise ConfigError("curve grid must be non-empty")
    grid_fracs = [as_fraction(value, "grid value") for value in grid]
    decompositions = pool_decompositions(pool, source, target, seed=seed)
    points = tuple(
        igap_from_decompositions(decompositions, value, epsilon, seed=seed)
        for value in grid_fracs
    )
    _, eps = _window_parameters(0, epsilon)
    return IGapCurve(epsilon=float(eps), points=points)


def make_grid(
    start: RationalLike, stop: RationalLike, step: RationalLike
) -> tuple[Fraction, ...]:
    """Descending inclusive grid from ``start`` down to ``stop``.

    Built in exact arithmetic, so "0.2:0:0.025" yields exactly nine
    points with no float drift at either end.
    """
    lo = as_fraction(stop, "grid stop")
    hi = as_fraction(start, "grid start")
    delta = as_fraction(step, "grid step")
    if delta <= 0:
        raise ConfigError(f"grid step must be positive, got {float(delta)}")
    if hi < lo:
        raise ConfigError("grid must descend: start must be >= stop")
    if not (0 <= lo and hi <= 1):
        raise ConfigError("grid values must lie in [0, 1]")
    values = []
    k = 0
    while True:
        value = hi - k * delta
        if value < lo:
            break
        values.append(value)
        k += 1
    return tuple(values)


def mean_decomposition(
    reports: Sequence[DecompositionReport],
) -> dict[str, float]:
    """Unweighted arithmetic means of the decomposition components."""
    if not reports:
        raise EmptySet("no decompositions to average")
    n = len(reports)
    out = {
        "e_train": sum(r.e_train for r in reports) / n,
        "g_inter": sum(r.g_inter for r in reports) / n,
        "g_intra": sum(r.g_intra for r in reports) / n,
        "e": sum(r.e for r in reports) / n,
    }
    gaps = [r.transfer_gap for r in reports if r.transfer_gap is not None]
    if len(gaps) == n:
        out["transfer_gap"] = sum(gaps) / n
    return out
