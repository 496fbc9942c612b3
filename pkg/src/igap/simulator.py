"""Synthetic checkpoint pools with planted transferability.

Generation is channel-based. A source-training prediction is correct with
probability 1 - p (errors spread uniformly over the other classes); a
translated-training prediction copies the source-side prediction except
with probability delta, where it is resampled uniformly over all classes;
target-validation predictions run the same two channels and then lose an
extra g of correctness probability (clamped at zero). Every draw is keyed
by (seed, step, example_id), so pools are byte-reproducible and enlarging
a config extends rather than reshuffles existing draws.

``expected_metrics`` returns the exact expectations of the channels,
which is the oracle the metric code is tested against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, MissingFile, SchemaError
from .keyed_rng import keyed_int, keyed_u64, keyed_unit
from .types import (
    ROLE_SOURCE_TRAIN,
    ROLE_SOURCE_VAL,
    ROLE_TARGET_VAL,
    ROLE_TRANSLATED_TRAIN,
    CheckpointEval,
    CheckpointPool,
    EvalSet,
    ExampleLabel,
    PredictionRecord,
)

_GOLD_TAG = "sim-gold"
_SRC_ERR_TAG = "src-err"
_SRC_PICK_TAG = "src-pick"
_TRANS_TAG = "trans"
_TRANS_PICK_TAG = "trans-pick"
_GAP_TAG = "gap"
_GAP_PICK_TAG = "gap-pick"


@dataclass(frozen=True)
class SimConfig:
    """Knobs of one synthetic pool.

    ``target_languages`` pairs each target code with its planted
    inter-language transfer loss; ``train_error_schedule`` pairs training
    steps with the training error at that step (non-increasing, as
    fine-tuning drives training error down); ``generalization_gap`` is the
    extra validation error shared by all languages.
    """

    num_labels: int
    n_train: int
    n_val: int
    target_languages: tuple[tuple[str, float], ...]
    train_error_schedule: tuple[tuple[int, float], ...]
    generalization_gap: float
    seeds: tuple[int, ...]
    source_language: str = "en"

    def __post_init__(self) -> None:
        if self.num_labels < 2:
            raise ConfigError("num_labels must be at least 2")
        if self.n_train < 1 or self.n_val < 1:
            raise ConfigError("n_train and n_val must be positive")
        if not self.target_languages:
            raise ConfigError("at least one target language required")
        codes = [code for code, _ in self.target_languages]
        if len(codes) != len(set(codes)):
            raise ConfigError("duplicate target language code")
        if self.source_language in codes:
            raise ConfigError("source language cannot also be a target")
        for code, delta in self.target_languages:
            if not 0 <= delta <= 1:
                raise ConfigError(
                    f"transfer loss for {code!r} must lie in [0, 1], got {delta}"
                )
        if not self.train_error_schedule:
            raise ConfigError("train_error_schedule must be non-empty")
        steps = [step for step, _ in self.train_error_schedule]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ConfigError("schedule steps must be strictly increasing")
        if steps[0] < 0:
            raise ConfigError("schedule steps must be non-negative")
        errors = [p for _, p in self.train_error_schedule]
        if any(not 0 <= p <= 1 for p in errors):
            raise ConfigError("schedule training errors must lie in [0, 1]")
        if any(b > a for a, b in zip(errors, errors[1:])):
            raise ConfigError("schedule training errors must be non-increasing")
        if not 0 <= self.generalization_gap <= 1:
            raise ConfigError("generalization_gap must lie in [0, 1]")
        if not self.seeds:
            raise ConfigError("at least one seed required")
        if len(self.seeds) != len(set(self.seeds)):
            raise ConfigError("duplicate seed")
        object.__setattr__(self, "target_languages", tuple(self.target_languages))
        object.__setattr__(
            self, "train_error_schedule", tuple(self.train_error_schedule)
        )
        object.__setattr__(self, "seeds", tuple(self.seeds))

    @property
    def transfer_loss_by_language(self) -> dict[str, float]:
        return dict(self.target_languages)

    @property
    def train_error_by_step(self) -> dict[int, float]:
        return dict(self.train_error_schedule)

    @classmethod
    def from_dict(cls, raw: dict, where: str = "sim config") -> "SimConfig":
        if not isinstance(raw, dict):
            raise SchemaError(f"{where}: must be a JSON object")

        def _get(key: str, types: tuple[type, ...], kind: str) -> object:
            value = raw.get(key)
            if isinstance(value, bool) or not isinstance(value, types):
                raise SchemaError(f"{where}: {key!r} must be {kind}")
            return value

        targets_raw = _get("targets", (list,), "an array")
        targets = []
        for entry in targets_raw:
            if not isinstance(entry, dict):
                raise SchemaError(f"{where}: each target must be an object")
            code = entry.get("language")
            loss = entry.get("transfer_loss")
            if not isinstance(code, str) or not code:
                raise SchemaError(f"{where}: target 'language' must be a string")
            if isinstance(loss, bool) or not isinstance(loss, (int, float)):
                raise SchemaError(f"{where}: target 'transfer_loss' must be a number")
            targets.append((code, float(loss)))
        schedule_raw = _get("schedule", (list,), "an array")
        schedule = []
        for entry in schedule_raw:
            if not isinstance(entry, dict):
                raise SchemaError(f"{where}: each schedule entry must be an object")
            step = entry.get("step")
            p = entry.get("train_error")
            if isinstance(step, bool) or not isinstance(step, int):
                raise SchemaError(f"{where}: schedule 'step' must be an integer")
            if isinstance(p, bool) or not isinstance(p, (int, float)):
                raise SchemaError(f"{where}: schedule 'train_error' must be a number")
            schedule.append((step, float(p)))
        seeds_raw = _get("seeds", (list,), "an array")
        seeds = []
        for value in seeds_raw:
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError(f"{where}: seeds must be integers")
            seeds.append(value)
        source_language = raw.get("source_language", "en")
        if not isinstance(source_language, str) or not source_language:
            raise SchemaError(f"{where}: 'source_language' must be a string")
        return cls(
            num_labels=_get("num_labels", (int,), "an integer"),
            n_train=_get("n_train", (int,), "an integer"),
            n_val=_get("n_val", (int,), "an integer"),
            target_languages=tuple(targets),
            train_error_schedule=tuple(schedule),
            generalization_gap=float(
                _get("generalization_gap", (int, float), "a number")
            ),
            seeds=tuple(seeds),
            source_language=source_language,
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SimConfig":
        path = Path(path)
        if not path.is_file():
            raise MissingFile(f"no such file: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc.msg})")
        return cls.from_dict(raw, where=str(path))


def _gold_label(num_labels: int, example_id: str) -> int:
    return keyed_int(num_labels, _GOLD_TAG, example_id)


def _wrong_label(num_labels: int, gold: int, pick: int) -> int:
    """Map a draw over K-1 slots onto the labels excluding ``gold``."""
    return pick if pick < gold else pick + 1


def _source_prediction(
    num_labels: int, p: float, seed: int, step: int, example_id: str, gold: int
) -> int:
    if keyed_unit(seed, step, _SRC_ERR_TAG, example_id) < p:
        pick = keyed_int(num_labels - 1, seed, step, _SRC_PICK_TAG, example_id)
        return _wrong_label(num_labels, gold, pick)
    return gold


def _translated_prediction(
    num_labels: int,
    delta: float,
    seed: int,
    step: int,
    language: str,
    example_id: str,
    source_pred: int,
) -> int:
    if keyed_unit(seed, step, _TRANS_TAG, language, example_id) < delta:
        return keyed_int(num_labels, seed, step, _TRANS_PICK_TAG, language, example_id)
    return source_pred


def _reduce_correctness(
    num_labels: int,
    base_correct_probability: float,
    gap: float,
    seed: int,
    step: int,
    language: str,
    example_id: str,
    gold: int,
    prediction: int,
) -> int:
    """Flip a correct prediction to a uniform wrong one with the probability
    that lowers overall correctness by ``gap`` (clamped at zero)."""
    if prediction != gold or gap <= 0 or base_correct_probability <= 0:
        return prediction
    flip_probability = min(1.0, gap / base_correct_probability)
    if keyed_unit(seed, step, _GAP_TAG, language, example_id) < flip_probability:
        pick = keyed_int(num_labels - 1, seed, step, _GAP_PICK_TAG, language, example_id)
        return _wrong_label(num_labels, gold, pick)
    return prediction


def _config_digest(config: SimConfig) -> str:
    return f"{keyed_u64('sim-pool', repr(config)):016x}"[:12]


def simulate_pool(config: SimConfig) -> CheckpointPool:
    """Generate a pool whose decomposition components have known expectations.

    One checkpoint is emitted per (seed, schedule step); every checkpoint
    carries predictions for all train and validation sets, so the result
    passes validation and is indistinguishable from an ingested pool.
    """
    K = config.num_labels
    src = config.source_language
    train_ids = tuple(f"tr{i:06d}" for i in range(config.n_train))
    val_ids = tuple(f"va{i:06d}" for i in range(config.n_val))
    train_gold = {ex_id: _gold_label(K, ex_id) for ex_id in train_ids}
    val_gold = {ex_id: _gold_label(K, ex_id) for ex_id in val_ids}

    def label_records(gold: dict[str, int]) -> tuple[ExampleLabel, ...]:
        return tuple(
            ExampleLabel(example_id=ex_id, label=label)
            for ex_id, label in gold.items()
        )

    train_src_id = f"train_{src}"
    val_src_id = f"val_{src}"
    eval_sets = [
        EvalSet(
            eval_set_id=train_src_id,
            language=src,
            role=ROLE_SOURCE_TRAIN,
            num_labels=K,
            labels=label_records(train_gold),
        ),
        EvalSet(
            eval_set_id=val_src_id,
            language=src,
            role=ROLE_SOURCE_VAL,
            num_labels=K,
            labels=label_records(val_gold),
        ),
    ]
    for code, _ in config.target_languages:
        eval_sets.append(
            EvalSet(
                eval_set_id=f"train_{code}",
                language=code,
                role=ROLE_TRANSLATED_TRAIN,
                num_labels=K,
                labels=label_records(train_gold),
                translation_of=train_src_id,
            )
        )
        eval_sets.append(
            EvalSet(
                eval_set_id=f"val_{code}",
                language=code,
                role=ROLE_TARGET_VAL,
                num_labels=K,
                labels=label_records(val_gold),
            )
        )

    checkpoints = []
    for seed in config.seeds:
        for step, p in config.train_error_schedule:
            predictions: dict[str, tuple[PredictionRecord, ...]] = {}

            train_src_pred = {
                ex_id: _source_prediction(K, p, seed, step, ex_id, train_gold[ex_id])
                for ex_id in train_ids
            }
            predictions[train_src_id] = tuple(
                PredictionRecord(example_id=ex_id, predicted_label=pred)
                for ex_id, pred in train_src_pred.items()
            )

            val_src_pred = {
                ex_id: _source_prediction(K, p, seed, step, ex_id, val_gold[ex_id])
                for ex_id in val_ids
            }
            predictions[val_src_id] = tuple(
                PredictionRecord(
                    example_id=ex_id,
                    predicted_label=_reduce_correctness(
                        K,
                        1.0 - p,
                        config.generalization_gap,
                        seed,
                        step,
                        src,
                        ex_id,
                        val_gold[ex_id],
                        pred,
                    ),
                )
                for ex_id, pred in val_src_pred.items()
            )

            for code, delta in config.target_languages:
                predictions[f"train_{code}"] = tuple(
                    PredictionRecord(
                        example_id=ex_id,
                        predicted_label=_translated_prediction(
                            K, delta, seed, step, code, ex_id, train_src_pred[ex_id]
                        ),
                    )
                    for ex_id in train_ids
                )
                base_correct = (1.0 - delta) * (1.0 - p) + delta / K
                target_val_pred = []
                for ex_id in val_ids:
                    pred = _translated_prediction(
                        K, delta, seed, step, code, ex_id, val_src_pred[ex_id]
                    )
                    pred = _reduce_correctness(
                        K,
                        base_correct,
                        config.generalization_gap,
                        seed,
                        step,
                        code,
                        ex_id,
                        val_gold[ex_id],
                        pred,
                    )
                    target_val_pred.append(
                        PredictionRecord(example_id=ex_id, predicted_label=pred)
                    )
                predictions[f"val_{code}"] = tuple(target_val_pred)

            checkpoints.append(
                CheckpointEval(
                    checkpoint_id=f"seed{seed}_step{step}",
                    seed=seed,
                    step=step,
                    predictions=predictions,
                )
            )

    return CheckpointPool(
        pool_id=f"sim_{_config_digest(config)}",
        model_name="simulated-classifier",
        algorithm_name="planted-transfer",
        eval_sets=tuple(eval_sets),
        checkpoints=tuple(checkpoints),
    )


@dataclass(frozen=True)
class ExpectedDecomposition:
    """Exact channel expectations for one (step, target) combination."""

    e_train: float
    g_inter: float
    g_intra: float
    e: float
    translated_error: float

    @property
    def target_accuracy(self) -> float:
        return 1.0 - self.e


def expected_metrics(
    config: SimConfig, step: int, target_language: str
) -> ExpectedDecomposition:
    """Closed-form expectations of the decomposition components.

    e_train = p
    translated_error = (1 - delta) * p + delta * (1 - 1/K)
    g_inter = delta * (1 - 1/K - p)
    e = min(translated_error + g, 1)
    g_intra = e - translated_error
    """
    by_step = config.train_error_by_step
    if step not in by_step:
        raise ConfigError(f"step {step} is not in the schedule")
    by_language = config.transfer_loss_by_language
    if target_language not in by_language:
        raise ConfigError(f"unknown target language {target_language!r}")
    p = by_step[step]
    delta = by_language[target_language]
    K = config.num_labels
    translated_error = (1.0 - delta) * p + delta * (1.0 - 1.0 / K)
    g_inter = delta * (1.0 - 1.0 / K - p)
    e = min(translated_error + config.generalization_gap, 1.0)
    return ExpectedDecomposition(
        e_train=p,
        g_inter=g_inter,
        g_intra=e - translated_error,
        e=e,
        translated_error=translated_error,
    )
