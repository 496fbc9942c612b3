"""Shared builders for test pools and prediction fixtures."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from igap import (
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

GOLDEN_DIR = Path(__file__).parent / "fixtures" / "golden"
GOLDEN_MANIFEST = GOLDEN_DIR / "manifest.json"


@pytest.fixture
def golden_manifest() -> Path:
    return GOLDEN_MANIFEST


def labeled_set(
    set_id: str,
    language: str,
    role: str,
    labels: dict[str, int],
    num_labels: int,
    translation_of: str | None = None,
) -> EvalSet:
    return EvalSet(
        eval_set_id=set_id,
        language=language,
        role=role,
        num_labels=num_labels,
        labels=tuple(ExampleLabel(k, v) for k, v in labels.items()),
        translation_of=translation_of,
    )


def predictions_for(labels: dict[str, int], wrong_ids: set[str], num_labels: int):
    """Predict the gold label except on wrong_ids, where a different one is used."""
    records = []
    for example_id, gold in labels.items():
        if example_id in wrong_ids:
            predicted = (gold + 1) % num_labels
        else:
            predicted = gold
        records.append(PredictionRecord(example_id, predicted))
    return tuple(records)


def direction_pool(
    num_labels: int,
    train_labels: dict[str, int],
    val_labels: dict[str, int],
    checkpoints: list[tuple[str, int, int, set[str], set[str], set[str]]],
    source_val_labels: dict[str, int] | None = None,
    source_val_wrong: dict[str, set[str]] | None = None,
) -> CheckpointPool:
    """Build a single-direction en->de pool.

    Each checkpoint entry is (checkpoint_id, seed, step, wrong_on_source_train,
    wrong_on_translated_train, wrong_on_target_val).
    """
    sets = [
        labeled_set("train_en", "en", ROLE_SOURCE_TRAIN, train_labels, num_labels),
        labeled_set(
            "train_de",
            "de",
            ROLE_TRANSLATED_TRAIN,
            train_labels,
            num_labels,
            translation_of="train_en",
        ),
        labeled_set("val_de", "de", ROLE_TARGET_VAL, val_labels, num_labels),
    ]
    if source_val_labels is not None:
        sets.append(
            labeled_set("val_en", "en", ROLE_SOURCE_VAL, source_val_labels, num_labels)
        )
    ckpts = []
    for ckpt_id, seed, step, wrong_src, wrong_trans, wrong_val in checkpoints:
        preds = {
            "train_en": predictions_for(train_labels, wrong_src, num_labels),
            "train_de": predictions_for(train_labels, wrong_trans, num_labels),
            "val_de": predictions_for(val_labels, wrong_val, num_labels),
        }
        if source_val_labels is not None:
            wrong = (source_val_wrong or {}).get(ckpt_id, set())
            preds["val_en"] = predictions_for(source_val_labels, wrong, num_labels)
        ckpts.append(
            CheckpointEval(
                checkpoint_id=ckpt_id,
                seed=seed,
                step=step,
                predictions=preds,
            )
        )
    return CheckpointPool(
        pool_id="test-pool",
        model_name="m",
        algorithm_name="a",
        eval_sets=tuple(sets),
        checkpoints=tuple(ckpts),
    )


def random_direction_pool(rng: random.Random, max_examples: int = 60) -> CheckpointPool:
    """A random en->de pool with random prediction quality per checkpoint."""
    num_labels = rng.randint(2, 5)
    n_train = rng.randint(1, max_examples)
    n_val = rng.randint(1, max_examples)
    train_labels = {
        f"t{i}": rng.randrange(num_labels) for i in range(n_train)
    }
    val_labels = {f"v{i}": rng.randrange(num_labels) for i in range(n_val)}
    checkpoints = []
    for idx in range(rng.randint(1, 8)):
        seed = rng.randint(0, 2)
        step = idx * 10
        wrong_src = {k for k in train_labels if rng.random() < rng.random()}
        wrong_trans = {k for k in train_labels if rng.random() < rng.random()}
        wrong_val = {k for k in val_labels if rng.random() < rng.random()}
        checkpoints.append((f"ck{idx}", seed, step, wrong_src, wrong_trans, wrong_val))
    return direction_pool(num_labels, train_labels, val_labels, checkpoints)
