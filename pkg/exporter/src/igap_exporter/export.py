"""Run a model bundle over datasets and emit pool-compatible files.

One ``run_export`` call covers one checkpoint: it writes a prediction
JSONL per dataset, one sentence-embedding JSONL, the dataset labels, and
a manifest fragment recording the checkpoint identity. ``finalize``
assembles the accumulated fragments into a complete pool manifest, so a
long fine-tuning sweep can export checkpoint by checkpoint and stitch the
pool together at the end.

All files are written atomically (temp file + rename) and
deterministically: rerunning the same export produces byte-identical
output.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import DatasetError, LayerOutOfRange
from .job import DatasetSpec, ExportJob
from .model import TinyTextClassifier, load_bundle, masked_mean

EVAL_SETS_FILE = "eval_sets.json"
FRAGMENTS_DIR = "fragments"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class ExportResult:
    """Paths written by one checkpoint export."""

    out_dir: Path
    prediction_paths: dict[str, Path]
    embedding_paths: dict[str, Path]
    fragment_path: Path
    eval_sets_path: Path


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _jsonl(rows: list[dict]) -> str:
    return "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)


def read_labels(path: Path, num_labels: int) -> dict[str, int]:
    """Gold labels keyed by example id, in file order."""
    if not path.is_file():
        raise DatasetError(f"no such labels file: {path}")
    labels: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{where}: invalid JSON ({exc.msg})")
            example_id = obj.get("example_id")
            if not isinstance(example_id, str) or not example_id:
                raise DatasetError(f"{where}: 'example_id' must be a non-empty string")
            label = obj.get("label")
            if isinstance(label, bool) or not isinstance(label, int):
                raise DatasetError(f"{where}: 'label' must be an integer")
            if not 0 <= label < num_labels:
                raise DatasetError(
                    f"{where}: label {label} outside [0, {num_labels})"
                )
            if example_id in labels:
                raise DatasetError(f"{where}: duplicate example_id {example_id!r}")
            labels[example_id] = label
    if not labels:
        raise DatasetError(f"{path}: no label records")
    return labels


def read_corpus_column(path: Path, column: str) -> dict[str, str]:
    """One side of a translation-pair TSV (example_id, text_a, text_b)."""
    if not path.is_file():
        raise DatasetError(f"no such corpus file: {path}")
    index = {"a": 1, "b": 2}[column]
    texts: dict[str, str] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DatasetError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, "
                    f"got {len(parts)}"
                )
            example_id = parts[0]
            if example_id in texts:
                raise DatasetError(
                    f"{path}:{lineno}: duplicate example_id {example_id!r}"
                )
            texts[example_id] = parts[index]
    return texts


def read_texts_file(path: Path) -> dict[str, str]:
    """Per-example texts from a JSONL of example_id/text records."""
    if not path.is_file():
        raise DatasetError(f"no such texts file: {path}")
    texts: dict[str, str] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{where}: invalid JSON ({exc.msg})")
            example_id = obj.get("example_id")
            text = obj.get("text")
            if not isinstance(example_id, str) or not example_id:
                raise DatasetError(f"{where}: 'example_id' must be a non-empty string")
            if not isinstance(text, str):
                raise DatasetError(f"{where}: 'text' must be a string")
            if example_id in texts:
                raise DatasetError(f"{where}: duplicate example_id {example_id!r}")
            texts[example_id] = text
    return texts


def _dataset_texts(spec: DatasetSpec, labels: dict[str, int]) -> dict[str, str]:
    if spec.corpus_path is not None:
        texts = read_corpus_column(spec.corpus_path, spec.text_column)
    else:
        texts = read_texts_file(spec.texts_path)
    missing = [example_id for example_id in labels if example_id not in texts]
    if missing:
        raise DatasetError(
            f"dataset {spec.set_id!r}: no text for {len(missing)} labeled "
            f"example(s) (first missing: {missing[0]!r})"
        )
    return texts


@dataclass(frozen=True)
class SentenceOutputs:
    """Model outputs for one dataset, aligned with its example ids."""

    example_ids: tuple[str, ...]
    predicted: tuple[int, ...]
    vectors: tuple[tuple[float, ...], ...]


def infer_dataset(
    model: TinyTextClassifier,
    spec: DatasetSpec,
    texts: dict[str, str],
    example_ids: list[str],
    embedding_layer: int,
    batch_size: int,
    pool_specials: bool,
) -> SentenceOutputs:
    """Predicted classes and mean-pooled sentence vectors, batched."""
    predicted: list[int] = []
    vectors: list[tuple[float, ...]] = []
    with torch.no_grad():
        for lo in range(0, len(example_ids), batch_size):
            batch_ids = example_ids[lo : lo + batch_size]
            encoded = []
            for example_id in batch_ids:
                ids, is_word = model.encode(texts[example_id])
                pool = [
                    word or pool_specials for word in is_word
                ]
                if not any(pool):
                    raise DatasetError(
                        f"dataset {spec.set_id!r}: example {example_id!r} "
                        "has no tokens to pool"
                    )
                encoded.append((ids, pool))
            width = max(len(ids) for ids, _ in encoded)
            input_ids = torch.zeros((len(encoded), width), dtype=torch.long)
            pool_mask = torch.zeros((len(encoded), width), dtype=torch.bool)
            for row, (ids, pool) in enumerate(encoded):
                input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
                pool_mask[row, : len(pool)] = torch.tensor(pool, dtype=torch.bool)
            states = model.hidden_states(input_ids)
            sentence = masked_mean(states[embedding_layer], pool_mask)
            logits = model.head(masked_mean(states[-1], pool_mask))
            predicted.extend(int(c) for c in logits.argmax(dim=-1))
            vectors.extend(
                tuple(float(x) for x in row) for row in sentence
            )
    return SentenceOutputs(
        example_ids=tuple(example_ids),
        predicted=tuple(predicted),
        vectors=tuple(vectors),
    )


def _eval_sets_fragment(job: ExportJob, num_labels: int) -> dict:
    sets = []
    for spec in job.datasets:
        entry = {
            "eval_set_id": spec.set_id,
            "language": spec.language,
            "role": spec.role,
            "labels_path": f"labels/{spec.set_id}.jsonl",
        }
        if spec.translation_of is not None:
            entry["translation_of"] = spec.translation_of
        sets.append(entry)
    return {"num_labels": num_labels, "eval_sets": sets}


def run_export(
    job: ExportJob, checkpoint_id: str, seed: int, step: int
) -> ExportResult:
    """Export one checkpoint's predictions, embeddings, and metadata."""
    if not checkpoint_id:
        raise DatasetError("checkpoint_id must be non-empty")
    model = load_bundle(job.model_path)
    config = model.config
    if job.embedding_layer > config.depth:
        raise LayerOutOfRange(
            f"embedding layer {job.embedding_layer} outside [0, {config.depth}] "
            f"for a {config.num_layers}-layer model"
        )

    out_dir = job.out_dir
    label_rows: dict[str, list[dict]] = {}
    prediction_paths: dict[str, Path] = {}
    embedding_paths: dict[str, Path] = {}
    fragment_predictions: dict[str, str] = {}
    fragment_embeddings: dict[str, str] = {}
    for spec in job.datasets:
        labels = read_labels(spec.labels_path, config.num_labels)
        texts = _dataset_texts(spec, labels)
        example_ids = sorted(labels)
        outputs = infer_dataset(
            model,
            spec,
            texts,
            example_ids,
            job.embedding_layer,
            job.batch_size,
            job.pool_specials,
        )
        label_rows[spec.set_id] = [
            {"example_id": example_id, "label": labels[example_id]}
            for example_id in example_ids
        ]
        rel_pred = f"predictions/{checkpoint_id}/{spec.set_id}.jsonl"
        fragment_predictions[spec.set_id] = rel_pred
        prediction_paths[spec.set_id] = out_dir / rel_pred
        pred_rows = [
            {"example_id": example_id, "predicted_label": label}
            for example_id, label in zip(outputs.example_ids, outputs.predicted)
        ]
        _atomic_write_text(prediction_paths[spec.set_id], _jsonl(pred_rows))
        # One embeddings file per dataset: translation-pair files can be
        # concatenated for similarity scoring without dragging in vectors
        # from unpaired sets.
        rel_embed = f"embeddings/{checkpoint_id}/{spec.set_id}.jsonl"
        fragment_embeddings[spec.set_id] = rel_embed
        embedding_paths[spec.set_id] = out_dir / rel_embed
        embed_rows = [
            {
                "example_id": example_id,
                "language": spec.language,
                "vector": list(vector),
            }
            for example_id, vector in zip(outputs.example_ids, outputs.vectors)
        ]
        _atomic_write_text(embedding_paths[spec.set_id], _jsonl(embed_rows))

    # Labels are shared across checkpoints; a conflicting rewrite means the
    # job changed between exports into the same pool directory.
    for set_id, rows in label_rows.items():
        labels_path = out_dir / "labels" / f"{set_id}.jsonl"
        text = _jsonl(rows)
        if labels_path.is_file():
            if labels_path.read_text(encoding="utf-8") != text:
                raise DatasetError(
                    f"labels for {set_id!r} differ from a previous export "
                    f"into {out_dir}"
                )
        else:
            _atomic_write_text(labels_path, text)

    eval_sets_path = out_dir / EVAL_SETS_FILE
    fragment_text = (
        json.dumps(_eval_sets_fragment(job, config.num_labels), indent=2, sort_keys=True)
        + "\n"
    )
    if eval_sets_path.is_file():
        if eval_sets_path.read_text(encoding="utf-8") != fragment_text:
            raise DatasetError(
                f"eval sets differ from a previous export into {out_dir}"
            )
    else:
        _atomic_write_text(eval_sets_path, fragment_text)

    fragment = {
        "checkpoint_id": checkpoint_id,
        "seed": seed,
        "step": step,
        "embedding_layer": job.embedding_layer,
        "embeddings": fragment_embeddings,
        "predictions": fragment_predictions,
    }
    fragment_path = out_dir / FRAGMENTS_DIR / f"{checkpoint_id}.json"
    _atomic_write_text(
        fragment_path, json.dumps(fragment, indent=2, sort_keys=True) + "\n"
    )
    return ExportResult(
        out_dir=out_dir,
        prediction_paths=prediction_paths,
        embedding_paths=embedding_paths,
        fragment_path=fragment_path,
        eval_sets_path=eval_sets_path,
    )


def finalize(
    out_dir: str | Path, pool_id: str, model_name: str, algorithm_name: str
) -> Path:
    """Assemble accumulated fragments into a complete pool manifest."""
    out_dir = Path(out_dir)
    eval_sets_path = out_dir / EVAL_SETS_FILE
    if not eval_sets_path.is_file():
        raise DatasetError(
            f"no {EVAL_SETS_FILE} in {out_dir}; run an export first"
        )
    try:
        sets_fragment = json.loads(eval_sets_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{eval_sets_path}: invalid JSON ({exc.msg})")

    fragments_dir = out_dir / FRAGMENTS_DIR
    fragment_paths = sorted(fragments_dir.glob("*.json"))
    if not fragment_paths:
        raise DatasetError(f"no checkpoint fragments in {fragments_dir}")
    checkpoints = []
    seen_ids: set[str] = set()
    seen_seed_steps: set[tuple[int, int]] = set()
    for path in fragment_paths:
        try:
            fragment = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid JSON ({exc.msg})")
        checkpoint_id = fragment["checkpoint_id"]
        key = (fragment["seed"], fragment["step"])
        if checkpoint_id in seen_ids:
            raise DatasetError(f"{path}: duplicate checkpoint_id {checkpoint_id!r}")
        if key in seen_seed_steps:
            raise DatasetError(f"{path}: duplicate (seed, step) pair {key}")
        seen_ids.add(checkpoint_id)
        seen_seed_steps.add(key)
        checkpoints.append(
            {
                "checkpoint_id": checkpoint_id,
                "seed": fragment["seed"],
                "step": fragment["step"],
                "predictions": fragment["predictions"],
            }
        )
    checkpoints.sort(key=lambda c: (c["seed"], c["step"], c["checkpoint_id"]))

    manifest = {
        "pool_id": pool_id,
        "model_name": model_name,
        "algorithm_name": algorithm_name,
        "num_labels": sets_fragment["num_labels"],
        "eval_sets": sets_fragment["eval_sets"],
        "checkpoints": checkpoints,
    }
    manifest_path = out_dir / MANIFEST_FILE
    _atomic_write_text(
        manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest_path
