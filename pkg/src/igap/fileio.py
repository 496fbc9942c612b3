"""Line-oriented JSON file IO and atomic text output.

Readers stream line-delimited JSON where each non-blank line is one
object; writers stage to a temp file in the destination directory and
rename into place so readers never observe a partial file.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterator, Mapping

from .errors import MissingFile, SchemaError
from .types import ExampleLabel, PredictionRecord


def read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, object) for each non-blank line of ``path``."""
    if not path.is_file():
        raise MissingFile(f"no such file: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc.msg})")
            if not isinstance(obj, dict):
                raise SchemaError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _require_str(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{where}: {key!r} must be a non-empty string")
    return value


def parse_label(
    raw: object,
    num_labels: int,
    label_map: Mapping[str, int] | None,
    where: str,
) -> int:
    """Turn a raw JSON label into a dense class index.

    Accepts an integer in ``[0, num_labels)`` directly, or a string key of
    ``label_map`` when one is provided.
    """
    if isinstance(raw, bool):
        raise SchemaError(f"{where}: label must be an integer or mapped string")
    if isinstance(raw, int):
        if not 0 <= raw < num_labels:
            raise SchemaError(
                f"{where}: label {raw} outside [0, {num_labels})"
            )
        return raw
    if isinstance(raw, str):
        if label_map is None:
            raise SchemaError(
                f"{where}: string label {raw!r} but the manifest has no label_map"
            )
        if raw not in label_map:
            raise SchemaError(f"{where}: label {raw!r} not in label_map")
        return label_map[raw]
    raise SchemaError(f"{where}: label must be an integer or mapped string")


def load_labels_file(
    path: Path,
    num_labels: int,
    label_map: Mapping[str, int] | None = None,
) -> tuple[ExampleLabel, ...]:
    records = []
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        example_id = _require_str(obj, "example_id", where)
        if "label" not in obj:
            raise SchemaError(f"{where}: missing 'label'")
        label = parse_label(obj["label"], num_labels, label_map, where)
        records.append(ExampleLabel(example_id=example_id, label=label))
    return tuple(records)


def load_predictions_file(
    path: Path,
    num_labels: int,
    label_map: Mapping[str, int] | None = None,
) -> tuple[PredictionRecord, ...]:
    records = []
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        example_id = _require_str(obj, "example_id", where)
        if "predicted_label" not in obj:
            raise SchemaError(f"{where}: missing 'predicted_label'")
        label = parse_label(obj["predicted_label"], num_labels, label_map, where)
        records.append(PredictionRecord(example_id=example_id, predicted_label=label))
    return tuple(records)


def load_embeddings_file(
    path: Path,
) -> dict[str, list[tuple[str, list[float]]]]:
    """Read sentence vectors grouped by language.

    Each line carries ``example_id``, ``language`` and ``vector``; vector
    components must be finite numbers.
    """
    by_language: dict[str, list[tuple[str, list[float]]]] = {}
    for lineno, obj in read_jsonl(path):
        where = f"{path}:{lineno}"
        example_id = _require_str(obj, "example_id", where)
        language = _require_str(obj, "language", where)
        raw_vec = obj.get("vector")
        if not isinstance(raw_vec, list) or not raw_vec:
            raise SchemaError(f"{where}: 'vector' must be a non-empty array")
        vector: list[float] = []
        for component in raw_vec:
            if isinstance(component, bool) or not isinstance(component, (int, float)):
                raise SchemaError(f"{where}: vector components must be numbers")
            value = float(component)
            if not math.isfinite(value):
                raise SchemaError(f"{where}: non-finite vector component")
            vector.append(value)
        by_language.setdefault(language, []).append((example_id, vector))
    return by_language


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` via a same-directory temp file and rename."""
    path = Path(path)
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


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_jsonl(path: Path, objects: list[dict]) -> None:
    text = "".join(json.dumps(obj, sort_keys=True) + "\n" for obj in objects)
    atomic_write_text(path, text)
