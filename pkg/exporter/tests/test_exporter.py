"""End-to-end and unit tests for the checkpoint exporter.

The round-trip tests talk to the metrics engine the way real users do:
through files and its command line, never through its Python API.
"""

from __future__ import annotations

import json
import re
import subprocess
import sys
from pathlib import Path

import pytest
import torch

import igap_exporter
from igap_exporter import (
    DatasetError,
    JobError,
    LayerOutOfRange,
    ModelConfig,
    ModelLoadError,
    finalize,
    load_bundle,
    load_job,
    new_model,
    run_export,
    save_bundle,
)
from igap_exporter.cli import main

TRAIN_TEXTS = [
    ("good morning friends", "guten morgen freunde"),
    ("the cat sleeps", "die katze schlaeft"),
    ("red house", "rotes haus"),
    ("we sing loudly", "wir singen laut"),
    ("cold water", "kaltes wasser"),
    ("a bright star", "ein heller stern"),
    ("old tree", "alter baum"),
    ("quiet night", "stille nacht"),
]
VAL_TEXTS = ["schnelles auto", "gruener garten", "leise musik", "warmer sommer"]


def write_jsonl(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows),
        encoding="utf-8",
    )


def make_bundle(bundle_dir: Path, init_seed: int = 5, **config) -> Path:
    defaults = dict(vocab_size=128, hidden_size=16, num_layers=2, num_labels=3)
    defaults.update(config)
    save_bundle(new_model(ModelConfig(**defaults), init_seed), bundle_dir)
    return bundle_dir


def make_fixture(root: Path, **job_extras) -> Path:
    """Bilingual 8-pair train fixture plus a 4-example target val set."""
    lines = [
        f"p{i}\t{en}\t{de}\n" for i, (en, de) in enumerate(TRAIN_TEXTS)
    ]
    (root / "pairs.tsv").write_text("".join(lines), encoding="utf-8")
    write_jsonl(
        root / "train_labels.jsonl",
        [{"example_id": f"p{i}", "label": i % 3} for i in range(len(TRAIN_TEXTS))],
    )
    write_jsonl(
        root / "val_labels.jsonl",
        [{"example_id": f"v{i}", "label": (2 * i) % 3} for i in range(len(VAL_TEXTS))],
    )
    write_jsonl(
        root / "val_texts.jsonl",
        [{"example_id": f"v{i}", "text": t} for i, t in enumerate(VAL_TEXTS)],
    )
    job = {
        "model": "bundle",
        "out_dir": "pool",
        "embedding_layer": 2,
        "datasets": [
            {
                "set_id": "train_en",
                "language": "en",
                "role": "source_train",
                "labels": "train_labels.jsonl",
                "corpus": "pairs.tsv",
                "text_column": "a",
            },
            {
                "set_id": "train_de",
                "language": "de",
                "role": "translated_train",
                "translation_of": "train_en",
                "labels": "train_labels.jsonl",
                "corpus": "pairs.tsv",
                "text_column": "b",
            },
            {
                "set_id": "val_de",
                "language": "de",
                "role": "target_val",
                "labels": "val_labels.jsonl",
                "texts": "val_texts.jsonl",
            },
        ],
    }
    job.update(job_extras)
    job_path = root / "job.json"
    job_path.write_text(json.dumps(job, indent=2) + "\n", encoding="utf-8")
    return job_path


def engine(*args: str) -> subprocess.CompletedProcess:
    """Invoke the metrics engine CLI exactly as a shell user would."""
    return subprocess.run(
        [sys.executable, "-m", "igap", *args],
        capture_output=True,
        text=True,
    )


class TestRoundTrip:
    def test_exported_pool_validates_with_zero_issues(self, tmp_path):
        make_bundle(tmp_path / "bundle", init_seed=5)
        make_bundle(tmp_path / "bundle_late", init_seed=6)
        job_path = make_fixture(tmp_path)
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck_s0_100",
                     "--seed", "0", "--step", "100"]) == 0
        late_job = make_fixture(tmp_path, model="bundle_late")
        assert main(["run", "--job", str(late_job), "--checkpoint-id", "ck_s0_200",
                     "--seed", "0", "--step", "200"]) == 0
        assert main(["finalize", "--out-dir", str(tmp_path / "pool"),
                     "--pool-id", "demo", "--model-name", "tiny",
                     "--algorithm-name", "finetune"]) == 0

        proc = engine("validate", "--manifest", str(tmp_path / "pool/manifest.json"))
        assert proc.returncode == 0, proc.stderr
        assert "0 issues" in proc.stdout

        for ck in ("ck_s0_100", "ck_s0_200"):
            for set_id, expected in (("train_en", 8), ("train_de", 8), ("val_de", 4)):
                pred = tmp_path / "pool" / "predictions" / ck / f"{set_id}.jsonl"
                lines = pred.read_text(encoding="utf-8").splitlines()
                assert len(lines) == expected
                row = json.loads(lines[0])
                assert set(row) == {"example_id", "predicted_label"}

    def test_decompose_runs_on_exported_pool(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "100"]) == 0
        assert main(["finalize", "--out-dir", str(tmp_path / "pool"),
                     "--pool-id", "demo", "--model-name", "tiny",
                     "--algorithm-name", "finetune"]) == 0
        proc = engine("decompose", "--manifest",
                      str(tmp_path / "pool/manifest.json"), "--source", "en")
        assert proc.returncode == 0, proc.stderr
        header, row = proc.stdout.splitlines()[:2]
        assert header.startswith("checkpoint_id,seed,step,source,target")
        assert row.startswith("ck,0,100,en,de,")

    def test_embeddings_feed_the_similarity_baseline(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "100"]) == 0
        pair = tmp_path / "pair.jsonl"
        embed_dir = tmp_path / "pool" / "embeddings" / "ck"
        pair.write_text(
            (embed_dir / "train_en.jsonl").read_text(encoding="utf-8")
            + (embed_dir / "train_de.jsonl").read_text(encoding="utf-8"),
            encoding="utf-8",
        )
        proc = engine("baseline", "--embeddings", str(pair), "--source", "en")
        assert proc.returncode == 0, proc.stderr
        assert re.search(r"^en,de,cos,8,", proc.stdout, re.M)


class TestEmbeddings:
    def test_single_token_sentence_equals_token_vector(self, tmp_path):
        bundle = make_bundle(tmp_path / "bundle")
        write_jsonl(tmp_path / "labels.jsonl", [{"example_id": "s1", "label": 0}])
        write_jsonl(tmp_path / "texts.jsonl", [{"example_id": "s1", "text": "hello"}])
        job_path = make_fixture(
            tmp_path,
            datasets=[{
                "set_id": "solo", "language": "en", "role": "generic",
                "labels": "labels.jsonl", "texts": "texts.jsonl",
            }],
        )
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"]) == 0
        row = json.loads(
            (tmp_path / "pool/embeddings/ck/solo.jsonl").read_text(encoding="utf-8")
        )
        model = load_bundle(bundle)
        ids, _ = model.encode("hello")
        assert len(ids) == 1
        with torch.no_grad():
            token_vector = model.hidden_states(torch.tensor([ids]))[2][0, 0]
        emitted = torch.tensor(row["vector"], dtype=torch.float32)
        assert emitted.shape == token_vector.shape == (16,)
        assert torch.max(torch.abs(emitted - token_vector)).item() < 1e-6

    def test_sentence_vector_is_the_token_mean(self, tmp_path):
        bundle = make_bundle(tmp_path / "bundle")
        write_jsonl(tmp_path / "labels.jsonl", [{"example_id": "s1", "label": 1}])
        write_jsonl(
            tmp_path / "texts.jsonl", [{"example_id": "s1", "text": "red house"}]
        )
        job_path = make_fixture(
            tmp_path,
            datasets=[{
                "set_id": "solo", "language": "en", "role": "generic",
                "labels": "labels.jsonl", "texts": "texts.jsonl",
            }],
        )
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"]) == 0
        row = json.loads(
            (tmp_path / "pool/embeddings/ck/solo.jsonl").read_text(encoding="utf-8")
        )
        model = load_bundle(bundle)
        ids, _ = model.encode("red house")
        with torch.no_grad():
            tokens = model.hidden_states(torch.tensor([ids]))[2][0]
        reference = tokens.mean(dim=0)
        emitted = torch.tensor(row["vector"], dtype=torch.float32)
        assert torch.max(torch.abs(emitted - reference)).item() < 1e-6

    def test_layer_defaults_to_seven_and_is_recorded(self, tmp_path):
        make_bundle(tmp_path / "bundle", num_layers=7, hidden_size=8)
        job_path = make_fixture(tmp_path)
        raw = json.loads(job_path.read_text(encoding="utf-8"))
        del raw["embedding_layer"]
        job_path.write_text(json.dumps(raw, indent=2) + "\n", encoding="utf-8")
        job = load_job(job_path)
        assert job.embedding_layer == 7
        result = run_export(job, "ck", 0, 100)
        fragment = json.loads(result.fragment_path.read_text(encoding="utf-8"))
        assert fragment["embedding_layer"] == 7
        assert fragment["checkpoint_id"] == "ck"
        assert (fragment["seed"], fragment["step"]) == (0, 100)

    def test_layer_beyond_depth_is_rejected(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path, embedding_layer=9)
        with pytest.raises(LayerOutOfRange, match=r"layer 9 outside \[0, 2\]"):
            run_export(load_job(job_path), "ck", 0, 0)
        code = main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"])
        assert code == 2

    def test_special_markers_can_be_pooled_or_excluded(self, tmp_path):
        bundle = make_bundle(tmp_path / "bundle", use_specials=True)
        model = load_bundle(bundle)
        ids, is_word = model.encode("hello")
        assert len(ids) == 3 and is_word == [False, True, False]
        write_jsonl(tmp_path / "labels.jsonl", [{"example_id": "s1", "label": 0}])
        write_jsonl(tmp_path / "texts.jsonl", [{"example_id": "s1", "text": "hello"}])
        job_path = make_fixture(
            tmp_path,
            datasets=[{
                "set_id": "solo", "language": "en", "role": "generic",
                "labels": "labels.jsonl", "texts": "texts.jsonl",
            }],
        )
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "all",
                     "--seed", "0", "--step", "0"]) == 0
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "words",
                     "--seed", "1", "--step", "0", "--exclude-specials"]) == 0
        with torch.no_grad():
            states = model.hidden_states(torch.tensor([ids]))[2][0]
        pooled_all = states.mean(dim=0)
        pooled_words = states[1]
        read = lambda ck: torch.tensor(
            json.loads(
                (tmp_path / f"pool/embeddings/{ck}/solo.jsonl").read_text("utf-8")
            )["vector"],
            dtype=torch.float32,
        )
        assert torch.max(torch.abs(read("all") - pooled_all)).item() < 1e-6
        assert torch.max(torch.abs(read("words") - pooled_words)).item() < 1e-6


class TestDeterminism:
    def test_rerun_is_byte_identical(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        args = ["run", "--job", str(job_path), "--checkpoint-id", "ck",
                "--seed", "0", "--step", "100"]
        assert main(args) == 0
        pool = tmp_path / "pool"
        before = {
            p.relative_to(pool): p.read_bytes() for p in sorted(pool.rglob("*.jsonl"))
        }
        assert main(args) == 0
        after = {
            p.relative_to(pool): p.read_bytes() for p in sorted(pool.rglob("*.jsonl"))
        }
        assert before == after
        assert len(before) == 9  # 3 labels + 3 predictions + 3 embeddings

    def test_batch_size_does_not_change_outputs(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        wide_job = make_fixture(tmp_path, out_dir="pool_wide", batch_size=8)
        assert main(["run", "--job", str(wide_job), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"]) == 0
        narrow_job = make_fixture(tmp_path, out_dir="pool_narrow", batch_size=1)
        assert main(["run", "--job", str(narrow_job), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"]) == 0
        for set_id in ("train_en", "train_de", "val_de"):
            wide_pred = (tmp_path / "pool_wide/predictions/ck" / f"{set_id}.jsonl")
            narrow_pred = (tmp_path / "pool_narrow/predictions/ck" / f"{set_id}.jsonl")
            assert wide_pred.read_bytes() == narrow_pred.read_bytes()
            for wide_line, narrow_line in zip(
                (tmp_path / "pool_wide/embeddings/ck" / f"{set_id}.jsonl")
                .read_text("utf-8").splitlines(),
                (tmp_path / "pool_narrow/embeddings/ck" / f"{set_id}.jsonl")
                .read_text("utf-8").splitlines(),
            ):
                wide_row = json.loads(wide_line)
                narrow_row = json.loads(narrow_line)
                assert wide_row["example_id"] == narrow_row["example_id"]
                diff = max(
                    abs(a - b)
                    for a, b in zip(wide_row["vector"], narrow_row["vector"])
                )
                assert diff < 1e-6


class TestGuards:
    def test_missing_text_for_labeled_example(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        labels = tmp_path / "train_labels.jsonl"
        rows = [json.loads(line) for line in labels.read_text("utf-8").splitlines()]
        rows.append({"example_id": "p99", "label": 0})
        write_jsonl(labels, rows)
        with pytest.raises(DatasetError, match=r"no text for 1 labeled.*'p99'"):
            run_export(load_job(job_path), "ck", 0, 0)

    def test_duplicate_and_out_of_range_labels(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        labels = tmp_path / "train_labels.jsonl"
        good = labels.read_text("utf-8")
        labels.write_text(good + good.splitlines()[0] + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="duplicate example_id 'p0'"):
            run_export(load_job(job_path), "ck", 0, 0)
        labels.write_text(
            good.replace('"label": 2', '"label": 9', 1), encoding="utf-8"
        )
        with pytest.raises(DatasetError, match=r"label 9 outside \[0, 3\)"):
            run_export(load_job(job_path), "ck", 0, 0)

    def test_empty_text_cannot_be_pooled(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        write_jsonl(tmp_path / "labels.jsonl", [{"example_id": "s1", "label": 0}])
        write_jsonl(tmp_path / "texts.jsonl", [{"example_id": "s1", "text": "   "}])
        job_path = make_fixture(
            tmp_path,
            datasets=[{
                "set_id": "solo", "language": "en", "role": "generic",
                "labels": "labels.jsonl", "texts": "texts.jsonl",
            }],
        )
        with pytest.raises(DatasetError, match="no tokens to pool"):
            run_export(load_job(job_path), "ck", 0, 0)

    def test_changed_labels_between_exports_are_rejected(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck_a",
                     "--seed", "0", "--step", "100"]) == 0
        labels = tmp_path / "val_labels.jsonl"
        labels.write_text(
            labels.read_text("utf-8").replace('"label": 0', '"label": 1', 1),
            encoding="utf-8",
        )
        with pytest.raises(DatasetError, match="differ from a previous export"):
            run_export(load_job(job_path), "ck_b", 0, 200)

    def test_job_file_problems_are_usage_errors(self, tmp_path):
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        raw = json.loads(job_path.read_text("utf-8"))
        del raw["model"]
        job_path.write_text(json.dumps(raw), encoding="utf-8")
        with pytest.raises(JobError, match="'model'"):
            load_job(job_path)
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"]) == 1
        both_sources = make_fixture(
            tmp_path,
            datasets=[{
                "set_id": "x", "language": "en", "role": "generic",
                "labels": "labels.jsonl", "corpus": "pairs.tsv",
                "text_column": "a", "texts": "texts.jsonl",
            }],
        )
        with pytest.raises(JobError, match="exactly one of"):
            load_job(both_sources)
        with pytest.raises(JobError, match="unknown role 'weird'"):
            load_job(
                make_fixture(
                    tmp_path,
                    datasets=[{
                        "set_id": "x", "language": "en", "role": "weird",
                        "labels": "labels.jsonl", "texts": "texts.jsonl",
                    }],
                )
            )

    def test_model_bundle_problems(self, tmp_path):
        with pytest.raises(ModelLoadError, match="no model config"):
            load_bundle(tmp_path / "missing")
        bundle = make_bundle(tmp_path / "bundle")
        (bundle / "config.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(ModelLoadError, match="invalid JSON"):
            load_bundle(bundle)
        job_path = make_fixture(tmp_path, model="missing")
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck",
                     "--seed", "0", "--step", "0"]) == 2

    def test_finalize_guards(self, tmp_path):
        assert main(["finalize", "--out-dir", str(tmp_path / "empty"),
                     "--pool-id", "p", "--model-name", "m",
                     "--algorithm-name", "a"]) == 2
        make_bundle(tmp_path / "bundle")
        job_path = make_fixture(tmp_path)
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck_a",
                     "--seed", "0", "--step", "100"]) == 0
        assert main(["run", "--job", str(job_path), "--checkpoint-id", "ck_b",
                     "--seed", "0", "--step", "100"]) == 0
        with pytest.raises(DatasetError, match=r"duplicate \(seed, step\)"):
            finalize(tmp_path / "pool", "p", "m", "a")


def test_package_never_imports_the_metrics_engine():
    """The exporter talks to the engine via files and CLI only."""
    package_dir = Path(igap_exporter.__file__).parent
    pattern = re.compile(r"^\s*(?:from|import)\s+igap(?:\.|\s|$)", re.M)
    for source in sorted(package_dir.glob("*.py")):
        assert not pattern.search(source.read_text(encoding="utf-8")), source
