"""Random label planting and seeded label corruption."""

from __future__ import annotations

import pytest

from igap import (
    ROLE_SOURCE_TRAIN,
    ROLE_TRANSLATED_TRAIN,
    AlignmentError,
    EmptySet,
    LabelMismatch,
    MissingFile,
    ParallelCorpus,
    RatioOutOfRange,
    SchemaError,
    corrupt_jointly,
    corrupt_labels,
    corruption_count,
    gen_random_labels,
    pair_translations,
    read_parallel_texts,
    read_parallel_tsv,
)

from conftest import labeled_set


def corpus_of(n: int, prefix: str = "s") -> ParallelCorpus:
    return ParallelCorpus(
        language_a="en",
        language_b="de",
        sentence_pairs=tuple(
            (f"{prefix}{i:05d}", f"text {i}", f"Text {i}") for i in range(n)
        ),
    )


class TestParallelCorpus:
    def test_pairs_sorted_by_id(self):
        corpus = ParallelCorpus(
            "en", "de", (("b", "x", "y"), ("a", "u", "v"))
        )
        assert corpus.example_ids == ("a", "b")
        assert len(corpus) == 2

    def test_duplicate_id_rejected(self):
        with pytest.raises(SchemaError, match="duplicate id 'a'"):
            ParallelCorpus("en", "de", (("a", "x", "y"), ("a", "u", "v")))

    def test_empty_text_rejected(self):
        with pytest.raises(SchemaError, match="empty text"):
            ParallelCorpus("en", "de", (("a", "", "y"),))


class TestReaders:
    def test_tsv(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("p1\thello\thallo\n\np2\tworld\twelt\n", encoding="utf-8")
        corpus = read_parallel_tsv(path, "en", "de")
        assert corpus.example_ids == ("p1", "p2")
        assert corpus.sentence_pairs[1] == ("p2", "world", "welt")

    def test_tsv_field_count(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("p1\thello\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="expected 3 tab-separated fields"):
            read_parallel_tsv(path, "en", "de")

    def test_tsv_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            read_parallel_tsv(tmp_path / "nope.tsv", "en", "de")

    def test_paired_text_files(self, tmp_path):
        (tmp_path / "ids").write_text("p1\np2\n", encoding="utf-8")
        (tmp_path / "en").write_text("hello\nworld\n", encoding="utf-8")
        (tmp_path / "de").write_text("hallo\nwelt\n", encoding="utf-8")
        corpus = read_parallel_texts(
            tmp_path / "ids", tmp_path / "en", tmp_path / "de", "en", "de"
        )
        assert corpus.sentence_pairs[0] == ("p1", "hello", "hallo")

    def test_paired_text_line_mismatch(self, tmp_path):
        (tmp_path / "ids").write_text("p1\np2\n", encoding="utf-8")
        (tmp_path / "en").write_text("hello\n", encoding="utf-8")
        (tmp_path / "de").write_text("hallo\nwelt\n", encoding="utf-8")
        with pytest.raises(AlignmentError, match="line counts differ"):
            read_parallel_texts(
                tmp_path / "ids", tmp_path / "en", tmp_path / "de", "en", "de"
            )


class TestGenRandomLabels:
    def test_deterministic_per_seed(self):
        corpus = corpus_of(200)
        one = gen_random_labels(corpus, seed=3, num_labels=4)
        two = gen_random_labels(corpus, seed=3, num_labels=4)
        assert one.labels == two.labels
        other_seed = gen_random_labels(corpus, seed=4, num_labels=4)
        assert other_seed.labels != one.labels

    def test_labels_shared_across_pair(self):
        labeled = gen_random_labels(corpus_of(50), seed=0, num_labels=3)
        source, translated = labeled.to_eval_sets()
        assert source.label_by_id == translated.label_by_id
        assert source.role == ROLE_SOURCE_TRAIN
        assert translated.role == ROLE_TRANSLATED_TRAIN
        assert translated.translation_of == source.eval_set_id
        assert source.eval_set_id == "train_en"
        assert translated.eval_set_id == "train_de"

    def test_labels_depend_only_on_id_and_seed(self):
        """Removing examples never reshuffles the labels of the rest."""
        big = gen_random_labels(corpus_of(100), seed=5, num_labels=3)
        small_corpus = ParallelCorpus(
            "en", "de", big.base.sentence_pairs[10:60]
        )
        small = gen_random_labels(small_corpus, seed=5, num_labels=3)
        for ex_id, label in small.labels.items():
            assert big.labels[ex_id] == label

    def test_roughly_balanced(self):
        labeled = gen_random_labels(corpus_of(10000), seed=1, num_labels=2)
        ones = sum(labeled.labels.values())
        assert abs(ones / 10000 - 0.5) < 0.015

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptySet):
            gen_random_labels(
                ParallelCorpus("en", "de", ()), seed=0, num_labels=2
            )


class TestCorruptionCount:
    def test_half_to_even_rounding(self):
        assert corruption_count("0.1", 5) == 0  # 0.5 rounds to even 0
        assert corruption_count("0.3", 5) == 2  # 1.5 rounds to even 2
        assert corruption_count("0.5", 3) == 2  # 1.5 rounds to even 2
        assert corruption_count("0.25", 2) == 0  # 0.5 rounds to even 0
        assert corruption_count("0.5", 100) == 50
        assert corruption_count("1", 7) == 7
        assert corruption_count("0", 7) == 0

    def test_ratio_bounds(self):
        with pytest.raises(RatioOutOfRange):
            corruption_count("-0.1", 10)
        with pytest.raises(RatioOutOfRange):
            corruption_count("1.1", 10)


class TestCorruptLabels:
    def eval_set(self, n: int, num_labels: int = 4):
        labeled = gen_random_labels(corpus_of(n), seed=9, num_labels=num_labels)
        return labeled.to_eval_sets()[0]

    def changed_ids(self, original, corrupted) -> set[str]:
        return {
            ex_id
            for ex_id, label in original.label_by_id.items()
            if corrupted.label_by_id[ex_id] != label
        }

    def test_ratio_zero_is_identity(self):
        original = self.eval_set(100)
        assert corrupt_labels(original, "0", seed=1) == original

    def test_deterministic(self):
        original = self.eval_set(100)
        assert corrupt_labels(original, "0.4", 1) == corrupt_labels(original, "0.4", 1)
        assert corrupt_labels(original, "0.4", 1) != corrupt_labels(original, "0.4", 2)

    def test_changed_ids_nest_across_ratios(self):
        original = self.eval_set(200)
        previous: set[str] = set()
        for ratio in ("0.1", "0.25", "0.5", "0.75", "1"):
            corrupted = corrupt_labels(original, ratio, seed=3)
            changed = self.changed_ids(original, corrupted)
            assert len(changed) <= corruption_count(ratio, 200)
            assert previous <= changed
            previous = changed

    def test_replacement_covers_all_classes(self):
        """Replacements are uniform over every class, so at full corruption
        about 1/K of the labels coincide with the original."""
        original = self.eval_set(6000, num_labels=3)
        corrupted = corrupt_labels(original, "1", seed=2)
        unchanged = 6000 - len(self.changed_ids(original, corrupted))
        assert abs(unchanged / 6000 - 1 / 3) < 0.02

    def test_differing_fraction_matches_ratio(self):
        """E[differing] = ratio * (1 - 1/K); the only randomness left is the
        replacement draw over the exact corrupted count."""
        original = self.eval_set(5000, num_labels=4)
        corrupted = corrupt_labels(original, "0.4", seed=6)
        differing = len(self.changed_ids(original, corrupted)) / 5000
        assert abs(differing - 0.4 * 0.75) < 0.02

    def test_metadata_preserved(self):
        labeled = gen_random_labels(corpus_of(20), seed=0, num_labels=3)
        _, translated = labeled.to_eval_sets()
        corrupted = corrupt_labels(translated, "0.5", seed=1)
        assert corrupted.eval_set_id == translated.eval_set_id
        assert corrupted.language == translated.language
        assert corrupted.role == translated.role
        assert corrupted.translation_of == translated.translation_of
        assert corrupted.num_labels == translated.num_labels

    def test_empty_set_rejected(self):
        empty = labeled_set("s", "en", "generic", {}, 2)
        with pytest.raises(EmptySet):
            corrupt_labels(empty, "0.5", 0)


class TestCorruptJointly:
    def test_pairs_stay_consistent(self):
        labeled = gen_random_labels(corpus_of(300), seed=4, num_labels=3)
        source, translated = labeled.to_eval_sets()
        c_source, c_translated = corrupt_jointly([source, translated], "0.5", seed=8)
        assert c_source.label_by_id == c_translated.label_by_id
        assert pair_translations(c_source, c_translated)

    def test_equals_individual_corruption(self):
        labeled = gen_random_labels(corpus_of(50), seed=4, num_labels=3)
        source, translated = labeled.to_eval_sets()
        joint = corrupt_jointly([source, translated], "0.3", seed=8)
        assert joint[0] == corrupt_labels(source, "0.3", seed=8)
        assert joint[1] == corrupt_labels(translated, "0.3", seed=8)

    def test_mismatched_ids_rejected(self):
        a = labeled_set("a", "en", "generic", {"x": 0, "y": 1}, 2)
        b = labeled_set("b", "de", "generic", {"x": 0, "z": 1}, 2)
        with pytest.raises(AlignmentError, match="different ids"):
            corrupt_jointly([a, b], "0.5", 0)

    def test_mismatched_labels_rejected(self):
        a = labeled_set("a", "en", "generic", {"x": 0, "y": 1}, 2)
        b = labeled_set("b", "de", "generic", {"x": 1, "y": 1}, 2)
        with pytest.raises(LabelMismatch):
            corrupt_jointly([a, b], "0.5", 0)

    def test_mismatched_num_labels_rejected(self):
        a = labeled_set("a", "en", "generic", {"x": 0}, 2)
        b = labeled_set("b", "de", "generic", {"x": 0}, 3)
        with pytest.raises(SchemaError, match="num_labels"):
            corrupt_jointly([a, b], "0.5", 0)


class TestPairTranslations:
    def test_golden_pairs(self, golden_manifest):
        from igap import load_pool

        pool = load_pool(golden_manifest)
        pairs = pair_translations(
            pool.sets_by_id["train_en"], pool.sets_by_id["train_de"]
        )
        assert [p.example_id for p in pairs] == ["t1", "t2", "t3", "t4"]
        assert [p.label for p in pairs] == [0, 1, 2, 0]
        assert pairs[0].source_set_id == "train_en"
        assert pairs[0].translated_set_id == "train_de"

    def test_unlinked_sets_rejected(self):
        a = labeled_set("a", "en", "source_train", {"x": 0}, 2)
        b = labeled_set("b", "de", "generic", {"x": 0}, 2)
        with pytest.raises(AlignmentError, match="not a translation"):
            pair_translations(a, b)

    def test_one_sided_id_named(self):
        a = labeled_set("a", "en", "source_train", {"x": 0, "y": 1}, 2)
        b = labeled_set(
            "b", "de", "translated_train", {"x": 0}, 2, translation_of="a"
        )
        with pytest.raises(AlignmentError, match="'y'"):
            pair_translations(a, b)
