"""Caption parsing, IoU relevance, class matrices, grade splits."""

import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from audiobench.corpus import TextKind
from audiobench.errors import IntegrityError, ParseError
from audiobench.relevance import (
    STOPWORDS,
    Grade,
    MatrixKind,
    RelevanceMatrix,
    RelevancyGrade,
    build_caption_matrix,
    build_class_matrix,
    caption_relevance,
    load_grades,
    load_relevance,
    parse_caption,
    save_grades,
    save_relevance,
    split_by_grade,
)
from corpus_helpers import make_clip, make_corpus, make_text

words = st.text(alphabet=string.ascii_lowercase, min_size=1, max_size=8)
captions = st.lists(words, min_size=1, max_size=6).map(" ".join)


class TestParseCaption:
    def test_first_token_is_verb_rest_are_nouns(self):
        parsed = parse_caption("cut the red onion")
        assert parsed.verbs == frozenset({"cut"})
        assert parsed.nouns == frozenset({"red", "onion"})

    def test_stopwords_removed_from_nouns(self):
        parsed = parse_caption("wash the a of pan")
        assert parsed.nouns == frozenset({"pan"})

    def test_punctuation_and_case_folded(self):
        parsed = parse_caption("Cut, Onion!")
        assert parsed.verbs == frozenset({"cut"})
        assert parsed.nouns == frozenset({"onion"})

    def test_explicit_annotations_win(self):
        parsed = parse_caption("whatever text", verbs=["slice"], nouns=["carrot"])
        assert parsed.verbs == frozenset({"slice"})
        assert parsed.nouns == frozenset({"carrot"})

    def test_empty_raises(self):
        with pytest.raises(ParseError):
            parse_caption("   ")

    def test_single_word_has_empty_nouns(self):
        parsed = parse_caption("sneeze")
        assert parsed.verbs == frozenset({"sneeze"})
        assert parsed.nouns == frozenset()


class TestCaptionRelevance:
    def test_identical_captions_score_one(self):
        a = parse_caption("cut onion")
        assert caption_relevance(a, a) == 1.0

    def test_half_for_shared_noun_only(self):
        a = parse_caption("cut onion")
        b = parse_caption("peel onion")
        assert caption_relevance(a, b) == 0.5

    def test_quarter_union_case(self):
        a = parse_caption("cut onion board")
        b = parse_caption("cut pan")
        # verbs match (1.0); nouns {onion, board} vs {pan} disjoint (0.0)
        assert caption_relevance(a, b) == 0.5

    def test_both_noun_sets_empty_count_full(self):
        a = parse_caption("sneeze")
        b = parse_caption("cough")
        # empty vs empty nouns = 1, disjoint verbs = 0
        assert caption_relevance(a, b) == 0.5

    def test_one_empty_side_counts_zero(self):
        a = parse_caption("sneeze")
        b = parse_caption("cut onion")
        assert caption_relevance(a, b) == 0.0

    @given(captions, captions)
    @settings(max_examples=80)
    def test_symmetric_and_bounded(self, left, right):
        a = parse_caption(left)
        b = parse_caption(right)
        value = caption_relevance(a, b)
        assert caption_relevance(b, a) == value
        assert 0.0 <= value <= 1.0


def _iou_oracle(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


class TestCaptionMatrix:
    def _corpus(self, texts):
        clips = [make_clip(f"c{i}", f"v{i}") for i in range(len(texts))]
        descriptions = [
            make_text(f"t{i}", text, clip_ids=[f"c{i}"]) for i, text in enumerate(texts)
        ]
        return make_corpus(clips, descriptions)

    def test_matches_pairwise_oracle(self):
        texts = [
            "cut onion",
            "cut the onion",
            "open door",
            "wash pan and plate",
            "sneeze",
        ]
        corpus = self._corpus(texts)
        matrix = build_caption_matrix(corpus, TextKind.VISUAL_CAPTION)
        parsed = [parse_caption(t) for t in texts]
        for qi in range(len(texts)):
            for ii in range(len(texts)):
                expected = 0.5 * (
                    _iou_oracle(set(parsed[qi].verbs), set(parsed[ii].verbs))
                    + _iou_oracle(set(parsed[qi].nouns), set(parsed[ii].nouns))
                )
                if ii == qi:
                    expected = 1.0  # ground-truth pairs are pinned
                assert matrix.value(f"t{qi}", f"c{ii}") == expected

    def test_ground_truth_pinned_to_one(self):
        corpus = self._corpus(["cut onion", "slice carrot"])
        matrix = build_caption_matrix(corpus, TextKind.VISUAL_CAPTION)
        assert matrix.value("t0", "c0") == 1.0
        assert matrix.value("t1", "c1") == 1.0

    def test_duplicate_captions_have_identical_rows(self):
        corpus = self._corpus(["cut onion", "cut onion", "open door"])
        matrix = build_caption_matrix(corpus, TextKind.VISUAL_CAPTION)
        for item in ("c0", "c1", "c2"):
            assert matrix.value("t0", item) == matrix.value("t1", item)

    def test_entries_sparse_in_unit_interval(self):
        corpus = self._corpus(["cut onion", "open door", "wash pan"])
        matrix = build_caption_matrix(corpus, TextKind.VISUAL_CAPTION)
        for value in matrix.entries.values():
            assert 0.0 < value <= 1.0

    def test_transposed_round_trip(self):
        corpus = self._corpus(["cut onion", "open door"])
        matrix = build_caption_matrix(corpus, TextKind.VISUAL_CAPTION)
        double = matrix.transposed().transposed()
        assert double.entries == matrix.entries
        assert double.query_ids == matrix.query_ids


class TestClassMatrix:
    def _corpus(self):
        clips = [make_clip(f"c{i}", f"v{i}") for i in range(5)]
        texts = [
            make_text("water", "water", clip_ids=["c0", "c1"], kind=TextKind.AUDIO_CLASS_LABEL),
            make_text("metal", "metal", clip_ids=["c2", "c3", "c4"], kind=TextKind.AUDIO_CLASS_LABEL),
        ]
        return make_corpus(clips, texts)

    def test_block_structure(self):
        matrix = build_class_matrix(self._corpus())
        assert matrix.kind == MatrixKind.CLASS_EQUALITY
        assert matrix.value("water", "c0") == 1.0
        assert matrix.value("water", "c1") == 1.0
        assert matrix.value("water", "c2") == 0.0
        assert matrix.value("metal", "c4") == 1.0
        assert matrix.value("metal", "c0") == 0.0

    def test_entries_binary(self):
        matrix = build_class_matrix(self._corpus())
        assert set(matrix.entries.values()) == {1.0}

    def test_clip_with_two_labels_rejected(self):
        clips = [make_clip("c0", "v0")]
        texts = [
            make_text("a", "a", clip_ids=["c0"], kind=TextKind.AUDIO_CLASS_LABEL),
            make_text("b", "b", clip_ids=["c0"], kind=TextKind.AUDIO_CLASS_LABEL),
        ]
        with pytest.raises(IntegrityError):
            build_class_matrix(make_corpus(clips, texts))

    def test_unlabelled_clip_rejected(self):
        clips = [make_clip("c0", "v0"), make_clip("c1", "v1")]
        texts = [make_text("a", "a", clip_ids=["c0"], kind=TextKind.AUDIO_CLASS_LABEL)]
        with pytest.raises(IntegrityError):
            build_class_matrix(make_corpus(clips, texts))

    def test_non_label_text_rejected(self):
        clips = [make_clip("c0", "v0")]
        texts = [make_text("t0", "cut onion", clip_ids=["c0"])]
        with pytest.raises(IntegrityError):
            build_class_matrix(make_corpus(clips, texts))


class TestGradeSplit:
    def _corpus(self):
        clips = [make_clip(f"c{i}", f"v{i}") for i in range(3)]
        texts = [
            make_text("t0", "cut onion", clip_ids=["c0"]),
            make_text("t1", "open door", clip_ids=["c1"]),
            make_text("t2", "hold cup", clip_ids=["c2"]),
        ]
        return make_corpus(clips, texts)

    def test_partition(self):
        corpus = self._corpus()
        grades = [
            RelevancyGrade("t0", Grade.HIGH),
            RelevancyGrade("t1", Grade.HIGH),
            RelevancyGrade("t2", Grade.LOW),
        ]
        subsets = split_by_grade(corpus, grades)
        assert set(subsets[Grade.HIGH].texts) == {"t0", "t1"}
        assert set(subsets[Grade.LOW].texts) == {"t2"}
        assert set(subsets[Grade.MODERATE].texts) == set()
        total = sum(len(s.texts) for s in subsets.values())
        assert total == corpus.n_texts

    def test_clips_follow_their_texts(self):
        corpus = self._corpus()
        grades = [
            RelevancyGrade("t0", Grade.HIGH),
            RelevancyGrade("t1", Grade.LOW),
            RelevancyGrade("t2", Grade.LOW),
        ]
        subsets = split_by_grade(corpus, grades)
        assert set(subsets[Grade.HIGH].clips) == {"c0"}
        assert set(subsets[Grade.LOW].clips) == {"c1", "c2"}

    def test_ungraded_text_rejected(self):
        corpus = self._corpus()
        with pytest.raises(IntegrityError):
            split_by_grade(corpus, [RelevancyGrade("t0", Grade.HIGH)])

    def test_duplicate_grade_rejected(self):
        corpus = self._corpus()
        grades = [
            RelevancyGrade("t0", Grade.HIGH),
            RelevancyGrade("t0", Grade.LOW),
            RelevancyGrade("t1", Grade.HIGH),
            RelevancyGrade("t2", Grade.LOW),
        ]
        with pytest.raises(IntegrityError):
            split_by_grade(corpus, grades)


class TestSerialization:
    def test_relevance_round_trip(self, tmp_path):
        matrix = RelevanceMatrix(
            kind=MatrixKind.CAPTION_OVERLAP,
            query_ids=("q0", "q1"),
            item_ids=("i0", "i1", "i2"),
            entries={("q0", "i0"): 1.0, ("q1", "i2"): 0.25},
        )
        path = tmp_path / "rel.jsonl"
        save_relevance(matrix, path)
        again = load_relevance(
            path, query_ids=matrix.query_ids, item_ids=matrix.item_ids, kind=matrix.kind
        )
        assert again.entries == matrix.entries

    def test_relevance_save_deterministic(self, tmp_path):
        matrix = RelevanceMatrix(
            kind=MatrixKind.CAPTION_OVERLAP,
            query_ids=("q0",),
            item_ids=("i0", "i1"),
            entries={("q0", "i1"): 0.5, ("q0", "i0"): 1.0},
        )
        save_relevance(matrix, tmp_path / "a.jsonl")
        save_relevance(matrix, tmp_path / "b.jsonl")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_grades_round_trip(self, tmp_path):
        grades = [RelevancyGrade("t0", Grade.HIGH), RelevancyGrade("t1", Grade.LOW)]
        path = tmp_path / "grades.tsv"
        save_grades(grades, path)
        assert load_grades(path) == grades

    def test_out_of_range_entry_rejected(self):
        with pytest.raises(IntegrityError):
            RelevanceMatrix(
                kind=MatrixKind.CAPTION_OVERLAP,
                query_ids=("q",),
                item_ids=("i",),
                entries={("q", "i"): 1.5},
            )
        with pytest.raises(IntegrityError):
            RelevanceMatrix(
                kind=MatrixKind.CAPTION_OVERLAP,
                query_ids=("q",),
                item_ids=("i",),
                entries={("q", "i"): 0.0},
            )

    def test_entry_outside_axes_rejected(self):
        with pytest.raises(IntegrityError):
            RelevanceMatrix(
                kind=MatrixKind.CAPTION_OVERLAP,
                query_ids=("q",),
                item_ids=("i",),
                entries={("q", "other"): 1.0},
            )


def test_stopword_list_is_lowercase_and_nonempty():
    assert STOPWORDS
    assert all(w == w.lower() for w in STOPWORDS)
