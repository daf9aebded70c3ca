"""Retrieval snapshot: distributions, exact/approximate matching, the
reverse index, and snapshot determinism."""

import json
import random

import pytest
from hypothesis import given, strategies as st

from glosskit.igt import parse_corpus
from glosskit.index import (
    approximate_examples,
    build_index,
    exact_examples,
    gloss_distribution,
    index_from_dict,
    index_to_dict,
    lcs_length,
    load_snapshot,
    most_frequent_gloss,
    reverse_lookup,
    round_half_up_percent,
    save_snapshot,
    tokenize_translation,
)

from conftest import corpus_from_pairs, make_entry


def brute_force_lcs(a: str, b: str) -> int:
    """Independent oracle: enumerate substrings of the shorter string by
    decreasing length and test containment in the other."""
    if len(a) > len(b):
        a, b = b, a
    for length in range(len(a), 0, -1):
        for start in range(len(a) - length + 1):
            if a[start : start + length] in b:
                return length
    return 0


# Five łiyn occurrences across two entries: end-PFV.CVB 3x, end-PST.UNW 2x.
LIYN_CORPUS = [
    ("łiyn łiyn", "end-PFV.CVB end-PFV.CVB", "it ended and ended"),
    ("łiyn neła łiyn łiyn", "end-PFV.CVB DEM1.IISG.OBL end-PST.UNW end-PST.UNW", "it ended"),
]


class TestDistributions:
    def test_sixty_forty(self):
        index = build_index(corpus_from_pairs(LIYN_CORPUS))
        assert gloss_distribution(index, "łiyn") == [
            ("end-PFV.CVB", 60),
            ("end-PST.UNW", 40),
        ]
        dist = index.distributions["łiyn"]
        assert [(d.gloss, d.count) for d in dist] == [("end-PFV.CVB", 3), ("end-PST.UNW", 2)]

    def test_single_gloss_is_100(self):
        index = build_index(corpus_from_pairs([("a", "A", "t")]))
        assert gloss_distribution(index, "a") == [("A", 100)]

    def test_hand_counted_2_1_1(self):
        corpus = corpus_from_pairs(
            [
                ("w", "g1", ""),
                ("w", "g1", ""),
                ("w", "g2", ""),
                ("w", "g3", ""),
            ]
        )
        index = build_index(corpus)
        assert gloss_distribution(index, "w") == [("g1", 50), ("g2", 25), ("g3", 25)]

    def test_unknown_word_empty(self, tsez_index):
        assert gloss_distribution(tsez_index, "zzz") == []

    def test_counts_sum_and_percentage_tolerance(self, tsez_index):
        for token, dist in tsez_index.distributions.items():
            assert sum(d.count for d in dist) == tsez_index.token_totals[token]
            assert abs(sum(d.percent for d in dist) - 100) <= 0.5 * len(dist)

    def test_most_frequent_tie_breaks_lexicographically(self):
        index = build_index(corpus_from_pairs([("w", "b", ""), ("w", "a", "")]))
        assert most_frequent_gloss(index, "w") == "a"

    def test_round_half_up(self):
        assert round_half_up_percent(1, 8) == 13  # 12.5 rounds up
        assert round_half_up_percent(1, 3) == 33
        assert round_half_up_percent(2, 3) == 67
        assert round_half_up_percent(3, 5) == 60

    def test_every_pair_witnessed(self, tsez_index, tsez_train):
        by_id = {e.entry_id: e for e in tsez_train}
        for token, dist in tsez_index.distributions.items():
            for gc in dist:
                witnessed = any(
                    by_id[occ.entry_id].glosses[pos] == gc.gloss
                    for occ in tsez_index.exact[token]
                    for pos in occ.positions
                )
                assert witnessed, (token, gc.gloss)


class TestBuildIndex:
    def test_empty_corpus(self):
        index = build_index([])
        assert index.vocabulary == ()
        assert index.exact == {}
        assert index.reverse == {}
        assert index.corpus_id

    def test_misaligned_skipped_and_counted(self):
        good = make_entry("a", "A", "t", entry_id="train-0")
        bad = make_entry("a b", "A", "t", entry_id="train-1")
        index = build_index([good, bad])
        assert index.skipped_misaligned == 1
        assert index.token_totals["a"] == 1

    def test_determinism(self, tsez_train):
        one = build_index(tsez_train)
        two = build_index(tsez_train)
        assert one.corpus_id == two.corpus_id
        assert json.dumps(index_to_dict(one), sort_keys=True) == json.dumps(
            index_to_dict(two), sort_keys=True
        )

    def test_snapshot_round_trip(self, tsez_index, tmp_path):
        path = tmp_path / "snapshot.json"
        save_snapshot(tsez_index, path)
        loaded = load_snapshot(path)
        assert loaded.corpus_id == tsez_index.corpus_id
        assert loaded.distributions == tsez_index.distributions
        assert loaded.reverse == tsez_index.reverse
        assert loaded.entries == tsez_index.entries

    def test_snapshot_version_check(self, tsez_index):
        data = index_to_dict(tsez_index)
        data["formatVersion"] = 999
        with pytest.raises(ValueError):
            index_from_dict(data)


class TestExactExamples:
    def test_exact_sample_in_corpus_order(self, tsez_index):
        from conftest import GOLDEN_SEED, TARGET_WORD

        got = exact_examples(tsez_index, TARGET_WORD, 3, seed=GOLDEN_SEED)
        assert [e.entry_id for e in got] == ["train-0", "train-1", "train-2"]
        assert all(TARGET_WORD in e.transcription for e in got)

    def test_unknown_word(self, tsez_index):
        assert exact_examples(tsez_index, "nope", 3) == []

    def test_rare_word_returns_fewer(self, tsez_index):
        got = exact_examples(tsez_index, "ruqʼsi", 3)
        assert len(got) == 1

    def test_deterministic_per_seed(self, tsez_index):
        a = exact_examples(tsez_index, "uqʼno", 3, seed=7)
        b = exact_examples(tsez_index, "uqʼno", 3, seed=7)
        assert [e.entry_id for e in a] == [e.entry_id for e in b]

    def test_k_zero(self, tsez_index):
        assert exact_examples(tsez_index, "uqʼno", 0) == []


class TestApproximateExamples:
    def test_rodin_matches_rodinay(self):
        corpus = corpus_from_pairs(
            [
                ("rodinäy bexun", "IV-do-CND.CVB III-die-PFV.CVB", "if it does it dies"),
                ("gulu bik'in", "horse III-go-PST.UNW", "the horse went"),
            ]
        )
        index = build_index(corpus)
        got = approximate_examples(index, "rodin", 3)
        assert [(e.entry_id, tok) for e, tok in got] == [("train-0", "rodinäy")]
        assert lcs_length("rodin", "rodinäy") == 5

    def test_word_shorter_than_threshold(self, tsez_index):
        assert approximate_examples(tsez_index, "ab", 3, 4) == []

    def test_target_word_never_matched(self, tsez_index):
        got = approximate_examples(tsez_index, "uqʼno", 10, 4)
        assert all(tok != "uqʼno" for _e, tok in got)

    def test_round_robin_over_matched_tokens(self, tsez_index):
        from conftest import GOLDEN_SEED

        got = approximate_examples(tsez_index, "uqʼno", 3, seed=GOLDEN_SEED)
        assert [tok for _e, tok in got] == ["čuqʼno", "yuqʼno", "čuqʼno"]

    def test_lcs_ranking_against_brute_force(self):
        rng = random.Random(5)
        alphabet = "abcdef"
        vocab = ["".join(rng.choice(alphabet) for _ in range(rng.randint(3, 9))) for _ in range(20)]
        corpus = corpus_from_pairs([(tok, "X", "") for tok in sorted(set(vocab))])
        index = build_index(corpus)
        word = "abcdef"
        got = approximate_examples(index, word, 5, 2)
        if got:
            best = max(brute_force_lcs(word, t) for t in index.vocabulary if t != word)
            assert lcs_length(word, got[0][1]) == best


class TestLcs:
    def test_known_values(self):
        assert lcs_length("rodin", "rodinäy") == 5
        assert lcs_length("uqʼno", "čuqʼno") == 5
        assert lcs_length("abc", "xyz") == 0
        assert lcs_length("", "abc") == 0

    @given(st.text(max_size=12), st.text(max_size=12))
    def test_matches_brute_force(self, a, b):
        assert lcs_length(a, b) == brute_force_lcs(a, b)

    @given(st.text(max_size=12), st.text(max_size=12))
    def test_symmetry(self, a, b):
        assert lcs_length(a, b) == lcs_length(b, a)


class TestReverseIndex:
    def test_away_includes_bogno(self):
        corpus = corpus_from_pairs(
            [
                ("boγno neła", "III-take.away-PFV.CVB DEM1.IISG.OBL", "She took it away."),
            ]
        )
        index = build_index(corpus)
        assert ("boγno", "III-take.away-PFV.CVB") in reverse_lookup(index, "away")

    def test_hid_finds_hide_glosses(self, tsez_index):
        hits = reverse_lookup(tsez_index, "hid")
        assert ("yuqʼno", "II-hide-PFV.CVB") in hits
        assert ("uqʼno", "hide-PST.UNW") in hits

    def test_stopwords_not_filtered(self, tsez_index):
        hits = reverse_lookup(tsez_index, "of")
        assert ("meča", "instead.of") in hits

    def test_unindexed_word(self, tsez_index):
        assert reverse_lookup(tsez_index, "zzz-unseen") == []

    def test_case_insensitive(self, tsez_index):
        assert reverse_lookup(tsez_index, "Hid") == reverse_lookup(tsez_index, "hid")

    def test_sorted_by_frequency_then_token(self, tsez_index):
        for hits in tsez_index.reverse.values():
            keys = [(-h.count, h.token) for h in hits]
            assert keys == sorted(keys)

    def test_k_cap(self, tsez_index):
        assert len(reverse_lookup(tsez_index, "out", 2)) == 2

    def test_grammatical_elements_do_not_match(self):
        # "top" must not match the TOP tag
        corpus = corpus_from_pairs([("žan", "DEM1.SG-TOP", "the top one")])
        index = build_index(corpus)
        assert reverse_lookup(index, "top") == []


class TestTranslationTokenizer:
    def test_strips_punctuation_and_lowercases(self):
        assert tokenize_translation('"My husband!", she said.') == [
            "my",
            "husband",
            "she",
            "said",
        ]

    def test_keeps_internal_apostrophe(self):
        assert tokenize_translation("didn't go") == ["didn't", "go"]

    def test_drops_empty(self):
        assert tokenize_translation("... !!! x") == ["x"]
