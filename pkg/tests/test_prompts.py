"""Prompt assembly, instruction selection, and k-best response parsing."""

import pytest

from glosskit.index import build_index
from glosskit.prompts import (
    KBestGlosses,
    MalformedResponseError,
    build_gloss_prompt,
    language_name,
    parse_llm_response,
    select_instructions,
)

from conftest import GOLDEN_SEED, TARGET_WORD, corpus_from_pairs, make_entry


class FakeStore:
    def __init__(self, items):
        self._items = items

    def entries(self):
        return list(self._items)


class Stored:
    def __init__(self, a, b, text, count):
        self.a, self.b, self.text, self.dev_confusion_count = a, b, text, count


def target_pos(entry):
    return entry.transcription.index(TARGET_WORD)


class TestBuildGlossPrompt:
    def test_golden_byte_for_byte(self, tsez_index, tsez_test_entry, golden_prompt):
        bundle = build_gloss_prompt(
            tsez_index, tsez_test_entry, target_pos(tsez_test_entry), seed=GOLDEN_SEED
        )
        assert bundle.text == golden_prompt

    def test_deterministic(self, tsez_index, tsez_test_entry):
        pos = target_pos(tsez_test_entry)
        a = build_gloss_prompt(tsez_index, tsez_test_entry, pos, seed=GOLDEN_SEED)
        b = build_gloss_prompt(tsez_index, tsez_test_entry, pos, seed=GOLDEN_SEED)
        assert a.text == b.text

    def test_target_word_in_all_three_places(self, tsez_index, tsez_test_entry):
        bundle = build_gloss_prompt(
            tsez_index, tsez_test_entry, target_pos(tsez_test_entry)
        )
        head, _, rest = bundle.text.partition("In this sentence:")
        assert TARGET_WORD in head
        assert f"[{TARGET_WORD}]" in rest
        assert f'"word": "{TARGET_WORD}"' in bundle.text

    def test_oov_word_omits_example_and_distribution_sections(self, tsez_index):
        entry = make_entry("zzgrxq", "", "nothing here", split="test", entry_id="test-9")
        bundle = build_gloss_prompt(tsez_index, entry, 0)
        assert "Exact Matches" not in bundle.text
        assert "Approximate Matches" not in bundle.text
        assert "often appears with the following tags" not in bundle.text

    def test_evidence_caps(self, tsez_index, tsez_test_entry):
        bundle = build_gloss_prompt(
            tsez_index, tsez_test_entry, target_pos(tsez_test_entry)
        )
        assert len(bundle.evidence.exact) <= 3
        assert len(bundle.evidence.approximate) <= 3
        assert all(len(hits) <= 5 for _w, hits in bundle.evidence.reverse)

    def test_reverse_lines_follow_translation_order(self, tsez_index, tsez_test_entry):
        bundle = build_gloss_prompt(
            tsez_index, tsez_test_entry, target_pos(tsez_test_entry)
        )
        assert [w for w, _ in bundle.evidence.reverse] == ["hid", "out", "of"]

    def test_reverse_duplicates_collapsed_and_capped(self):
        pairs = [(f"tok{i}", f"stem{i}", f"word{i} filler") for i in range(15)]
        corpus = corpus_from_pairs([(t, g, f"{w}") for t, g, w in pairs])
        index = build_index(corpus)
        translation = " ".join(f"word{i} word{i}" for i in range(15))
        entry = make_entry("tok0", "", translation, split="test")
        bundle = build_gloss_prompt(index, entry, 0)
        words = [w for w, _ in bundle.evidence.reverse]
        assert len(words) == len(set(words))
        assert len(words) <= 12

    def test_injected_instructions_placed_after_conventions(
        self, tsez_index, tsez_test_entry
    ):
        text = "INJECTED RULE BLOCK"
        bundle = build_gloss_prompt(
            tsez_index,
            tsez_test_entry,
            target_pos(tsez_test_entry),
            text,
            injected_pair=("PFV.CVB", "PST.UNW"),
        )
        idx_conventions = bundle.text.index("Leipzig glossing conventions")
        idx_injected = bundle.text.index(text)
        idx_distribution = bundle.text.index("often appears with the following tags")
        assert idx_conventions < idx_injected < idx_distribution
        assert bundle.injected_pair == ("PFV.CVB", "PST.UNW")

    def test_language_name_fallback(self):
        assert language_name("ddo") == "Tsez"
        assert language_name("xx") == "xx"


class TestSelectInstructions:
    def test_pair_selected_for_uqno(self, tsez_index):
        store = FakeStore([Stored("PFV.CVB", "PST.UNW", "rules text", 107)])
        text, pair = select_instructions(tsez_index, store, TARGET_WORD)
        assert text == "rules text"
        assert pair == ("PFV.CVB", "PST.UNW")

    def test_lexical_only_word_gets_none(self, tsez_index):
        store = FakeStore([Stored("PFV.CVB", "PST.UNW", "rules", 107)])
        # "nuci" is glossed "honey" only
        assert select_instructions(tsez_index, store, "nuci") == (None, None)

    def test_most_frequent_confusion_of_top_tag_wins(self, tsez_index):
        store = FakeStore(
            [
                Stored("PST.UNW", "X.Y", "rules-21", 21),
                Stored("PFV.CVB", "PST.UNW", "rules-107", 107),
            ]
        )
        # uqʼno's top tag is PST.UNW; both pairs involve it
        text, pair = select_instructions(tsez_index, store, TARGET_WORD)
        assert text == "rules-107"
        assert pair == ("PFV.CVB", "PST.UNW")

    def test_unrelated_pairs_ignored(self, tsez_index):
        store = FakeStore([Stored("AOC", "AOR", "lezgi rules", 6)])
        assert select_instructions(tsez_index, store, TARGET_WORD) == (None, None)

    def test_oov_word(self, tsez_index):
        store = FakeStore([Stored("PFV.CVB", "PST.UNW", "rules", 107)])
        assert select_instructions(tsez_index, store, "zzgrxq") == (None, None)

    def test_no_store(self, tsez_index):
        assert select_instructions(tsez_index, None, TARGET_WORD) == (None, None)


GOOD = '{"word": "uqʼno", "glosses": ["hide-PST.UNW", "hide-PFV.CVB", "hide-INF"]}'


class TestParseLlmResponse:
    def test_direct_json(self):
        out = parse_llm_response(GOOD, "uqʼno")
        assert out.glosses == ("hide-PST.UNW", "hide-PFV.CVB", "hide-INF")
        assert out.word == "uqʼno"
        assert out.raw_response == GOOD

    @pytest.mark.parametrize(
        "wrapper",
        [
            "```json\n{}\n```",
            "Sure! Here is the gloss:\n\n{}\n\nLet me know if you need more.",
            "```\n{}\n```\nHope this helps!",
            "prefix {{\"not\": \"it\"}} middle {} suffix",
        ],
    )
    def test_wrapped_variants(self, wrapper):
        # the oracle is the hand-extracted JSON payload itself
        text = wrapper.format(GOOD)
        assert parse_llm_response(text, "uqʼno").glosses == (
            "hide-PST.UNW",
            "hide-PFV.CVB",
            "hide-INF",
        )

    def test_not_json(self):
        with pytest.raises(MalformedResponseError) as err:
            parse_llm_response("not json at all", "w")
        assert err.value.raw_response == "not json at all"

    def test_trailing_comma_tolerated(self):
        text = '{"word": "w", "glosses": ["a", "b",]}'
        assert parse_llm_response(text, "w").glosses == ("a", "b")

    def test_single_quotes_tolerated(self):
        text = "{'word': 'w', 'glosses': ['a-B', 'c']}"
        assert parse_llm_response(text, "w").glosses == ("a-B", "c")

    def test_word_mismatch_keeps_glosses_with_warning(self, caplog):
        text = '{"word": "other", "glosses": ["g"]}'
        with caplog.at_level("WARNING"):
            out = parse_llm_response(text, "expected")
        assert out.glosses == ("g",)
        assert out.word == "expected"
        assert any("does not match" in r.message for r in caplog.records)

    def test_truncates_to_three_and_drops_empties(self):
        text = '{"word": "w", "glosses": ["", "a", "b", "c", "d"]}'
        assert parse_llm_response(text, "w").glosses == ("a", "b", "c")

    def test_whitespace_glosses_dropped(self):
        text = '{"word": "w", "glosses": ["two words", "ok"]}'
        assert parse_llm_response(text, "w").glosses == ("ok",)

    def test_empty_gloss_list_is_malformed(self):
        with pytest.raises(MalformedResponseError):
            parse_llm_response('{"word": "w", "glosses": []}', "w")

    def test_reserialize_idempotent(self):
        import json

        out = parse_llm_response(GOOD, "uqʼno")
        again = parse_llm_response(
            json.dumps({"word": out.word, "glosses": list(out.glosses)}, ensure_ascii=False),
            "uqʼno",
        )
        assert again.glosses == out.glosses

    def test_kbest_type(self):
        out = parse_llm_response(GOOD, "uqʼno")
        assert isinstance(out, KBestGlosses)
