"""Shared fixtures: reconstructed corpora and prompt goldens.

The Tsez demo corpus backs the golden prompt fixture: five training
sentences for uqʼno (a 60/40 gloss distribution), approximate-match
sentences for čuqʼno and yuqʼno, reverse-lookup witnesses for
"hid"/"out"/"of", a carrier sentence that pins the candidate gloss line,
and the iħun contrastive pair for instruction elicitation.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from glosskit.igt import IgtEntry, parse_file
from glosskit.index import build_index

FIXTURES = Path(__file__).parent / "fixtures"

# Deterministic sampler seed under which the demo corpus reproduces the
# golden prompt's example selection (three exact matches in corpus
# order, approximate matches čuqʼno / yuqʼno / čuqʼno).
GOLDEN_SEED = 21

TARGET_WORD = "uqʼno"


def make_entry(tokens, glosses, translation="", language="ddo", split="train", entry_id=""):
    return IgtEntry(
        transcription=tuple(tokens.split() if isinstance(tokens, str) else tokens),
        glosses=tuple(glosses.split() if isinstance(glosses, str) else glosses),
        translation=translation,
        language_code=language,
        split=split,
        entry_id=entry_id,
    )


def corpus_from_pairs(pairs, language="ddo", split="train"):
    """Entries from (tokens, glosses, translation) triples."""
    entries = []
    for i, item in enumerate(pairs):
        tokens, glosses, translation = (item + ("",))[:3] if len(item) < 3 else item
        entries.append(
            make_entry(tokens, glosses, translation, language, split, f"{split}-{i}")
        )
    return entries


@pytest.fixture(scope="session")
def tsez_train():
    return parse_file(FIXTURES / "tsez_train.txt", "ddo", "train")


@pytest.fixture(scope="session")
def tsez_test_entry():
    return parse_file(FIXTURES / "tsez_test.txt", "ddo", "test")[0]


@pytest.fixture(scope="session")
def tsez_index(tsez_train):
    return build_index(tsez_train)


@pytest.fixture
def golden_prompt():
    return (FIXTURES / "golden" / "gloss_prompt_v1.txt").read_text(encoding="utf-8")


@pytest.fixture
def golden_instruction_prompt():
    return (FIXTURES / "golden" / "instruction_prompt_v1.txt").read_text(encoding="utf-8")


# The worked example sentence: retrieval picks the frequent but unsuitable
# "language" for mec; the gold gloss is "tongue".
@pytest.fixture(scope="session")
def mec_train():
    return corpus_from_pairs(
        [
            ("maħor bik'in", "outside III-go-PST.UNW", "It went outside."),
            ("mec bexun", "language III-die-PFV.CVB", "The language died."),
            ("mec bac'no", "language III-eat-PFV.CVB", "It ate the language."),
            ("mec boλik'no", "tongue III-push.out-PFV.CVB", "She pushed her tongue out."),
            ("boλik'no", "III-push.out-PFV.CVB", "She pushed it out."),
        ]
    )


@pytest.fixture(scope="session")
def mec_index(mec_train):
    return build_index(mec_train)


@pytest.fixture(scope="session")
def mec_test_entry():
    return make_entry(
        "maħor mec boλik'no",
        "outside tongue III-push.out-PST.UNW",
        "she poked her tongue out",
        split="test",
        entry_id="test-0",
    )
