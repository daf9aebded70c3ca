"""Glossing prompt assembly and the k-best JSON response contract.

The prompt wording lives in a versioned template asset with named blocks;
assembly here only fills slots and decides which sections appear. Absent
evidence sections are omitted rather than rendered empty.
"""

from __future__ import annotations

import ast
import json
import logging
import re
from dataclasses import dataclass
from importlib import resources
from string import Template

from .igt import IgtEntry, parse_word_gloss
from .index import (
    CorpusIndex,
    approximate_examples,
    exact_examples,
    gloss_distribution,
    reverse_lookup,
    tokenize_translation,
)
from .retrieval import bracketed_sentence, context_candidate

logger = logging.getLogger(__name__)

TEMPLATE_VERSION = "v1"

EXACT_CAP = 3
APPROX_CAP = 3
REVERSE_ITEM_CAP = 5
REVERSE_LINE_CAP = 12

LANGUAGE_NAMES = {
    "arp": "Arapaho",
    "ddo": "Tsez",
    "git": "Gitksan",
    "lez": "Lezgi",
    "ntu": "Natugu",
    "nyb": "Nyangbo",
    "usp": "Uspanteko",
}


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


class MalformedResponseError(ValueError):
    """Model output that yields no usable gloss list."""

    def __init__(self, message: str, raw_response: str):
        super().__init__(message)
        self.raw_response = raw_response


@dataclass(frozen=True)
class KBestGlosses:
    """Ordered candidate glosses for one word, best first (1 to 3 items)."""

    word: str
    glosses: tuple[str, ...]
    raw_response: str = ""


@dataclass(frozen=True)
class PromptEvidence:
    """What was retrieved for one prompt, for audit and UI display."""

    distribution: tuple[tuple[str, int], ...]
    features: tuple[str, ...]
    exact: tuple[str, ...]
    approximate: tuple[tuple[str, str], ...]
    reverse: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]


@dataclass(frozen=True)
class PromptBundle:
    text: str
    target_word: str
    target_pos: int
    injected_pair: tuple[str, str] | None
    evidence: PromptEvidence
    template_version: str = TEMPLATE_VERSION


def load_template_blocks(asset: str) -> dict[str, str]:
    text = resources.files(__package__).joinpath(f"templates/{asset}").read_text("utf-8")
    blocks: dict[str, str] = {}
    name = None
    buf: list[str] = []
    for line in text.split("\n"):
        m = re.match(r"\[\[(\w+)\]\]$", line)
        if m:
            if name is not None:
                blocks[name] = "\n".join(buf).strip("\n")
            name = m.group(1)
            buf = []
        else:
            buf.append(line)
    if name is not None:
        blocks[name] = "\n".join(buf).strip("\n")
    return blocks


_GLOSS_BLOCKS: dict[str, str] | None = None


def gloss_template_blocks() -> dict[str, str]:
    global _GLOSS_BLOCKS
    if _GLOSS_BLOCKS is None:
        _GLOSS_BLOCKS = load_template_blocks(f"gloss_prompt_{TEMPLATE_VERSION}.txt")
    return _GLOSS_BLOCKS


def _fill(block: str, **slots: str) -> str:
    return Template(block).substitute(**slots)


def _render_example(blocks: dict[str, str], entry: IgtEntry) -> str:
    return _fill(
        blocks["example"],
        sentence=entry.sentence(),
        gloss=entry.gloss_line(),
        translation=entry.translation,
    )


def distribution_features(index: CorpusIndex, word: str) -> list[str]:
    """Distinct nonempty tag signatures of the word's glosses, most
    frequent first (the "features" line of the prompt)."""
    seen: list[str] = []
    for gloss, _pct in gloss_distribution(index, word):
        try:
            rendered = parse_word_gloss(gloss).signature.rendered
        except ValueError:
            continue
        if rendered and rendered not in seen:
            seen.append(rendered)
    return seen


def build_gloss_prompt(
    index: CorpusIndex,
    entry: IgtEntry,
    target_pos: int,
    instructions: str | None = None,
    *,
    injected_pair: tuple[str, str] | None = None,
    seed: int = 0,
    min_lcs: int = 4,
) -> PromptBundle:
    """Assemble the full word-glossing prompt over the retrieval snapshot.

    Section order: task statement; conventions paragraph with the JSON
    skeleton; optional injected disambiguation instructions; tag
    distribution and features; exact matches; approximate matches; one
    reverse-lookup line per translation word that has hits.
    """
    blocks = gloss_template_blocks()
    word = entry.transcription[target_pos]

    sections = [
        _fill(
            blocks["task"],
            language=language_name(index.language_code or entry.language_code),
            word=word,
            sentence=bracketed_sentence(entry, target_pos),
            candidate=context_candidate(index, entry, target_pos),
            translation=entry.translation,
        ),
        _fill(blocks["conventions"], word=word),
    ]
    if instructions:
        sections.append(instructions.strip("\n"))

    dist = gloss_distribution(index, word)
    features = distribution_features(index, word)
    if dist:
        rendered = ", ".join(f"{gloss} ({pct}%)" for gloss, pct in dist)
        sections.append(_fill(blocks["distribution"], word=word, distribution=rendered))
        if features:
            sections.append(_fill(blocks["features"], features=", ".join(features)))

    exact = exact_examples(index, word, EXACT_CAP, seed=seed)
    approximate = approximate_examples(index, word, APPROX_CAP, min_lcs, seed=seed)
    if exact or approximate:
        sections.append(_fill(blocks["examples_intro"], word=word))
    if exact:
        body = "\n".join(_render_example(blocks, e) for e in exact)
        sections.append(f"{blocks['exact_header']}\n{body}")
    if approximate:
        body = "\n".join(_render_example(blocks, e) for e, _tok in approximate)
        sections.append(f"{blocks['approximate_header']}\n{body}")

    reverse: list[tuple[str, tuple[tuple[str, str], ...]]] = []
    seen_words: set[str] = set()
    for metaword in tokenize_translation(entry.translation):
        if metaword in seen_words:
            continue
        seen_words.add(metaword)
        hits = reverse_lookup(index, metaword, REVERSE_ITEM_CAP)
        if hits:
            reverse.append((metaword, tuple(hits)))
        if len(reverse) == REVERSE_LINE_CAP:
            break
    if reverse:
        lines = [
            _fill(
                blocks["reverse_line"],
                metaword=metaword,
                items=", ".join(f"{token} ({gloss})" for token, gloss in hits),
            )
            for metaword, hits in reverse
        ]
        sections.append("\n".join(lines))

    evidence = PromptEvidence(
        distribution=tuple(dist),
        features=tuple(features),
        exact=tuple(e.entry_id for e in exact),
        approximate=tuple((e.entry_id, tok) for e, tok in approximate),
        reverse=tuple(reverse),
    )
    return PromptBundle(
        text="\n\n".join(sections),
        target_word=word,
        target_pos=target_pos,
        injected_pair=injected_pair,
        evidence=evidence,
    )


def format_reminder(word: str) -> str:
    return _fill(gloss_template_blocks()["format_reminder"], word=word)


def select_instructions(index, store, word: str):
    """Pick stored disambiguation instructions applicable to a word.

    A stored pair applies when either of its signatures occurs among the
    signatures of the word's training glosses. With several applicable
    pairs, prefer the most frequent confusion (by dev count) of the word's
    most frequent tag signature.

    Returns (instruction text, (a, b)) or (None, None).
    """
    if store is None:
        return None, None
    stored = list(store.entries())
    if not stored:
        return None, None

    signatures: list[str] = []
    for gloss, _pct in gloss_distribution(index, word):
        try:
            rendered = parse_word_gloss(gloss).signature.rendered
        except ValueError:
            continue
        if rendered and rendered not in signatures:
            signatures.append(rendered)
    if not signatures:
        return None, None

    applicable = [s for s in stored if s.a in signatures or s.b in signatures]
    if not applicable:
        return None, None
    top_sig = signatures[0]
    preferred = [s for s in applicable if top_sig in (s.a, s.b)] or applicable
    chosen = min(preferred, key=lambda s: (-s.dev_confusion_count, s.a, s.b))
    return chosen.text, (chosen.a, chosen.b)


# --- k-best response parsing -------------------------------------------------


def _candidate_objects(text: str):
    """Yield balanced {...} substrings, tolerating quoted braces."""
    starts = [i for i, ch in enumerate(text) if ch == "{"]
    for start in starts:
        depth = 0
        quote = None
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if quote:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == quote:
                    quote = None
                continue
            if ch in "\"'":
                quote = ch
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    yield text[start : i + 1]
                    break


_TRAILING_COMMA = re.compile(r",\s*([}\]])")


def _lenient_parse(candidate: str):
    try:
        return json.loads(candidate)
    except ValueError:
        pass
    try:
        return json.loads(_TRAILING_COMMA.sub(r"\1", candidate))
    except ValueError:
        pass
    try:
        return ast.literal_eval(candidate)
    except (ValueError, SyntaxError):
        return None


def parse_llm_response(text: str, expected_word: str) -> KBestGlosses:
    """Extract the k-best gloss object from model output.

    Tolerates code fences, surrounding prose, trailing commas, and
    single-quoted pseudo-JSON. A word mismatch only warns; the glosses are
    kept. Raises MalformedResponseError when no usable object is found.
    """
    for candidate in _candidate_objects(text):
        obj = _lenient_parse(candidate)
        if not isinstance(obj, dict):
            continue
        raw_glosses = obj.get("glosses")
        if not isinstance(raw_glosses, (list, tuple)):
            continue
        glosses = []
        for item in raw_glosses:
            if not isinstance(item, str):
                continue
            g = item.strip()
            if g and not any(ch.isspace() for ch in g):
                glosses.append(g)
        if not glosses:
            continue
        word = obj.get("word")
        if isinstance(word, str) and word.strip() and word.strip() != expected_word:
            logger.warning(
                "response word %r does not match expected %r", word.strip(), expected_word
            )
        return KBestGlosses(expected_word, tuple(glosses[:3]), raw_response=text)
    raise MalformedResponseError("no gloss object found in model response", text)
