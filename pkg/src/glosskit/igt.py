"""Parsing, validation, and serialization of interlinear glossed text (IGT).

The on-disk format is the SIGMORPHON-style block format: entries are
separated by blank lines, and each line inside a block starts with a
backslash marker (``\\t`` transcription, ``\\m`` segmentation, ``\\g``
gloss, ``\\l`` translation) followed by a space and the line content.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

# Marker character -> field role. A segmentation line is recognized but
# discarded: this package works with the unsegmented (Track 1) files.
DEFAULT_MARKERS = {
    "t": "transcription",
    "m": "segmentation",
    "g": "gloss",
    "l": "translation",
}

_ASCII_WS = re.compile(r"[ \t]+")


class InvalidGlossError(ValueError):
    """Raised for gloss strings that cannot form a WordGloss."""


@dataclass(frozen=True)
class ParseIssue:
    """A recoverable problem found while parsing a corpus block."""

    message: str
    first_line: int
    last_line: int

    def __str__(self) -> str:
        return f"lines {self.first_line}-{self.last_line}: {self.message}"


@dataclass(frozen=True)
class TagSignature:
    """The grammatical (non-lexical) skeleton of a word gloss.

    ``rendered`` keeps the morpheme structure: grammatical elements of one
    morpheme stay dot-joined, morphemes with no grammatical material are
    dropped, and the remaining groups are hyphen-joined. For example the
    gloss ``IV.PL-do-PFV.CVB`` renders as ``IV.PL-PFV.CVB``.
    """

    grammatical: tuple[str, ...]
    rendered: str

    def __bool__(self) -> bool:
        return bool(self.grammatical)


@dataclass(frozen=True)
class WordGloss:
    """One token's gloss, split per the Leipzig conventions.

    ``morphemes`` are the hyphen-separated pieces (joining them with "-"
    reproduces ``raw``); ``elements`` is the set of nonempty atoms after
    splitting on both "-" and ".".
    """

    raw: str
    morphemes: tuple[str, ...]
    elements: frozenset[str]
    signature: TagSignature


def is_grammatical_element(element: str) -> bool:
    """Category labels carry no lowercase letters (uppercase, digits, roman
    numerals); anything with a lowercase letter is lexical material."""
    return not any(ch.islower() for ch in element)


def parse_word_gloss(raw: str) -> WordGloss:
    """Parse a single whitespace-free gloss string into a WordGloss."""
    if not raw:
        raise InvalidGlossError("empty gloss string")
    if any(ch.isspace() for ch in raw):
        raise InvalidGlossError(f"whitespace inside gloss: {raw!r}")
    morphemes = tuple(raw.split("-"))
    elements = frozenset(e for e in re.split(r"[-.]", raw) if e)
    grammatical: list[str] = []
    groups: list[str] = []
    for morpheme in morphemes:
        kept = [e for e in morpheme.split(".") if e and is_grammatical_element(e)]
        if kept:
            grammatical.extend(kept)
            groups.append(".".join(kept))
    signature = TagSignature(tuple(grammatical), "-".join(groups))
    return WordGloss(raw, morphemes, elements, signature)


def gloss_signature(raw: str) -> str:
    """Rendered tag signature of a gloss string ("" for purely lexical)."""
    return parse_word_gloss(raw).signature.rendered


@dataclass(frozen=True)
class IgtEntry:
    """One corpus block: surface tokens, word glosses, free translation.

    ``entry_id`` identifies the entry within its corpus and is excluded
    from equality so that serialize/parse round trips compare equal.
    """

    transcription: tuple[str, ...]
    glosses: tuple[str, ...]
    translation: str
    language_code: str
    split: str
    entry_id: str = field(default="", compare=False)

    @property
    def aligned(self) -> bool:
        return bool(self.transcription) and len(self.glosses) == len(self.transcription)

    @property
    def misaligned(self) -> bool:
        return not self.aligned

    def word_gloss(self, position: int) -> WordGloss:
        return parse_word_gloss(self.glosses[position])

    def sentence(self) -> str:
        return " ".join(self.transcription)

    def gloss_line(self) -> str:
        return " ".join(self.glosses)


def _split_tokens(content: str) -> tuple[str, ...]:
    return tuple(t for t in _ASCII_WS.split(content.strip(" \t")) if t)


def parse_corpus(
    text: str,
    language_code: str,
    split: str,
    *,
    markers: dict[str, str] | None = None,
    errors: list[ParseIssue] | None = None,
    warnings: list[ParseIssue] | None = None,
) -> list[IgtEntry]:
    """Parse raw file contents into entries, one per blank-line block.

    Malformed blocks (no transcription line) are skipped and reported as
    ParseIssue records appended to ``errors`` (or logged when no collector
    is given). Unknown markers and NFC-unstable tokens produce warnings.
    """
    markers = DEFAULT_MARKERS if markers is None else markers
    errs = errors if errors is not None else []
    warns = warnings if warnings is not None else []

    entries: list[IgtEntry] = []
    lines = text.split("\n")
    block: list[tuple[int, str]] = []

    def flush(block: list[tuple[int, str]]) -> None:
        if not block:
            return
        first, last = block[0][0], block[-1][0]
        fields: dict[str, str] = {}
        for lineno, line in block:
            m = re.match(r"\\(.)(?: (.*))?$", line)
            if not m:
                warns.append(ParseIssue(f"unmarked line ignored: {line!r}", lineno, lineno))
                continue
            marker, content = m.group(1), m.group(2) or ""
            role = markers.get(marker)
            if role is None:
                warns.append(ParseIssue(f"unknown marker \\{marker} ignored", lineno, lineno))
                continue
            if role in fields:
                warns.append(ParseIssue(f"duplicate \\{marker} line ignored", lineno, lineno))
                continue
            fields[role] = content
        if "transcription" not in fields:
            errs.append(ParseIssue("block has no transcription line", first, last))
            return
        transcription = _split_tokens(fields["transcription"])
        glosses = _split_tokens(fields.get("gloss", ""))
        for token in transcription + glosses:
            if unicodedata.normalize("NFC", token) != token:
                warns.append(ParseIssue(f"token not NFC-normalized: {token!r}", first, last))
        entries.append(
            IgtEntry(
                transcription=transcription,
                glosses=glosses,
                translation=fields.get("translation", ""),
                language_code=language_code,
                split=split,
                entry_id=f"{split}-{len(entries)}",
            )
        )

    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            block.append((lineno, line))
        else:
            flush(block)
            block = []
    flush(block)

    if errors is None:
        for issue in errs:
            logger.warning("parse error (%s): %s", language_code, issue)
    if warnings is None:
        for issue in warns:
            logger.warning("parse warning (%s): %s", language_code, issue)
    return entries


def serialize_entry(entry: IgtEntry) -> str:
    """Render an entry in the block format: \\t, \\g, \\l then a blank line."""
    return (
        f"\\t {' '.join(entry.transcription)}\n"
        f"\\g {' '.join(entry.glosses)}\n"
        f"\\l {entry.translation}\n"
        "\n"
    )


def serialize_corpus(entries: list[IgtEntry]) -> str:
    return "".join(serialize_entry(e) for e in entries)


def parse_file(path, language_code: str, split: str, **kwargs) -> list[IgtEntry]:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read(), language_code, split, **kwargs)
