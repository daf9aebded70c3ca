"""Immutable retrieval snapshot over a training corpus.

Bundles four lookup structures: an exact-match token index, gloss
distributions per token, an approximate-match (longest common substring)
search over the vocabulary, and a reverse index from translation words to
the surface tokens whose glosses incorporate them.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from .igt import IgtEntry, is_grammatical_element, parse_word_gloss

logger = logging.getLogger(__name__)

INDEX_FORMAT_VERSION = 1

DEFAULT_MIN_LCS = 4
TRANSLATION_PUNCT = ".,;:!?\"'()"


class GlossCount(NamedTuple):
    gloss: str
    count: int
    percent: int


class ReverseHit(NamedTuple):
    token: str
    gloss: str
    count: int


class Occurrence(NamedTuple):
    entry_id: str
    positions: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CorpusIndex:
    """Snapshot of all retrieval indices; safe for concurrent reads."""

    corpus_id: str
    language_code: str
    entries: tuple[IgtEntry, ...]
    exact: Mapping[str, tuple[Occurrence, ...]]
    distributions: Mapping[str, tuple[GlossCount, ...]]
    vocabulary: tuple[str, ...]
    reverse: Mapping[str, tuple[ReverseHit, ...]]
    token_totals: Mapping[str, int]
    skipped_misaligned: int

    def entry(self, entry_id: str) -> IgtEntry:
        return self._by_id[entry_id]

    @property
    def _by_id(self) -> dict[str, IgtEntry]:
        cached = self.__dict__.get("_by_id_cache")
        if cached is None:
            cached = {e.entry_id: e for e in self.entries}
            self.__dict__["_by_id_cache"] = cached
        return cached


def round_half_up_percent(count: int, total: int) -> int:
    """Integer percentage with exact half-up rounding (no float error)."""
    return (200 * count + total) // (2 * total)


def tokenize_translation(translation: str) -> list[str]:
    """Lowercase the translation and strip surrounding punctuation per word."""
    out = []
    for word in translation.split():
        cleaned = word.lower().strip(TRANSLATION_PUNCT)
        if cleaned:
            out.append(cleaned)
    return out


def lcs_length(a: str, b: str) -> int:
    """Length of the longest common contiguous substring of a and b."""
    if not a or not b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    prev = [0] * (len(a) + 1)
    best = 0
    for ch in b:
        cur = [0] * (len(a) + 1)
        for j, cj in enumerate(a, start=1):
            if cj == ch:
                v = prev[j - 1] + 1
                cur[j] = v
                if v > best:
                    best = v
        prev = cur
    return best


def compute_corpus_id(entries: Iterable[IgtEntry]) -> str:
    h = hashlib.sha256()
    for e in entries:
        record = "\x1f".join(
            (
                e.language_code,
                e.split,
                " ".join(e.transcription),
                " ".join(e.glosses),
                e.translation,
            )
        )
        h.update(record.encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


def _lexical_elements(gloss: str) -> list[str]:
    try:
        parsed = parse_word_gloss(gloss)
    except ValueError:
        return []
    return [e for e in parsed.elements if not is_grammatical_element(e)]


def build_index(corpus: Iterable[IgtEntry]) -> CorpusIndex:
    """Build the snapshot from aligned entries; misaligned ones are skipped.

    The reverse index tokenizes each translation and credits every surface
    token of the same entry whose gloss has a lexical element starting
    with the translation word (case-insensitive, so "hid" finds glosses
    built on "hide" while "the" does not match "together").
    """
    all_entries = list(corpus)
    aligned = [e for e in all_entries if e.aligned]
    skipped = len(all_entries) - len(aligned)
    if skipped:
        logger.info("build_index: skipped %d misaligned entries", skipped)

    language = aligned[0].language_code if aligned else ""
    corpus_id = compute_corpus_id(all_entries)

    exact: dict[str, list[Occurrence]] = {}
    counts: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    credits: dict[str, dict[str, int]] = {}

    for entry in aligned:
        positions: dict[str, list[int]] = {}
        for pos, token in enumerate(entry.transcription):
            positions.setdefault(token, []).append(pos)
            gloss = entry.glosses[pos]
            counts.setdefault(token, {})
            counts[token][gloss] = counts[token].get(gloss, 0) + 1
            totals[token] = totals.get(token, 0) + 1
        for token, pos_list in positions.items():
            exact.setdefault(token, []).append(Occurrence(entry.entry_id, tuple(pos_list)))

        meta_words = tokenize_translation(entry.translation)
        if not meta_words:
            continue
        lexical_by_pos = [
            [e.lower() for e in _lexical_elements(g)] for g in entry.glosses
        ]
        for word in meta_words:
            for pos, token in enumerate(entry.transcription):
                if any(element.startswith(word) for element in lexical_by_pos[pos]):
                    bucket = credits.setdefault(word, {})
                    bucket[token] = bucket.get(token, 0) + 1

    vocabulary = tuple(sorted(exact))

    distributions: dict[str, tuple[GlossCount, ...]] = {}
    for token in vocabulary:
        total = totals[token]
        ranked = sorted(counts[token].items(), key=lambda kv: (-kv[1], kv[0]))
        distributions[token] = tuple(
            GlossCount(gloss, n, round_half_up_percent(n, total)) for gloss, n in ranked
        )

    reverse: dict[str, tuple[ReverseHit, ...]] = {}
    for word in sorted(credits):
        ranked_hits = sorted(credits[word].items(), key=lambda kv: (-kv[1], kv[0]))
        reverse[word] = tuple(
            ReverseHit(token, distributions[token][0].gloss, n) for token, n in ranked_hits
        )

    return CorpusIndex(
        corpus_id=corpus_id,
        language_code=language,
        entries=tuple(aligned),
        exact={t: tuple(v) for t, v in exact.items()},
        distributions=distributions,
        vocabulary=vocabulary,
        reverse=reverse,
        token_totals=totals,
        skipped_misaligned=skipped,
    )


def most_frequent_gloss(index: CorpusIndex, token: str) -> str | None:
    """Argmax of the token's gloss distribution (ties: smallest gloss)."""
    dist = index.distributions.get(token)
    return dist[0].gloss if dist else None


def gloss_distribution(index: CorpusIndex, token: str) -> list[tuple[str, int]]:
    """Glosses with integer percentages, most frequent first."""
    return [(gc.gloss, gc.percent) for gc in index.distributions.get(token, ())]


def _sample_rng(seed: int, index: CorpusIndex, *parts: str) -> random.Random:
    return random.Random(":".join((str(seed), index.corpus_id) + parts))


def exact_examples(index: CorpusIndex, word: str, k: int, *, seed: int = 0) -> list[IgtEntry]:
    """Up to k distinct entries containing the word as a full token.

    When more than k entries qualify, a deterministic sample seeded by
    (seed, corpus id, word) is taken; results come back in corpus order.
    """
    if k <= 0:
        return []
    ids = [occ.entry_id for occ in index.exact.get(word, ())]
    if len(ids) > k:
        order = {entry_id: i for i, entry_id in enumerate(ids)}
        ids = sorted(_sample_rng(seed, index, word).sample(ids, k), key=order.__getitem__)
    return [index.entry(entry_id) for entry_id in ids]


def approximate_examples(
    index: CorpusIndex,
    word: str,
    k: int,
    min_lcs: int = DEFAULT_MIN_LCS,
    *,
    seed: int = 0,
) -> list[tuple[IgtEntry, str]]:
    """Example entries for vocabulary tokens sharing a long substring with word.

    Tokens are ranked by LCS length, then corpus frequency, then
    lexicographically; each matched token contributes at most one entry
    per round before the next-best token is used, cycling until k entries
    are collected or candidates run out.
    """
    if k <= 0:
        return []
    scored: list[tuple[int, int, str]] = []
    for token in index.vocabulary:
        if token == word:
            continue
        length = lcs_length(word, token)
        if length >= min_lcs:
            scored.append((-length, -index.token_totals[token], token))
    scored.sort()
    ranked_tokens = [token for _, _, token in scored]

    pools: dict[str, list[str]] = {}
    for token in ranked_tokens:
        ids = [occ.entry_id for occ in index.exact[token]]
        rng = _sample_rng(seed, index, word, "approx", token)
        rng.shuffle(ids)
        pools[token] = ids

    results: list[tuple[IgtEntry, str]] = []
    used_entries: set[str] = set()
    round_no = 0
    while len(results) < k:
        progressed = False
        for token in ranked_tokens:
            pool = pools[token]
            if round_no >= len(pool):
                continue
            entry_id = pool[round_no]
            progressed = True
            if entry_id in used_entries:
                continue
            used_entries.add(entry_id)
            results.append((index.entry(entry_id), token))
            if len(results) == k:
                break
        if not progressed:
            break
        round_no += 1
    return results


def reverse_lookup(index: CorpusIndex, metaword: str, k: int = 5) -> list[tuple[str, str]]:
    """Top-k (surface token, most frequent gloss) hits for a translation word."""
    if k <= 0:
        return []
    hits = index.reverse.get(metaword.lower(), ())
    return [(h.token, h.gloss) for h in hits[:k]]


# --- snapshot serialization -------------------------------------------------


def index_to_dict(index: CorpusIndex) -> dict:
    return {
        "formatVersion": INDEX_FORMAT_VERSION,
        "corpusId": index.corpus_id,
        "languageCode": index.language_code,
        "skippedMisaligned": index.skipped_misaligned,
        "entries": [
            {
                "id": e.entry_id,
                "t": list(e.transcription),
                "g": list(e.glosses),
                "l": e.translation,
                "split": e.split,
            }
            for e in index.entries
        ],
        "exact": {
            t: [[occ.entry_id, list(occ.positions)] for occ in occs]
            for t, occs in index.exact.items()
        },
        "distributions": {
            t: [[gc.gloss, gc.count, gc.percent] for gc in dist]
            for t, dist in index.distributions.items()
        },
        "vocabulary": list(index.vocabulary),
        "reverse": {
            w: [[h.token, h.gloss, h.count] for h in hits]
            for w, hits in index.reverse.items()
        },
        "tokenTotals": dict(index.token_totals),
    }


def index_from_dict(data: dict) -> CorpusIndex:
    if data.get("formatVersion") != INDEX_FORMAT_VERSION:
        raise ValueError(
            f"snapshot format version {data.get('formatVersion')} != {INDEX_FORMAT_VERSION}"
        )
    entries = tuple(
        IgtEntry(
            transcription=tuple(rec["t"]),
            glosses=tuple(rec["g"]),
            translation=rec["l"],
            language_code=data["languageCode"],
            split=rec["split"],
            entry_id=rec["id"],
        )
        for rec in data["entries"]
    )
    return CorpusIndex(
        corpus_id=data["corpusId"],
        language_code=data["languageCode"],
        entries=entries,
        exact={
            t: tuple(Occurrence(eid, tuple(pos)) for eid, pos in occs)
            for t, occs in data["exact"].items()
        },
        distributions={
            t: tuple(GlossCount(g, c, p) for g, c, p in dist)
            for t, dist in data["distributions"].items()
        },
        vocabulary=tuple(data["vocabulary"]),
        reverse={
            w: tuple(ReverseHit(t, g, c) for t, g, c in hits)
            for w, hits in data["reverse"].items()
        },
        token_totals=data["tokenTotals"],
        skipped_misaligned=data["skippedMisaligned"],
    )


def save_snapshot(index: CorpusIndex, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(index_to_dict(index), ensure_ascii=False, sort_keys=True),
        encoding="utf-8",
    )


def load_snapshot(path: str | Path) -> CorpusIndex:
    return index_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
