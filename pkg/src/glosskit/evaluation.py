"""Scoring: word and morpheme accuracy, the Jaccard 3-best oracle, and
tag-signature confusion matrices."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .igt import IgtEntry, WordGloss, gloss_signature
from .retrieval import SentencePrediction

_ELEMENT_SPLIT = re.compile(r"[-.]")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class EntryScore:
    entry_id: str
    tokens: int
    word_correct: int
    morpheme_matches: int
    morpheme_total: int


@dataclass(frozen=True)
class EvalReport:
    word_accuracy: float
    morpheme_accuracy: float
    token_count: int
    morpheme_count: int
    per_entry: tuple[EntryScore, ...]


@dataclass
class ConfusionMatrix:
    """Counts of unordered (gold signature, predicted signature) pairs over
    mislabeled tokens; lexical-only errors count toward token_errors only."""

    counts: dict[tuple[str, str], int] = field(default_factory=dict)
    token_errors: int = 0

    def add(self, gold_sig: str, pred_sig: str) -> None:
        self.token_errors += 1
        if gold_sig == pred_sig:
            return
        key = (gold_sig, pred_sig) if gold_sig <= pred_sig else (pred_sig, gold_sig)
        self.counts[key] = self.counts.get(key, 0) + 1

    def top_pairs(self, n: int | None = None) -> list[tuple[tuple[str, str], int]]:
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked if n is None else ranked[:n]


def elements_ordered(gloss: str) -> list[str]:
    """Ordered dot/hyphen-separated elements of one gloss string."""
    return [e for e in _ELEMENT_SPLIT.split(gloss) if e]


def element_set(gloss: str | WordGloss) -> frozenset[str]:
    if isinstance(gloss, WordGloss):
        return gloss.elements
    return frozenset(elements_ordered(gloss))


def jaccard(pred_gloss: str | WordGloss, gold_gloss: str | WordGloss) -> float:
    """Jaccard coefficient over element sets; two empty sets count as 1.0."""
    a, b = element_set(pred_gloss), element_set(gold_gloss)
    if not a and not b:
        return 1.0
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def oracle_select(kbest: Sequence[str], gold: str | WordGloss) -> str:
    """Candidate with maximal Jaccard vs gold; ties keep the earlier one."""
    if not kbest:
        raise ValueError("oracle_select requires a nonempty candidate list")
    best, best_score = kbest[0], jaccard(kbest[0], gold)
    for candidate in kbest[1:]:
        score = jaccard(candidate, gold)
        if score > best_score:
            best, best_score = candidate, score
    return best


def _pair_entries(
    predictions: Iterable[SentencePrediction], gold: Iterable[IgtEntry]
) -> list[tuple[SentencePrediction, IgtEntry]]:
    by_id = {e.entry_id: e for e in gold}
    pairs = []
    for pred in predictions:
        entry = by_id.get(pred.entry_ref)
        if entry is None:
            raise EvaluationError(f"no gold entry for prediction {pred.entry_ref!r}")
        if not entry.aligned:
            raise EvaluationError(f"gold entry {entry.entry_id!r} is not aligned")
        if len(pred.predicted) != len(entry.transcription):
            raise EvaluationError(
                f"entry {entry.entry_id!r}: {len(pred.predicted)} predictions for "
                f"{len(entry.transcription)} tokens"
            )
        pairs.append((pred, entry))
    return pairs


def evaluate(
    predictions: Iterable[SentencePrediction],
    gold: Iterable[IgtEntry],
    *,
    denominator: str = "max",
) -> EvalReport:
    """Score predictions against gold entries.

    Word accuracy is the exact-match rate over tokens (after trimming).
    Morpheme accuracy counts positional element matches per token; the
    per-token denominator is max(len(pred), len(gold)) by default, or the
    gold length with denominator="gold".
    """
    if denominator not in ("max", "gold"):
        raise ValueError(f"unknown denominator convention {denominator!r}")
    per_entry = []
    tokens = words_right = morph_hits = morph_total = 0
    for pred, entry in _pair_entries(predictions, gold):
        entry_words = entry_morph_hits = entry_morph_total = 0
        for pred_gloss, gold_gloss in zip(pred.predicted, entry.glosses):
            p, g = pred_gloss.strip(), gold_gloss.strip()
            if p == g:
                entry_words += 1
            pe, ge = elements_ordered(p), elements_ordered(g)
            entry_morph_hits += sum(1 for x, y in zip(pe, ge) if x == y)
            entry_morph_total += max(len(pe), len(ge)) if denominator == "max" else len(ge)
        per_entry.append(
            EntryScore(
                entry_id=entry.entry_id,
                tokens=len(entry.transcription),
                word_correct=entry_words,
                morpheme_matches=entry_morph_hits,
                morpheme_total=entry_morph_total,
            )
        )
        tokens += len(entry.transcription)
        words_right += entry_words
        morph_hits += entry_morph_hits
        morph_total += entry_morph_total
    return EvalReport(
        word_accuracy=100.0 * words_right / tokens if tokens else 0.0,
        morpheme_accuracy=100.0 * morph_hits / morph_total if morph_total else 0.0,
        token_count=tokens,
        morpheme_count=morph_total,
        per_entry=tuple(per_entry),
    )


def word_accuracy(predictions, gold) -> float:
    return evaluate(predictions, gold).word_accuracy


def morpheme_accuracy(predictions, gold, *, denominator: str = "max") -> float:
    return evaluate(predictions, gold, denominator=denominator).morpheme_accuracy


def confusion_matrix(
    predictions: Iterable[SentencePrediction], gold: Iterable[IgtEntry]
) -> ConfusionMatrix:
    matrix = ConfusionMatrix()
    for pred, entry in _pair_entries(predictions, gold):
        for pred_gloss, gold_gloss in zip(pred.predicted, entry.glosses):
            p, g = pred_gloss.strip(), gold_gloss.strip()
            if p == g:
                continue
            matrix.add(_signature_or_empty(g), _signature_or_empty(p))
    return matrix


def _signature_or_empty(gloss: str) -> str:
    try:
        return gloss_signature(gloss)
    except ValueError:
        return ""


def signature_elements(signature: str) -> frozenset[str]:
    return frozenset(e for e in _ELEMENT_SPLIT.split(signature) if e)


def aggregate_involving(matrix: ConfusionMatrix, element: str) -> int:
    """Total confusions where either signature contains the given element
    (the Table-style "CVB / any" line)."""
    return sum(
        count
        for (a, b), count in matrix.counts.items()
        if element in signature_elements(a) or element in signature_elements(b)
    )


def oracle_prediction(
    kbest_per_pos: Sequence[Sequence[str]], entry: IgtEntry
) -> SentencePrediction:
    """Per-token oracle choice against the entry's gold glosses."""
    if len(kbest_per_pos) != len(entry.transcription):
        raise EvaluationError(
            f"entry {entry.entry_id!r}: {len(kbest_per_pos)} k-best lists for "
            f"{len(entry.transcription)} tokens"
        )
    chosen = []
    for pos, candidates in enumerate(kbest_per_pos):
        gold = entry.glosses[pos].strip()
        chosen.append(oracle_select(candidates, gold) if candidates else "?")
    return SentencePrediction(entry.entry_id, tuple(chosen), "oracle")
