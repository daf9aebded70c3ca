"""Retrieval-only glossing baseline and the bracketed prompt context lines.

The baseline glosses each token with its most frequent training gloss and
falls back to "?" for out-of-vocabulary tokens. It never consults the
translation or a language model, which makes it a deterministic,
LLM-free reference system.
"""

from __future__ import annotations

from dataclasses import dataclass

from .igt import IgtEntry
from .index import CorpusIndex, most_frequent_gloss

OOV_GLOSS = "?"


@dataclass(frozen=True)
class SentencePrediction:
    """Predicted gloss strings for one entry, one per transcription token."""

    entry_ref: str
    predicted: tuple[str, ...]
    source: str  # "retrieval" | "llm" | "oracle"


def gloss_sentence_retrieval(index: CorpusIndex, entry: IgtEntry) -> SentencePrediction:
    predicted = tuple(
        most_frequent_gloss(index, token) or OOV_GLOSS for token in entry.transcription
    )
    return SentencePrediction(entry.entry_id, predicted, "retrieval")


def bracketed_sentence(entry: IgtEntry, target_pos: int) -> str:
    """The sentence line with the target token in brackets."""
    if not 0 <= target_pos < len(entry.transcription):
        raise ValueError(f"target position {target_pos} out of range for {entry.entry_id}")
    parts = list(entry.transcription)
    parts[target_pos] = f"[{parts[target_pos]}]"
    return " ".join(parts)


def context_candidate(index: CorpusIndex, entry: IgtEntry, target_pos: int) -> str:
    """Retrieval gloss of the rest of the sentence, "[?]" at the target."""
    if not 0 <= target_pos < len(entry.transcription):
        raise ValueError(f"target position {target_pos} out of range for {entry.entry_id}")
    parts = [
        most_frequent_gloss(index, token) or OOV_GLOSS for token in entry.transcription
    ]
    parts[target_pos] = "[?]"
    return " ".join(parts)
