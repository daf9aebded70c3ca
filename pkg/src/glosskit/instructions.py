"""Confusable-tag instruction pipeline: mine highly confused signature
pairs from a dev confusion matrix, extract contrastive training instances,
elicit disambiguation rules from the LLM, and persist them for prompt
injection."""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass
from pathlib import Path
from string import Template

from .evaluation import ConfusionMatrix
from .gateway import ChatRequest, Gateway, PURPOSE_INSTRUCTIONS, prompt_hash
from .igt import IgtEntry, gloss_signature
from .index import CorpusIndex
from .prompts import TEMPLATE_VERSION, language_name, load_template_blocks

logger = logging.getLogger(__name__)

DEFAULT_CONFUSION_THRESHOLD = 5
DEFAULT_MAX_INSTANCES = 32


@dataclass(frozen=True)
class TagPair:
    """Unordered, lexicographically normalized signature pair."""

    a: str
    b: str
    dev_confusion_count: int = 0

    @classmethod
    def make(cls, x: str, y: str, count: int = 0) -> "TagPair":
        if x == y:
            raise ValueError("a tag pair needs two distinct signatures")
        a, b = sorted((x, y))
        return cls(a, b, count)

    def slug(self) -> str:
        def clean(sig: str) -> str:
            return re.sub(r"[^A-Za-z0-9.-]", "_", sig) or "none"

        return f"{clean(self.a)}__{clean(self.b)}"


@dataclass(frozen=True)
class ContrastiveInstance:
    """One surface token witnessed with both signatures of a pair."""

    token: str
    entry_a: IgtEntry
    entry_b: IgtEntry


@dataclass(frozen=True)
class InstructionSet:
    pair: TagPair
    text: str
    model: str
    temperature: float
    prompt_hash: str
    created_at: str
    instance_count: int


def mine_confusable_pairs(
    matrix: ConfusionMatrix, threshold: int = DEFAULT_CONFUSION_THRESHOLD
) -> list[TagPair]:
    """All signature pairs confused strictly more than ``threshold`` times,
    most confused first."""
    ranked = sorted(matrix.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [TagPair(a, b, count) for (a, b), count in ranked if count > threshold]


def _signature_of(entry: IgtEntry, pos: int) -> str:
    try:
        return gloss_signature(entry.glosses[pos])
    except ValueError:
        return ""


def contrastive_instances(
    index: CorpusIndex, pair: TagPair, max_instances: int = DEFAULT_MAX_INSTANCES
) -> list[ContrastiveInstance]:
    """Up to ``max_instances`` tokens appearing in training with both
    signatures, one instance per token, best-attested tokens first."""
    eligible: list[tuple[int, str]] = []
    for token, dist in index.distributions.items():
        counts: dict[str, int] = {}
        for gc in dist:
            try:
                sig = gloss_signature(gc.gloss)
            except ValueError:
                continue
            counts[sig] = counts.get(sig, 0) + gc.count
        if counts.get(pair.a, 0) > 0 and counts.get(pair.b, 0) > 0:
            eligible.append((min(counts[pair.a], counts[pair.b]), token))
    eligible.sort(key=lambda item: (-item[0], item[1]))

    instances: list[ContrastiveInstance] = []
    for _count, token in eligible[:max_instances]:
        entry_a = entry_b = None
        for occ in index.exact[token]:
            entry = index.entry(occ.entry_id)
            for pos in occ.positions:
                sig = _signature_of(entry, pos)
                if sig == pair.a and entry_a is None:
                    entry_a = entry
                elif sig == pair.b and entry_b is None:
                    entry_b = entry
            if entry_a is not None and entry_b is not None:
                break
        if entry_a is None or entry_b is None:  # pragma: no cover - guarded by counts
            continue
        instances.append(ContrastiveInstance(token, entry_a, entry_b))
    return instances


_INSTRUCTION_BLOCKS: dict[str, str] | None = None


def _blocks() -> dict[str, str]:
    global _INSTRUCTION_BLOCKS
    if _INSTRUCTION_BLOCKS is None:
        _INSTRUCTION_BLOCKS = load_template_blocks(f"instruction_prompt_{TEMPLATE_VERSION}.txt")
    return _INSTRUCTION_BLOCKS


def build_instruction_prompt(
    pair: TagPair, instances: list[ContrastiveInstance], language: str
) -> str:
    """The rule-elicitation prompt: numbered contrastive blocks followed by
    the fixed bad-rule exemplars and the final directive."""
    if not instances:
        raise ValueError("instruction prompt requires at least one contrastive instance")
    blocks = _blocks()
    lang = language_name(language)
    parts = [Template(blocks["intro"]).substitute(tag_a=pair.a, tag_b=pair.b, language=lang)]
    for i, instance in enumerate(instances):
        header = Template(blocks["instance_header"]).substitute(index=str(i), token=instance.token)
        examples = []
        for entry in (instance.entry_a, instance.entry_b):
            examples.append(
                Template(blocks["example"]).substitute(
                    sentence=entry.sentence(),
                    gloss=entry.gloss_line(),
                    translation=entry.translation,
                )
            )
        parts.append(header + "\n\n" + "\n\n".join(examples))
    parts.append(Template(blocks["directive"]).substitute(tag_a=pair.a, tag_b=pair.b, language=lang))
    return "\n\n".join(parts)


def generate_instructions(
    gateway: Gateway,
    pair: TagPair,
    instances: list[ContrastiveInstance],
    language: str,
) -> InstructionSet:
    """One gateway call at the instruction-generation temperature. The
    response is stored verbatim; no linguistic validation is attempted."""
    prompt = build_instruction_prompt(pair, instances, language)
    response = gateway.complete(ChatRequest(prompt=prompt, purpose=PURPOSE_INSTRUCTIONS))
    return InstructionSet(
        pair=pair,
        text=response,
        model=gateway.config.model_name,
        temperature=0.25,
        prompt_hash=prompt_hash(prompt),
        created_at=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        instance_count=len(instances),
    )


@dataclass(frozen=True)
class StoredInstruction:
    a: str
    b: str
    dev_confusion_count: int
    text: str
    provenance: dict


class InstructionStore:
    """One UTF-8 text file per pair plus a provenance manifest, under a
    directory keyed by corpus language."""

    def __init__(self, root: str | Path, language: str):
        self.root = Path(root) / language
        self.language = language
        self.root.mkdir(parents=True, exist_ok=True)
        self._manifest_path = self.root / "manifest.json"

    def _manifest(self) -> dict:
        if self._manifest_path.exists():
            return json.loads(self._manifest_path.read_text(encoding="utf-8"))
        return {"schemaVersion": 1, "language": self.language, "pairs": {}}

    def put(self, instruction_set: InstructionSet) -> Path:
        pair = instruction_set.pair
        text_path = self.root / f"{pair.slug()}.txt"
        text_path.write_text(instruction_set.text, encoding="utf-8")
        manifest = self._manifest()
        manifest["pairs"][f"{pair.a}|{pair.b}"] = {
            "a": pair.a,
            "b": pair.b,
            "devConfusionCount": pair.dev_confusion_count,
            "file": text_path.name,
            "model": instruction_set.model,
            "temperature": instruction_set.temperature,
            "promptHash": instruction_set.prompt_hash,
            "createdAt": instruction_set.created_at,
            "instanceCount": instruction_set.instance_count,
        }
        self._manifest_path.write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True),
            encoding="utf-8",
        )
        return text_path

    def entries(self) -> list[StoredInstruction]:
        manifest = self._manifest()
        out = []
        for meta in manifest["pairs"].values():
            text = (self.root / meta["file"]).read_text(encoding="utf-8")
            out.append(
                StoredInstruction(
                    a=meta["a"],
                    b=meta["b"],
                    dev_confusion_count=meta["devConfusionCount"],
                    text=text,
                    provenance={
                        k: meta[k]
                        for k in ("model", "temperature", "promptHash", "createdAt", "instanceCount")
                    },
                )
            )
        out.sort(key=lambda s: (-s.dev_confusion_count, s.a, s.b))
        return out
