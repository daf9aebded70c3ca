"""Per-word LLM glossing over entries and corpora.

For each token: build the prompt (with instruction injection when a store
is supplied), call the gateway at temperature 0, and parse the k-best
response. A malformed response triggers one reprompt with a format
reminder; a second failure falls back to the retrieval gloss and the
token is recorded as a failure.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .evaluation import oracle_prediction
from .gateway import ChatRequest, Gateway, PURPOSE_GLOSSING, prompt_hash
from .igt import IgtEntry
from .index import CorpusIndex, most_frequent_gloss
from .prompts import (
    KBestGlosses,
    TEMPLATE_VERSION,
    build_gloss_prompt,
    format_reminder,
    parse_llm_response,
    select_instructions,
    MalformedResponseError,
)
from .retrieval import OOV_GLOSS, SentencePrediction, gloss_sentence_retrieval

logger = logging.getLogger(__name__)

RUN_SCHEMA_VERSION = 1

MODE_RETRIEVAL = "retrieval"
MODE_LLM = "llm"
MODE_LLM_INSTRUCTIONS = "llm+instructions"
MODES = (MODE_RETRIEVAL, MODE_LLM, MODE_LLM_INSTRUCTIONS)

FAILURE_MALFORMED = "malformed-response"


@dataclass(frozen=True)
class TokenRecord:
    """Outcome for one (entry, position): k-best glosses on success, or a
    failure kind plus the fallback gloss."""

    entry_id: str
    pos: int
    word: str
    glosses: tuple[str, ...]
    prompt_hash: str | None = None
    injected_pair: tuple[str, str] | None = None
    failure: str | None = None

    def kbest(self) -> KBestGlosses:
        return KBestGlosses(self.word, self.glosses)


@dataclass
class GlossRun:
    corpus_ref: str
    mode: str
    snapshot_id: str
    template_version: str = TEMPLATE_VERSION
    records: list[TokenRecord] = field(default_factory=list)

    @property
    def per_word(self) -> dict[tuple[str, int], KBestGlosses]:
        return {
            (r.entry_id, r.pos): r.kbest() for r in self.records if r.failure is None
        }

    @property
    def failures(self) -> list[tuple[str, int, str]]:
        return [(r.entry_id, r.pos, r.failure) for r in self.records if r.failure]

    def record_map(self) -> dict[tuple[str, int], TokenRecord]:
        return {(r.entry_id, r.pos): r for r in self.records}


def gloss_word(
    index: CorpusIndex,
    gateway: Gateway,
    entry: IgtEntry,
    pos: int,
    instruction_store=None,
    *,
    seed: int = 0,
) -> TokenRecord:
    """Gloss one token through the gateway with the reprompt-then-fallback
    policy. Budget and transport errors propagate to the caller."""
    word = entry.transcription[pos]
    instructions = pair = None
    if instruction_store is not None:
        instructions, pair = select_instructions(index, instruction_store, word)
    bundle = build_gloss_prompt(
        index, entry, pos, instructions, injected_pair=pair, seed=seed
    )

    prompt = bundle.text
    for attempt in range(2):
        response = gateway.complete(ChatRequest(prompt=prompt, purpose=PURPOSE_GLOSSING))
        try:
            kbest = parse_llm_response(response, word)
        except MalformedResponseError:
            logger.warning(
                "malformed response for %s:%d (attempt %d)", entry.entry_id, pos, attempt + 1
            )
            prompt = bundle.text + "\n\n" + format_reminder(word)
            continue
        return TokenRecord(
            entry_id=entry.entry_id,
            pos=pos,
            word=word,
            glosses=kbest.glosses,
            prompt_hash=prompt_hash(bundle.text),
            injected_pair=bundle.injected_pair,
        )
    fallback = most_frequent_gloss(index, word) or OOV_GLOSS
    return TokenRecord(
        entry_id=entry.entry_id,
        pos=pos,
        word=word,
        glosses=(fallback,),
        prompt_hash=prompt_hash(bundle.text),
        injected_pair=bundle.injected_pair,
        failure=FAILURE_MALFORMED,
    )


def gloss_corpus(
    index: CorpusIndex,
    gateway: Gateway | None,
    corpus: Sequence[IgtEntry],
    mode: str,
    limit: int | None = None,
    *,
    instruction_store=None,
    corpus_ref: str = "",
    seed: int = 0,
    checkpoint: str | Path | None = None,
    max_workers: int | None = None,
) -> GlossRun:
    """Gloss the first ``limit`` entries of a corpus (all when None).

    LLM calls run concurrently under the gateway's in-flight cap. With a
    checkpoint path, finished tokens are appended as they complete and
    skipped on resume.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode != MODE_RETRIEVAL and gateway is None:
        raise ValueError(f"mode {mode!r} requires a gateway")
    if mode == MODE_LLM_INSTRUCTIONS and instruction_store is None:
        raise ValueError("llm+instructions mode requires an instruction store")

    entries = list(corpus[:limit] if limit is not None else corpus)
    run = GlossRun(corpus_ref=corpus_ref, mode=mode, snapshot_id=index.corpus_id)

    done: dict[tuple[str, int], TokenRecord] = {}
    if checkpoint and Path(checkpoint).exists():
        previous = load_run(checkpoint)
        if (previous.snapshot_id, previous.mode) == (index.corpus_id, mode):
            done = previous.record_map()
        else:
            logger.warning("checkpoint %s does not match run parameters; ignoring", checkpoint)

    order = {e.entry_id: i for i, e in enumerate(entries)}

    if mode == MODE_RETRIEVAL:
        for entry in entries:
            pred = gloss_sentence_retrieval(index, entry)
            for pos, gloss in enumerate(pred.predicted):
                run.records.append(
                    TokenRecord(entry.entry_id, pos, entry.transcription[pos], (gloss,))
                )
        return run

    tasks = [
        (entry, pos)
        for entry in entries
        for pos in range(len(entry.transcription))
        if (entry.entry_id, pos) not in done
    ]
    results: list[TokenRecord] = [r for r in done.values() if r.entry_id in order]

    ckpt_lock = threading.Lock()

    def work(task: tuple[IgtEntry, int]) -> TokenRecord:
        entry, pos = task
        record = gloss_word(
            index, gateway, entry, pos, instruction_store if mode == MODE_LLM_INSTRUCTIONS else None,
            seed=seed,
        )
        if checkpoint:
            with ckpt_lock:
                append_checkpoint(checkpoint, run, record)
        return record

    workers = max_workers if max_workers is not None else gateway.config.max_in_flight
    if workers <= 1 or len(tasks) <= 1:
        results.extend(work(t) for t in tasks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results.extend(pool.map(work, tasks))

    results.sort(key=lambda r: (order[r.entry_id], r.pos))
    run.records = results
    if checkpoint:
        save_run(run, checkpoint)
    return run


def one_best_predictions(run: GlossRun, corpus: Iterable[IgtEntry]) -> list[SentencePrediction]:
    """Full-length 1-best predictions per entry covered by the run."""
    records = run.record_map()
    source = "retrieval" if run.mode == MODE_RETRIEVAL else "llm"
    predictions = []
    for entry in corpus:
        row = [records.get((entry.entry_id, pos)) for pos in range(len(entry.transcription))]
        if all(r is None for r in row):
            continue
        predicted = tuple(
            r.glosses[0] if r and r.glosses else OOV_GLOSS for r in row
        )
        predictions.append(SentencePrediction(entry.entry_id, predicted, source))
    return predictions


def oracle_predictions(run: GlossRun, gold: Iterable[IgtEntry]) -> list[SentencePrediction]:
    """Per-token oracle selection from the run's k-best lists vs gold."""
    records = run.record_map()
    predictions = []
    for entry in gold:
        if not entry.aligned:
            continue
        row = [records.get((entry.entry_id, pos)) for pos in range(len(entry.transcription))]
        if all(r is None for r in row):
            continue
        kbest_lists = [list(r.glosses) if r else [] for r in row]
        predictions.append(oracle_prediction(kbest_lists, entry))
    return predictions


# --- run artifact (JSON lines) ----------------------------------------------


def _record_to_json(record: TokenRecord) -> dict:
    return {
        "kind": "token",
        "entryId": record.entry_id,
        "pos": record.pos,
        "word": record.word,
        "glosses": list(record.glosses),
        "promptHash": record.prompt_hash,
        "injectedPair": list(record.injected_pair) if record.injected_pair else None,
        "failure": record.failure,
    }


def _record_from_json(data: dict) -> TokenRecord:
    pair = data.get("injectedPair")
    return TokenRecord(
        entry_id=data["entryId"],
        pos=data["pos"],
        word=data["word"],
        glosses=tuple(data["glosses"]),
        prompt_hash=data.get("promptHash"),
        injected_pair=tuple(pair) if pair else None,
        failure=data.get("failure"),
    )


def _header_line(run: GlossRun) -> str:
    return json.dumps(
        {
            "kind": "header",
            "schemaVersion": RUN_SCHEMA_VERSION,
            "corpusRef": run.corpus_ref,
            "mode": run.mode,
            "snapshotId": run.snapshot_id,
            "templateVersion": run.template_version,
        },
        ensure_ascii=False,
        sort_keys=True,
    )


def save_run(run: GlossRun, path: str | Path) -> None:
    lines = [_header_line(run)]
    lines += [
        json.dumps(_record_to_json(r), ensure_ascii=False, sort_keys=True)
        for r in run.records
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def append_checkpoint(path: str | Path, run: GlossRun, record: TokenRecord) -> None:
    path = Path(path)
    if not path.exists():
        path.write_text(_header_line(run) + "\n", encoding="utf-8")
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(_record_to_json(record), ensure_ascii=False, sort_keys=True) + "\n")


def load_run(path: str | Path) -> GlossRun:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"empty run file: {path}")
    header = json.loads(lines[0])
    if header.get("kind") != "header":
        raise ValueError(f"run file {path} has no header line")
    if header.get("schemaVersion") != RUN_SCHEMA_VERSION:
        raise ValueError(f"unsupported run schema version {header.get('schemaVersion')}")
    run = GlossRun(
        corpus_ref=header.get("corpusRef", ""),
        mode=header["mode"],
        snapshot_id=header["snapshotId"],
        template_version=header.get("templateVersion", TEMPLATE_VERSION),
    )
    seen: dict[tuple[str, int], TokenRecord] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        data = json.loads(line)
        if data.get("kind") != "token":
            continue
        record = _record_from_json(data)
        seen[(record.entry_id, record.pos)] = record
    run.records = list(seen.values())
    return run
