"""Annotator-facing session and HTTP service.

Reads run against an immutable index snapshot; accepted glosses are
appended to a durable feedback log (an IGT-format file plus JSON-lines
metadata) and a fresh snapshot is built and swapped in atomically.
Replaying the log over the base corpus reproduces the active snapshot.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import unquote, urlparse

from .evaluation import ConfusionMatrix, aggregate_involving
from .gateway import BudgetExceededError, Gateway, GatewayError
from .igt import IgtEntry, parse_word_gloss, serialize_entry
from .index import CorpusIndex, build_index, gloss_distribution
from .instructions import (
    InstructionStore,
    TagPair,
    contrastive_instances,
    generate_instructions,
)
from .pipeline import gloss_word
from .prompts import PromptBundle, build_gloss_prompt

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

ORIGIN_SUGGESTION = "accepted-suggestion"
ORIGIN_MANUAL = "manual-edit"


class FeedbackValidationError(ValueError):
    pass


@dataclass(frozen=True)
class FeedbackRecord:
    """One accepted gloss: either for a token of a known entry or for a
    token of a freshly supplied sentence."""

    tokens: tuple[str, ...]
    translation: str
    position: int
    accepted_gloss: str
    annotator_id: str
    origin: str
    rank: int | None = None
    entry_ref: str | None = None
    timestamp: str = ""

    def validate(self) -> None:
        if not self.tokens:
            raise FeedbackValidationError("feedback needs a nonempty token list")
        if not 0 <= self.position < len(self.tokens):
            raise FeedbackValidationError(f"position {self.position} out of range")
        try:
            parse_word_gloss(self.accepted_gloss)
        except ValueError as exc:
            raise FeedbackValidationError(f"invalid gloss: {exc}") from exc
        if self.origin not in (ORIGIN_SUGGESTION, ORIGIN_MANUAL):
            raise FeedbackValidationError(f"unknown origin {self.origin!r}")
        if self.origin == ORIGIN_SUGGESTION and self.rank not in (1, 2, 3):
            raise FeedbackValidationError("accepted-suggestion feedback needs rank 1-3")

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "tokens": list(self.tokens),
            "translation": self.translation,
            "position": self.position,
            "acceptedGloss": self.accepted_gloss,
            "annotatorId": self.annotator_id,
            "origin": self.origin,
            "rank": self.rank,
            "entryRef": self.entry_ref,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FeedbackRecord":
        return cls(
            tokens=tuple(data["tokens"]),
            translation=data.get("translation", ""),
            position=data["position"],
            accepted_gloss=data["acceptedGloss"],
            annotator_id=data.get("annotatorId", ""),
            origin=data.get("origin", ORIGIN_MANUAL),
            rank=data.get("rank"),
            entry_ref=data.get("entryRef"),
            timestamp=data.get("timestamp", ""),
        )

    def as_entry(self, language_code: str, number: int) -> IgtEntry:
        """The accepted gloss as a minimal single-token training entry."""
        return IgtEntry(
            transcription=(self.tokens[self.position],),
            glosses=(self.accepted_gloss,),
            translation=self.translation,
            language_code=language_code,
            split="feedback",
            entry_id=f"feedback-{number}",
        )


def feedback_entries(records: list[FeedbackRecord], language_code: str) -> list[IgtEntry]:
    return [rec.as_entry(language_code, i) for i, rec in enumerate(records)]


def replay_feedback_log(
    log_path: str | Path, base_corpus: list[IgtEntry], language_code: str
) -> CorpusIndex:
    """Rebuild the snapshot from the base corpus plus every logged record."""
    records = []
    path = Path(log_path)
    if path.exists():
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(FeedbackRecord.from_json(json.loads(line)))
    return build_index(list(base_corpus) + feedback_entries(records, language_code))


@dataclass
class SessionConfig:
    language_code: str = ""
    pseudo_kbest: int = 3
    seed: int = 0
    max_instances: int = 32


class AnnotationSession:
    """Holds the active snapshot and serializes feedback writes."""

    def __init__(
        self,
        base_corpus: list[IgtEntry],
        config: SessionConfig,
        *,
        gateway: Gateway | None = None,
        instruction_store: InstructionStore | None = None,
        feedback_log: str | Path | None = None,
        feedback_igt: str | Path | None = None,
        pending: list[IgtEntry] | None = None,
    ):
        self.base_corpus = list(base_corpus)
        self.config = config
        self.gateway = gateway
        self.instruction_store = instruction_store
        self.feedback_log = Path(feedback_log) if feedback_log else None
        self.feedback_igt = Path(feedback_igt) if feedback_igt else None
        self.pending = list(pending or [])
        self._write_lock = threading.Lock()
        self._feedback: list[FeedbackRecord] = []
        if self.feedback_log and self.feedback_log.exists():
            for line in self.feedback_log.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._feedback.append(FeedbackRecord.from_json(json.loads(line)))
        self._snapshot = self._build()
        self.confusions: ConfusionMatrix | None = None

    def _build(self) -> CorpusIndex:
        extra = feedback_entries(self._feedback, self.config.language_code)
        return build_index(self.base_corpus + extra)

    @property
    def snapshot(self) -> CorpusIndex:
        return self._snapshot

    def feedback_count(self) -> int:
        return len(self._feedback)

    # -- glossing --

    def gloss_tokens(self, tokens: list[str], translation: str) -> dict:
        """Per-token k-best suggestions with the retrieval evidence that
        backs them; retrieval-only pseudo-k-best without a gateway."""
        if not tokens:
            raise FeedbackValidationError("token list must not be empty")
        snapshot = self._snapshot
        entry = IgtEntry(
            transcription=tuple(tokens),
            glosses=(),
            translation=translation,
            language_code=self.config.language_code,
            split="request",
            entry_id="request-0",
        )
        out = []
        for pos, word in enumerate(tokens):
            bundle = build_gloss_prompt(snapshot, entry, pos, seed=self.config.seed)
            if self.gateway is not None:
                record = gloss_word(
                    snapshot,
                    self.gateway,
                    entry,
                    pos,
                    self.instruction_store,
                    seed=self.config.seed,
                )
                glosses = list(record.glosses)
                injected = list(record.injected_pair) if record.injected_pair else None
            else:
                dist = gloss_distribution(snapshot, word)
                glosses = [g for g, _pct in dist[: self.config.pseudo_kbest]] or ["?"]
                injected = None
            out.append(
                {
                    "word": word,
                    "glosses": glosses,
                    "injectedPair": injected,
                    "evidence": _evidence_json(snapshot, bundle),
                }
            )
        return {
            "schemaVersion": SCHEMA_VERSION,
            "snapshotId": snapshot.corpus_id,
            "machineGenerated": True,
            "tokens": out,
        }

    # -- feedback --

    def record_feedback(self, record: FeedbackRecord) -> str:
        """Validate, append to the durable log, rebuild, swap. Returns the
        new snapshot id."""
        record.validate()
        if not record.timestamp:
            record = FeedbackRecord(**{**record.__dict__, "timestamp": _now()})
        with self._write_lock:
            if self.feedback_log:
                with open(self.feedback_log, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")
            if self.feedback_igt:
                entry = record.as_entry(self.config.language_code, len(self._feedback))
                with open(self.feedback_igt, "a", encoding="utf-8") as fh:
                    fh.write(serialize_entry(entry))
            self._feedback.append(record)
            self._snapshot = self._build()
            return self._snapshot.corpus_id

    # -- instruction generation --

    def generate_pair_instructions(self, a: str, b: str, dev_count: int = 0) -> dict:
        if self.gateway is None:
            raise GatewayError("no gateway configured")
        pair = TagPair.make(a, b, dev_count)
        instances = contrastive_instances(self._snapshot, pair, self.config.max_instances)
        if not instances:
            raise FeedbackValidationError(
                f"no contrastive instances for {pair.a} / {pair.b} in the training data"
            )
        result = generate_instructions(
            self.gateway, pair, instances, self._snapshot.language_code
        )
        if self.instruction_store is not None:
            self.instruction_store.put(result)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "machineGenerated": True,
            "pair": [pair.a, pair.b],
            "text": result.text,
            "model": result.model,
            "temperature": result.temperature,
            "promptHash": result.prompt_hash,
            "createdAt": result.created_at,
            "instanceCount": result.instance_count,
        }


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def _evidence_json(index: CorpusIndex, bundle: PromptBundle) -> dict:
    def entry_json(entry_id: str) -> dict:
        entry = index.entry(entry_id)
        return {
            "sentence": entry.sentence(),
            "gloss": entry.gloss_line(),
            "translation": entry.translation,
        }

    return {
        "distribution": [[g, p] for g, p in bundle.evidence.distribution],
        "features": list(bundle.evidence.features),
        "exactExamples": [entry_json(eid) for eid in bundle.evidence.exact],
        "approximateExamples": [
            {**entry_json(eid), "matchedToken": token}
            for eid, token in bundle.evidence.approximate
        ],
        "reverse": [
            {"word": metaword, "items": [[t, g] for t, g in hits]}
            for metaword, hits in bundle.evidence.reverse
        ],
    }


# --- HTTP layer ---------------------------------------------------------------


class AnnotationService:
    """Thin JSON-over-HTTP wrapper around an AnnotationSession."""

    def __init__(self, session: AnnotationSession, host: str = "127.0.0.1", port: int = 0):
        self.session = session
        handler = _make_handler(self)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def serve_forever(self) -> None:
        logger.info("annotation service listening on port %d", self.port)
        self.httpd.serve_forever()


def _error_body(kind: str, message: str) -> dict:
    return {"schemaVersion": SCHEMA_VERSION, "error": {"kind": kind, "message": message}}


def _make_handler(service: AnnotationService):
    session = service.session

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # route through logging, not stderr
            logger.debug("http: " + fmt, *args)

        def _send(self, status: int, body: dict) -> None:
            payload = json.dumps(body, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(payload)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(payload)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                data = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, ValueError) as exc:
                raise FeedbackValidationError(f"request body is not valid JSON: {exc}")
            if not isinstance(data, dict):
                raise FeedbackValidationError("request body must be a JSON object")
            return data

        def do_OPTIONS(self):
            self._send(204, {})

        def do_GET(self):
            path = urlparse(self.path).path
            try:
                if path == "/api/health":
                    self._send(
                        200,
                        {
                            "schemaVersion": SCHEMA_VERSION,
                            "status": "ok",
                            "snapshotId": session.snapshot.corpus_id,
                            "entries": len(session.snapshot.entries),
                            "feedbackCount": session.feedback_count(),
                            "pendingCount": len(session.pending),
                        },
                    )
                elif path.startswith("/api/evidence/"):
                    word = unquote(path[len("/api/evidence/") :])
                    self._handle_evidence(word)
                elif path == "/api/confusions":
                    self._handle_confusions()
                elif path == "/api/instructions":
                    self._handle_instruction_list()
                else:
                    self._send(404, _error_body("not-found", f"unknown path {path}"))
            except Exception as exc:  # noqa: BLE001 - boundary
                logger.exception("GET %s failed", path)
                self._send(500, _error_body("internal", str(exc)))

        def do_POST(self):
            path = urlparse(self.path).path
            try:
                body = self._read_json()
                if path == "/api/gloss":
                    self._handle_gloss(body)
                elif path == "/api/feedback":
                    self._handle_feedback(body)
                elif path == "/api/instructions/generate":
                    self._handle_generate(body)
                else:
                    self._send(404, _error_body("not-found", f"unknown path {path}"))
            except FeedbackValidationError as exc:
                self._send(400, _error_body("validation", str(exc)))
            except BudgetExceededError as exc:
                self._send(502, _error_body("budget-exhausted", str(exc)))
            except GatewayError as exc:
                self._send(502, _error_body("gateway", str(exc)))
            except Exception as exc:  # noqa: BLE001 - boundary
                logger.exception("POST %s failed", path)
                self._send(500, _error_body("internal", str(exc)))

        def _handle_gloss(self, body: dict) -> None:
            tokens = body.get("tokens")
            if tokens is None and isinstance(body.get("sentence"), str):
                tokens = body["sentence"].split()
            if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
                raise FeedbackValidationError("request needs a 'tokens' list or a 'sentence'")
            translation = body.get("translation", "")
            if not isinstance(translation, str):
                raise FeedbackValidationError("'translation' must be a string")
            self._send(200, session.gloss_tokens(tokens, translation))

        def _handle_feedback(self, body: dict) -> None:
            try:
                record = FeedbackRecord.from_json(body)
            except (KeyError, TypeError) as exc:
                raise FeedbackValidationError(f"malformed feedback record: {exc}")
            if record.entry_ref and not record.tokens:
                try:
                    entry = session.snapshot.entry(record.entry_ref)
                except KeyError:
                    raise FeedbackValidationError(f"unknown entry {record.entry_ref!r}")
                record = FeedbackRecord.from_json(
                    {
                        **body,
                        "tokens": list(entry.transcription),
                        "translation": entry.translation,
                    }
                )
            snapshot_id = session.record_feedback(record)
            self._send(200, {"schemaVersion": SCHEMA_VERSION, "snapshotId": snapshot_id})

        def _handle_evidence(self, word: str) -> None:
            snapshot = session.snapshot
            if not word:
                raise FeedbackValidationError("empty word")
            entry = IgtEntry(
                transcription=(word,),
                glosses=(),
                translation="",
                language_code=session.config.language_code,
                split="request",
                entry_id="evidence-0",
            )
            bundle = build_gloss_prompt(snapshot, entry, 0, seed=session.config.seed)
            self._send(
                200,
                {
                    "schemaVersion": SCHEMA_VERSION,
                    "snapshotId": snapshot.corpus_id,
                    "word": word,
                    "evidence": _evidence_json(snapshot, bundle),
                },
            )

        def _handle_confusions(self) -> None:
            matrix = session.confusions
            if matrix is None:
                self._send(
                    200,
                    {
                        "schemaVersion": SCHEMA_VERSION,
                        "pairs": [],
                        "tokenErrors": 0,
                        "aggregates": {},
                    },
                )
                return
            self._send(
                200,
                {
                    "schemaVersion": SCHEMA_VERSION,
                    "pairs": [
                        {"a": a, "b": b, "count": count}
                        for (a, b), count in matrix.top_pairs()
                    ],
                    "tokenErrors": matrix.token_errors,
                    "aggregates": {"CVB": aggregate_involving(matrix, "CVB")},
                },
            )

        def _handle_instruction_list(self) -> None:
            store = session.instruction_store
            items = []
            if store is not None:
                for stored in store.entries():
                    items.append(
                        {
                            "pair": [stored.a, stored.b],
                            "devConfusionCount": stored.dev_confusion_count,
                            "text": stored.text,
                            "machineGenerated": True,
                            "provenance": stored.provenance,
                        }
                    )
            self._send(200, {"schemaVersion": SCHEMA_VERSION, "instructions": items})

        def _handle_generate(self, body: dict) -> None:
            a, b = body.get("a"), body.get("b")
            if isinstance(body.get("pair"), list) and len(body["pair"]) == 2:
                a, b = body["pair"]
            if not isinstance(a, str) or not isinstance(b, str) or not a or not b or a == b:
                raise FeedbackValidationError("need two distinct signatures 'a' and 'b'")
            self._send(
                200,
                session.generate_pair_instructions(a, b, int(body.get("devCount") or 0)),
            )

    return Handler
