"""Command line interface: index building, glossing, evaluation, oracle
scoring, confusion reports, instruction generation, prompt dumps, and the
annotation HTTP service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import data as datapaths
from .evaluation import (
    aggregate_involving,
    confusion_matrix,
    evaluate,
)
from .gateway import (
    Gateway,
    GatewayConfig,
    GatewayError,
    HttpBackend,
    MockBackend,
)
from .igt import parse_file
from .index import build_index, load_snapshot, save_snapshot
from .instructions import (
    InstructionStore,
    TagPair,
    build_instruction_prompt,
    contrastive_instances,
    generate_instructions,
    mine_confusable_pairs,
)
from .pipeline import (
    MODE_LLM_INSTRUCTIONS,
    MODE_RETRIEVAL,
    MODES,
    gloss_corpus,
    load_run,
    one_best_predictions,
    oracle_predictions,
    save_run,
)
from .prompts import build_gloss_prompt, select_instructions
from .service import AnnotationService, AnnotationSession, SessionConfig


def _load_corpus(path: str, language: str, split: str):
    return parse_file(path, language, split)


def _gateway_from_args(args) -> Gateway | None:
    config_file = getattr(args, "gateway_config", None)
    if getattr(args, "mock", None):
        backend = MockBackend.from_file(args.mock)
    elif getattr(args, "endpoint", None) or config_file:
        backend = HttpBackend()
    else:
        return None
    overrides = dict(
        endpoint_url=getattr(args, "endpoint", None),
        model_name=getattr(args, "model", None),
        api_key_env=getattr(args, "api_key_env", None),
        cost_cap=getattr(args, "cost_cap", None),
        cache_dir=getattr(args, "cache_dir", None),
        audit_log=getattr(args, "audit_log", None),
    )
    if config_file:
        config = GatewayConfig.from_file(config_file, **overrides)
    else:
        config = GatewayConfig(
            endpoint_url=overrides["endpoint_url"] or "",
            model_name=overrides["model_name"] or "mock",
            api_key_env=overrides["api_key_env"] or "GLOSSKIT_API_KEY",
            max_in_flight=getattr(args, "max_in_flight", 4),
            cost_cap=overrides["cost_cap"],
            cache_dir=overrides["cache_dir"],
            audit_log=overrides["audit_log"],
        )
    return Gateway(config, backend)


def _index_for(args):
    corpus = _load_corpus(args.train, args.language, "train")
    cache_dir = getattr(args, "snapshot_cache", None)
    if not cache_dir:
        return build_index(corpus)
    from .index import compute_corpus_id

    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    cached = cache / f"{compute_corpus_id(corpus)}.json"
    if cached.exists():
        try:
            return load_snapshot(cached)
        except ValueError:
            pass  # stale format version: rebuild below
    index = build_index(corpus)
    save_snapshot(index, cached)
    return index


def cmd_index(args) -> int:
    index = _index_for(args)
    save_snapshot(index, args.out)
    print(f"snapshot {index.corpus_id[:12]} with {len(index.entries)} entries -> {args.out}")
    return 0


def cmd_gloss(args) -> int:
    index = _index_for(args)
    corpus = _load_corpus(args.input, args.language, "test")
    gateway = _gateway_from_args(args)
    store = None
    if args.mode == MODE_LLM_INSTRUCTIONS:
        if not args.instructions:
            print("--instructions DIR is required for llm+instructions", file=sys.stderr)
            return 2
        store = InstructionStore(args.instructions, args.language)
    if args.mode != MODE_RETRIEVAL and gateway is None:
        print("LLM modes need --mock FILE or --endpoint URL", file=sys.stderr)
        return 2
    run = gloss_corpus(
        index,
        gateway,
        corpus,
        args.mode,
        limit=args.limit,
        instruction_store=store,
        corpus_ref=args.input,
        seed=args.seed,
        checkpoint=args.out if args.resume else None,
    )
    save_run(run, args.out)
    failures = len(run.failures)
    print(
        f"glossed {len(run.records)} tokens ({args.mode}) -> {args.out}"
        + (f" [{failures} fallbacks]" if failures else "")
    )
    return 0


def _predictions(args, run, gold):
    mode = getattr(args, "select", "first") or "first"
    if mode == "oracle":
        return oracle_predictions(run, gold)
    return one_best_predictions(run, gold)


def cmd_evaluate(args) -> int:
    run = load_run(args.pred)
    gold = _load_corpus(args.gold, args.language, "test")
    gold = [e for e in gold if e.aligned]
    preds = one_best_predictions(run, gold)
    report = evaluate(preds, gold, denominator=args.denominator)
    if args.json:
        print(
            json.dumps(
                {
                    "wordAccuracy": report.word_accuracy,
                    "morphemeAccuracy": report.morpheme_accuracy,
                    "tokenCount": report.token_count,
                    "morphemeCount": report.morpheme_count,
                },
                indent=2,
            )
        )
        return 0
    if args.metric in ("word", "both"):
        print(f"word accuracy: {report.word_accuracy:.2f} ({report.token_count} tokens)")
    if args.metric in ("morpheme", "both"):
        print(
            f"morpheme accuracy: {report.morpheme_accuracy:.2f} "
            f"({report.morpheme_count} elements)"
        )
    return 0


def cmd_oracle(args) -> int:
    run = load_run(args.pred)
    gold = _load_corpus(args.gold, args.language, "test")
    gold = [e for e in gold if e.aligned]
    first = evaluate(one_best_predictions(run, gold), gold)
    oracle = evaluate(oracle_predictions(run, gold), gold)
    print(f"1-best word accuracy: {first.word_accuracy:.2f}")
    print(f"oracle word accuracy: {oracle.word_accuracy:.2f}")
    print(f"1-best morpheme accuracy: {first.morpheme_accuracy:.2f}")
    print(f"oracle morpheme accuracy: {oracle.morpheme_accuracy:.2f}")
    return 0


def cmd_confusions(args) -> int:
    run = load_run(args.pred)
    gold = _load_corpus(args.gold, args.language, "test")
    gold = [e for e in gold if e.aligned]
    matrix = confusion_matrix(one_best_predictions(run, gold), gold)
    print(f"{'confusion':40s} count")
    for (a, b), count in matrix.top_pairs(args.top):
        label = f"{a or '(none)'} / {b or '(none)'}"
        print(f"{label:40s} {count}")
    print(f"{'CVB / any':40s} {aggregate_involving(matrix, 'CVB')}")
    print(f"total mislabeled tokens: {matrix.token_errors}")
    return 0


def cmd_mine_pairs(args) -> int:
    run = load_run(args.pred)
    # entry ids must line up with the run artifact, so any corpus that a
    # run is scored against is parsed under the same split label
    gold = _load_corpus(args.gold, args.language, "test")
    gold = [e for e in gold if e.aligned]
    matrix = confusion_matrix(one_best_predictions(run, gold), gold)
    pairs = mine_confusable_pairs(matrix, args.threshold)
    payload = [
        {"a": p.a, "b": p.b, "devConfusionCount": p.dev_confusion_count} for p in pairs
    ]
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
        print(f"{len(pairs)} pairs -> {args.out}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def cmd_gen_instructions(args) -> int:
    index = _index_for(args)
    gateway = _gateway_from_args(args)
    if gateway is None:
        print("instruction generation needs --mock FILE or --endpoint URL", file=sys.stderr)
        return 2
    if args.pairs:
        pairs = [
            TagPair.make(item["a"], item["b"], item.get("devConfusionCount", 0))
            for item in json.loads(Path(args.pairs).read_text(encoding="utf-8"))
        ]
    else:
        if not (args.pred and args.gold):
            print("need --pairs FILE or --pred/--gold dev run", file=sys.stderr)
            return 2
        run = load_run(args.pred)
        gold = [e for e in _load_corpus(args.gold, args.language, "test") if e.aligned]
        matrix = confusion_matrix(one_best_predictions(run, gold), gold)
        pairs = mine_confusable_pairs(matrix, args.threshold)
    store = InstructionStore(args.out, args.language)
    generated = 0
    for pair in pairs:
        instances = contrastive_instances(index, pair, args.max_instances)
        if not instances:
            print(f"skipping {pair.a} / {pair.b}: no contrastive instances")
            continue
        result = generate_instructions(gateway, pair, instances, args.language)
        store.put(result)
        generated += 1
        print(f"generated instructions for {pair.a} / {pair.b} ({len(instances)} instances)")
    print(f"{generated} instruction sets -> {args.out}")
    return 0


def cmd_prompt(args) -> int:
    index = _index_for(args)
    corpus = _load_corpus(args.input, args.language, "test")
    if not 0 <= args.entry < len(corpus):
        print(f"entry {args.entry} out of range (corpus has {len(corpus)})", file=sys.stderr)
        return 2
    entry = corpus[args.entry]
    if not 0 <= args.pos < len(entry.transcription):
        print(f"position {args.pos} out of range for entry {args.entry}", file=sys.stderr)
        return 2
    instructions = pair = None
    if args.instructions:
        store = InstructionStore(args.instructions, args.language)
        instructions, pair = select_instructions(index, store, entry.transcription[args.pos])
    bundle = build_gloss_prompt(
        index, entry, args.pos, instructions, injected_pair=pair, seed=args.seed
    )
    print(bundle.text)
    return 0


def cmd_serve(args) -> int:
    corpus = _load_corpus(args.train, args.language, "train")
    pending = _load_corpus(args.input, args.language, "pending") if args.input else None
    session = AnnotationSession(
        corpus,
        SessionConfig(language_code=args.language, seed=args.seed),
        gateway=_gateway_from_args(args),
        instruction_store=(
            InstructionStore(args.instructions, args.language) if args.instructions else None
        ),
        feedback_log=args.feedback_log,
        feedback_igt=args.feedback_igt,
        pending=pending,
    )
    if args.pred and args.gold:
        run = load_run(args.pred)
        gold = [e for e in _load_corpus(args.gold, args.language, "test") if e.aligned]
        session.confusions = confusion_matrix(one_best_predictions(run, gold), gold)
    service = AnnotationService(session, host=args.host, port=args.port)
    print(f"listening on http://{args.host}:{service.port}")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glosskit",
        description="Retrieval-assisted interlinear glossing toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, train=True):
        p.add_argument("--language", default="ddo", help="ISO-style corpus code")
        if train:
            p.add_argument("--train", required=True, help="training corpus file")

    def add_gateway(p):
        p.add_argument("--mock", help="scripted mock backend JSON file")
        p.add_argument("--endpoint", help="OpenAI-compatible base URL")
        p.add_argument("--model", help="model name for the endpoint")
        p.add_argument(
            "--gateway-config", dest="gateway_config", help="JSON gateway config file"
        )
        p.add_argument("--api-key-env", dest="api_key_env", help="env var holding the API key")
        p.add_argument("--cost-cap", dest="cost_cap", type=int, help="max backend requests")
        p.add_argument("--cache-dir", dest="cache_dir", help="response cache directory")
        p.add_argument("--audit-log", dest="audit_log", help="JSON-lines audit log path")
        p.add_argument("--max-in-flight", dest="max_in_flight", type=int, default=4)

    p = sub.add_parser("index", help="build and cache a retrieval snapshot")
    add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("gloss", help="gloss a corpus")
    add_common(p)
    p.add_argument("--input", required=True, help="corpus file to gloss")
    p.add_argument("--mode", choices=MODES, default=MODE_RETRIEVAL)
    p.add_argument("--limit", type=int, help="process only the first N entries")
    p.add_argument("--out", required=True, help="run artifact (JSON lines)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instructions", help="instruction store directory")
    p.add_argument("--resume", action="store_true", help="resume from an existing artifact")
    p.add_argument(
        "--snapshot-cache", dest="snapshot_cache", help="snapshot cache directory (by corpus id)"
    )
    add_gateway(p)
    p.set_defaults(func=cmd_gloss)

    p = sub.add_parser("evaluate", help="score a run against gold")
    add_common(p, train=False)
    p.add_argument("--pred", required=True, help="run artifact")
    p.add_argument("--gold", required=True, help="gold corpus file")
    p.add_argument("--metric", choices=("word", "morpheme", "both"), default="both")
    p.add_argument("--denominator", choices=("max", "gold"), default="max")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="3-best oracle scores for a run")
    add_common(p, train=False)
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("confusions", help="top confused signature pairs")
    add_common(p, train=False)
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--top", type=int, default=5)
    p.set_defaults(func=cmd_confusions)

    p = sub.add_parser("mine-pairs", help="mine confusable pairs from a dev run")
    add_common(p, train=False)
    p.add_argument("--pred", required=True, help="dev run artifact")
    p.add_argument("--gold", required=True, help="dev gold file")
    p.add_argument("--threshold", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mine_pairs)

    p = sub.add_parser("gen-instructions", help="mine, extract, and generate instructions")
    add_common(p)
    p.add_argument("--pairs", help="JSON file of pairs (else mine from --pred/--gold)")
    p.add_argument("--pred", help="dev run artifact")
    p.add_argument("--gold", help="dev gold file")
    p.add_argument("--threshold", type=int, default=5)
    p.add_argument("--max-instances", dest="max_instances", type=int, default=32)
    p.add_argument("--out", required=True, help="instruction store directory")
    add_gateway(p)
    p.set_defaults(func=cmd_gen_instructions)

    p = sub.add_parser("prompt", help="dump the exact prompt for an (entry, position)")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--entry", type=int, required=True)
    p.add_argument("--pos", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instructions", help="instruction store directory")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    add_common(p)
    p.add_argument("--input", help="corpus file queued for annotation")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instructions", help="instruction store directory")
    p.add_argument("--feedback-log", dest="feedback_log", help="JSON-lines feedback log")
    p.add_argument("--feedback-igt", dest="feedback_igt", help="IGT-format feedback file")
    p.add_argument("--pred", help="run artifact for the confusion dashboard")
    p.add_argument("--gold", help="gold file for the confusion dashboard")
    add_gateway(p)
    p.set_defaults(func=cmd_serve)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GatewayError as exc:
        print(f"gateway error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
