#!/usr/bin/env python3
"""Reproduce the retrieval-baseline word- and morpheme-level scores for
every shared-task language found in the data directory.

Prints one row per language; arp is truncated to its first 100 test
sentences, matching the published evaluation subset.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from glosskit.data import LANGUAGE_CODES, data_dir, find_split
from glosskit.evaluation import evaluate
from glosskit.igt import parse_file
from glosskit.index import build_index
from glosskit.pipeline import MODE_RETRIEVAL, gloss_corpus, one_best_predictions

ARP_LIMIT = 100


def score_language(code: str):
    train_path = find_split(code, "train")
    test_path = find_split(code, "test")
    if not train_path or not test_path:
        return None
    train = parse_file(train_path, code, "train")
    test = [e for e in parse_file(test_path, code, "test") if e.aligned]
    limit = ARP_LIMIT if code == "arp" else None
    index = build_index(train)
    run = gloss_corpus(index, None, test, MODE_RETRIEVAL, limit=limit)
    gold = test[:limit] if limit else test
    report = evaluate(one_best_predictions(run, gold), gold)
    return report


def main() -> int:
    print(f"data directory: {data_dir()}")
    print(f"{'lang':6s} {'word':>7s} {'morph':>7s} {'tokens':>8s} {'secs':>6s}")
    missing = []
    for code in LANGUAGE_CODES:
        started = time.monotonic()
        report = score_language(code)
        if report is None:
            missing.append(code)
            continue
        label = "arp*" if code == "arp" else code
        print(
            f"{label:6s} {report.word_accuracy:7.2f} {report.morpheme_accuracy:7.2f} "
            f"{report.token_count:8d} {time.monotonic() - started:6.1f}"
        )
    if missing:
        print(f"\nmissing data for: {', '.join(missing)} (run scripts/fetch_data.py)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
