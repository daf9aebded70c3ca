#!/usr/bin/env python3
"""Download the SIGMORPHON 2023 glossing shared task data (Track 1,
uncovered) into a local data directory.

Needs network access to raw.githubusercontent.com. If that is blocked,
clone https://github.com/sigmorphon/2023glossingST yourself and point
GLOSSKIT_DATA_DIR at the checkout; glosskit finds the files in place.

Usage:
  python scripts/fetch_data.py [--dest data] [--languages ddo,lez,...]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import requests

LANGUAGE_DIRS = {
    "arp": "Arapaho",
    "ddo": "Tsez",
    "git": "Gitksan",
    "lez": "Lezgi",
    "ntu": "Natugu",
    "nyb": "Nyangbo",
    "usp": "Uspanteko",
}

SPLITS = ("train", "dev", "test")

BASE_URLS = (
    "https://raw.githubusercontent.com/sigmorphon/2023glossingST/main",
    "https://raw.githubusercontent.com/sigmorphon/2023glossingST/master",
)


def candidate_urls(base: str, code: str, split: str):
    lang = LANGUAGE_DIRS[code]
    names = [
        f"{code}-{split}-track1-uncovered",
        f"{code}-{split}-track1-uncovered.txt",
    ]
    for name in names:
        yield f"{base}/data/{lang}/{name}"
        yield f"{base}/{lang}/{name}"


def fetch(code: str, split: str, dest: Path, bases) -> bool:
    target = dest / f"{code}-{split}.txt"
    if target.exists():
        print(f"  {target} already present")
        return True
    for base in bases:
        for url in candidate_urls(base, code, split):
            try:
                resp = requests.get(url, timeout=60)
            except requests.RequestException as exc:
                print(f"  {url}: {exc}", file=sys.stderr)
                continue
            if resp.status_code == 200 and resp.text.strip():
                target.write_text(resp.text, encoding="utf-8")
                print(f"  {target} <- {url}")
                return True
    print(f"  FAILED: no source found for {code} {split}", file=sys.stderr)
    return False


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data")
    parser.add_argument("--languages", default=",".join(LANGUAGE_DIRS))
    parser.add_argument("--base-url", action="append", default=[], help="extra base URL to try")
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    bases = tuple(args.base_url) + BASE_URLS
    ok = True
    for code in args.languages.split(","):
        code = code.strip()
        if code not in LANGUAGE_DIRS:
            print(f"unknown language code {code!r}", file=sys.stderr)
            ok = False
            continue
        print(f"{code} ({LANGUAGE_DIRS[code]}):")
        for split in SPLITS:
            ok &= fetch(code, split, dest, bases)
    if ok:
        print(f"\nAll files in {dest}/. Set GLOSSKIT_DATA_DIR={dest} if it is not ./data.")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
