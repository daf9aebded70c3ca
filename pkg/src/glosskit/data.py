"""Locating SIGMORPHON 2023 shared-task data files on disk.

The data is public but not vendored; run scripts/fetch_data.py (needs
network) or point GLOSSKIT_DATA_DIR at an existing checkout. Files are
found under several naming conventions, including the original
``{code}-{split}-track1-uncovered`` layout.
"""

from __future__ import annotations

import os
from pathlib import Path

LANGUAGE_CODES = ("arp", "ddo", "git", "lez", "ntu", "nyb", "usp")

LANGUAGE_DIRS = {
    "arp": "Arapaho",
    "ddo": "Tsez",
    "git": "Gitksan",
    "lez": "Lezgi",
    "ntu": "Natugu",
    "nyb": "Nyangbo",
    "usp": "Uspanteko",
}


def data_dir() -> Path:
    return Path(os.environ.get("GLOSSKIT_DATA_DIR", "data"))


def _candidates(code: str, split: str) -> list[str]:
    names = [
        f"{code}-{split}.txt",
        f"{code}-{split}-track1-uncovered",
        f"{code}-{split}-track1-uncovered.txt",
    ]
    lang_dir = LANGUAGE_DIRS.get(code, "")
    out = list(names)
    if lang_dir:
        out += [f"{lang_dir}/{n}" for n in names]
        out += [f"data/{lang_dir}/{n}" for n in names]
    return out


def find_split(code: str, split: str, root: Path | None = None) -> Path | None:
    root = data_dir() if root is None else Path(root)
    for rel in _candidates(code, split):
        path = root / rel
        if path.exists():
            return path
    return None


def have_language(code: str, root: Path | None = None) -> bool:
    return (
        find_split(code, "train", root) is not None
        and find_split(code, "test", root) is not None
    )
