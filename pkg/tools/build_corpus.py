#!/usr/bin/env python3
"""Regenerate assets/corpus.txt, the bundled English text used by tests/demos.

Harvests docstring prose from a fixed list of installed scientific-Python
packages (BSD-licensed, redistributable), keeps lines that look like running
English (mostly alphabetic, sentence length), deduplicates, and concatenates
in deterministic order. The result is plain English technical prose with
ordinary letter statistics ('e' most frequent, etc.), which is all the
message distribution needs. Substitute any plain-text corpus you prefer via
`cipher-icl prep`.

Usage: python tools/build_corpus.py [--target-letters N] [--out PATH]
"""

from __future__ import annotations

import argparse
import ast
import importlib.util
from pathlib import Path

SOURCES = ["numpy", "scipy", "pandas", "sklearn", "statsmodels", "sympy"]
DEFAULT_TARGET = 2_500_000


def iter_docstrings(path: Path):
    try:
        tree = ast.parse(path.read_text(errors="ignore"))
    except (SyntaxError, ValueError):
        return
    for node in ast.walk(tree):
        if isinstance(node, (ast.Module, ast.ClassDef, ast.FunctionDef, ast.AsyncFunctionDef)):
            doc = ast.get_docstring(node)
            if doc:
                yield doc


def prose_lines(doc: str):
    for line in doc.splitlines():
        line = " ".join(line.split())
        if len(line) < 40:
            continue
        if line.startswith((">>>", "...", "#", "--", "==")):
            continue
        letters = sum(c.isalpha() and c.isascii() for c in line)
        spaces = line.count(" ")
        if (letters + spaces) / len(line) < 0.85:
            continue
        yield line


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--target-letters", type=int, default=DEFAULT_TARGET)
    parser.add_argument("--out", default=str(Path(__file__).parent.parent / "assets" / "corpus.txt"))
    args = parser.parse_args()

    seen: set[str] = set()
    kept: list[str] = []
    letters = 0
    for pkg in SOURCES:
        spec = importlib.util.find_spec(pkg)
        if spec is None or not spec.submodule_search_locations:
            print(f"skipping {pkg}: not installed")
            continue
        root = Path(spec.submodule_search_locations[0])
        for py in sorted(root.rglob("*.py")):
            for doc in iter_docstrings(py):
                for line in prose_lines(doc):
                    if line in seen:
                        continue
                    seen.add(line)
                    kept.append(line)
                    letters += sum(c.isalpha() and c.isascii() for c in line)
            if letters >= args.target_letters:
                break
        print(f"{pkg}: {letters:,} letters so far")
        if letters >= args.target_letters:
            break

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(kept) + "\n")
    print(f"wrote {out}: {letters:,} letters in {len(kept):,} lines")


if __name__ == "__main__":
    main()
