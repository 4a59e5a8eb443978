"""File formats: CSV tables, ground-truth / prediction JSONL, reports.

On-disk conventions
-------------------
* Tables are UTF-8 CSV with a header row naming the attributes.
* Ground truth is JSONL: one tuple per line, as a JSON list of ``"source:row"``
  strings.
* Predicted tuples are JSONL: ``{"members": ["source:row", ...]}`` per line,
  members sorted, lines sorted — equal results diff as equal files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from tuplematch.errors import TruthOverlap
from tuplematch.model import EntityRef

__all__ = [
    "read_table_csv",
    "write_table_csv",
    "read_truth_jsonl",
    "write_truth_jsonl",
    "read_tuples_jsonl",
    "write_tuples_jsonl",
    "write_json",
]


def read_table_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Read one table; returns ``(header, rows)`` with all values as strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return [], []
        rows = [row for row in reader]
    return header, rows


def write_table_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(header))
        writer.writerows(rows)


def _parse_members(items: Iterable[str], where: str) -> frozenset[EntityRef]:
    members = frozenset(EntityRef.parse(item) for item in items)
    if len(members) < 2:
        raise ValueError(f"{where}: tuples need at least 2 distinct members")
    return members


def read_truth_jsonl(path: str | Path) -> list[frozenset[EntityRef]]:
    """Load ground-truth tuples; rejects refs appearing in two tuples."""
    tuples: list[frozenset[EntityRef]] = []
    seen: set[EntityRef] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if isinstance(data, dict):  # tolerate the prediction shape
                data = data["members"]
            members = _parse_members(data, f"{path}:{lineno}")
            clash = members & seen
            if clash:
                raise TruthOverlap(
                    f"{path}:{lineno}: refs {sorted(str(c) for c in clash)} appear in more than one tuple"
                )
            seen |= members
            tuples.append(members)
    return tuples


def write_truth_jsonl(path: str | Path, tuples: Iterable[Iterable[EntityRef]]) -> None:
    lines = sorted(sorted(members) for members in tuples)
    with open(path, "w", encoding="utf-8") as fh:
        for members in lines:
            fh.write(json.dumps([str(m) for m in members]) + "\n")


def read_tuples_jsonl(path: str | Path) -> list[frozenset[EntityRef]]:
    """Load predicted tuples (``{"members": [...]}`` lines; bare lists also accepted)."""
    tuples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            items = data["members"] if isinstance(data, dict) else data
            tuples.append(_parse_members(items, f"{path}:{lineno}"))
    return tuples


def write_tuples_jsonl(path: str | Path, tuples: Iterable[Iterable[EntityRef]]) -> None:
    """Write predicted tuples, sorted within and across lines."""
    lines = sorted(sorted(members) for members in tuples)
    with open(path, "w", encoding="utf-8") as fh:
        for members in lines:
            fh.write(json.dumps({"members": [str(m) for m in members]}) + "\n")


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
