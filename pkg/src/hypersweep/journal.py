"""Append-only JSONL journal of evaluations: one header line, then one record per line.

Crash tolerance comes from the format: a partial trailing line (the only
damage an append-only writer can suffer) is dropped on load with a warning
flag, and every complete record before it is recovered.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .objective import EvaluationRecord


class JournalError(Exception):
    """Missing/corrupt journal file or a record that does not belong to it."""


@dataclass
class JournalHeader:
    run_id: str
    space_digest: str
    method: str
    seed: int
    params: dict[str, Any] = field(default_factory=dict)
    created_at: str | None = None

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": "header",
            "run_id": self.run_id,
            "space_digest": self.space_digest,
            "method": self.method,
            "seed": self.seed,
            "params": self.params,
        }
        if self.created_at is not None:
            out["created_at"] = self.created_at
        return out

    @classmethod
    def from_json_dict(cls, doc: dict[str, Any]) -> "JournalHeader":
        return cls(
            run_id=doc["run_id"],
            space_digest=doc["space_digest"],
            method=doc.get("method", "unknown"),
            seed=int(doc.get("seed", 0)),
            params=dict(doc.get("params", {})),
            created_at=doc.get("created_at"),
        )


def new_header(
    space_digest: str, method: str, seed: int,
    params: dict[str, Any] | None = None, deterministic: bool = False,
) -> JournalHeader:
    return JournalHeader(
        run_id=uuid.uuid4().hex if not deterministic else f"{method}-{seed}",
        space_digest=space_digest,
        method=method,
        seed=seed,
        params=params or {},
        created_at=None if deterministic else datetime.now(timezone.utc).isoformat(),
    )


@dataclass
class LoadedJournal:
    header: JournalHeader
    records: list[EvaluationRecord]
    truncated: bool = False

    @property
    def key_cache(self) -> dict[str, EvaluationRecord]:
        """Canonical-key dedup cache; duplicate keys resolve to the last record."""
        return {rec.canonical_key: rec for rec in self.records}

    def ok_records(self) -> list[EvaluationRecord]:
        return [r for r in self.records if r.ok]


class RunJournal:
    """Single-writer append-only journal. Every append is flushed before returning."""

    def __init__(self, path: str | Path, header: JournalHeader, _next_seq: int = 0, _existing: bool = False):
        self.path = Path(path)
        self.header = header
        self._seq = _next_seq
        if not _existing:
            self._fh = self.path.open("w", encoding="utf-8")
            self._write_line(header.to_json_dict())
        else:
            self._fh = self.path.open("a", encoding="utf-8")

    @classmethod
    def create(cls, path: str | Path, header: JournalHeader) -> "RunJournal":
        return cls(path, header)

    @classmethod
    def resume(cls, path: str | Path) -> tuple["RunJournal", LoadedJournal]:
        loaded = load_journal(path)
        next_seq = (loaded.records[-1].sequence + 1) if loaded.records else 0
        journal = cls(path, loaded.header, _next_seq=next_seq, _existing=True)
        return journal, loaded

    def _write_line(self, doc: dict[str, Any]) -> None:
        self._fh.write(json.dumps(doc, sort_keys=True) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def append(self, record: EvaluationRecord) -> int:
        if record.space_digest is not None and record.space_digest != self.header.space_digest:
            raise JournalError(
                f"record space digest {record.space_digest[:12]} does not match "
                f"journal {self.header.space_digest[:12]}"
            )
        record.sequence = self._seq
        self._seq += 1
        self._write_line(record.to_json_dict())
        return record.sequence

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self) -> "RunJournal":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def load_journal(path: str | Path) -> LoadedJournal:
    path = Path(path)
    if not path.exists():
        raise JournalError(f"journal not found: {path}")
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    truncated = False
    if lines and lines[-1] == "":
        lines.pop()
    elif lines:
        # file did not end with a newline: the last line is a crash artifact
        lines.pop()
        truncated = True
    if not lines:
        raise JournalError(f"journal {path} has no header line")
    try:
        head_doc = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise JournalError(f"corrupt journal header: {exc}") from exc
    if head_doc.get("kind") != "header":
        raise JournalError("first journal line is not a header")
    header = JournalHeader.from_json_dict(head_doc)
    records: list[EvaluationRecord] = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError:
            # only a trailing partial line is tolerated
            if i == len(lines):
                truncated = True
                break
            raise JournalError(f"corrupt journal line {i}")
        if doc.get("kind") != "eval":
            continue
        rec = EvaluationRecord.from_json_dict(doc)
        rec.space_digest = header.space_digest
        records.append(rec)
    return LoadedJournal(header=header, records=records, truncated=truncated)
