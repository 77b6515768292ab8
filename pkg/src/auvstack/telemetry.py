"""Telemetry records: one JSON object per control tick, line-delimited.

The stream is schema-versioned and written with sorted keys and compact
separators, so identical runs produce byte-identical logs. Floats are emitted
with Python repr semantics (shortest round-trip), never wall-clock derived.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


def encode(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class TelemetryWriter:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")

    def write(self, record: dict):
        self._fh.write(encode(record))
        self._fh.write("\n")

    def close(self):
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_log(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
