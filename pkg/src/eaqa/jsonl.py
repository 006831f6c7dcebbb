"""Small JSONL helpers with line-number error reporting."""

import json
import os
from collections.abc import Iterable, Iterator
from typing import Any

from .errors import DataError


def read_records(path: str) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (1-based line number, parsed object) for every non-blank line."""
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(record, dict):
                raise DataError("record is not a JSON object", line=lineno)
            yield lineno, record


def dumps(record: dict[str, Any]) -> str:
    # Key order is the caller's insertion order; keep it so output is byte-stable.
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def write_records(path: str, records: Iterable[dict[str, Any]]) -> None:
    """Write records atomically (write-then-rename)."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(dumps(record))
            handle.write("\n")
    os.replace(tmp, path)
