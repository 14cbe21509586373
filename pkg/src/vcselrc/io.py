"""Deterministic result serialization: provenance, atomic JSON/CSV writers.

Every emitted file embeds a provenance block (hash of the resolved
config, the seed, the tool version) and nothing time- or host-dependent,
so a rerun from the same (config, seed) is byte-identical.  Files are
written to a temporary sibling and renamed into place, so a failed run
never leaves a partial file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path

from . import __version__


class IOError_(ValueError):
    """Serialization failure."""


def canonical_json(payload) -> str:
    """Key-sorted, whitespace-free JSON; rejects NaN/Infinity."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: dict) -> str:
    """Stable identity of a resolved config: sha256 over its canonical JSON."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def provenance_block(config: dict, seed: int) -> dict:
    return {"config_sha256": config_hash(config), "seed": seed, "version": __version__}


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload: dict, provenance: dict) -> Path:
    """Pretty, key-sorted JSON report with the provenance embedded."""
    path = Path(path)
    body = dict(payload)
    body["provenance"] = provenance
    text = json.dumps(body, sort_keys=True, indent=2, allow_nan=False) + "\n"
    _atomic_write_text(path, text)
    return path


def write_csv(path, header: list[str], rows, provenance: dict) -> Path:
    """CSV table: provenance comment, header row, LF endings, '.' decimals.

    Cells are rendered with repr-shortest float formatting (str()); the
    header carries the units in the column names.
    """
    path = Path(path)
    if not header:
        raise IOError_("CSV header must not be empty")
    out = [
        "# provenance: config_sha256={config_sha256} seed={seed} version={version}".format(
            **provenance
        )
    ]
    buf = _CsvBuffer()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    n_cols = len(header)
    for row in rows:
        row = list(row)
        if len(row) != n_cols:
            raise IOError_(f"row width {len(row)} does not match header width {n_cols}")
        writer.writerow(row)
    out.append(buf.text())
    _atomic_write_text(path, "\n".join(out))
    return path


class _CsvBuffer:
    def __init__(self) -> None:
        self._parts: list[str] = []

    def write(self, s: str) -> None:
        self._parts.append(s)

    def text(self) -> str:
        return "".join(self._parts)


def rows_from_dicts(dicts, fields: list[str]):
    """Project a list of mappings onto ordered field tuples for write_csv."""
    for d in dicts:
        missing = [f for f in fields if f not in d]
        if missing:
            raise IOError_(f"row is missing fields {missing}")
        yield [d[f] for f in fields]
