"""Deterministic CSV/JSON writers and the run manifest."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import RunConfig, dumps

PACKAGE_DIR = Path(__file__).resolve().parent


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class CsvWriter:
    """Row-at-a-time CSV writer: '.' decimals, LF endings, header row."""

    def __init__(self, path: Path, header: Sequence[str]):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(header)

    def row(self, values: Iterable):
        self._w.writerow([fmt(v) for v in values])

    def rows(self, columns: Sequence[np.ndarray]):
        for values in zip(*columns):
            self.row(values)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(path: Path, header: Sequence[str], columns: Sequence) -> Path:
    with CsvWriter(path, header) as w:
        w.rows(columns)
    return Path(path)


def jsonable(obj):
    """Plain-JSON view: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_json(path: Path, obj) -> Path:
    Path(path).write_text(dumps(jsonable(obj)), encoding="utf-8")
    return Path(path)


def code_version() -> str:
    """SHA-256 over the package's source files, in name order."""
    h = hashlib.sha256()
    for src in sorted(PACKAGE_DIR.glob("*.py")):
        h.update(src.name.encode())
        h.update(src.read_bytes())
    return h.hexdigest()


def utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


class Manifest:
    """Collects artifacts and check outcomes; written last, or on abort."""

    def __init__(self, out_dir: Path, cfg: RunConfig, command: str):
        self.out_dir = Path(out_dir)
        self.cfg = cfg
        self.command = command
        self.started = utc_now()
        self.artifacts: list[Path] = []
        self.checks: dict[str, bool] = {}
        self.details: dict = {}
        self.error: str | None = None

    def add(self, path: Path) -> Path:
        self.artifacts.append(Path(path))
        return Path(path)

    def check(self, name: str, passed: bool, **detail):
        self.checks[name] = bool(passed)
        if detail:
            self.details[name] = detail

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def write(self, status: str) -> Path:
        existing = [p for p in self.artifacts if p.exists()]
        doc = {
            "command": self.command,
            "config_hash": self.cfg.hash(),
            "config": self.cfg.to_dict(),
            "code_version": code_version(),
            "started": self.started,
            "finished": utc_now(),
            "status": status,
            "error": self.error,
            "artifacts": sorted(p.relative_to(self.out_dir).as_posix() for p in existing),
            "verification": {"checks": self.checks, "details": self.details,
                             "passed": self.passed},
        }
        return write_json(self.out_dir / "manifest.json", doc)


TIMESTAMP_FIELDS = ("started", "finished")
