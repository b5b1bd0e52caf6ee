"""Experiment records and their on-disk formats.

``results.jsonl``
    One JSON object per line with keys ``experiment, params, outputs,
    tolerances, seed, schema_version, passed`` (sorted keys, fixed float
    formatting), so identical runs give identical bytes.
``timings.jsonl``
    Same line order, keys ``experiment, index, runtime_ms``.  Wall-clock
    time is kept out of ``results.jsonl`` because it is not reproducible.
``table_<experiment>.csv``
    Flat plot data; the ``run`` column is the record's line index within the
    batch.  Header row first, UTF-8, comma separated, ``.`` decimal
    separator, written with the :mod:`csv` module.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(x: Any) -> Any:
    """Convert numpy scalars/arrays, fractions and tuples to plain JSON types."""
    if isinstance(x, Mapping):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, Fraction):
        return str(x)
    if x is None or isinstance(x, str):
        return x
    if hasattr(x, "as_dict"):
        return to_jsonable(x.as_dict())
    raise TypeError(f"cannot serialize {type(x).__name__}")


@dataclass
class ExperimentRecord:
    experiment: str
    params: dict
    outputs: dict
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    passed: bool | None = None
    runtime_ms: int = 0
    schema_version: int = SCHEMA_VERSION
    table: list[dict] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return to_jsonable(
            {
                "experiment": self.experiment,
                "params": self.params,
                "outputs": self.outputs,
                "tolerances": self.tolerances,
                "seed": self.seed,
                "passed": self.passed,
                "schema_version": self.schema_version,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)


def append_records(out_dir: Path, records: Sequence[ExperimentRecord]) -> None:
    """Append to ``results.jsonl`` and ``timings.jsonl``; rewrite CSV tables."""
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "results.jsonl", "a", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
    with open(out_dir / "timings.jsonl", "a", encoding="utf-8", newline="\n") as fh:
        for i, r in enumerate(records):
            fh.write(json.dumps({"experiment": r.experiment, "index": i, "runtime_ms": r.runtime_ms},
                                sort_keys=True) + "\n")
    tables: dict[str, list[dict]] = {}
    for i, r in enumerate(records):
        if r.table:
            tables.setdefault(r.experiment, []).extend({"run": i, **row} for row in r.table)
    for name, rows in tables.items():
        write_csv(out_dir / f"table_{name}.csv", rows)


def write_csv(path: Path, rows: Iterable[Mapping[str, Any]]) -> None:
    rows = [to_jsonable(r) for r in rows]
    columns: list[str] = []
    for r in rows:
        columns.extend(k for k in r if k not in columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\r\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k)) for k in columns})


def _cell(v: Any) -> Any:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else v


def read_records(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
