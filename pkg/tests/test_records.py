import csv
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from lsentangle.records import ExperimentRecord, append_records, read_records, to_jsonable, write_csv


def test_to_jsonable_handles_numpy_and_fractions():
    out = to_jsonable({"a": np.float64(0.5), "b": np.arange(3), "c": Fraction(1, 3), "d": (1, np.bool_(True)),
                       "e": math.inf})
    assert out == {"a": 0.5, "b": [0, 1, 2], "c": "1/3", "d": [1, True], "e": "inf"}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_record_json_is_canonical():
    a = ExperimentRecord("x", {"b": 1, "a": 2}, {"z": 0.1}, seed=3, runtime_ms=10)
    b = ExperimentRecord("x", {"a": 2, "b": 1}, {"z": 0.1}, seed=3, runtime_ms=99)
    assert a.to_json() == b.to_json()
    d = json.loads(a.to_json())
    assert "runtime_ms" not in d and d["schema_version"] == 1
    assert list(d) == sorted(d)


def test_append_is_append_only(tmp_path):
    rec = ExperimentRecord("x", {}, {"v": 1}, table=[{"k": 1, "v": 0.25}])
    append_records(tmp_path, [rec])
    append_records(tmp_path, [rec, rec])
    assert len(read_records(tmp_path / "results.jsonl")) == 3
    timings = read_records(tmp_path / "timings.jsonl")
    assert [t["index"] for t in timings] == [0, 0, 1]


def test_csv_tables_are_plain_rfc4180(tmp_path):
    recs = [ExperimentRecord("t", {}, {}, table=[{"L": 1, "S": 0.1}]),
            ExperimentRecord("t", {}, {}, table=[{"L": 2, "S": 0.2, "note": "a,b"}])]
    append_records(tmp_path, recs)
    raw = (tmp_path / "table_t.csv").read_bytes()
    assert raw.startswith(b"run,L,S,note\r\n")
    rows = list(csv.DictReader(open(tmp_path / "table_t.csv", encoding="utf-8", newline="")))
    assert rows[1] == {"run": "1", "L": "2", "S": "0.2", "note": "a,b"}
    assert rows[0]["note"] == ""


def test_write_csv_serializes_nested_values(tmp_path):
    write_csv(tmp_path / "x.csv", [{"a": [1, 2], "b": None}])
    assert (tmp_path / "x.csv").read_text(encoding="utf-8").splitlines()[1] == '"[1, 2]",'
