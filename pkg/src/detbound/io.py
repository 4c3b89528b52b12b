"""JSON/CSV file formats.

behavior file:   {"n", "m", "pA": [...], "pB": [...], "pAB": [[...], ...]}
inequality file: {"n", "m", "hA": [...], "hB": [...], "hAB": [[...], ...]}
counts file:     {"n", "m", "nA", "nB", "nAB", "trialsPerContext"}

``pAB``/``hAB``/``nAB`` are n rows of m entries.  NaN and infinities are
rejected on both read and write.  Writes are atomic (temp file + rename).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .scenario import BehaviorVector, BellInequality, CountRecord, Scenario


class FormatError(ValueError):
    pass


def _reject_constant(name):
    raise FormatError(f"non-finite number {name} is not allowed")


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps(obj))


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh, parse_constant=_reject_constant)
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data


def _require(data: dict, keys, what: str):
    missing = [k for k in keys if k not in data]
    if missing:
        raise FormatError(f"{what} file is missing keys {missing}; expected {list(keys)}")


def _numbers(values, length: int, what: str) -> list:
    if not isinstance(values, list) or len(values) != length:
        raise FormatError(f"{what} must be a list of {length} numbers")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise FormatError(f"{what} contains a non-numeric or non-finite entry: {v!r}")
    return values


def _grid(values, n: int, m: int, what: str) -> list:
    if not isinstance(values, list) or len(values) != n:
        raise FormatError(f"{what} must have {n} rows")
    return [_numbers(row, m, f"{what} row {i + 1}") for i, row in enumerate(values)]


def _scenario(data: dict) -> Scenario:
    try:
        return Scenario(int(data["n"]), int(data["m"]))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad scenario: {exc}") from None


# -- behavior --------------------------------------------------------------

def behavior_to_dict(b: BehaviorVector) -> dict:
    return {
        "n": b.scenario.n,
        "m": b.scenario.m,
        "pA": b.pA.tolist(),
        "pB": b.pB.tolist(),
        "pAB": b.pAB.tolist(),
    }


def behavior_from_dict(data: dict) -> BehaviorVector:
    _require(data, ("n", "m", "pA", "pB", "pAB"), "behavior")
    sc = _scenario(data)
    pA = _numbers(data["pA"], sc.n, "pA")
    pB = _numbers(data["pB"], sc.m, "pB")
    pAB = _grid(data["pAB"], sc.n, sc.m, "pAB")
    try:
        return BehaviorVector(pA, pB, pAB)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def read_behavior(path) -> BehaviorVector:
    return behavior_from_dict(read_json(path))


def write_behavior(path, b: BehaviorVector) -> None:
    write_json(path, behavior_to_dict(b))


# -- inequality -------------------------------------------------------------

def inequality_to_dict(ineq: BellInequality) -> dict:
    def clean(arr):
        # integer coefficients stay integers in the file
        out = arr.tolist()
        if np.all(arr == np.round(arr)):
            out = np.round(arr).astype(int).tolist()
        return out

    return {
        "n": ineq.scenario.n,
        "m": ineq.scenario.m,
        "hA": clean(ineq.hA),
        "hB": clean(ineq.hB),
        "hAB": clean(ineq.hAB),
    }


def inequality_from_dict(data: dict) -> BellInequality:
    _require(data, ("n", "m", "hA", "hB", "hAB"), "inequality")
    sc = _scenario(data)
    return BellInequality(
        _numbers(data["hA"], sc.n, "hA"),
        _numbers(data["hB"], sc.m, "hB"),
        _grid(data["hAB"], sc.n, sc.m, "hAB"),
    )


def read_inequality(path) -> BellInequality:
    return inequality_from_dict(read_json(path))


def write_inequality(path, ineq: BellInequality) -> None:
    write_json(path, inequality_to_dict(ineq))


# -- counts ------------------------------------------------------------------

def counts_to_dict(c: CountRecord) -> dict:
    return {
        "n": c.scenario.n,
        "m": c.scenario.m,
        "nA": list(c.nA),
        "nB": list(c.nB),
        "nAB": [list(row) for row in c.nAB],
        "trialsPerContext": c.trials_per_context,
    }


def counts_from_dict(data: dict) -> CountRecord:
    _require(data, ("n", "m", "nA", "nB", "nAB", "trialsPerContext"), "counts")
    sc = _scenario(data)
    nA = _numbers(data["nA"], sc.n, "nA")
    nB = _numbers(data["nB"], sc.m, "nB")
    nAB = _grid(data["nAB"], sc.n, sc.m, "nAB")
    for v in nA + nB + sum(nAB, []) + [data["trialsPerContext"]]:
        if isinstance(v, bool) or not isinstance(v, int):
            raise FormatError(f"counts must be integers, got {v!r}")
    try:
        return CountRecord(tuple(nA), tuple(nB), tuple(map(tuple, nAB)), data["trialsPerContext"])
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def read_counts(path) -> CountRecord:
    return counts_from_dict(read_json(path))


def write_counts(path, c: CountRecord) -> None:
    write_json(path, counts_to_dict(c))


# -- curves ------------------------------------------------------------------

CURVE_HEADER = ("known_eta", "bound", "q")


def curve_to_csv(points) -> str:
    """Unreachable points (bound None) get an empty bound field."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for p in points:
        w.writerow([repr(p.known_eta), "" if p.bound is None else repr(p.bound), repr(p.q)])
    return buf.getvalue()


def write_curve(path, points) -> None:
    atomic_write_text(path, curve_to_csv(points))


def read_curve(path) -> list[tuple[float, float | None, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CURVE_HEADER:
            raise FormatError(f"unexpected curve header {header}")
        return [(float(k), float(b) if b else None, float(q)) for k, b, q in reader]
