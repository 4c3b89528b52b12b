import json

import numpy as np
import pytest

from conftest import tsirelson_behavior
from detbound import io
from detbound.efficiency import CurvePoint
from detbound.scenario import i6522_inequality
from detbound.simulate import sample_counts


def test_behavior_roundtrip(tmp_path):
    P = tsirelson_behavior()
    path = tmp_path / "b.json"
    io.write_behavior(path, P)
    data = json.loads(path.read_text())
    assert set(data) == {"n", "m", "pA", "pB", "pAB"}
    assert np.array_equal(io.read_behavior(path).flat, P.flat)


def test_inequality_roundtrip_keeps_integers(tmp_path):
    path = tmp_path / "i.json"
    io.write_inequality(path, i6522_inequality())
    data = json.loads(path.read_text())
    assert data["hAB"][4] == [6, 6, 0, -6, 6]
    assert all(isinstance(x, int) for x in data["hA"])
    assert np.array_equal(io.read_inequality(path).flat, i6522_inequality().flat)


def test_counts_roundtrip(tmp_path):
    c = sample_counts(tsirelson_behavior(), 500, 1)
    path = tmp_path / "c.json"
    io.write_counts(path, c)
    assert set(json.loads(path.read_text())) == {"n", "m", "nA", "nB", "nAB", "trialsPerContext"}
    assert io.read_counts(path) == c


@pytest.mark.parametrize("text", [
    '{"n": 1, "m": 1, "pA": [NaN], "pB": [0.5], "pAB": [[0.2]]}',
    '{"n": 1, "m": 1, "pA": [Infinity], "pB": [0.5], "pAB": [[0.2]]}',
    '{"n": 1, "m": 1, "pA": [0.5], "pB": [0.5]}',
    '{"n": 2, "m": 1, "pA": [0.5], "pB": [0.5], "pAB": [[0.2]]}',
    '{"n": 1, "m": 1, "pA": ["x"], "pB": [0.5], "pAB": [[0.2]]}',
    '{"n": 1, "m": 1, "pA": [1.5], "pB": [0.5], "pAB": [[0.2]]}',
    '[1, 2]',
])
def test_bad_behavior_files(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(io.FormatError):
        io.read_behavior(path)


def test_counts_must_be_integers():
    data = {"n": 1, "m": 1, "nA": [1.5], "nB": [1], "nAB": [[1]], "trialsPerContext": 4}
    with pytest.raises(io.FormatError):
        io.counts_from_dict(data)


def test_writer_rejects_nan():
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})


def test_curve_csv(tmp_path):
    pts = [CurvePoint(0.7, None, 0.2), CurvePoint(1.0, 0.75, 0.2)]
    text = io.curve_to_csv(pts)
    assert text.splitlines()[0] == "known_eta,bound,q"
    assert text.splitlines()[1] == "0.7,,0.2"
    path = tmp_path / "curve.csv"
    io.write_curve(path, pts)
    assert io.read_curve(path) == [(0.7, None, 0.2), (1.0, 0.75, 0.2)]


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "sub" / "out.json"
    io.write_json(target, {"a": 1})
    io.write_json(target, {"a": 2})
    assert json.loads(target.read_text()) == {"a": 2}
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]
    with pytest.raises(ValueError):
        io.write_json(target, {"a": float("inf")})
    assert json.loads(target.read_text()) == {"a": 2}
