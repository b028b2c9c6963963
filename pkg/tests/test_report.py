import json
import math

import numpy as np

from finsler_lab.report import dumps_csv, dumps_json, flatten, format_float


def test_float_format_round_trips():
    for v in (0.1, 1 / 3, -2.5e-17, 1e300, 7.25):
        assert float(format_float(v)) == v
    assert format_float(math.nan) == "NaN"
    assert format_float(-math.inf) == "-Infinity"


def test_json_layout_and_values():
    text = dumps_json({"b": np.float64(0.1), "a": [np.int64(1), 2.5], "m": np.eye(2), "z": math.inf, "ok": np.bool_(True)})
    d = json.loads(text)
    assert d == {"b": 0.1, "a": [1, 2.5], "m": [[1.0, 0.0], [0.0, 1.0]], "z": "Infinity", "ok": True}
    assert list(d) == ["b", "a", "m", "z", "ok"]
    assert text.endswith("}\n")


def test_csv_and_flatten():
    text = dumps_csv(["k", "v"], [("x", 1 / 3), ("y", np.float64(2.0))])
    assert text == "k,v\nx,0.33333333333333331\ny,2\n"
    assert flatten({"g": [[1, 2], [3, 4]], "s": {"t": 1}}) == [
        ("g[0][0]", 1), ("g[0][1]", 2), ("g[1][0]", 3), ("g[1][1]", 4), ("s.t", 1)
    ]
