import json

import numpy as np
import pytest

from stokesdrop import io, shapes
from stokesdrop.curve import CurveError


def test_curve_roundtrip_is_exact(tmp_path):
    b = shapes.annulus(32, 0.5, 1.5)
    p = io.write_curve_csv(tmp_path / "a.csv", b)
    back = io.read_curve_csv(p)
    assert len(back.components) == 2
    np.testing.assert_array_equal(back.nodes, b.nodes)


def test_reader_orients_reversed_hole(tmp_path):
    b = shapes.annulus(32, 0.5, 1.5)
    outer, hole = b.components
    text = "x,y\n" + "".join(f"{float(x)!r},{float(y)!r}\n" for x, y in outer.nodes)
    text += "\nx,y\n" + "".join(f"{float(x)!r},{float(y)!r}\n" for x, y in hole.nodes[::-1])
    (tmp_path / "r.csv").write_text(text)
    back = io.read_curve_csv(tmp_path / "r.csv")
    assert back.components[1].is_hole and back.components[1].signed_area < 0


@pytest.mark.parametrize("text", [
    "",
    "a,b\n0,0\n1,0\n0,1\n",
    "x,y\n0,0\n1,0\n",
    "x,y\n0,0\n1,nan\n0,1\n",
    "x,y\n0,0\n1,zero\n0,1\n",
])
def test_malformed_tables_rejected(tmp_path, text):
    (tmp_path / "bad.csv").write_text(text)
    with pytest.raises(CurveError):
        io.read_curve_csv(tmp_path / "bad.csv")


def test_snapshot_roundtrip(tmp_path):
    b = shapes.ellipse(64, 2.0, 1.0)
    v = np.sin(np.arange(64))
    io.write_snapshot_csv(tmp_path / "s.csv", b, b.curvature, v)
    back, blocks = io.read_snapshot_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(back.nodes, b.nodes)
    np.testing.assert_array_equal(blocks[0]["kappa"], b.curvature)
    np.testing.assert_array_equal(blocks[0]["v"], v)


def test_jsonable_handles_numpy_and_nonfinite():
    obj = {"a": np.float64(1.5), "b": np.array([1, 2]), "c": float("inf"), "d": np.bool_(True),
           "e": (np.int32(3), float("nan"))}
    assert json.loads(io.dumps(obj)) == {"a": 1.5, "b": [1, 2], "c": None, "d": True, "e": [3, None]}


def test_jsonl_roundtrip(tmp_path):
    with io.JsonlWriter(tmp_path / "r.jsonl") as w:
        w.write({"t": 0.0, "x": np.float32(2)})
        w.write({"t": 1.0})
    assert io.read_jsonl(tmp_path / "r.jsonl") == [{"t": 0.0, "x": 2.0}, {"t": 1.0}]
