import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metawig import distributions as ds
from metawig import engine as en
from metawig import io
from metawig import symplectic as sp


@given(seed=st.integers(0, 10 ** 6), dim=st.sampled_from([1, 2]))
def test_signal_roundtrip(tmp_path_factory, seed, dim):
    rng = np.random.default_rng(seed)
    g = en.Grid(8, dim)
    f = en.Signal(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    path = tmp_path_factory.mktemp("io") / "f.csv"
    io.write_signal(path, f)
    back = io.read_signal(path)
    assert back.grid == g and np.array_equal(back.values, f.values)


def test_signal_header(tmp_path):
    io.write_signal(tmp_path / "f.csv", en.gaussian(en.Grid(4)))
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "index,re,im"


def test_distribution_roundtrip(tmp_path):
    g = en.Grid(8)
    W = ds.wigner(en.gaussian(g, center=0.2))
    io.write_distribution(tmp_path / "w.csv", W, {"note": "x"})
    back = io.read_distribution(tmp_path / "w.csv")
    assert np.array_equal(back.values, W.values)
    side = json.loads((tmp_path / "w.json").read_text())
    assert side["note"] == "x" and side["grid"]["N"] == 8
    assert (tmp_path / "w.csv").read_text().startswith("ix,ixi,re,im")


def test_matrix_roundtrip(tmp_path):
    io.write_matrix(tmp_path / "a.json", sp.A_ST())
    assert np.array_equal(io.read_matrix(tmp_path / "a.json"), sp.A_ST())


@pytest.mark.parametrize("text", ["", "index,re,im\n0,1\n", "index,re,im\n0,a,1\n",
                                  "foo,bar\n0,1\n", "index,re,im\n0,1,0\n0,2,0\n",
                                  "index,re,im\n0,1,0\n1,1,0\n2,1,0\n"])
def test_malformed_signal(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(io.FormatError):
        io.read_signal(p)


def test_missing_file(tmp_path):
    with pytest.raises(io.FormatError):
        io.read_signal(tmp_path / "nope.csv")


@pytest.mark.parametrize("text", ["{", '{"rows": [[1]]}', '[1, 2]'])
def test_malformed_matrix(tmp_path, text):
    p = tmp_path / "m.json"
    p.write_text(text)
    with pytest.raises(io.FormatError):
        io.read_matrix(p)


def test_atomic_write_leaves_no_temp(tmp_path):
    io.atomic_write(tmp_path / "a.txt", "hello")
    io.atomic_write(tmp_path / "a.txt", "world")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "world"


def test_json_numpy_types():
    s = io.dumps_json({"a": np.arange(3), "b": np.float64(1.5), "c": np.bool_(True)})
    assert json.loads(s) == {"a": [0, 1, 2], "b": 1.5, "c": True}
