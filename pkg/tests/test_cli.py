import json

import numpy as np
import pytest

from metawig import cli
from metawig import engine as en
from metawig import io
from metawig import symplectic as sp


@pytest.fixture
def files(tmp_path):
    g = en.Grid(32)
    io.write_signal(tmp_path / "g.csv", en.gaussian(g))
    io.write_signal(tmp_path / "f.csv", en.gaussian(g, center=0.2))
    io.write_matrix(tmp_path / "half.json", sp.A_tau(0.5))
    io.write_matrix(tmp_path / "st.json", sp.A_ST())
    (tmp_path / "nons.json").write_text('{"half_dim": 1, "rows": [[1, 1], [0, 2]]}')
    (tmp_path / "bad.json").write_text('{"rows": [')
    return tmp_path


def test_classify_wigner(files, capsys):
    assert cli.main(["classify", str(files / "half.json")]) == 0
    c = json.loads(capsys.readouterr().out)["classification"]
    assert c["is_covariant"] and c["is_shift_invertible"] and c["is_wigner_decomposable"]
    assert np.max(np.abs(c["cohen_matrix"])) == 0


def test_classify_stft(files, capsys):
    assert cli.main(["classify", str(files / "st.json"), "--out", str(files / "c.json")]) == 0
    c = json.loads((files / "c.json").read_text())["classification"]
    assert not c["is_covariant"] and c["is_shift_invertible"]


def test_classify_exit_codes(files):
    assert cli.main(["classify", str(files / "nons.json")]) == 2
    assert cli.main(["classify", str(files / "bad.json")]) == 3
    assert cli.main(["classify"]) == 3


def test_transform_fourier_on_gaussian(files, capsys):
    out = files / "out.csv"
    assert cli.main(["transform", str(files / "g.csv"), "--generator", "J", "--out",
                     str(out)]) == 0
    assert "unitarity" in capsys.readouterr().out
    h, g = io.read_signal(out), io.read_signal(files / "g.csv")
    assert en.align_phase(h.values, g.values)[0] < 1e-10


def test_transform_chirp_keeps_modulus(files):
    out = files / "out.csv"
    assert cli.main(["transform", str(files / "f.csv"), "--generator", "V_C:0.7",
                     "--out", str(out)]) == 0
    assert np.allclose(np.abs(io.read_signal(out).values),
                       np.abs(io.read_signal(files / "f.csv").values))


def test_transform_random_word_norm(files, tmp_path):
    A = sp.random_symplectic(np.random.default_rng(5), 1)
    io.write_matrix(tmp_path / "r.json", A)
    out = tmp_path / "o.csv"
    assert cli.main(["transform", str(files / "f.csv"), str(tmp_path / "r.json"),
                     "--out", str(out), "--tol", "1e-9"]) == 0
    assert io.read_signal(out).norm() == pytest.approx(1.0, abs=1e-9)


def test_transform_errors(files):
    assert cli.main(["transform", str(files / "g.csv"), str(files / "half.json")]) == 2
    assert cli.main(["transform", str(files / "g.csv"), "--generator", "Q"]) == 3
    assert cli.main(["transform", str(files / "g.csv"), "--generator", "D_L"]) == 3
    assert cli.main(["transform", str(files / "g.csv"), "--generator", "J", "--n", "16"]) == 2
    assert cli.main(["transform", str(files / "g.csv")]) == 3


def test_parse_generator():
    M = cli.parse_generator("J,D_L:2,V_C:0.5", 1)
    assert np.allclose(M, sp.J(1) @ sp.D([[2.0]]) @ sp.V([[0.5]]))
    assert np.allclose(cli.parse_generator("A_tau:0.3", 2), sp.A_tau(0.3))
    with pytest.raises(sp.DimensionError):
        cli.parse_generator("A_ST", 1)


def test_distribution_wigner_closed_form(tmp_path, capsys):
    g = en.Grid(64)
    io.write_signal(tmp_path / "g.csv", en.gaussian(g))
    out = tmp_path / "w.csv"
    assert cli.main(["distribution", str(tmp_path / "g.csv"), "--generator", "A_tau:0.5",
                     "--path", "word", "--out", str(out)]) == 0
    assert "moyal" in capsys.readouterr().out
    W = io.read_distribution(out)
    X, XI = g.with_dim(2).coords()
    assert en.align_phase(W.values, 2 * np.exp(-2 * np.pi * (X ** 2 + XI ** 2)))[0] < 1e-5
    side = json.loads((tmp_path / "w.json").read_text())
    assert side["moyal_defect"] < 1e-6


def test_distribution_stft_peak(files):
    out = files / "v.csv"
    assert cli.main(["distribution", str(files / "g.csv"), str(files / "g.csv"),
                     "--matrix", str(files / "st.json"), "--out", str(out)]) == 0
    V = np.abs(io.read_distribution(out).values)
    assert np.unravel_index(V.argmax(), V.shape) == (16, 16)


def test_distribution_cap(files, monkeypatch):
    monkeypatch.setenv("METAWIG_CAP", "64")
    assert cli.main(["distribution", str(files / "g.csv"), "--matrix",
                     str(files / "half.json"), "--path", "dense"]) == 4


def test_distribution_wrong_matrix(files):
    io.write_matrix(files / "j.json", sp.J(1))
    assert cli.main(["distribution", str(files / "g.csv"), "--matrix",
                     str(files / "j.json")]) == 2


def test_quantize(files, tmp_path):
    g = en.Grid(8)
    a = ds_symbol(g)
    io.write_distribution(tmp_path / "a.csv", a)
    out = tmp_path / "op.csv"
    assert cli.main(["quantize", str(tmp_path / "a.csv"), "--generator", "A_tau:0.5",
                     "--out", str(out)]) == 0
    assert cli.main(["quantize", str(tmp_path / "a.csv"), "--weyl"]) == 0
    assert out.read_text().startswith("row,col,re,im")


def ds_symbol(g):
    from metawig import quantization as qz
    return qz.symbol_from_function(lambda X, XI: np.exp(-np.pi * (X[0] ** 2 + XI[0] ** 2)), g)


def test_deterministic_outputs(files, tmp_path):
    for k in (1, 2):
        cli.main(["distribution", str(files / "f.csv"), str(files / "g.csv"),
                  "--generator", "A_tau:0.3", "--out", str(tmp_path / f"w{k}.csv")])
        cli.main(["verify", "--suite", "core", "--seed", "4",
                  "--out", str(tmp_path / f"r{k}.json")])
    assert (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w2.csv").read_bytes()
    assert (tmp_path / "w1.json").read_bytes() == (tmp_path / "w2.json").read_bytes()
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()


def test_verify_report(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--suite", "engine", "--seed", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["seed"] == 2 and rep["passed"]
    assert all("margin" in c or c.get("timing") for c in rep["checks"])


def test_verify_bad_suite():
    assert cli.main(["verify", "--suite", "nope"]) == 3
