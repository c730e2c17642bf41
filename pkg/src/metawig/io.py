"""CSV and JSON readers and writers.

Signals are CSV with header ``index,re,im`` (``i0,i1,...,re,im`` for several
axes); distributions use ``ix,ixi,re,im`` (``ix0,..,ixi0,..`` for ``d > 1``) plus a
JSON sidecar.  Every write goes to a temporary file that is renamed into place.
"""
from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import distributions as ds
from . import engine as en
from . import symplectic as sp


class FormatError(ValueError):
    pass


def atomic_write(path, text: str) -> None:
    path = Path(path)
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


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, obj) -> None:
    atomic_write(path, dumps_json(obj))


def _fmt(x: float) -> str:
    return repr(float(x))


def _array_csv(values: np.ndarray, header: list) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for idx in np.ndindex(values.shape):
        v = values[idx]
        w.writerow([*idx, _fmt(v.real), _fmt(v.imag)])
    return buf.getvalue()


def _read_array_csv(path, ncols_index: int | None = None) -> tuple[list, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if header[-2:] != ["re", "im"] or len(header) < 3:
        raise FormatError(f"{path}: header must end with re,im, got {header}")
    k = len(header) - 2
    if ncols_index is not None and k != ncols_index:
        raise FormatError(f"{path}: expected {ncols_index} index columns, got {k}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != k + 2:
        raise FormatError(f"{path}: ragged rows")
    return header, data


def _to_grid_array(data: np.ndarray, k: int, path) -> tuple[int, np.ndarray]:
    idx = data[:, :k]
    if np.any(idx != np.round(idx)) or np.any(idx < 0):
        raise FormatError(f"{path}: indices must be non-negative integers")
    idx = idx.astype(int)
    n = len(data)
    N = int(round(n ** (1.0 / k)))
    if N ** k != n:
        raise FormatError(f"{path}: {n} rows do not form an N^{k} grid")
    vals = np.zeros((N,) * k, dtype=complex)
    seen = np.zeros((N,) * k, dtype=bool)
    for row, i in zip(data, idx):
        t = tuple(i)
        if max(t) >= N or seen[t]:
            raise FormatError(f"{path}: index {t} out of range or repeated")
        seen[t] = True
        vals[t] = row[k] + 1j * row[k + 1]
    return N, vals


# ------------------------------------------------------------------ signals

def signal_csv(f: en.Signal) -> str:
    d = f.grid.dim
    header = ["index"] if d == 1 else [f"i{k}" for k in range(d)]
    return _array_csv(f.values, header + ["re", "im"])


def write_signal(path, f: en.Signal) -> None:
    atomic_write(path, signal_csv(f))


def read_signal(path) -> en.Signal:
    header, data = _read_array_csv(path)
    k = len(header) - 2
    N, vals = _to_grid_array(data, k, path)
    try:
        return en.Signal(en.Grid(N, k), vals)
    except en.EngineError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ------------------------------------------------------------ distributions

def distribution_csv(W: ds.Distribution) -> str:
    d = W.grid.dim // 2
    if d == 1:
        header = ["ix", "ixi"]
    else:
        header = [f"ix{k}" for k in range(d)] + [f"ixi{k}" for k in range(d)]
    return _array_csv(W.values, header + ["re", "im"])


def write_distribution(path, W: ds.Distribution, extra: dict | None = None) -> None:
    side = {"grid": W.grid.to_dict(), "provenance": W.provenance}
    if extra:
        side.update(extra)
    atomic_write(path, distribution_csv(W))
    write_json(sidecar(path), side)


def read_distribution(path) -> ds.Distribution:
    header, data = _read_array_csv(path)
    k = len(header) - 2
    N, vals = _to_grid_array(data, k, path)
    prov = {}
    side = sidecar(path)
    if side.exists():
        prov = json.loads(side.read_text()).get("provenance", {})
    return ds.Distribution(en.Grid(N, k), vals, prov)


def sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".json")


# ---------------------------------------------------------------- operators

def write_operator(path, matrix: np.ndarray, meta: dict) -> None:
    atomic_write(path, _array_csv(np.asarray(matrix, dtype=complex), ["row", "col", "re", "im"]))
    write_json(sidecar(path), meta)


# ------------------------------------------------------------------ matrices

def read_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        return sp.matrix_from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, sp.DimensionError):
            raise
        raise FormatError(f"{path}: malformed matrix JSON ({exc})") from exc


def write_matrix(path, M) -> None:
    atomic_write(path, sp.matrix_to_json(M) + "\n")
