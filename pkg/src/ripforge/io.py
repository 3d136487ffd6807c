"""On-disk formats for matrices, graphs and planted metadata.

Matrix binary (``.ripm``): magic ``RIPM``, ``n`` and ``p`` as little-endian
uint64, then ``n*p`` little-endian float64 in row-major order. Matrix CSV: a
header line ``n,p`` then ``n`` rows of ``p`` decimals. Graph text: ``m E`` then
``E`` lines ``u v`` with ``u < v``; planted metadata goes in a JSON sidecar.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ripforge.ripcore import as_design

MAGIC = b"RIPM"
_HEADER = struct.Struct("<4sQQ")


class FormatError(ValueError):
    pass


def write_matrix(path, X) -> None:
    X = as_design(X)
    n, p = X.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, p))
        fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_matrix_csv(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, n, p = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    body = data[_HEADER.size:]
    if len(body) != 8 * n * p:
        raise FormatError(f"{path}: expected {n * p} doubles, found {len(body) / 8:g}")
    return as_design(np.frombuffer(body, dtype="<f8").reshape(n, p).astype(np.float64))


def write_matrix_csv(path, X) -> None:
    X = as_design(X)
    n, p = X.shape
    with open(path, "w") as fh:
        fh.write(f"{n},{p}\n")
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty file")
    try:
        n, p = (int(t) for t in lines[0].split(","))
        rows = [[float(t) for t in ln.split(",")] for ln in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if len(rows) != n or any(len(r) != p for r in rows):
        raise FormatError(f"{path}: body does not match header {n},{p}")
    return as_design(np.array(rows, dtype=np.float64).reshape(n, p))


def write_graph(path, adjacency: np.ndarray) -> None:
    m = adjacency.shape[0]
    u, v = np.nonzero(np.triu(adjacency, 1))
    with open(path, "w") as fh:
        fh.write(f"{m} {len(u)}\n")
        fh.write("".join(f"{a} {b}\n" for a, b in zip(u.tolist(), v.tolist())))


def read_graph(path) -> np.ndarray:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 2:
            raise FormatError(f"{path}: header must be 'm E'")
        m, e = int(head[0]), int(head[1])
        edges = np.loadtxt(fh, dtype=np.int64, ndmin=2) if e else np.zeros((0, 2), np.int64)
    if edges.shape != (e, 2):
        raise FormatError(f"{path}: expected {e} edges, found {edges.shape[0]}")
    if e and (edges.min() < 0 or edges.max() >= m or np.any(edges[:, 0] >= edges[:, 1])):
        raise FormatError(f"{path}: edges must satisfy 0 <= u < v < m")
    adj = np.zeros((m, m), dtype=bool)
    adj[edges[:, 0], edges[:, 1]] = True
    adj[edges[:, 1], edges[:, 0]] = True
    return adj


def sidecar_path(graph_path) -> Path:
    return Path(graph_path).with_suffix(".json")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
