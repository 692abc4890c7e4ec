"""On-disk formats: edge lists, feature matrices, label/split files,
parameter checkpoints and metrics JSON."""

from __future__ import annotations

import csv
import io as _io
import json
import struct
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph import UNLABELED, Graph, GraphError

SPLITS = ("train", "val", "test", "none")
CHECKPOINT_MAGIC = b"HWGNNCKP"
CHECKPOINT_VERSION = 1


class DataError(ValueError):
    """Malformed or missing input data."""


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except FileNotFoundError as exc:
        raise DataError(f"file not found: {path}") from exc
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def read_edge_list(path) -> np.ndarray:
    """``u,v`` per line, 0-based ids; ``#`` starts a comment."""
    pairs = []
    for lineno, line in _content_lines(_read_text(path)):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'u,v', got {line!r}")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-integer node id in {line!r}") from exc
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def write_edge_list(path, edges: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write("# u,v (0-based, undirected)\n")
        for u, v in np.asarray(edges):
            fh.write(f"{int(u)},{int(v)}\n")


def read_features(path) -> np.ndarray:
    """Comma-separated text matrix, or little-endian f32 binary when the
    file ends in ``.bin`` (8-byte header: u32 n, u32 d0)."""
    path = Path(path)
    if path.suffix == ".bin":
        return read_features_binary(path)
    rows = []
    width = None
    for lineno, line in _content_lines(_read_text(path)):
        try:
            row = [float(x) for x in line.split(",")]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric feature value") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty feature file")
    return np.asarray(rows, dtype=np.float64)


def write_features(path, X: np.ndarray) -> None:
    path = Path(path)
    if path.suffix == ".bin":
        write_features_binary(path, X)
        return
    with open(path, "w") as fh:
        for row in np.asarray(X, dtype=np.float64):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_features_binary(path) -> np.ndarray:
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise DataError(f"file not found: {path}") from exc
    if len(blob) < 8:
        raise DataError(f"{path}: truncated header")
    n, d = struct.unpack("<II", blob[:8])
    expected = 8 + 4 * n * d
    if len(blob) != expected:
        raise DataError(f"{path}: expected {expected} bytes for {n}x{d}, got {len(blob)}")
    return np.frombuffer(blob, dtype="<f4", offset=8).reshape(n, d).astype(np.float64)


def write_features_binary(path, X: np.ndarray) -> None:
    X = np.asarray(X, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", X.shape[0], X.shape[1]))
        fh.write(np.ascontiguousarray(X).tobytes())


def read_labels(path, n: int):
    """``node_id,label,split`` lines -> (labels, train, val, test)."""
    labels = np.full(n, UNLABELED, dtype=np.int64)
    masks = {s: np.zeros(n, dtype=bool) for s in SPLITS}
    seen = set()
    for lineno, line in _content_lines(_read_text(path)):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise DataError(f"{path}:{lineno}: expected 'node_id,label,split'")
        try:
            node = int(parts[0])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: bad node id {parts[0]!r}") from exc
        if not 0 <= node < n:
            raise DataError(f"{path}:{lineno}: node id {node} out of range")
        if node in seen:
            raise DataError(f"{path}:{lineno}: duplicate node id {node}")
        seen.add(node)
        label, split = parts[1], parts[2]
        if split not in SPLITS:
            raise DataError(f"{path}:{lineno}: split must be one of {SPLITS}")
        if label in ("", "-1", "none"):
            if split != "none":
                raise DataError(f"{path}:{lineno}: unlabeled node placed in {split}")
            continue
        if label not in ("0", "1"):
            raise DataError(f"{path}:{lineno}: label must be 0 or 1")
        labels[node] = int(label)
        masks[split][node] = True
    return labels, masks["train"], masks["val"], masks["test"]


def write_labels(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write("# node_id,label,split\n")
        for i in range(g.n):
            split = "none"
            for name in ("train", "val", "test"):
                m = getattr(g, f"{name}_mask")
                if m is not None and m[i]:
                    split = name
            lab = g.labels[i] if g.labels is not None else UNLABELED
            fh.write(f"{i},{'-1' if lab == UNLABELED else int(lab)},{split}\n")


def load_graph(edges_path, features_path, labels_path: Optional[str] = None) -> Graph:
    edges = read_edge_list(edges_path)
    X = read_features(features_path)
    n = X.shape[0]
    labels = train = val = test = None
    if labels_path is not None:
        labels, train, val, test = read_labels(labels_path, n)
    try:
        return Graph(n, edges, X, labels, train, val, test)
    except GraphError as exc:
        raise DataError(str(exc)) from exc


def save_graph(directory, g: Graph, binary_features: bool = False) -> dict:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {
        "edges": str(d / "edges.csv"),
        "features": str(d / ("features.bin" if binary_features else "features.csv")),
        "labels": str(d / "labels.csv"),
    }
    write_edge_list(paths["edges"], g.edges)
    write_features(paths["features"], g.features)
    write_labels(paths["labels"], g)
    return paths


# -- checkpoints ------------------------------------------------------------
#
# layout (little endian):
#   magic "HWGNNCKP" | u32 version | u32 entry count
#   per entry: u16 name length | utf-8 name | u32 ndim | u32 dims[ndim]
#   then all payloads as f64 in entry order


def write_checkpoint(path, params: dict) -> None:
    header = _io.BytesIO()
    header.write(CHECKPOINT_MAGIC)
    header.write(struct.pack("<II", CHECKPOINT_VERSION, len(params)))
    payload = _io.BytesIO()
    for name, value in params.items():
        arr = np.asarray(value, dtype="<f8")
        raw = name.encode("utf-8")
        header.write(struct.pack("<H", len(raw)))
        header.write(raw)
        header.write(struct.pack("<I", arr.ndim))
        header.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        payload.write(np.ascontiguousarray(arr).tobytes())
    Path(path).write_bytes(header.getvalue() + payload.getvalue())


def read_checkpoint(path) -> dict:
    try:
        blob = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise DataError(f"checkpoint not found: {path}") from exc
    if blob[:8] != CHECKPOINT_MAGIC:
        raise DataError(f"{path}: not a checkpoint file")
    version, count = struct.unpack_from("<II", blob, 8)
    if version != CHECKPOINT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    pos = 16
    entries = []
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        name = blob[pos:pos + nlen].decode("utf-8")
        pos += nlen
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}I", blob, pos)
        pos += 4 * ndim
        entries.append((name, shape))
    out = {}
    for name, shape in entries:
        size = int(np.prod(shape)) if shape else 1
        out[name] = np.frombuffer(blob, dtype="<f8", count=size, offset=pos).reshape(shape).copy()
        pos += 8 * size
    if pos != len(blob):
        raise DataError(f"{path}: trailing bytes in checkpoint")
    return out


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj))


def read_json(path) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty CSV")
    return rows[0], rows[1:]
