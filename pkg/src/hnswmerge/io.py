"""fvecs/ivecs readers and writers, the index file format, and run configs.

Index file layout (all little-endian)::

    header   magic "HNSWMRG1", version u32, dim u32, metric u8, flags u8,
             pad u16, n u64, l_max i32, M u32, M0 u32, ef_construction u32,
             mL f64, seed i64, entry i64 (-1 when empty)
    levels   ids i64[n] ascending, levels i32[n]
    layers   for each layer 0..l_max:
             count u64, ids i64[count], degrees u32[count], neighbors i64[sum]
    vectors  float32[n, dim] in id order, present when flags & 1
"""

from __future__ import annotations

import configparser
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from .graph import HnswIndex, IndexParams, LayerGraph
from .merge import MergeParams
from .vecstore import Metric

MAGIC = b"HNSWMRG1"
VERSION = 1
FLAG_VECTORS = 1
_HEADER = struct.Struct("<8sIIBBHQiIIIdqq")


class FormatError(ValueError):
    """Malformed vector or index file."""


class UnsupportedVersionError(FormatError):
    pass


def _atomic_write(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _walk_records(buf: bytes) -> list[tuple[int, int]]:
    """(offset, d) for each length-prefixed record; raises on truncation."""
    out = []
    pos = 0
    while pos < len(buf):
        if pos + 4 > len(buf):
            raise FormatError(f"truncated record header at byte offset {pos}")
        (d,) = struct.unpack_from("<i", buf, pos)
        if d < 0:
            raise FormatError(f"negative dimension {d} at byte offset {pos}")
        end = pos + 4 + 4 * d
        if end > len(buf):
            raise FormatError(f"truncated record at byte offset {pos}: needs {4 * d} payload bytes")
        out.append((pos, d))
        pos = end
    return out


def read_fvecs(path: str | os.PathLike) -> np.ndarray:
    """Read an fvecs file into an ``(n, d)`` float32 array.

    An empty file gives a ``(0, 0)`` array.
    """
    buf = Path(path).read_bytes()
    if not buf:
        return np.empty((0, 0), dtype=np.float32)
    records = _walk_records(buf)
    d = records[0][1]
    for offset, dd in records:
        if dd != d:
            raise FormatError(f"record at byte offset {offset} has dimension {dd}, expected {d}")
    raw = np.frombuffer(buf, dtype="<f4").reshape(len(records), d + 1)
    return raw[:, 1:].astype(np.float32)


def read_ivecs(path: str | os.PathLike) -> list[np.ndarray]:
    """Read an ivecs file; records may differ in length."""
    buf = Path(path).read_bytes()
    return [
        np.frombuffer(buf, dtype="<i4", count=d, offset=offset + 4).astype(np.int64)
        for offset, d in _walk_records(buf)
    ]


def write_fvecs(path: str | os.PathLike, vectors: np.ndarray) -> None:
    vectors = np.asarray(vectors, dtype="<f4")
    if vectors.ndim != 2:
        raise ValueError("fvecs needs a 2-D array")
    n, d = vectors.shape
    out = np.empty((n, d + 1), dtype="<f4")
    out[:, 0] = np.array([d], dtype="<i4").view("<f4")[0]
    out[:, 1:] = vectors
    _atomic_write(path, out.tobytes())


def write_ivecs(path: str | os.PathLike, rows: Sequence[Sequence[int]]) -> None:
    parts = []
    for row in rows:
        row = np.asarray(row, dtype="<i4")
        parts.append(np.array([row.size], dtype="<i4").tobytes())
        parts.append(row.tobytes())
    _atomic_write(path, b"".join(parts))


@dataclass
class IndexFile:
    """A loaded index plus whatever the file said about its vectors."""

    index: HnswIndex
    dim: int
    metric: Metric = Metric.SQEUCLIDEAN
    vectors: np.ndarray | None = None  # rows aligned with index.ids

    def vector_table(self, size: int | None = None) -> np.ndarray:
        """Vectors laid out by global id in a dense ``(size, dim)`` array."""
        if self.vectors is None:
            raise ValueError("index file carries no vectors")
        ids = np.asarray(self.index.ids, dtype=np.int64)
        size = size if size is not None else (int(ids.max()) + 1 if ids.size else 0)
        table = np.zeros((size, self.dim), dtype=np.float32)
        table[ids] = self.vectors
        return table


def dump_index(
    h: HnswIndex,
    dim: int,
    metric: Metric | str = Metric.SQEUCLIDEAN,
    vectors: np.ndarray | None = None,
) -> bytes:
    """Serialize ``h``. ``vectors`` is indexed by global id; omit it to store ids only."""
    metric = Metric(metric)
    ids = np.asarray(h.ids, dtype="<i8")
    p = h.params
    flags = FLAG_VECTORS if vectors is not None else 0
    parts = [_HEADER.pack(
        MAGIC, VERSION, dim, metric.code, flags, 0, ids.size, h.l_max,
        p.M, p.M0, p.ef_construction, float(p.mL), p.seed,
        -1 if h.entry is None else h.entry,
    )]
    parts.append(ids.tobytes())
    parts.append(np.asarray([h.levels[i] for i in ids.tolist()], dtype="<i4").tobytes())
    for g in h.layers:
        verts = sorted(g)
        adj = g.adjacency()
        parts.append(struct.pack("<Q", len(verts)))
        parts.append(np.asarray(verts, dtype="<i8").tobytes())
        parts.append(np.asarray([len(adj[v]) for v in verts], dtype="<u4").tobytes())
        flat = [u for v in verts for u in adj[v]]
        parts.append(np.asarray(flat, dtype="<i8").tobytes())
    if vectors is not None:
        vectors = np.asarray(vectors)
        if ids.size and vectors.shape[1] != dim:
            raise ValueError(f"vectors have dimension {vectors.shape[1]}, header says {dim}")
        parts.append(np.ascontiguousarray(vectors[ids], dtype="<f4").tobytes())
    return b"".join(parts)


def save_index(
    path: str | os.PathLike,
    h: HnswIndex,
    dim: int,
    metric: Metric | str = Metric.SQEUCLIDEAN,
    vectors: np.ndarray | None = None,
) -> None:
    _atomic_write(path, dump_index(h, dim, metric, vectors))


class _Reader:
    def __init__(self, fh: BinaryIO) -> None:
        self.fh = fh

    def take(self, n: int) -> bytes:
        data = self.fh.read(n)
        if len(data) != n:
            raise FormatError("index file is truncated")
        return data

    def array(self, dtype: str, count: int) -> np.ndarray:
        size = np.dtype(dtype).itemsize * count
        return np.frombuffer(self.take(size), dtype=dtype, count=count)


def read_index(fh: BinaryIO) -> IndexFile:
    r = _Reader(fh)
    magic = r.take(8)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, not an index file")
    rest = r.take(_HEADER.size - 8)
    (_, version, dim, metric_code, flags, _, n, l_max, M, M0, efc, mL, seed, entry) = _HEADER.unpack(
        magic + rest
    )
    if version != VERSION:
        raise UnsupportedVersionError(f"index file version {version} is not supported (expected {VERSION})")

    ids = r.array("<i8", n).tolist()
    lvls = r.array("<i4", n).tolist()
    layers = []
    for _ in range(l_max + 1):
        (count,) = struct.unpack("<Q", r.take(8))
        verts = r.array("<i8", count).tolist()
        degs = r.array("<u4", count).tolist()
        flat = r.array("<i8", sum(degs)).tolist()
        g = LayerGraph()
        adj = g.adjacency()
        pos = 0
        for v, d in zip(verts, degs):
            adj[v] = flat[pos:pos + d]
            pos += d
        layers.append(g)
    vectors = None
    if flags & FLAG_VECTORS:
        vectors = r.array("<f4", n * dim).reshape(n, dim).copy()
    h = HnswIndex(
        params=IndexParams(M=M, M0=M0, ef_construction=efc, mL=mL, seed=seed),
        layers=layers,
        levels=dict(zip(ids, lvls)),
        entry=None if entry < 0 else entry,
    )
    return IndexFile(index=h, dim=dim, metric=Metric.from_code(metric_code), vectors=vectors)


def load_index(path: str | os.PathLike) -> IndexFile:
    with open(path, "rb") as fh:
        return read_index(fh)


@dataclass
class VariantSpec:
    label: str
    algo: str
    ef_construction: int | None = None
    merge_overrides: dict[str, int] = field(default_factory=dict)


@dataclass
class RunConfig:
    """Settings for a full split/build/merge/sweep run."""

    base: str | None = None
    queries: str | None = None
    ground_truth: str | None = None
    synthetic_source: str = "mixture"
    synthetic_n: int = 20000
    synthetic_queries: int = 100
    synthetic_dim: int = 128
    split: float = 0.5
    seed: int = 0
    k: int = 5
    Ls: list[int] = field(default_factory=lambda: [32, 40, 50, 64, 72])
    strategy: str = "rng"
    build: IndexParams = field(default_factory=IndexParams)
    merge: MergeParams = field(default_factory=MergeParams)
    variants: list[VariantSpec] = field(default_factory=list)
    output: str | None = None

    def __post_init__(self) -> None:
        if not 0 < self.split < 1:
            raise ValueError("split fraction must be in (0, 1)")
        if self.synthetic_source not in ("mixture", "sift"):
            raise ValueError(f"unknown synthetic source {self.synthetic_source!r}")


_MERGE_KEYS = ("m", "m0", "search_ef", "jump_ef", "local_ef", "next_step_k", "next_step_ef", "m_carry")


def parse_config(text: str, base_dir: str | os.PathLike = ".") -> RunConfig:
    """Parse an INI-style run config (see ``configs/desk.ini``).

    Relative paths are resolved against ``base_dir``.
    """
    cp = configparser.ConfigParser()
    cp.read_string(text)

    def path(section: str, key: str) -> str | None:
        value = cp.get(section, key, fallback="").strip()
        return str(Path(base_dir) / value) if value else None

    seed = cp.getint("run", "seed", fallback=0)
    build = IndexParams(
        M=cp.getint("build", "M", fallback=16),
        M0=cp.getint("build", "M0", fallback=32),
        ef_construction=cp.getint("build", "ef_construction", fallback=32),
        seed=seed,
    )
    merge_kw = {key: cp.getint("merge", key) for key in _MERGE_KEYS if cp.has_option("merge", key)}
    merge_kw.setdefault("m", build.M)
    merge_kw.setdefault("m0", build.M0)
    merge = MergeParams(seed=seed, **merge_kw)

    variants = []
    names = [s.strip() for s in cp.get("grid", "variants", fallback="sigm,ngm,igtm,cgtm").split(",")]
    for name in filter(None, names):
        section = f"variant {name}"
        if cp.has_section(section):
            algo = cp.get(section, "algo", fallback=name)
            efc = cp.getint(section, "ef_construction", fallback=None)
            over = {key: cp.getint(section, key) for key in _MERGE_KEYS if cp.has_option(section, key)}
        else:
            algo, efc, over = name, None, {}
        variants.append(VariantSpec(label=name, algo=algo, ef_construction=efc, merge_overrides=over))

    Ls = [int(x) for x in cp.get("run", "Ls", fallback="32,40,50,64,72").split(",") if x.strip()]
    return RunConfig(
        base=path("data", "base"),
        queries=path("data", "queries"),
        ground_truth=path("data", "ground_truth"),
        synthetic_source=cp.get("data", "source", fallback="mixture").strip(),
        synthetic_n=cp.getint("data", "synthetic_n", fallback=20000),
        synthetic_queries=cp.getint("data", "synthetic_queries", fallback=100),
        synthetic_dim=cp.getint("data", "synthetic_dim", fallback=128),
        split=cp.getfloat("run", "split", fallback=0.5),
        seed=seed,
        k=cp.getint("run", "k", fallback=5),
        Ls=Ls,
        strategy=cp.get("run", "strategy", fallback="rng"),
        build=build,
        merge=merge,
        variants=variants,
        output=path("run", "output"),
    )


def load_config(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)
