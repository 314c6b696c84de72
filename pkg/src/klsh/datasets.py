"""Binary descriptor formats, histogram cleanup, and synthetic corpora.

fvecs/bvecs/ivecs follow the texmex layout: every record starts with a
little-endian int32 dimension followed by that many float32 values,
unsigned bytes, or int32 ids respectively.  All records in a file must
share the same dimension, and write/read round-trips are byte-exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Corpus:
    """Uniform-dimension nonnegative vectors with stable original ids."""

    vectors: np.ndarray  # (n, d)
    ids: np.ndarray      # (n,) original ids, preserved across filtering
    note: str = ""
    labels: np.ndarray | None = None  # optional generator cluster labels

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def _read_records(path, value_dtype, note):
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        return np.empty((0, 0), dtype=value_dtype), note
    if raw.size < 4:
        raise ValueError(f"{path}: truncated record")
    d = int(raw[:4].view("<i4")[0])
    if d <= 0:
        raise ValueError(f"{path}: nonpositive dimension {d}")
    itemsize = np.dtype(value_dtype).itemsize
    record = 4 + d * itemsize
    if raw.size % record != 0:
        raise ValueError(f"{path}: truncated record (file size {raw.size} not a multiple of {record})")
    n = raw.size // record
    rows = raw.reshape(n, record)
    dims = rows[:, :4].copy().view("<i4")[:, 0]
    if not np.all(dims == d):
        raise ValueError(f"{path}: inconsistent dimensions (found {set(dims.tolist())})")
    values = rows[:, 4:].copy().view(value_dtype).reshape(n, d)
    return values, note


def read_fvecs(path) -> Corpus:
    values, _ = _read_records(path, "<f4", "fvecs")
    return Corpus(vectors=values.astype(np.float64),
                  ids=np.arange(values.shape[0], dtype=np.int64),
                  note=f"fvecs:{path}")


def read_bvecs(path) -> Corpus:
    """Byte vectors, mapped to reals by dividing by 255."""
    values, _ = _read_records(path, np.uint8, "bvecs")
    return Corpus(vectors=values.astype(np.float64) / 255.0,
                  ids=np.arange(values.shape[0], dtype=np.int64),
                  note=f"bvecs:{path}")


def read_ivecs(path) -> np.ndarray:
    """Integer id lists, one record per query. Returns an (n, d) int32 array."""
    values, _ = _read_records(path, "<i4", "ivecs")
    return values


def _write_records(path, values, value_dtype):
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("expected an (n, d) array")
    n, d = values.shape
    if n > 0 and d <= 0:
        raise ValueError("dimension must be positive")
    with open(path, "wb") as f:
        for row in values:
            f.write(np.int32(d).astype("<i4").tobytes())
            f.write(np.ascontiguousarray(row.astype(value_dtype)).tobytes())


def write_fvecs(path, vectors) -> None:
    _write_records(path, np.asarray(vectors, dtype=np.float32), "<f4")


def write_bvecs(path, vectors) -> None:
    """Inverse of read_bvecs: values are rescaled by 255 and rounded."""
    v = np.rint(np.asarray(vectors, dtype=np.float64) * 255.0)
    if np.any(v < 0) or np.any(v > 255):
        raise ValueError("bvecs values must map into [0, 255]")
    _write_records(path, v.astype(np.uint8), np.uint8)


def write_ivecs(path, ids) -> None:
    _write_records(path, np.asarray(ids, dtype=np.int32), "<i4")


def read_csv(path) -> Corpus:
    """Headerless comma-separated reals, one vector per line."""
    values = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return Corpus(vectors=values, ids=np.arange(values.shape[0], dtype=np.int64),
                  note=f"csv:{path}")


def drop_zero(corpus: Corpus) -> Corpus:
    """Remove all-zero vectors; surviving rows keep their original ids."""
    keep = np.any(corpus.vectors != 0, axis=1)
    return Corpus(vectors=corpus.vectors[keep], ids=corpus.ids[keep],
                  note=corpus.note + "|drop_zero",
                  labels=None if corpus.labels is None else corpus.labels[keep])


def normalize_l1(corpus: Corpus) -> Corpus:
    """Scale every vector to unit L1 mass. Zero vectors must be dropped first."""
    mass = np.abs(corpus.vectors).sum(axis=1, keepdims=True)
    if np.any(mass == 0):
        raise ValueError("cannot L1-normalize a zero vector; run drop_zero first")
    return Corpus(vectors=corpus.vectors / mass, ids=corpus.ids,
                  note=corpus.note + "|l1", labels=corpus.labels)


def synth_histograms(n: int, d: int, clusters: int, concentration: float,
                     seed: int) -> Corpus:
    """Cluster-structured random histograms on the probability simplex.

    Cluster centers are Dirichlet draws; each point is a Dirichlet draw
    around its center with the given concentration, so higher concentration
    means tighter clusters.
    """
    if min(n, d, clusters) < 1:
        raise ValueError("n, d, clusters must all be >= 1")
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    rng = np.random.default_rng(seed)
    centers = rng.dirichlet(np.ones(d), size=clusters)
    labels = rng.integers(0, clusters, size=n)
    # Floor keeps every Dirichlet parameter positive on sparse centers.
    alphas = concentration * centers + 1e-3
    vectors = np.empty((n, d))
    for c in range(clusters):
        mask = labels == c
        vectors[mask] = rng.dirichlet(alphas[c], size=int(mask.sum()))
    return Corpus(vectors=vectors, ids=np.arange(n, dtype=np.int64),
                  note=f"synth(n={n},d={d},clusters={clusters},conc={concentration},seed={seed})",
                  labels=labels)
