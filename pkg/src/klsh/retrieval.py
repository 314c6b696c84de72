"""Exhaustive Hamming ranking, exact kernel ground truth, and Recall@R.

Ties are always broken by ascending id so that every ranking is
deterministic and testable.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .hashing import HashCode, hamming_many
from .kernels import KernelSpec, kernel_matrix

CODESET_MAGIC = b"KLSHCSET"
CODESET_VERSION = 1


@dataclass(frozen=True)
class CodeSet:
    """Packed hash codes for a corpus, one row per item."""

    codes: np.ndarray  # (n, ceil(bits_b / 8)) uint8
    ids: np.ndarray    # (n,) int64, unique
    bits_b: int

    def __post_init__(self):
        if self.codes.shape[0] != self.ids.shape[0]:
            raise ValueError("codes and ids must have the same length")
        if len(np.unique(self.ids)) != len(self.ids):
            raise ValueError("ids must be unique")
        if self.codes.shape[1] != (self.bits_b + 7) // 8:
            raise ValueError("code width does not match bits_b")

    @property
    def n(self) -> int:
        return self.codes.shape[0]


@dataclass
class EvalReport:
    """Recall@R curve plus the parameters that produced it."""

    recall_at: dict[int, float]
    params: dict = field(default_factory=dict)
    top_lists: list[np.ndarray] | None = None

    def rows(self) -> list[dict]:
        out = []
        for r in sorted(self.recall_at):
            row = {"R": r, "recall": self.recall_at[r]}
            row.update(self.params)
            out.append(row)
        return out


def rank_hamming(codes: CodeSet, q: HashCode, R: int) -> np.ndarray:
    """Top-R ids by ascending Hamming distance to q, ties by ascending id."""
    if q.bits_b != codes.bits_b:
        raise ValueError(f"code length mismatch: {q.bits_b} vs {codes.bits_b}")
    if not 0 <= R <= codes.n:
        raise ValueError(f"R={R} outside [0, {codes.n}]")
    d = hamming_many(codes.codes, q.bits)
    order = np.lexsort((codes.ids, d))
    return codes.ids[order[:R]]


def exact_nn(kernel: KernelSpec, corpus, q, topk: int) -> np.ndarray:
    """Exhaustive exact top-k ids by descending kernel similarity.

    This is the brute-force ground-truth oracle; ties broken by ascending id.
    """
    corpus = np.asarray(corpus, dtype=np.float64)
    sims = kernel_matrix(kernel, np.asarray(q, dtype=np.float64)[None, :], corpus)[0]
    ids = np.arange(corpus.shape[0])
    order = np.lexsort((ids, -sims))
    return ids[order[:topk]]


def ground_truth(kernel: KernelSpec, corpus, queries) -> np.ndarray:
    """Exact nearest-neighbor id per query under the untransformed kernel.

    The monotone rescaling is a retrieval aid, not a change of objective,
    so ground truth always uses scale 1.
    """
    base = kernel.untransformed()
    corpus = np.asarray(corpus, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    out = np.empty(queries.shape[0], dtype=np.int64)
    for i, q in enumerate(queries):
        out[i] = exact_nn(base, corpus, q, 1)[0]
    return out


def recall_at_R(retrieved: list[np.ndarray], truth: np.ndarray, Rs,
                params: dict | None = None, keep_lists: bool = False) -> EvalReport:
    """Fraction of queries whose true NN appears in the first R retrieved."""
    truth = np.asarray(truth)
    if len(retrieved) == 0:
        raise ValueError("empty query set")
    if len(retrieved) != len(truth):
        raise ValueError("one truth id per query required")
    recall = {}
    for r in sorted(int(r) for r in Rs):
        hits = sum(1 for lst, t in zip(retrieved, truth) if t in lst[:r])
        recall[r] = hits / len(truth)
    return EvalReport(recall_at=recall, params=dict(params or {}),
                      top_lists=list(retrieved) if keep_lists else None)


def evaluate(codes: CodeSet, query_codes: np.ndarray, truth: np.ndarray, Rs,
             params: dict | None = None) -> EvalReport:
    """Hamming-rank every query code against the corpus and score Recall@R."""
    rmax = max(int(r) for r in Rs)
    retrieved = [rank_hamming(codes, HashCode(bits=qc, bits_b=codes.bits_b), min(rmax, codes.n))
                 for qc in query_codes]
    return recall_at_R(retrieved, truth, Rs, params=params)


def write_codeset(path, codes: CodeSet) -> None:
    """Serialize a CodeSet: magic, version, n, bits_b, then packed codes."""
    if not np.array_equal(codes.ids, np.arange(codes.n)):
        raise ValueError("code-set files store positional ids only (0..n-1)")
    with open(path, "wb") as f:
        f.write(CODESET_MAGIC)
        f.write(struct.pack("<IQI", CODESET_VERSION, codes.n, codes.bits_b))
        f.write(np.ascontiguousarray(codes.codes).tobytes())


def read_codeset(path) -> CodeSet:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != CODESET_MAGIC:
            raise ValueError(f"not a code-set file (bad magic {magic!r})")
        version, n, bits_b = struct.unpack("<IQI", f.read(16))
        if version != CODESET_VERSION:
            raise ValueError(f"unsupported code-set version {version}")
        width = (bits_b + 7) // 8
        raw = f.read(n * width)
        if len(raw) != n * width:
            raise ValueError("truncated code-set file")
        codes = np.frombuffer(raw, dtype=np.uint8).reshape(n, width)
    return CodeSet(codes=codes.copy(), ids=np.arange(n, dtype=np.int64), bits_b=bits_b)


def write_report_csv(path, report: EvalReport) -> None:
    """CSV with one row per R; the parameter echo rides along as columns
    and as leading comment lines."""
    rows = report.rows()
    param_keys = sorted(report.params)
    with open(path, "w") as f:
        for k in param_keys:
            f.write(f"# {k}={report.params[k]}\n")
        f.write(",".join(["R", "recall"] + param_keys) + "\n")
        for row in rows:
            f.write(",".join([str(row["R"]), f"{row['recall']:.6f}"]
                             + [str(report.params[k]) for k in param_keys]) + "\n")
