"""Eigendecomposition of Gram matrices and kernel-space embeddings.

A ProjectionModel bundles the anchor set, the kernel, and the spectrum of
the anchor Gram matrix (centered for the KLSH-style embedding, uncentered
for the Nystrom baseline).  Both embeddings share the same algebraic form
D_r^{-1/2} U_r^T k(x); only the matrix whose spectrum is used differs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, center, gram, kernel_matrix

# Eigenvalues at or below this fraction of the largest are treated as zero;
# the centered Gram is rank-deficient by construction, so full-rank
# inversion must be guarded.
EIG_FLOOR_RTOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues and aligned orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def m(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def numeric_rank(self) -> int:
        ev = self.eigenvalues
        if ev.size == 0 or ev[0] <= 0:
            return 0
        return int(np.count_nonzero(ev > EIG_FLOOR_RTOL * ev[0]))


def sym_eig(matrix: np.ndarray) -> Spectrum:
    """Full decomposition of a symmetric PSD matrix.

    Eigenvalues are returned in descending order with tiny negative values
    (within -1e-8 of the largest) clamped to zero.  Each eigenvector's first
    nonzero component is made positive so that stored models are
    reproducible bit-for-bit.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > 1e-8 * scale:
        raise ValueError("matrix is not symmetric within tolerance")

    w, v = np.linalg.eigh(0.5 * (a + a.T))
    order = np.argsort(w, kind="stable")[::-1]
    w = w[order]
    v = v[:, order]

    lam_max = max(w[0], 0.0)
    if w[-1] < -1e-8 * max(lam_max, 1e-300):
        raise ValueError(f"matrix is not positive semidefinite: min eigenvalue {w[-1]:.3e}")
    w = np.maximum(w, 0.0)

    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.where(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            v[:, j] = -col
    return Spectrum(eigenvalues=w, eigenvectors=v)


@dataclass(frozen=True)
class ProjectionModel:
    """Trained kernel-space projection onto the top rank_r directions.

    anchor_gram is the uncentered anchor Gram matrix; it is kept around for
    query-side centering regardless of the variant.
    """

    anchors: np.ndarray
    kernel: KernelSpec
    spectrum: Spectrum
    rank_r: int
    variant: str  # "klsh_embedding" | "nystrom"
    anchor_gram: np.ndarray

    @property
    def m(self) -> int:
        return self.anchors.shape[0]


def fit_projection(anchors, kernel: KernelSpec, rank_r: int | None = None,
                   variant: str = "klsh_embedding") -> ProjectionModel:
    """Build a projection model from anchor points.

    rank_r=None selects the full numeric rank.  Requested ranks above the
    numeric rank are capped with a warning.
    """
    if variant not in ("klsh_embedding", "nystrom"):
        raise ValueError(f"unknown variant {variant!r}")
    anchors = np.asarray(anchors, dtype=np.float64)
    g = gram(kernel, anchors)
    mat = center(g).entries if variant == "klsh_embedding" else g.entries
    spectrum = sym_eig(mat)
    nrank = spectrum.numeric_rank
    if nrank == 0:
        raise ValueError("numeric rank 0: anchor Gram has no usable spectrum")
    if rank_r is None:
        rank_r = nrank
    elif rank_r < 1:
        raise ValueError(f"rank_r must be >= 1, got {rank_r}")
    elif rank_r > nrank:
        warnings.warn(f"requested rank {rank_r} exceeds numeric rank {nrank}; capping")
        rank_r = nrank
    return ProjectionModel(anchors=anchors, kernel=kernel, spectrum=spectrum,
                           rank_r=rank_r, variant=variant, anchor_gram=g.entries)


def anchor_kernel_vectors(model: ProjectionModel, x, center_query: bool = False) -> np.ndarray:
    """k(x)[i] = kernel(x, anchor_i) for each row of x, optionally centered.

    Query centering subtracts the anchor-Gram row means and the query's own
    mean kernel value, the standard KPCA out-of-sample correction.
    """
    k = kernel_matrix(model.kernel, x, model.anchors)
    if center_query:
        g = model.anchor_gram
        k = k - g.mean(axis=1)[None, :] - k.mean(axis=1, keepdims=True) + g.mean()
    return k


def embed_many(model: ProjectionModel, x, rank: int | None = None,
               center_query: bool = False) -> np.ndarray:
    """Embed rows of x into the rank-r spectral coordinates.

    Returns an (n, r) array D_r^{-1/2} U_r^T k(x).  Embeddings are nested:
    the rank-r embedding is the prefix of any higher-rank embedding.
    """
    r = model.rank_r if rank is None else rank
    if r < 0 or r > model.spectrum.numeric_rank:
        raise ValueError(f"rank {r} outside [0, numeric rank {model.spectrum.numeric_rank}]")
    k = anchor_kernel_vectors(model, x, center_query=center_query)
    if r == 0:
        return np.zeros((k.shape[0], 0))
    u = model.spectrum.eigenvectors[:, :r]
    lam = model.spectrum.eigenvalues[:r]
    return (k @ u) / np.sqrt(lam)[None, :]


def embed(model: ProjectionModel, x, rank: int | None = None,
          center_query: bool = False) -> np.ndarray:
    """Embedding of a single vector; see embed_many."""
    return embed_many(model, np.asarray(x, dtype=np.float64)[None, :],
                      rank=rank, center_query=center_query)[0]


def inv_sqrt_times(spectrum: Spectrum, rank_r: int, v) -> np.ndarray:
    """Apply the rank-r inverse square root U_r D_r^{-1/2} U_r^T to v.

    v may be a single m-vector or an (m, ...) stack of columns.
    """
    if rank_r < 1 or rank_r > spectrum.numeric_rank:
        raise ValueError(f"rank {rank_r} outside [1, numeric rank {spectrum.numeric_rank}]")
    v = np.asarray(v, dtype=np.float64)
    u = spectrum.eigenvectors[:, :rank_r]
    lam = spectrum.eigenvalues[:rank_r]
    coords = u.T @ v
    coords /= np.sqrt(lam).reshape((-1,) + (1,) * (v.ndim - 1))
    return u @ coords


def decay_report(spectrum: Spectrum, ks) -> list[dict]:
    """Per-k spectral-decay diagnostics on the covariance scale.

    Gram eigenvalues are divided by m to estimate covariance-operator
    eigenvalues.  Each row reports lambda_k, the half eigengap
    (lambda_k - lambda_{k+1}) / 2, and the tail mass beyond k.  k is
    1-based and must be < m.
    """
    m = spectrum.m
    ev = spectrum.eigenvalues
    total = ev.sum()
    rows = []
    for k in ks:
        if not 1 <= k < m:
            raise ValueError(f"k={k} out of range [1, {m - 1}]")
        lam_k = ev[k - 1] / m
        gap = (ev[k - 1] - ev[k]) / (2.0 * m)
        tail = float(ev[k:].sum() / total) if total > 0 else 0.0
        rows.append({
            "k": int(k),
            "eigenvalue": float(lam_k),
            "eigengap": float(gap),
            "tail_mass": tail,
            "zero_eigengap": bool(gap == 0.0),
        })
    return rows
