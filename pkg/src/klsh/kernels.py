"""Histogram kernels, normalization, monotone rescaling, and Gram matrices.

The similarity between two nonnegative histograms is a base kernel (chi2,
intersection, or linear), optionally cosine-normalized, optionally pushed
through the strictly increasing map exp(s * (k - 1)).  The rescaling never
changes nearest-neighbor rankings but reshapes the spectrum of the kernel
matrix, which is what the low-rank hashing pipeline exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

VALID_BASES = ("chi2", "intersection", "linear")

SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-8
CENTERED_ROWSUM_TOL = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """Which similarity to use.

    scale_s == 1.0 means the identity transform (the raw, possibly
    normalized, base kernel); any other positive value applies
    exp(scale_s * (k - 1)) to the normalized kernel value.
    """

    base: str = "chi2"
    normalize: bool = False
    scale_s: float = 1.0

    def __post_init__(self):
        if self.base not in VALID_BASES:
            raise ValueError(f"unknown base kernel {self.base!r}; expected one of {VALID_BASES}")
        if not self.scale_s > 0:
            raise ValueError(f"scale_s must be positive, got {self.scale_s}")

    def untransformed(self) -> "KernelSpec":
        """The same kernel with the monotone rescaling removed."""
        return replace(self, scale_s=1.0)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric kernel matrix over a point set."""

    entries: np.ndarray
    centered: bool = False

    def __post_init__(self):
        k = self.entries
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {k.shape}")
        scale = max(np.abs(k).max(), 1.0) if k.size else 1.0
        if np.abs(k - k.T).max() > SYMMETRY_RTOL * scale:
            raise ValueError("Gram matrix is not symmetric within tolerance")

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def _as_matrix(points) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError(f"expected a vector or a matrix of row vectors, got ndim={x.ndim}")
    return x


def _base_cross(base: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cross kernel matrix of the base kernel, no normalization."""
    if base == "linear":
        return x @ y.T
    xe = x[:, None, :]
    ye = y[None, :, :]
    if base == "chi2":
        num = 2.0 * xe * ye
        den = xe + ye
        # A bin empty on both sides contributes 0, the limit of the summand.
        terms = np.divide(num, den, out=np.zeros(np.broadcast_shapes(num.shape, den.shape)), where=den > 0)
        return terms.sum(axis=-1)
    if base == "intersection":
        return np.minimum(xe, ye).sum(axis=-1)
    raise ValueError(f"unknown base kernel {base!r}")


def _self_values(base: str, x: np.ndarray) -> np.ndarray:
    if base == "linear":
        return np.einsum("ij,ij->i", x, x)
    if base == "chi2":
        # 2 x_i^2 / (2 x_i) = x_i, so the self chi2 value is the L1 mass.
        return x.sum(axis=1)
    if base == "intersection":
        return x.sum(axis=1)
    raise ValueError(f"unknown base kernel {base!r}")


def kernel_matrix(spec: KernelSpec, x, y, chunk: int = 256) -> np.ndarray:
    """Cross kernel matrix K[i, j] = kernel(x_i, y_j), fully transformed.

    Computation is chunked over rows of ``x`` to bound the size of the
    broadcast intermediates.
    """
    x = _as_matrix(x)
    y = _as_matrix(y)
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    for name, arr in (("x", x), ("y", y)):
        bad = np.where((arr < 0).any(axis=1))[0]
        if bad.size:
            raise ValueError(f"histogram kernels require nonnegative inputs ({name} row {bad[0]})")

    out = np.empty((x.shape[0], y.shape[0]))
    for lo in range(0, x.shape[0], chunk):
        out[lo:lo + chunk] = _base_cross(spec.base, x[lo:lo + chunk], y)

    if spec.normalize:
        sx = _self_values(spec.base, x)
        sy = _self_values(spec.base, y)
        for name, s in (("x", sx), ("y", sy)):
            bad = np.where(s == 0)[0]
            if bad.size:
                raise ValueError(f"degenerate point: zero self-similarity at {name} row {bad[0]}")
        out /= np.sqrt(sx)[:, None]
        out /= np.sqrt(sy)[None, :]

    if spec.scale_s != 1.0:
        out = np.exp(spec.scale_s * (out - 1.0))
    return out


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Kernel value for a single pair of vectors."""
    return float(kernel_matrix(spec, _as_matrix(x), _as_matrix(y))[0, 0])


def gram(spec: KernelSpec, points) -> GramMatrix:
    """Uncentered Gram matrix over a point set.

    For normalized kernels the diagonal is forced to exactly 1 to suppress
    rounding drift.
    """
    x = _as_matrix(points)
    if x.shape[0] < 1:
        raise ValueError("need at least one point")
    k = kernel_matrix(spec, x, x)
    k = 0.5 * (k + k.T)
    if spec.normalize:
        np.fill_diagonal(k, 1.0)
    return GramMatrix(entries=k, centered=False)


def center(g: GramMatrix) -> GramMatrix:
    """Double-center a Gram matrix: K - row means - column means + grand mean."""
    if g.centered:
        raise ValueError("Gram matrix is already centered")
    k = g.entries
    row = k.mean(axis=1, keepdims=True)
    col = k.mean(axis=0, keepdims=True)
    kc = k - row - col + k.mean()
    kc = 0.5 * (kc + kc.T)
    return GramMatrix(entries=kc, centered=True)
