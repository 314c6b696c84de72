"""Binary hash banks over kernel-space projections.

Two ways of drawing the random hyperplanes:

* ``clt``: each bit averages t randomly chosen anchor features and whitens
  with the rank-r inverse square root of the centered anchor Gram, so the
  bit is sign(w^T k(x)) with w = Kbar_r^{-1/2} e_S (constant scaling terms
  dropped; they never change the sign).
* ``gaussian``: draw standard-normal vectors directly in the rank-r
  embedded space and take sign(g^T embed(x)).

Codes are packed little-endian: bit 0 of a code is the least significant
bit of byte 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec
from .spectral import (
    ProjectionModel,
    anchor_kernel_vectors,
    embed_many,
    fit_projection,
    inv_sqrt_times,
)

VARIANTS = ("clt", "gaussian")


@dataclass(frozen=True)
class HashCode:
    """A packed b-bit binary code. Padding bits beyond bits_b are zero."""

    bits: np.ndarray  # uint8 bytes, little-endian bit order
    bits_b: int

    def __eq__(self, other):
        return (isinstance(other, HashCode) and self.bits_b == other.bits_b
                and np.array_equal(self.bits, other.bits))


@dataclass(frozen=True)
class HashBank:
    """A trained bank of b sign-projection hash functions.

    weights is (b, m) anchor weights for the clt variant and (b, r)
    Gaussian directions for the gaussian variant.
    """

    model: ProjectionModel
    bits_b: int
    weights: np.ndarray
    variant: str
    seed: int
    t: int | None = None


def bank_from_model(model: ProjectionModel, bits_b: int, variant: str,
                    seed: int, t: int | None = None,
                    rng: np.random.Generator | None = None) -> HashBank:
    """Draw a hash bank for an already-fitted projection model.

    The clt variant samples, for every bit independently, t distinct anchor
    indices without replacement from one shared seeded generator.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown hash variant {variant!r}")
    if bits_b < 1:
        raise ValueError("bits_b must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)

    if variant == "gaussian":
        weights = rng.standard_normal((bits_b, model.rank_r))
        return HashBank(model=model, bits_b=bits_b, weights=weights,
                        variant=variant, seed=seed)

    if t is None or not 1 <= t < model.m:
        raise ValueError(f"clt variant needs 1 <= t < m={model.m}, got t={t}")
    indicators = np.zeros((model.m, bits_b))
    for ell in range(bits_b):
        idx = rng.choice(model.m, size=t, replace=False)
        indicators[idx, ell] = 1.0
    weights = inv_sqrt_times(model.spectrum, model.rank_r, indicators).T
    return HashBank(model=model, bits_b=bits_b, weights=weights,
                    variant=variant, seed=seed, t=t)


def train_bank(points, kernel: KernelSpec, m: int, t: int, bits_b: int,
               rank_r: int | None, variant: str, seed: int) -> HashBank:
    """Sample m anchors from the corpus, fit the projection, draw a bank.

    Deterministic given the seed: the anchor sample is drawn first, then
    the per-bit draws, all from one generator.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= corpus size {n}, got m={m}")
    if variant == "clt" and not 1 <= t < m:
        raise ValueError(f"need 1 <= t < m, got t={t}, m={m}")
    rng = np.random.default_rng(seed)
    anchor_idx = rng.choice(n, size=m, replace=False)
    model = fit_projection(points[anchor_idx], kernel, rank_r=rank_r,
                           variant="klsh_embedding")
    return bank_from_model(model, bits_b, variant, seed, t=t, rng=rng)


def projections(bank: HashBank, x) -> np.ndarray:
    """Raw pre-sign projection values, one row per point, one column per bit."""
    if bank.variant == "clt":
        k = anchor_kernel_vectors(bank.model, x)
        return k @ bank.weights.T
    z = embed_many(bank.model, x)
    return z @ bank.weights.T


def _pack(bits: np.ndarray, bits_b: int) -> np.ndarray:
    return np.packbits(bits.astype(np.uint8), axis=-1, bitorder="little")


def hash_points(bank: HashBank, x) -> np.ndarray:
    """Hash rows of x into packed codes, shape (n, ceil(b/8)) uint8.

    sign(0) counts as +1, so a zero projection yields bit 1.
    """
    proj = projections(bank, x)
    return _pack(proj >= 0, bank.bits_b)


def hash_point(bank: HashBank, x) -> HashCode:
    code = hash_points(bank, np.asarray(x, dtype=np.float64)[None, :])[0]
    return HashCode(bits=code, bits_b=bank.bits_b)


def hamming(a: HashCode, b: HashCode) -> int:
    """Number of differing bits between two codes of equal width."""
    if a.bits_b != b.bits_b:
        raise ValueError(f"code length mismatch: {a.bits_b} vs {b.bits_b}")
    return int(np.bitwise_count(a.bits ^ b.bits).sum())


def hamming_many(codes: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamming distances from one packed query code to n packed codes."""
    return np.bitwise_count(codes ^ q[None, :]).sum(axis=1).astype(np.int64)


def collision_rate(bank: HashBank, x, y) -> float:
    """Fraction of bits on which x and y agree (over this bank's bits)."""
    cx = hash_point(bank, x)
    cy = hash_point(bank, y)
    return 1.0 - hamming(cx, cy) / bank.bits_b
