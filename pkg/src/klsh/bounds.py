"""Retrieval-bound quantities computed from empirical spectra.

Everything here plugs empirical covariance-scale eigenvalues (Gram
eigenvalues divided by m) into population-level formulas, so outputs are
labeled as empirical plug-ins.  The eigen-space estimation radius is

    eta = (2 / (delta_k * sqrt(m))) * (1 + sqrt(xi / 2)),

and the retrieval guarantee evaluated by klsh_bound is

    (1 + eps) * (1 - sqrt(lambda_k) - eta) * kappa_star
        - eps - (2 + eps) * (sqrt(lambda_k) + eta)^2,

valid when 0 < eta < 1 - sqrt(lambda_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import eval_kernel
from .spectral import ProjectionModel, embed_many


@dataclass(frozen=True)
class BoundInputs:
    """Plug-in quantities for the retrieval bound.

    Either pass eta directly or give delta_k (with m, xi) so it can be
    computed.  lambda_k and delta_k are on the covariance scale.
    """

    lambda_k: float
    eps: float
    kappa_star: float
    m: int | None = None
    xi: float = 3.0
    delta_k: float | None = None
    eta: float | None = None

    def __post_init__(self):
        if self.lambda_k < 0:
            raise ValueError("lambda_k must be nonnegative")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 <= self.kappa_star <= 1:
            raise ValueError("kappa_star must be in [0, 1]")
        if self.eta is None and (self.delta_k is None or self.m is None):
            raise ValueError("give eta, or delta_k and m to derive it")


@dataclass(frozen=True)
class BoundResult:
    value: float
    eta: float
    applicable: bool          # side condition 0 < eta < 1 - sqrt(lambda_k)
    success_probability: float  # (1 - e^{-xi}) / 2
    query_cost: str             # O(n^{1/(1+eps)}) kernel evaluations
    note: str = "empirical plug-in"


def eta(delta_k: float, m: int, xi: float) -> float:
    """Eigen-space estimation radius; shrinks as 1/sqrt(m) and as the gap grows."""
    if delta_k <= 0:
        raise ValueError("zero eigengap: the bound is vacuous")
    if m < 1:
        raise ValueError("m must be >= 1")
    if xi <= 0:
        raise ValueError("xi must be positive")
    return (2.0 / (delta_k * math.sqrt(m))) * (1.0 + math.sqrt(xi / 2.0))


def klsh_bound(inputs: BoundInputs) -> BoundResult:
    """Lower bound on the similarity of the retrieved neighbor."""
    e = inputs.eta if inputs.eta is not None else eta(inputs.delta_k, inputs.m, inputs.xi)
    root = math.sqrt(inputs.lambda_k)
    value = ((1.0 + inputs.eps) * (1.0 - root - e) * inputs.kappa_star
             - inputs.eps - (2.0 + inputs.eps) * (root + e) ** 2)
    applicable = 0.0 < e < 1.0 - root
    return BoundResult(
        value=value,
        eta=e,
        applicable=applicable,
        success_probability=(1.0 - math.exp(-inputs.xi)) / 2.0,
        query_cost=f"O(n^(1/(1+{inputs.eps:g})))",
    )


def lsh_guarantee_metadata(eps: float) -> dict:
    """Asymptotic guarantees of the underlying sign-projection LSH scheme.

    Reported as metadata only; never measured here.
    """
    return {
        "success_probability": "> 0.5",
        "space": f"O(d*n + n^(1+1/(1+{eps:g})))",
        "query_time": f"O(n^(1/(1+{eps:g})))",
    }


def projection_norm(model: ProjectionModel, x, rank: int | None = None,
                    centered: bool = True) -> float:
    """Norm of the point's projection onto the estimated top-rank subspace.

    Uses the query-centered embedding by default, the variant consistent
    with the projector-based bound quantities; pass centered=False for the
    raw-kernel-vector form used in hashing.
    """
    z = embed_many(model, np.asarray(x, dtype=np.float64)[None, :],
                   rank=rank, center_query=centered)[0]
    return float(np.linalg.norm(z))


def residual_inner_product(model: ProjectionModel, x, y, rank: int | None = None,
                           centered: bool = True) -> float:
    """Inner product of the parts of x and y outside the projected subspace.

    kernel(x, y) minus the embedded inner product; at x == y this is
    1 - N(x)^2 for normalized kernels.
    """
    pts = np.stack([np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)])
    z = embed_many(model, pts, rank=rank, center_query=centered)
    return eval_kernel(model.kernel, x, y) - float(z[0] @ z[1])


def elimination_diagnostic(model: ProjectionModel, dataset, k: int, xi: float = 3.0,
                           centered: bool = True) -> dict:
    """Empirical rate of points falling below the elimination threshold.

    The threshold 1 - sqrt(lambda_k) - eta should retain the true neighbor
    with probability at least 1 - e^{-xi}; a nonpositive threshold is
    flagged vacuous.
    """
    ev = model.spectrum.eigenvalues
    m = model.m
    if not 1 <= k < m:
        raise ValueError(f"k={k} out of range [1, {m - 1}]")
    lam_k = ev[k - 1] / m
    delta_k = (ev[k - 1] - ev[k]) / (2.0 * m)
    if delta_k <= 0:
        raise ValueError("zero eigengap at this k")
    e = eta(delta_k, m, xi)
    threshold = 1.0 - math.sqrt(lam_k) - e

    dataset = np.asarray(dataset, dtype=np.float64)
    rank = min(k, model.spectrum.numeric_rank)
    if threshold <= 0:
        return {"k": k, "lambda_k": lam_k, "delta_k": delta_k, "eta": e,
                "threshold": threshold, "violation_rate": 0.0, "vacuous": True}
    norms = np.linalg.norm(embed_many(model, dataset, rank=rank, center_query=centered), axis=1)
    rate = float(np.mean(norms <= threshold))
    return {"k": k, "lambda_k": lam_k, "delta_k": delta_k, "eta": e,
            "threshold": threshold, "violation_rate": rate, "vacuous": False}
