"""Kernelized LSH retrieval: kernels, spectral embeddings, hash banks,
Hamming ranking, and retrieval-bound diagnostics."""

from .bounds import (
    BoundInputs,
    BoundResult,
    elimination_diagnostic,
    eta,
    klsh_bound,
    projection_norm,
    residual_inner_product,
)
from .datasets import (
    Corpus,
    drop_zero,
    normalize_l1,
    read_bvecs,
    read_csv,
    read_fvecs,
    read_ivecs,
    synth_histograms,
    write_bvecs,
    write_fvecs,
    write_ivecs,
)
from .hashing import (
    HashBank,
    HashCode,
    bank_from_model,
    collision_rate,
    hamming,
    hash_point,
    hash_points,
    train_bank,
)
from .kernels import GramMatrix, KernelSpec, center, eval_kernel, gram, kernel_matrix
from .retrieval import (
    CodeSet,
    EvalReport,
    evaluate,
    exact_nn,
    ground_truth,
    rank_hamming,
    read_codeset,
    recall_at_R,
    write_codeset,
    write_report_csv,
)
from .snapshot import load_snapshot, save_snapshot
from .spectral import (
    ProjectionModel,
    Spectrum,
    decay_report,
    embed,
    embed_many,
    fit_projection,
    inv_sqrt_times,
    sym_eig,
)

__version__ = "0.1.0"
