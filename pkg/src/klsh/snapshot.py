"""Versioned on-disk snapshots of projection models and hash banks.

A snapshot is a single .npz archive carrying the anchors, kernel settings,
eigendecomposition, and rank, plus (optionally) the attached hash bank.
Arrays are stored losslessly, so reloaded models reproduce embeddings
bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from .hashing import HashBank
from .kernels import KernelSpec
from .spectral import ProjectionModel, Spectrum

FORMAT = "klsh-model"
VERSION = 1


def save_snapshot(path, model: ProjectionModel, bank: HashBank | None = None) -> None:
    payload = {
        "format": np.array(FORMAT),
        "version": np.array(VERSION),
        "anchors": model.anchors,
        "kernel_base": np.array(model.kernel.base),
        "kernel_normalize": np.array(model.kernel.normalize),
        "kernel_scale_s": np.array(model.kernel.scale_s),
        "eigenvalues": model.spectrum.eigenvalues,
        "eigenvectors": model.spectrum.eigenvectors,
        "rank_r": np.array(model.rank_r),
        "variant": np.array(model.variant),
        "anchor_gram": model.anchor_gram,
    }
    if bank is not None:
        payload.update({
            "bank_bits_b": np.array(bank.bits_b),
            "bank_weights": bank.weights,
            "bank_variant": np.array(bank.variant),
            "bank_seed": np.array(bank.seed, dtype=np.uint64),
            "bank_t": np.array(-1 if bank.t is None else bank.t),
        })
    np.savez(path, **payload)


def load_snapshot(path) -> tuple[ProjectionModel, HashBank | None]:
    with np.load(path, allow_pickle=False) as z:
        if str(z["format"]) != FORMAT:
            raise ValueError(f"not a model snapshot: {path}")
        if int(z["version"]) != VERSION:
            raise ValueError(f"unsupported snapshot version {int(z['version'])}")
        kernel = KernelSpec(base=str(z["kernel_base"]),
                            normalize=bool(z["kernel_normalize"]),
                            scale_s=float(z["kernel_scale_s"]))
        model = ProjectionModel(
            anchors=z["anchors"],
            kernel=kernel,
            spectrum=Spectrum(eigenvalues=z["eigenvalues"], eigenvectors=z["eigenvectors"]),
            rank_r=int(z["rank_r"]),
            variant=str(z["variant"]),
            anchor_gram=z["anchor_gram"],
        )
        bank = None
        if "bank_weights" in z:
            t = int(z["bank_t"])
            bank = HashBank(model=model, bits_b=int(z["bank_bits_b"]),
                            weights=z["bank_weights"], variant=str(z["bank_variant"]),
                            seed=int(z["bank_seed"]), t=None if t < 0 else t)
    return model, bank
