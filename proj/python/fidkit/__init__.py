"""Latent-space diffusability metrics and the toy two-regime mixture lab.

Thin numpy-facing wrappers over the C++ core: Frechet distances between
Gaussian moment fits, exact k-NN, latent interpolation, Pearson/Spearman
correlations, seeded Gaussian-mixture sampling, and the full
reconstruction-vs-generation dilemma experiment.
"""

from fidkit._core import (
    DilemmaResult,
    DilemmaVariant,
    GmmSpec,
    ToyPreset,
    __version__,
    batch_nn,
    fid,
    gmm_logpdf,
    hallucination_rate,
    interpolate_set,
    lerp,
    make_grid_gmm,
    make_two_mode_gmm,
    mask_interp,
    pcc,
    read_tensor,
    run_dilemma_experiment,
    sample_gmm,
    slerp,
    srcc,
    toy_preset,
    write_tensor,
)

__all__ = [
    "DilemmaResult",
    "DilemmaVariant",
    "GmmSpec",
    "ToyPreset",
    "__version__",
    "batch_nn",
    "fid",
    "gmm_logpdf",
    "hallucination_rate",
    "interpolate_set",
    "lerp",
    "make_grid_gmm",
    "make_two_mode_gmm",
    "mask_interp",
    "pcc",
    "read_tensor",
    "run_dilemma_experiment",
    "sample_gmm",
    "slerp",
    "srcc",
    "toy_preset",
    "write_tensor",
]
