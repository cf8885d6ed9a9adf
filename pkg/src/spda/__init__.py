"""Poisson image denoising with sparse exponential patch models.

Patches of a photon-limited image are modeled as exp(D alpha) with a shared
per-group support; supports come from a greedy joint pursuit with a
bootstrapped stop, the dictionary is refined by alternating Newton steps,
and the denoised image is the average re-projection of the patch estimates.
Binning and an Anscombe baseline round out the toolbox.
"""

from .clustering import group_patches
from .images import (PatchMatrix, bin_image, convolve_same, extract_patches,
                     gaussian_kernel, psnr, reproject_average, scale_to_peak,
                     upscale_bilinear)
from .learning import (atom_usage, dictionary_learning_round,
                       init_dictionary_dct, objective_value, peak_bucket,
                       prune_unused_atoms, renormalize_columns,
                       train_initial_dictionary)
from .model import (GroupCode, NumericalOverflowError, SolverError, gradient,
                    hessian, objective, solve_fixed_support)
from .noise import (anscombe_forward, anscombe_inverse, derive_seed,
                    sample_poisson)
from .pipeline import (DenoiseReport, SpdaConfig, run_experiment,
                       spda_denoise, spda_denoise_binned)
from .pursuit import PursuitResult, greedy_pursuit_group, score_atom

__version__ = "0.1.0"

__all__ = [
    "PatchMatrix", "GroupCode", "PursuitResult", "SpdaConfig",
    "DenoiseReport", "NumericalOverflowError", "SolverError",
    "extract_patches", "reproject_average", "scale_to_peak", "psnr",
    "convolve_same", "gaussian_kernel", "bin_image", "upscale_bilinear",
    "sample_poisson", "anscombe_forward", "anscombe_inverse", "derive_seed",
    "objective", "gradient", "hessian", "solve_fixed_support",
    "group_patches", "score_atom", "greedy_pursuit_group",
    "dictionary_learning_round", "prune_unused_atoms", "atom_usage",
    "renormalize_columns", "objective_value",
    "init_dictionary_dct", "train_initial_dictionary", "peak_bucket",
    "spda_denoise", "spda_denoise_binned", "run_experiment",
]
