"""Point-vortex Gibbs ensemble laboratory.

Thin Python face over the C++ core: kernel tables, Gaussian field moments,
the product remainder expansion, partition estimates, the mean-field free
energy, and the experiment runner.
"""

from ._core import (
    KernelTable,
    VortexgasError,
    analytic_exp_moment,
    exp_moment_mc,
    field_norm_sq,
    free_energy,
    partition_estimate,
    remainder_expand,
    run_experiment,
    smooth_diag,
    version,
)

__all__ = [
    "KernelTable",
    "VortexgasError",
    "analytic_exp_moment",
    "exp_moment_mc",
    "field_norm_sq",
    "free_energy",
    "partition_estimate",
    "remainder_expand",
    "run_experiment",
    "smooth_diag",
    "version",
]

__version__ = version()
