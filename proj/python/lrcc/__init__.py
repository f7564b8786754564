"""Convex clustering of matrix-valued observations with fused low-rank centroids."""

from ._lrcc import (
    DataFormatError,
    SolverError,
    ari,
    chi_cdf,
    fit,
    gen_quarter_spheres,
    gen_recipe,
    gen_unbalanced,
    knn_graph,
    lr_lloyd,
    nmi,
    recovery_check,
)

__all__ = [
    "DataFormatError",
    "SolverError",
    "ari",
    "chi_cdf",
    "fit",
    "gen_quarter_spheres",
    "gen_recipe",
    "gen_unbalanced",
    "knn_graph",
    "lr_lloyd",
    "nmi",
    "recovery_check",
]
