"""Adaptive iteratively linearised FEM for steady Bingham flow."""

from ._bingham import (
    channel_profile,
    default_config,
    graph_bound_eta,
    mu_n,
    normalize_config,
    run,
    structured_mesh,
    zeta,
)

__all__ = [
    "channel_profile",
    "default_config",
    "graph_bound_eta",
    "mu_n",
    "normalize_config",
    "run",
    "structured_mesh",
    "zeta",
]
