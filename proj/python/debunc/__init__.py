"""Uncertainty-aware multi-agent debate: metric, confidence, and attention
rescaling primitives exposed from the C++ core."""

from ._core import (
    auroc,
    delta_for_auroc,
    extract_answer,
    gen_arithmetic,
    map_confidences,
    mean_token_entropy,
    multipliers_from_uncertainty,
    rescale_weights,
    scaled_confidences,
    token_sar,
)

__all__ = [
    "auroc",
    "delta_for_auroc",
    "extract_answer",
    "gen_arithmetic",
    "map_confidences",
    "mean_token_entropy",
    "multipliers_from_uncertainty",
    "rescale_weights",
    "scaled_confidences",
    "token_sar",
]
