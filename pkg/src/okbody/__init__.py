"""Exact Okounkov bodies, restricted volumes and the series V(D;a) on small toric varieties."""
from .exact_geometry import Polytope, convex_hull, mixed_volume, slice_polytope, volume
from .okounkov import body_slice_compare, graded_semigroup, okounkov_body, volume_of_series
from .series_ops import (
    augmented_base_locus,
    base_locus,
    build_V,
    complete_series,
    moving_self_intersection,
    points_subseries,
    restricted_vol_formula,
    restricted_volume,
)
from .valuation import valuate, value_set
from .variety_model import (
    DivisorClass,
    Flag,
    hirzebruch,
    intersection_number,
    p1xp1,
    projective_space,
    toric,
)

__version__ = "0.1.0"

__all__ = [
    "DivisorClass",
    "Flag",
    "Polytope",
    "augmented_base_locus",
    "base_locus",
    "body_slice_compare",
    "build_V",
    "complete_series",
    "convex_hull",
    "graded_semigroup",
    "hirzebruch",
    "intersection_number",
    "mixed_volume",
    "moving_self_intersection",
    "okounkov_body",
    "p1xp1",
    "points_subseries",
    "projective_space",
    "restricted_vol_formula",
    "restricted_volume",
    "slice_polytope",
    "toric",
    "valuate",
    "value_set",
    "volume",
    "volume_of_series",
]
