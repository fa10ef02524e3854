"""Causal boundaries of warped Randers spacetimes, computed on finite meshes."""

from .errors import CBoundaryError, InvalidInputError
from .warp import WarpProfile, k_omega, check_conditions
from .geometry import DirectedMesh, RandersField, TimeDependentRandersField, build_weighted_graph
from .distance import DistanceTable, shortest_distance, reverse_distance, symmetrize
from .completion import DeclaredSequence, classify_boundary
from .busemann import ProbeSet, busemann_eval, closed_form_point, translate_cl_op
from .boundary import pair_from_symmetrized_point, make_line, canonical_projection, strain_classes

__version__ = "0.1.0"

__all__ = [
    "CBoundaryError", "InvalidInputError", "WarpProfile", "k_omega", "check_conditions", "DirectedMesh",
    "RandersField", "TimeDependentRandersField", "build_weighted_graph", "DistanceTable", "shortest_distance",
    "reverse_distance", "symmetrize", "DeclaredSequence", "classify_boundary", "ProbeSet", "busemann_eval",
    "closed_form_point", "translate_cl_op", "pair_from_symmetrized_point", "make_line", "canonical_projection",
    "strain_classes",
]
