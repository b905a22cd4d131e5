"""List-coloring laboratory: exact choosability, universe compression and
randomized coloring of near-balanced complete multipartite graphs."""

from .errors import (
    InternalInconsistency,
    InvalidArgument,
    PreconditionViolation,
    ResourceLimit,
    StageFailure,
    VerificationFailure,
)
from .graph import Graph, PartStructure, chromatic_number_exact, complete_multipartite, saturate
from .matching import BipartiteIncidence, max_matching, minimal_deficient_set, sdr_coloring
from .solver import (
    chi_list_exact,
    find_acceptable_coloring,
    find_bad_assignment,
    is_choosable,
    verify_coloring,
)

__all__ = [
    "BipartiteIncidence",
    "Graph",
    "InternalInconsistency",
    "InvalidArgument",
    "PartStructure",
    "PreconditionViolation",
    "ResourceLimit",
    "StageFailure",
    "VerificationFailure",
    "chi_list_exact",
    "chromatic_number_exact",
    "complete_multipartite",
    "find_acceptable_coloring",
    "find_bad_assignment",
    "is_choosable",
    "max_matching",
    "minimal_deficient_set",
    "saturate",
    "sdr_coloring",
    "verify_coloring",
]
