"""Rewriting a marked state graph into a pairwise program."""

from .dnf import DnfGuard, Literal, expand_dnf, split_disjunct
from .jsystem import extract_jsystem, pair_system, triple_system
from .phase2 import Intermediate, Layout, build_intermediate, initial_timestamps, invariant_violations
from .phase3 import Expanded, ExpansionStats, expand, prune, to_expanded
from .validate import PairwiseDiagnostic, validate_pairwise

__all__ = [
    "DnfGuard", "Literal", "expand_dnf", "split_disjunct",
    "extract_jsystem", "pair_system", "triple_system",
    "Intermediate", "Layout", "build_intermediate", "initial_timestamps", "invariant_violations",
    "Expanded", "ExpansionStats", "expand", "prune", "to_expanded",
    "PairwiseDiagnostic", "validate_pairwise",
]
