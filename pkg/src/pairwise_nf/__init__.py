"""Compile finite-state shared-memory programs into pairwise normal form and
certify each rewrite with a strong bisimulation."""

from .errors import PairwiseError
from .frontend import parse_program, parse_with_diagnostics, print_program, print_text
from .gstd import build_gstd
from .kripke import KripkeStructure, dump_kripke, export_dot, load_kripke
from .model import Program
from .transform import check_unique_incoming, transform

__version__ = "0.1.0"

__all__ = [
    "PairwiseError", "parse_program", "parse_with_diagnostics", "print_program", "print_text",
    "build_gstd", "KripkeStructure", "dump_kripke", "export_dot", "load_kripke", "Program",
    "check_unique_incoming", "transform",
]
