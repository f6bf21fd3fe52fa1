"""Schrödinger operators with delta-prime interactions whose eigenvalues
accumulate on a prescribed closed set, with exact and finite-difference
eigensolvers for their truncations and three companion constructions."""

from .cell_spectrum import CellSpec, eigenvalues as cell_eigenvalues, second_eigenvalue, tune_q
from .errors import *  # noqa: F401,F403
from .operator_assembly import Schedule, design
from .target_set import TargetSet, accumulation_distance, sample_sequence, validate
from .truncated_spectrum import TruncatedOperator, counting_function, eigenvalues_below
from .verify import verify

__version__ = "0.1.0"
