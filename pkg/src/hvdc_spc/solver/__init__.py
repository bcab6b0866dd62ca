"""Thin, backend-neutral LP/MILP layer."""

from .backends import (DEFAULT_BACKEND, ENV_BACKEND, available_backends, backend_name, fix_binaries_and_relax,
                       solve)
from .lpformat import LPFormatError, read_lp, write_lp
from .model import (BINARY, CONTINUOUS, FEASIBLE_GAP, INFEASIBLE, OPTIMAL, TIMEOUT, UNBOUNDED,
                    BackendUnavailableError, ModelError, ModelHandle, SolveResult, SolverOptions)

__all__ = [
    "BINARY", "CONTINUOUS", "OPTIMAL", "FEASIBLE_GAP", "INFEASIBLE", "UNBOUNDED", "TIMEOUT",
    "DEFAULT_BACKEND", "ENV_BACKEND",
    "BackendUnavailableError", "LPFormatError", "ModelError", "ModelHandle", "SolveResult", "SolverOptions",
    "available_backends", "backend_name", "fix_binaries_and_relax", "read_lp", "solve", "write_lp",
]
