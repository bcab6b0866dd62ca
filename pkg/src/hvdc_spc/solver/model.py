"""Solver-neutral container for linear and mixed-integer models."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

CONTINUOUS = "continuous"
BINARY = "binary"
SENSES = ("<=", ">=", "==")

# result status values
OPTIMAL = "optimal"
FEASIBLE_GAP = "feasible-gap"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIMEOUT = "timeout"


class ModelError(ValueError):
    pass


class BackendUnavailableError(RuntimeError):
    pass


@dataclass
class SolverOptions:
    time_limit: float = 1800.0  # seconds
    mip_gap: float = 1e-4  # relative
    threads: int | None = None  # None lets the backend decide
    seed: int = 0
    deterministic: bool = False  # single thread, fixed seed
    verbose: bool = False


@dataclass
class SolveResult:
    status: str
    objective: float | None
    primal: dict[str, float] | None
    dual: dict[str, float] | None  # d objective / d rhs, continuous models only
    mip_gap: float | None
    backend: str = ""
    runtime: float = 0.0
    message: str = ""
    x: np.ndarray | None = field(default=None, repr=False)

    @property
    def has_solution(self) -> bool:
        return self.primal is not None


class ModelHandle:
    """Variables, linear rows and a linear objective.

    Variables and rows are addressed by integer index or by unique name.
    Each row is ``sum(coef * x) <sense> rhs`` with one of ``<=``, ``>=``,
    ``==``.
    """

    def __init__(self, name: str = "model", sense: str = "min"):
        if sense not in ("min", "max"):
            raise ModelError("objective sense must be 'min' or 'max'")
        self.name = name
        self.sense = sense
        self.options = SolverOptions()
        self.var_names: list[str] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._kind: list[str] = []
        self._obj: dict[int, float] = {}
        self._vidx: dict[str, int] = {}
        self.con_names: list[str] = []
        self._rows: list[tuple[np.ndarray, np.ndarray]] = []
        self._csense: list[str] = []
        self._rhs: list[float] = []
        self._cidx: dict[str, int] = {}

    # variables -------------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf, kind: str = CONTINUOUS,
                obj: float = 0.0) -> int:
        if name in self._vidx:
            raise ModelError(f"duplicate variable '{name}'")
        if kind == BINARY:
            lb, ub = max(0.0, lb), min(1.0, ub)
        elif kind != CONTINUOUS:
            raise ModelError(f"unknown variable kind '{kind}'")
        if lb > ub:
            raise ModelError(f"variable '{name}' has empty bounds [{lb}, {ub}]")
        j = len(self.var_names)
        self.var_names.append(name)
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._kind.append(kind)
        self._vidx[name] = j
        if obj:
            self._obj[j] = float(obj)
        return j

    def var(self, name: str) -> int:
        try:
            return self._vidx[name]
        except KeyError:
            raise ModelError(f"unknown variable '{name}'") from None

    def has_var(self, name: str) -> bool:
        return name in self._vidx

    def kind(self, j: int) -> str:
        return self._kind[j]

    def bounds(self, j: int) -> tuple[float, float]:
        return self._lb[j], self._ub[j]

    def set_bounds(self, j: int, lb: float, ub: float) -> None:
        if lb > ub:
            raise ModelError(f"variable '{self.var_names[j]}' would get empty bounds")
        self._lb[j], self._ub[j] = float(lb), float(ub)

    def set_kind(self, j: int, kind: str) -> None:
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind '{kind}'")
        self._kind[j] = kind

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def is_mip(self) -> bool:
        return BINARY in self._kind

    # rows ----------------------------------------------------------------------
    def add_constr(self, name: str, terms: Mapping[int | str, float] | Iterable[tuple[int | str, float]],
                   sense: str, rhs: float) -> int:
        items = terms.items() if isinstance(terms, Mapping) else terms
        idx, val = [], []
        for k, c in items:
            idx.append(self.var(k) if isinstance(k, str) else int(k))
            val.append(float(c))
        return self.add_constr_arrays(name, idx, val, sense, rhs)

    def add_constr_arrays(self, name: str, idx, coef, sense: str, rhs: float) -> int:
        if name in self._cidx:
            raise ModelError(f"duplicate constraint '{name}'")
        if sense not in SENSES:
            raise ModelError(f"constraint '{name}': unknown sense '{sense}'")
        idx = np.asarray(idx, dtype=np.int64)
        coef = np.asarray(coef, dtype=float)
        if idx.shape != coef.shape:
            raise ModelError(f"constraint '{name}': index/coefficient length mismatch")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise ModelError(f"constraint '{name}' references an unregistered variable")
        if not math.isfinite(rhs) or not np.all(np.isfinite(coef)):
            raise ModelError(f"constraint '{name}' has a non-finite number")
        i = len(self.con_names)
        self.con_names.append(name)
        self._rows.append((idx, coef))
        self._csense.append(sense)
        self._rhs.append(float(rhs))
        self._cidx[name] = i
        return i

    def constr(self, name: str) -> int:
        try:
            return self._cidx[name]
        except KeyError:
            raise ModelError(f"unknown constraint '{name}'") from None

    def has_constr(self, name: str) -> bool:
        return name in self._cidx

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray, str, float]:
        idx, coef = self._rows[i]
        return idx, coef, self._csense[i], self._rhs[i]

    def set_rhs(self, i: int, rhs: float) -> None:
        self._rhs[i] = float(rhs)

    @property
    def n_constrs(self) -> int:
        return len(self.con_names)

    # objective -----------------------------------------------------------------
    def set_objective(self, terms: Mapping[int | str, float], sense: str | None = None) -> None:
        if sense is not None:
            if sense not in ("min", "max"):
                raise ModelError("objective sense must be 'min' or 'max'")
            self.sense = sense
        self._obj = {}
        for k, c in terms.items():
            j = self.var(k) if isinstance(k, str) else int(k)
            if not 0 <= j < self.n_vars:
                raise ModelError("objective references an unregistered variable")
            if c:
                self._obj[j] = self._obj.get(j, 0.0) + float(c)

    def add_objective(self, j: int, c: float) -> None:
        if c:
            self._obj[j] = self._obj.get(j, 0.0) + float(c)

    def objective_terms(self) -> dict[int, float]:
        return dict(self._obj)

    # export ----------------------------------------------------------------------
    def to_arrays(self):
        """(c, A as CSR, row_lo, row_hi, lb, ub, is_binary)."""
        n, m = self.n_vars, self.n_constrs
        c = np.zeros(n)
        for j, v in self._obj.items():
            c[j] = v
        if m:
            lens = np.fromiter((len(r[0]) for r in self._rows), dtype=np.int64, count=m)
            rows = np.repeat(np.arange(m), lens)
            cols = np.concatenate([r[0] for r in self._rows]) if lens.sum() else np.zeros(0, np.int64)
            vals = np.concatenate([r[1] for r in self._rows]) if lens.sum() else np.zeros(0)
            A = coo_matrix((vals, (rows, cols)), shape=(m, n)).tocsr()
            A.sum_duplicates()
        else:
            A = csr_matrix((0, n))
        rhs = np.asarray(self._rhs, float)
        sense = np.asarray(self._csense)
        lo = np.where(sense == "<=", -np.inf, rhs)
        hi = np.where(sense == ">=", np.inf, rhs)
        return (c, A, lo, hi, np.asarray(self._lb, float), np.asarray(self._ub, float),
                np.asarray(self._kind) == BINARY)

    def copy(self) -> "ModelHandle":
        return copy.deepcopy(self)

    def statistics(self) -> dict[str, int]:
        nb = sum(1 for k in self._kind if k == BINARY)
        return {"variables": self.n_vars, "binary": nb, "continuous": self.n_vars - nb,
                "constraints": self.n_constrs, "nonzeros": int(sum(len(r[0]) for r in self._rows))}

    def check(self) -> None:
        """Raise ModelError unless the model is well formed."""
        for j, k in enumerate(self._kind):
            if k == BINARY and (self._lb[j] < 0 or self._ub[j] > 1):
                raise ModelError(f"binary variable '{self.var_names[j]}' has bounds outside [0, 1]")
        for i, (idx, _) in enumerate(self._rows):
            if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
                raise ModelError(f"constraint '{self.con_names[i]}' references an unregistered variable")
