"""Backend adapters: HiGHS through highspy, and HiGHS through scipy.optimize.

Duals are reported as the derivative of the optimal objective with respect
to each row's right-hand side, for every backend.
"""

from __future__ import annotations

import math
import os
import time
from typing import Callable, Mapping

import numpy as np

from .model import (BINARY, CONTINUOUS, FEASIBLE_GAP, INFEASIBLE, OPTIMAL, TIMEOUT, UNBOUNDED,
                    BackendUnavailableError, ModelError, ModelHandle, SolveResult)

ENV_BACKEND = "HVDC_UC_BACKEND"
DEFAULT_BACKEND = "highs"


def _threads(model: ModelHandle) -> int | None:
    o = model.options
    return 1 if o.deterministic else o.threads


def _result(model: ModelHandle, status: str, x, obj, duals, gap, backend, t0, msg="") -> SolveResult:
    primal = None
    if x is not None:
        x = np.asarray(x, float)
        primal = dict(zip(model.var_names, x.tolist()))
    dual = None
    if duals is not None and not model.is_mip:
        dual = dict(zip(model.con_names, np.asarray(duals, float).tolist()))
    return SolveResult(status, obj, primal, dual, gap, backend, time.perf_counter() - t0, msg, x)


# ---------------------------------------------------------------------------
# highspy


def _solve_highs(model: ModelHandle) -> SolveResult:
    try:
        import highspy
    except ImportError as exc:  # pragma: no cover - declared dependency
        raise BackendUnavailableError(f"highspy is not importable: {exc}") from None
    t0 = time.perf_counter()
    c, A, lo, hi, lb, ub, isbin = model.to_arrays()
    csc = A.tocsc()
    h = highspy.Highs()
    o = model.options
    h.setOptionValue("output_flag", bool(o.verbose))
    h.setOptionValue("time_limit", float(o.time_limit))
    h.setOptionValue("mip_rel_gap", float(o.mip_gap))
    h.setOptionValue("random_seed", int(o.seed))
    th = _threads(model)
    if th:
        h.setOptionValue("threads", int(th))

    lp = highspy.HighsLp()
    lp.num_col_ = model.n_vars
    lp.num_row_ = model.n_constrs
    lp.col_cost_ = c
    lp.col_lower_ = lb
    lp.col_upper_ = ub
    lp.row_lower_ = lo
    lp.row_upper_ = hi
    lp.sense_ = highspy.ObjSense.kMaximize if model.sense == "max" else highspy.ObjSense.kMinimize
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = csc.indptr.astype(np.int32)
    lp.a_matrix_.index_ = csc.indices.astype(np.int32)
    lp.a_matrix_.value_ = csc.data
    if isbin.any():
        lp.integrality_ = [highspy.HighsVarType.kInteger if b else highspy.HighsVarType.kContinuous
                           for b in isbin]
    st = h.passModel(lp)
    if st == highspy.HighsStatus.kError:
        raise ModelError("HiGHS rejected the model")
    h.run()
    ms = h.getModelStatus()
    info = h.getInfo()
    S = highspy.HighsModelStatus
    has_x = info.primal_solution_status == 2  # kSolutionStatusFeasible
    gap = float(info.mip_gap) if model.is_mip else 0.0
    if ms == S.kOptimal:
        status = OPTIMAL
    elif ms == S.kInfeasible:
        status = INFEASIBLE
    elif ms in (S.kUnbounded, S.kUnboundedOrInfeasible):
        status = UNBOUNDED if ms == S.kUnbounded else INFEASIBLE
    elif ms in (S.kTimeLimit, S.kIterationLimit, S.kInterrupt, S.kSolutionLimit):
        status = FEASIBLE_GAP if has_x else TIMEOUT
    else:
        raise RuntimeError(f"HiGHS: {h.modelStatusToString(ms)}")
    if status in (INFEASIBLE, UNBOUNDED, TIMEOUT):
        return _result(model, status, None, None, None, None, "highs", t0, h.modelStatusToString(ms))
    sol = h.getSolution()
    x = np.array(sol.col_value)
    obj = float(info.objective_function_value)
    duals = np.array(sol.row_dual) if (not model.is_mip and sol.dual_valid) else None
    return _result(model, status, x, obj, duals, gap, "highs", t0, h.modelStatusToString(ms))


# ---------------------------------------------------------------------------
# scipy


def _solve_scipy(model: ModelHandle) -> SolveResult:
    try:
        from scipy.optimize import Bounds, LinearConstraint, linprog, milp
    except ImportError as exc:  # pragma: no cover
        raise BackendUnavailableError(f"scipy.optimize is not importable: {exc}") from None
    t0 = time.perf_counter()
    c, A, lo, hi, lb, ub, isbin = model.to_arrays()
    o = model.options
    sign = -1.0 if model.sense == "max" else 1.0
    if model.is_mip:
        opts = {"time_limit": float(o.time_limit), "mip_rel_gap": float(o.mip_gap), "disp": bool(o.verbose)}
        cons = [LinearConstraint(A, lo, hi)] if model.n_constrs else []
        res = milp(sign * c, constraints=cons, integrality=isbin.astype(int), bounds=Bounds(lb, ub),
                   options=opts)
        gap = getattr(res, "mip_gap", None)
        if res.status == 0:
            status = OPTIMAL
        elif res.status == 1:
            status = FEASIBLE_GAP if res.x is not None else TIMEOUT
        elif res.status == 2:
            status = INFEASIBLE
        elif res.status == 3:
            status = UNBOUNDED
        else:
            raise RuntimeError(f"scipy.milp: {res.message}")
        if res.x is None:
            return _result(model, status, None, None, None, None, "scipy", t0, res.message)
        return _result(model, status, res.x, sign * float(res.fun), None,
                       float(gap) if gap is not None else None, "scipy", t0, res.message)

    # continuous: split rows into <= / == blocks for linprog to obtain marginals
    eq = lo == hi
    up = ~eq & np.isfinite(hi)
    dn = ~eq & np.isfinite(lo)
    A_ub = None
    b_ub = None
    if up.any() or dn.any():
        from scipy.sparse import vstack
        A_ub = vstack([A[up], -A[dn]]).tocsr()
        b_ub = np.concatenate([hi[up], -lo[dn]])
    A_eq = A[eq] if eq.any() else None
    b_eq = lo[eq] if eq.any() else None
    bounds = list(zip([None if math.isinf(v) else v for v in lb], [None if math.isinf(v) else v for v in ub]))
    res = linprog(sign * c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
                  options={"time_limit": float(o.time_limit), "disp": bool(o.verbose)})
    if res.status == 0:
        status = OPTIMAL
    elif res.status == 1:
        status = TIMEOUT
    elif res.status == 2:
        status = INFEASIBLE
    elif res.status == 3:
        status = UNBOUNDED
    else:
        raise RuntimeError(f"scipy.linprog: {res.message}")
    if status != OPTIMAL:
        return _result(model, status, None, None, None, None, "scipy", t0, res.message)
    duals = np.zeros(model.n_constrs)
    n_up = int(up.sum())
    if A_ub is not None:
        mu = np.asarray(res.ineqlin.marginals)
        duals[up] += mu[:n_up]
        duals[dn] -= mu[n_up:]
    if A_eq is not None:
        duals[eq] = np.asarray(res.eqlin.marginals)
    return _result(model, status, res.x, sign * float(res.fun), sign * duals, 0.0, "scipy", t0, res.message)


BACKENDS: dict[str, Callable[[ModelHandle], SolveResult]] = {
    "highs": _solve_highs,
    "scipy": _solve_scipy,
}


def available_backends() -> list[str]:
    return sorted(BACKENDS)


def backend_name(name: str | None = None) -> str:
    name = name or os.environ.get(ENV_BACKEND) or DEFAULT_BACKEND
    if name not in BACKENDS:
        raise BackendUnavailableError(f"unknown solver backend '{name}' (available: {', '.join(available_backends())})")
    return name


def solve(model: ModelHandle, backend: str | None = None) -> SolveResult:
    """Solve with the named backend, or the one named by ``HVDC_UC_BACKEND``."""
    model.check()
    return BACKENDS[backend_name(backend)](model)


def fix_binaries_and_relax(model: ModelHandle, incumbent: Mapping[str, float] | SolveResult) -> ModelHandle:
    """Continuous copy of ``model`` with every binary fixed to its incumbent value."""
    values = incumbent.primal if isinstance(incumbent, SolveResult) else incumbent
    if values is None:
        raise ModelError("incumbent has no primal values")
    out = model.copy()
    for j, name in enumerate(out.var_names):
        if out.kind(j) != BINARY:
            continue
        if name not in values:
            raise ModelError(f"incumbent has no value for binary '{name}'")
        v = float(round(values[name]))
        out.set_kind(j, CONTINUOUS)
        out.set_bounds(j, v, v)
    return out
