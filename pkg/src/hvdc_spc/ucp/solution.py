from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..dynamics import OperatingPoint
from ..metrics import AreaAggregates, aggregate_area
from ..solver import FEASIBLE_GAP, OPTIMAL, solve
from ..system import SystemSpec
from .build import UcpModel, vn

SOLUTION_FORMAT = "hvdc_spc.solution/1"
FLAG_TOL = 1e-6


class UcpSolveError(RuntimeError):
    def __init__(self, status: str, message: str, hint: str = ""):
        super().__init__(f"solver returned '{status}': {message}" + (f" ({hint})" if hint else ""))
        self.status = status
        self.hint = hint


@dataclass
class UcpSolution:
    system: str
    mode: str
    config: dict
    periods: int
    status: str
    objective: float
    mip_gap: float | None
    backend: str
    values: dict[str, float]
    duals: dict[str, float] | None = None
    diagnostics: dict = field(default_factory=dict)
    runtime: float = field(default=0.0, compare=False)

    # raw access ----------------------------------------------------------------
    def value(self, kind: str, *idx) -> float:
        return float(self.values.get(vn(kind, *idx), 0.0))

    def flag(self, kind: str, *idx) -> int:
        return int(round(self.value(kind, *idx)))

    def series(self, kind: str, *idx) -> list[float]:
        return [self.value(kind, *idx, t) for t in range(1, self.periods + 1)]

    # operating state ---------------------------------------------------------------
    def commitment(self, spec: SystemSpec, t: int) -> dict[str, int]:
        return {g.id: self.flag("u", g.id, t) for g in spec.generators}

    def governor(self, spec: SystemSpec, t: int) -> dict[str, int]:
        """Generators with governor response in period ``t``.

        Without participation flags (mode ``no_lim``) every unit that holds
        reserve is taken as responding.
        """
        if self.mode == "no_lim":
            return {g.id: int(self.value("gs", g.id, t) > FLAG_TOL and self.flag("u", g.id, t) == 1)
                    for g in spec.generators}
        return {g.id: self.flag("vg", g.id, t) for g in spec.generators}

    def vc(self, a: str, b: str, t: int) -> int:
        return self.flag("vc", a, b, t)

    def spc(self, spec: SystemSpec, t: int) -> dict[str, str]:
        out = {}
        for k in spec.converters:
            fa, ta = spec.link_areas(k)
            to_a, to_b = self.vc(ta, fa, t), self.vc(fa, ta, t)
            if self.mode == "bilateral" and to_a and to_b:
                out[k.id] = "both"
            elif to_a:
                out[k.id] = ta
            elif to_b:
                out[k.id] = fa
        return out

    def flows(self, spec: SystemSpec, t: int) -> dict[str, float]:
        return {k.id: self.value("pdc", k.id, t) for k in spec.converters}

    def snapshot(self, spec: SystemSpec, t: int) -> OperatingPoint:
        if not 1 <= t <= self.periods:
            raise IndexError(f"period {t} outside 1..{self.periods}")
        return OperatingPoint(self.commitment(spec, t), self.governor(spec, t), self.spc(spec, t),
                              self.flows(spec, t))

    def pair_rc(self, spec: SystemSpec, a: str, b: str, t: int) -> float:
        """Converter droop supporting ``a`` over the a-b links in period ``t``."""
        if not self.vc(a, b, t):
            return 0.0
        return sum(k.droop_gain for k in spec.links_between(a, b))

    def aggregates(self, spec: SystemSpec, a: str, t: int) -> AreaAggregates:
        """Aggregates recomputed from the rounded flags; Rc counts links supporting ``a``."""
        part = dict(self.governor(spec, t))
        for k in spec.links_at(a):
            fa, ta = spec.link_areas(k)
            b = ta if fa == a else fa
            part[k.id] = self.vc(a, b, t)
        return aggregate_area(spec, self.commitment(spec, t), part, a)

    def supporters(self, spec: SystemSpec, a: str, t: int) -> list[str]:
        return [b for b in spec.neighbors(a) if self.vc(a, b, t)]

    def scheme_at(self, spec: SystemSpec, a: str, t: int) -> str:
        if not self.supporters(spec, a, t):
            return "none"
        return "bilateral" if self.mode == "bilateral" else "unilateral"

    # files ---------------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": SOLUTION_FORMAT,
            "system": self.system,
            "mode": self.mode,
            "config": self.config,
            "periods": self.periods,
            "status": self.status,
            "objective": self.objective,
            "mip_gap": self.mip_gap,
            "backend": self.backend,
            "diagnostics": self.diagnostics,
            "primal": dict(sorted(self.values.items())),
            "duals": dict(sorted(self.duals.items())) if self.duals is not None else None,
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def from_dict(cls, d: dict) -> "UcpSolution":
        if d.get("format") != SOLUTION_FORMAT:
            raise ValueError("not a solution file")
        return cls(d["system"], d["mode"], d["config"], int(d["periods"]), d["status"], float(d["objective"]),
                   d.get("mip_gap"), d.get("backend", ""), {k: float(v) for k, v in d["primal"].items()},
                   d.get("duals"), d.get("diagnostics", {}))

    @classmethod
    def load(cls, path: str | Path) -> "UcpSolution":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _diagnose(model: UcpModel, sol: UcpSolution) -> dict:
    L = model.layout
    spec = L.spec
    worst_flag = 0.0
    for j, name in enumerate(model.var_names):
        if model.kind(j) == "binary":
            v = sol.values[name]
            worst_flag = max(worst_flag, abs(v - round(v)))
    diag = {"max_binary_deviation": worst_flag, "statistics": model.statistics()}
    if not L.cfg.frequency_constrained:
        return diag
    agg_dev = 0.0
    rs = []
    for a in spec.area_ids:
        for t in L.T:
            ex = sol.aggregates(spec, a, t)
            for key, val in (("M", ex.M), ("Rg", ex.Rg), ("Fg", ex.Fg), ("Rc", ex.Rc)):
                agg_dev = max(agg_dev, abs(sol.value(key, a, t) - val))
            rs.append(sol.value("R", a, t) * sol.value("S", a, t))
    diag.update({
        "max_aggregate_deviation": agg_dev,
        "rs_min": min(rs),
        "rs_max": max(rs),
        "segments": L.cfg.segments,
        "segmentation": L.cfg.segmentation,
        "breakpoints": {a: [float(x) for x in s.r] for a, s in L.seg.items()},
        "relaxation_worst_gap": {a: s.worst_gap() for a, s in L.seg.items()},
        "plane_big_m": dict(L.plane_big_m),
    })
    return diag


def solve_ucp(model: UcpModel, backend: str | None = None) -> UcpSolution:
    """Solve the MILP and map the primal values back to named decisions."""
    res = solve(model, backend)
    if res.status not in (OPTIMAL, FEASIBLE_GAP):
        hint = ""
        if res.status == "infeasible":
            hint = "write the model with solver.write_lp and check the frequency and reserve rows"
        raise UcpSolveError(res.status, res.message, hint)
    L = model.layout
    sol = UcpSolution(L.spec.name, L.cfg.mode, L.cfg.to_dict(), L.periods, res.status, float(res.objective),
                      res.mip_gap, res.backend, res.primal, None, {}, res.runtime)
    sol.diagnostics = _diagnose(model, sol)
    return sol
