"""Ex-post checks of a solved schedule against the exact frequency model."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..dynamics import (DynamicScenario, GeneratorTrip, NotSettledError, OperatingPoint, extract_metrics,
                        hvdc_outage_event, simulate)
from ..metrics import AreaAggregates, FrequencyModelError, bilateral_nadir, metrics_ucs_supported, \
    metrics_ucs_supporting
from ..system import SystemSpec
from .config import ScenarioConfig
from .solution import FLAG_TOL, UcpSolution

REL_TOL = 1e-6
MC_TOL = 0.05  # McCormick tightness on R S
SHARE_TOL = 1e-9
SIM_MARGIN = 0.02  # Hz allowed above the nadir limit in simulation


@dataclass
class Violation:
    check: str
    area: str | None
    period: int | None
    value: float
    limit: float
    detail: str = ""

    def __str__(self) -> str:
        where = ", ".join(x for x in (self.area, f"t={self.period}" if self.period else None) if x)
        return f"{self.check} [{where}]: {self.value:.6g} vs {self.limit:.6g} {self.detail}".rstrip()


@dataclass
class AreaCheck:
    area: str
    period: int
    scheme: str
    nadir: float
    rocof: float
    ssfd: float
    rs: float
    share_model: float  # (sum of scheduled shares) / dP
    share_exact: float  # same with S replaced by 1/R
    supporting_nadir: float = 0.0  # largest deviation caused here by supporting a neighbour


@dataclass
class SimulationCheck:
    period: int
    event: str
    area: str
    simulated: float
    analytic: float | None
    limit: float

    @property
    def gap(self) -> float | None:
        return None if self.analytic is None else self.analytic - self.simulated


@dataclass
class VerificationReport:
    system: str
    mode: str
    hard: bool  # whether frequency limits are enforced (false for no_lim)
    areas: list[AreaCheck] = field(default_factory=list)
    simulations: list[SimulationCheck] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    notes: list[Violation] = field(default_factory=list)  # limit breaches in no_lim, reported only
    big_m: dict = field(default_factory=dict)
    structure: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def worst(self, attr: str) -> float:
        return max((getattr(c, attr) for c in self.areas), default=0.0)

    def summary(self) -> str:
        if self.passed:
            return f"{self.system}/{self.mode}: passed ({len(self.areas)} area-periods, {len(self.simulations)} simulations)"
        return f"{self.system}/{self.mode}: {len(self.violations)} violation(s); first: {self.first_violation}"

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "mode": self.mode,
            "passed": self.passed,
            "hard": self.hard,
            "violations": [asdict(v) for v in self.violations],
            "notes": [asdict(v) for v in self.notes],
            "areas": [asdict(c) for c in self.areas],
            "simulations": [dict(asdict(s), gap=s.gap) for s in self.simulations],
            "big_m": self.big_m,
            "structure": self.structure,
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["period", "event", "area", "simulated_hz", "analytic_hz", "gap_hz", "limit_hz"])
            for s in self.simulations:
                w.writerow([s.period, s.event, s.area, repr(s.simulated),
                            "" if s.analytic is None else repr(s.analytic),
                            "" if s.gap is None else repr(s.gap), repr(s.limit)])
        return path


def _over(value: float, limit: float) -> bool:
    return value > limit * (1.0 + REL_TOL) + 1e-12


def _neighbour_agg(spec: SystemSpec, sol: UcpSolution, a: str, b: str, t: int) -> tuple[AreaAggregates, float]:
    """Aggregates of neighbour ``b`` as seen from ``a``: converter droop only over the a-b links."""
    rc = sol.pair_rc(spec, a, b, t)
    ex = sol.aggregates(spec, b, t)
    return AreaAggregates(ex.M, ex.D, ex.Rg, rc, ex.Fg), rc


def analytic_nadirs(spec: SystemSpec, sol: UcpSolution, t: int) -> dict[str, float]:
    """Nadir (Hz) of every area for its own dimensioning incident in period ``t``."""
    out = {}
    for a in spec.area_ids:
        ar = spec.area(a)
        agg = sol.aggregates(spec, a, t)
        if sol.scheme_at(spec, a, t) == "bilateral":
            nbs = []
            for b in sol.supporters(spec, a, t):
                agg_b, rc = _neighbour_agg(spec, sol, a, b, t)
                nbs.append((agg_b, rc, spec.area(b).turbine_time_const))
            out[a], _ = bilateral_nadir(agg, ar.turbine_time_const, ar.dimensioning_incident, ar.f_base, nbs,
                                        ar.nadir_limit)
        else:
            out[a] = metrics_ucs_supported(agg, ar.turbine_time_const, ar.dimensioning_incident, ar.f_base).nadir
    return out


def _supporting_nadirs(spec: SystemSpec, sol: UcpSolution, t: int, own: dict[str, float]) -> dict[tuple[str, str], float]:
    """Deviation of supporting area b when supported area a loses its dimensioning unit."""
    out = {}
    for a in spec.area_ids:
        ar = spec.area(a)
        agg_a = sol.aggregates(spec, a, t)
        for b in sol.supporters(spec, a, t):
            rc = sol.pair_rc(spec, a, b, t)
            agg_b = sol.aggregates(spec, b, t)
            if sol.mode == "bilateral":
                nb, _ = _neighbour_agg(spec, sol, a, b, t)
                _, dfs = bilateral_nadir(agg_a, ar.turbine_time_const, ar.dimensioning_incident, ar.f_base,
                                         [(nb, rc, spec.area(b).turbine_time_const)], ar.nadir_limit)
                out[a, b] = dfs[0]
            else:
                out[a, b] = metrics_ucs_supporting(agg_b, rc, own[a], ar.dimensioning_incident, agg_a.M,
                                                   spec.area(b).turbine_time_const, ar.f_base).nadir
    return out


def _share_sums(spec: SystemSpec, sol: UcpSolution, a: str, t: int) -> tuple[float, float]:
    dP = spec.area(a).dimensioning_incident
    gov = sol.governor(spec, t)
    agg = sol.aggregates(spec, a, t)
    model = sum(sol.value("gs", g.id, t) for g in spec.generators_in(a) if gov[g.id])
    exact = sum(g.droop_gain * dP / agg.R for g in spec.generators_in(a) if gov[g.id])
    for b in sol.supporters(spec, a, t):
        for k in spec.links_between(a, b):
            model += sol.value("ps", k.id, a, t)
            exact += k.droop_gain * dP / agg.R
    return model / dP, exact / dP


def _structure(spec: SystemSpec, sol: UcpSolution, out: list[Violation]) -> dict:
    T = range(1, sol.periods + 1)
    worst_flag = 0.0
    for name, v in sol.values.items():
        kind = name.split("(", 1)[0]
        if kind in ("u", "y", "z", "vg", "vc", "ulcc", "w", "zb"):
            worst_flag = max(worst_flag, abs(v - round(v)))
    if worst_flag > FLAG_TOL:
        out.append(Violation("binary", None, None, worst_flag, FLAG_TOL))
    if sol.mode == "unilateral":
        for a in spec.area_ids:
            for b in spec.neighbors(a):
                for t in T:
                    if sol.vc(a, b, t) and sol.vc(b, a, t):
                        out.append(Violation("exclusivity", a, t, 2.0, 1.0, f"with {b}"))
    lcc_flips = 0
    cfg = ScenarioConfig.from_dict(sol.config) if sol.config else None
    block = cfg.lcc_block if cfg else 24
    for k in spec.converters:
        if k.technology != "LCC":
            continue
        fa, ta = spec.link_areas(k)
        for t0 in range(1, sol.periods + 1, block):
            signs = set()
            for t in range(t0, min(t0 + block, sol.periods + 1)):
                p = sol.value("pdc", k.id, t)
                for q in (p, p + sol.value("ps", k.id, ta, t), p - sol.value("ps", k.id, fa, t)):
                    if abs(q) > 1e-7:
                        signs.add(q > 0)
            if len(signs) > 1:
                lcc_flips += 1
                out.append(Violation("lcc_direction", None, t0, 1.0, 0.0, k.id))
    updown = 0
    for g in spec.generators:
        u = [sol.flag("u", g.id, t) for t in T]
        i = 0
        while i < len(u):
            j = i
            while j < len(u) and u[j] == u[i]:
                j += 1
            started_here = i > 0 or g.initial_status is not None and g.initial_status != u[i]
            need = g.t_on if u[i] else g.t_off
            if started_here and j < len(u) and j - i < need:
                updown += 1
                out.append(Violation("min_up" if u[i] else "min_down", g.area, i + 1, j - i, need, g.id))
            i = j
    return {"max_binary_deviation": worst_flag, "lcc_block_sign_changes": lcc_flips, "min_updown_breaches": updown}


def _big_m_audit(spec: SystemSpec, sol: UcpSolution, big_m: float, out: list[Violation]) -> dict:
    """Participating devices must see VS = S with the M bound slack; the others VS = 0."""
    worst_s, worst_dev, n_active = 0.0, 0.0, 0
    for a in spec.area_ids:
        for t in range(1, sol.periods + 1):
            S = sol.value("S", a, t)
            worst_s = max(worst_s, S)
            devs = [(sol.flag("vg", g.id, t), sol.value("VSg", g.id, t)) for g in spec.generators_in(a)]
            for b in spec.neighbors(a):
                devs += [(sol.vc(a, b, t), sol.value("VSc", k.id, a, t)) for k in spec.links_between(a, b)]
            for v, vs in devs:
                target = S if v else 0.0
                worst_dev = max(worst_dev, abs(vs - target))
                n_active += v
            if S >= big_m:
                out.append(Violation("big_m", a, t, S, big_m, "S reaches the big-M constant"))
    if worst_dev > 1e-6:
        out.append(Violation("big_m_product", None, None, worst_dev, 1e-6))
    return {"big_m": big_m, "max_S": worst_s, "margin": big_m - worst_s, "max_product_error": worst_dev,
            "active_products": n_active}


def _sim_key(point: OperatingPoint, event) -> tuple:
    flows = () if isinstance(event, GeneratorTrip) else tuple(sorted((k, v >= 0) for k, v in point.flows.items()))
    return (tuple(sorted(point.commitment.items())), tuple(sorted(point.governor.items())),
            tuple(sorted(point.spc.items())), flows, event)


def _simulated_nadirs(spec: SystemSpec, point: OperatingPoint, event, horizon: float, dt: float) -> dict[str, float]:
    # weakly damped schedules (few governors) may need a longer window to settle
    for _ in range(3):
        traj = simulate(DynamicScenario(spec, point, event, horizon, dt))
        try:
            return {a: extract_metrics(traj, a).nadir for a in spec.area_ids}
        except NotSettledError:
            horizon *= 2
    return {a: extract_metrics(traj, a, settle_rate=math.inf).nadir for a in spec.area_ids}


def verify_solution(spec: SystemSpec, cfg: ScenarioConfig | None, sol: UcpSolution, *,
                    sample: list[int] | None = None, simulate_events: bool = True,
                    dt: float = 1e-3, horizon: float = 30.0) -> VerificationReport:
    """Recompute the exact frequency metrics of every area and period and simulate sampled periods.

    ``sample`` selects the simulated periods (default: all). Limits are hard
    checks in the frequency-constrained modes; in ``no_lim`` breaches are
    collected in ``notes`` instead.
    """
    cfg = cfg or ScenarioConfig.from_dict(sol.config)
    hard = sol.mode != "no_lim"
    rep = VerificationReport(spec.name, sol.mode, hard)
    bucket = rep.violations if hard else rep.notes
    T = range(1, sol.periods + 1)

    for t in T:
        own = analytic_nadirs(spec, sol, t)
        sup = _supporting_nadirs(spec, sol, t, own) if hard else {}
        for a in spec.area_ids:
            ar = spec.area(a)
            agg = sol.aggregates(spec, a, t)
            rocof = ar.f_base * ar.dimensioning_incident / agg.M if agg.M > 0 else math.inf
            ssfd = ar.f_base * ar.dimensioning_incident / (agg.D + agg.Rg)
            rs = sol.value("R", a, t) * sol.value("S", a, t) if hard else 1.0
            sm, se = _share_sums(spec, sol, a, t) if hard else (1.0, 1.0)
            supp = max((v for (x, b), v in sup.items() if b == a), default=0.0)
            rep.areas.append(AreaCheck(a, t, sol.scheme_at(spec, a, t), own[a], rocof, ssfd, rs, sm, se, supp))
            for check, val, lim in (("nadir", own[a], ar.nadir_limit), ("rocof", rocof, ar.rocof_limit),
                                    ("ssfd", ssfd, ar.ssfd_limit), ("supporting_nadir", supp, ar.nadir_limit)):
                if _over(val, lim):
                    bucket.append(Violation(check, a, t, val, lim))
            if hard:
                if abs(rs - 1.0) > MC_TOL:
                    rep.violations.append(Violation("mccormick", a, t, rs, 1.0 + MC_TOL))
                if abs(sm - 1.0) > MC_TOL:
                    rep.violations.append(Violation("share_model", a, t, sm, 1.0 + MC_TOL))
                if abs(se - 1.0) > SHARE_TOL:
                    rep.violations.append(Violation("share_exact", a, t, se, 1.0 + SHARE_TOL))

    rep.structure = _structure(spec, sol, rep.violations)
    if hard:
        rep.big_m = _big_m_audit(spec, sol, cfg.big_m, rep.violations)

    if simulate_events:
        cache: dict[tuple, object] = {}
        periods = list(T) if sample is None else sorted(set(sample))
        for t in periods:
            point = sol.snapshot(spec, t)
            own = analytic_nadirs(spec, sol, t)
            sup = _supporting_nadirs(spec, sol, t, own)
            events = [("gen:" + a, GeneratorTrip(a, spec.dimensioning_incident(a))) for a in spec.area_ids]
            events += [("hvdc:" + k.id, hvdc_outage_event(spec, point, k.id)) for k in spec.converters]
            for label, ev in events:
                key = _sim_key(point, ev)
                if key not in cache:
                    cache[key] = _simulated_nadirs(spec, point, ev, horizon, dt)
                sim = cache[key]
                for a in spec.area_ids:
                    if sim[a] == 0.0:
                        continue
                    analytic = None
                    if isinstance(ev, GeneratorTrip):
                        analytic = own[a] if a == ev.area else sup.get((ev.area, a))
                    lim = spec.area(a).nadir_limit
                    rep.simulations.append(SimulationCheck(t, label, a, sim[a], analytic, lim))
                    if sim[a] > lim + SIM_MARGIN:
                        bucket.append(Violation("simulated_nadir", a, t, sim[a], lim + SIM_MARGIN, label))
    return rep


__all__ = ["AreaCheck", "FrequencyModelError", "SimulationCheck", "VerificationReport", "Violation",
           "analytic_nadirs", "verify_solution"]
