"""Frequency-constrained unit commitment as a MILP."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..nadir import BILATERAL, UNILATERAL, NadirHyperplane
from ..solver import BINARY, ModelHandle
from ..system import SystemSpec
from .config import MissingHyperplaneError, ScenarioConfig, ScenarioError


class StructuralInfeasibilityError(ScenarioError):
    def __init__(self, area: str, reason: str):
        super().__init__(f"area '{area}': {reason}")
        self.area = area


def vn(kind: str, *idx) -> str:
    """Variable/row name in LP-safe form, e.g. ``g(A1G01,3)``."""
    return f"{kind}({','.join(str(i) for i in idx)})"


@dataclass
class Segmentation:
    r: np.ndarray  # R breakpoints, increasing, length n+1
    s: np.ndarray  # S breakpoints = 1/r reversed, increasing

    @property
    def n(self) -> int:
        return len(self.r) - 1

    def cells(self) -> list[tuple[int, int]]:
        """(x, y) segment pairs whose box meets the curve R S = 1 in more than a corner.

        Every other pair is infeasible under its own envelope (or only admits a
        corner shared with a kept pair), so dropping it leaves the relaxation
        unchanged.
        """
        out = []
        for x in range(self.n):
            for y in range(self.n):
                lo = self.r[x] * self.s[y]
                hi = self.r[x + 1] * self.s[y + 1]
                if lo < 1.0 - 1e-12 and hi > 1.0 + 1e-12:
                    out.append((x, y))
        return out

    def worst_gap(self) -> float:
        """Largest relative error |R S - 1| the relaxation admits on a diagonal cell."""
        ratio = self.r[1:] / self.r[:-1]
        return float(np.max((ratio - 1.0) ** 2 / (4.0 * ratio)))


def segmentation(lo: float, hi: float, n: int, kind: str = "geometric") -> Segmentation:
    if not 0 < lo < hi:
        raise ScenarioError(f"bad droop range [{lo}, {hi}] for the reciprocal relaxation")
    if kind == "geometric":
        r = lo * (hi / lo) ** (np.arange(n + 1) / n)
    else:
        r = np.linspace(lo, hi, n + 1)
    r[0], r[-1] = lo, hi
    return Segmentation(r, np.sort(1.0 / r))


@dataclass
class UcpLayout:
    spec: SystemSpec
    cfg: ScenarioConfig
    periods: int
    pairs: list[tuple[str, str]] = field(default_factory=list)  # ordered (supported, supporting)
    seg: dict[str, Segmentation] = field(default_factory=dict)
    plane_big_m: dict[str, float] = field(default_factory=dict)
    or_areas: list[str] = field(default_factory=list)  # areas carrying the scheme switch binary

    @property
    def T(self) -> range:
        return range(1, self.periods + 1)

    def day(self, t: int) -> int:
        return (t - 1) // 24

    def lcc_blk(self, t: int) -> int:
        return (t - 1) // self.cfg.lcc_block


class UcpModel(ModelHandle):
    layout: UcpLayout


def _lin_min(terms: dict[int, float], model: ModelHandle) -> float:
    out = 0.0
    for j, c in terms.items():
        lb, ub = model.bounds(j)
        out += c * (lb if c > 0 else ub)
    return out


def _pair_droop(spec: SystemSpec, a: str, b: str) -> float:
    return sum(k.droop_gain for k in spec.links_between(a, b))


def check_structure(spec: SystemSpec, cfg: ScenarioConfig) -> None:
    """Fail early when an area cannot meet its bounds even with every unit online."""
    if not cfg.frequency_constrained:
        return
    for a in spec.areas:
        gens = spec.generators_in(a.id)
        dP = a.dimensioning_incident
        m_max = sum(2 * g.inertia * g.p_max for g in gens)
        if m_max < a.f_base * dP / a.rocof_limit:
            raise StructuralInfeasibilityError(a.id, f"RoCoF bound needs inertia {a.f_base * dP / a.rocof_limit:g}, "
                                                     f"full commitment gives {m_max:g}")
        r_max = sum(g.droop_gain for g in gens)
        if r_max < a.f_base * dP / a.ssfd_limit - a.damping:
            raise StructuralInfeasibilityError(a.id, "steady-state bound exceeds the fleet droop")
        if r_max + sum(k.droop_gain for k in spec.links_at(a.id)) < 1.0:
            raise StructuralInfeasibilityError(a.id, "total droop cannot reach 1 pu")
        # shares are proportional to dP, so the area's total reserve never exceeds it
        if spec.hvdc_outage_floor(a.id) > dP:
            raise StructuralInfeasibilityError(a.id, f"HVDC outage floor {spec.hvdc_outage_floor(a.id):g} exceeds "
                                                     f"the dimensioning incident {dP:g}")


def _check_planes(spec: SystemSpec, cfg: ScenarioConfig) -> None:
    for key in cfg.required_planes(spec.area_ids, lambda a: bool(spec.neighbors(a))):
        plane = cfg.planes.get(key)
        if plane is None:
            raise MissingHyperplaneError(f"no {key[1]} nadir plane for area '{key[0]}'")
        if plane.diagnostics.get("false_feasible_count", 0) != 0:
            raise ScenarioError(f"{key[1]} plane of area '{key[0]}' is not certified")
        if key[1] == BILATERAL and sorted(plane.neighbours) != spec.neighbors(key[0]):
            raise ScenarioError(f"bilateral plane of area '{key[0]}' was fitted for neighbours "
                                f"{plane.neighbours}, system has {spec.neighbors(key[0])}")


def build_ucp(spec: SystemSpec, cfg: ScenarioConfig) -> UcpModel:
    """Assemble the scenario's MILP. Variable and row names follow ``vn``."""
    periods = cfg.horizon or spec.horizon
    if periods < 1 or periods > spec.horizon:
        raise ScenarioError(f"horizon {periods} outside 1..{spec.horizon}")
    cfg.with_solver_defaults(periods)
    check_structure(spec, cfg)
    _check_planes(spec, cfg)

    m = UcpModel(f"ucp_{spec.name}_{cfg.mode}")
    m.options = cfg.solver
    L = UcpLayout(spec, cfg, periods)
    m.layout = L
    T = list(L.T)
    add, con = m.add_var, m.add_constr

    # generators ------------------------------------------------------------
    for g in spec.generators:
        for t in T:
            add(vn("u", g.id, t), kind=BINARY)
            add(vn("y", g.id, t), kind=BINARY, obj=g.cost_startup)
            add(vn("z", g.id, t), kind=BINARY, obj=g.cost_shutdown)
            add(vn("g", g.id, t), 0.0, g.p_max, obj=g.cost_energy)
            add(vn("gs", g.id, t), 0.0, g.p_max, obj=g.cost_reserve)
        for t in T:
            u, gg, y, z = (m.var(vn(k, g.id, t)) for k in ("u", "g", "y", "z"))
            con(vn("pmin", g.id, t), {gg: 1.0, u: -g.p_min}, ">=", 0.0)
            con(vn("pmax", g.id, t), {gg: 1.0, u: -g.p_max}, "<=", 0.0)
            con(vn("head", g.id, t), {gg: 1.0, m.var(vn("gs", g.id, t)): 1.0, u: -g.p_max}, "<=", 0.0)
            if t > 1:
                gp, up = m.var(vn("g", g.id, t - 1)), m.var(vn("u", g.id, t - 1))
                con(vn("rup", g.id, t), {gg: 1.0, gp: -1.0}, "<=", g.ramp_up)
                con(vn("rdn", g.id, t), {gp: 1.0, gg: -1.0}, "<=", g.ramp_down)
                con(vn("start", g.id, t), {y: 1.0, u: -1.0, up: 1.0}, ">=", 0.0)
                con(vn("stop", g.id, t), {z: 1.0, up: -1.0, u: 1.0}, ">=", 0.0)
            elif g.initial_status is not None:
                u0 = float(g.initial_status)
                con(vn("start", g.id, t), {y: 1.0, u: -1.0}, ">=", -u0)
                con(vn("stop", g.id, t), {z: 1.0, u: 1.0}, ">=", u0)
            on_end = min(t + g.t_on - 1, periods)
            if on_end > t:
                row = {y: 1.0}
                row.update({m.var(vn("z", g.id, s)): 1.0 for s in range(t + 1, on_end + 1)})
                con(vn("minup", g.id, t), row, "<=", 1.0)
            off_end = min(t + g.t_off - 1, periods)
            if off_end > t:
                row = {z: 1.0}
                row.update({m.var(vn("y", g.id, s)): 1.0 for s in range(t + 1, off_end + 1)})
                con(vn("mindn", g.id, t), row, "<=", 1.0)

    # renewables and loads ----------------------------------------------------
    for r in spec.res:
        for t in T:
            add(vn("wc", r.id, t), 0.0, spec.res_series[r.id][t - 1], obj=r.curtail_value)
    for ld in spec.loads:
        for t in T:
            j = add(vn("ds", ld.id, t), 0.0, math.inf, obj=ld.voll)
            con(vn("shed", ld.id, t), {j: 1.0}, "<=", spec.load_series[ld.id][t - 1])

    # network -------------------------------------------------------------------
    refs = {}
    for b in spec.buses:
        refs.setdefault(b.area, b.id)
    for b in spec.buses:
        for t in T:
            fixed = refs[b.area] == b.id
            add(vn("th", b.id, t), 0.0 if fixed else -math.inf, 0.0 if fixed else math.inf)
    for ln in spec.ac_lines:
        for t in T:
            row = {m.var(vn("th", ln.from_bus, t)): ln.susceptance, m.var(vn("th", ln.to_bus, t)): -ln.susceptance}
            con(vn("acf", ln.id, t), row, "<=", ln.limit)
            con(vn("acr", ln.id, t), row, ">=", -ln.limit)
    for k in spec.converters:
        if k.technology == "LCC":
            for blk in sorted({L.lcc_blk(t) for t in T}):
                add(vn("ulcc", k.id, blk), kind=BINARY)
        for t in T:
            p = add(vn("pdc", k.id, t), -k.capacity, k.capacity)
            if k.technology == "LCC":
                ul = m.var(vn("ulcc", k.id, L.lcc_blk(t)))
                con(vn("lccu", k.id, t), {p: 1.0, ul: -k.capacity}, "<=", 0.0)
                con(vn("lccl", k.id, t), {p: 1.0, ul: -k.capacity}, ">=", -k.capacity)

    gens_at: dict[str, list] = {}
    for g in spec.generators:
        gens_at.setdefault(g.bus, []).append(g)
    for b in spec.buses:
        for t in T:
            row: dict[int, float] = {}
            rhs = 0.0
            for g in gens_at.get(b.id, ()):
                row[m.var(vn("g", g.id, t))] = -1.0
            for r in spec.res:
                if r.bus == b.id:
                    row[m.var(vn("wc", r.id, t))] = 1.0
                    rhs += spec.res_series[r.id][t - 1]
            for ld in spec.loads:
                if ld.bus == b.id:
                    row[m.var(vn("ds", ld.id, t))] = -1.0
                    rhs -= spec.load_series[ld.id][t - 1]
            for ln in spec.ac_lines:
                if b.id in (ln.from_bus, ln.to_bus):
                    other = ln.to_bus if ln.from_bus == b.id else ln.from_bus
                    jb, jo = m.var(vn("th", b.id, t)), m.var(vn("th", other, t))
                    row[jb] = row.get(jb, 0.0) + ln.susceptance
                    row[jo] = row.get(jo, 0.0) - ln.susceptance
            for k in spec.converters:
                inc = spec.incidence(b.id, k)
                if inc:
                    row[m.var(vn("pdc", k.id, t))] = float(inc)
            con(vn("bal", b.id, t), row, "==", rhs)

    # reserves ------------------------------------------------------------------
    for a in spec.areas:
        gs = [g for g in spec.generators_in(a.id)]
        floor = spec.hvdc_outage_floor(a.id)
        for t in T:
            if floor > 0:
                con(vn("dcres", a.id, t), {m.var(vn("gs", g.id, t)): 1.0 for g in gs}, ">=", floor)
            if not cfg.frequency_constrained:
                need = (cfg.min_reserve or {}).get(a.id, a.dimensioning_incident)
                con(vn("minres", a.id, t), {m.var(vn("gs", g.id, t)): 1.0 for g in gs}, ">=", need)

    if cfg.frequency_constrained:
        _frequency_block(m, L)
    return m


def _frequency_block(m: UcpModel, L: UcpLayout) -> None:
    spec, cfg = L.spec, L.cfg
    T = list(L.T)
    add, con = m.add_var, m.add_constr

    # participation flags
    for g in spec.generators:
        for t in T:
            v = add(vn("vg", g.id, t), kind=BINARY)
            con(vn("vgu", g.id, t), {v: 1.0, m.var(vn("u", g.id, t)): -1.0}, "<=", 0.0)
            if cfg.reserve_granularity == "daily" and t > 1 and L.day(t) == L.day(t - 1):
                con(vn("vgday", g.id, t), {v: 1.0, m.var(vn("vg", g.id, t - 1)): -1.0}, "==", 0.0)
    if cfg.spc:
        for a in spec.area_ids:
            for b in spec.neighbors(a):
                L.pairs.append((a, b))
        for a, b in L.pairs:
            for t in T:
                add(vn("vc", a, b, t), kind=BINARY)
        for a, b in L.pairs:
            for t in T:
                v = m.var(vn("vc", a, b, t))
                if a < b:
                    w = m.var(vn("vc", b, a, t))
                    if cfg.mode == UNILATERAL:
                        con(vn("excl", a, b, t), {v: 1.0, w: 1.0}, "<=", 1.0)
                    else:
                        con(vn("sym", a, b, t), {v: 1.0, w: -1.0}, "==", 0.0)
                if cfg.reserve_granularity == "daily" and t > 1 and L.day(t) == L.day(t - 1):
                    con(vn("vcday", a, b, t), {v: 1.0, m.var(vn("vc", a, b, t - 1)): -1.0}, "==", 0.0)

    # aggregates and static bounds
    for a in spec.areas:
        gens = spec.generators_in(a.id)
        links = spec.links_at(a.id)
        m_max = sum(2 * g.inertia * g.p_max for g in gens)
        rg_max = sum(g.droop_gain for g in gens)
        fg_max = sum(g.droop_gain * g.turbine_fraction for g in gens)
        rc_max = sum(k.droop_gain for k in links) if cfg.spc else 0.0
        r_lo = max(1.0, a.f_base * a.dimensioning_incident / a.ssfd_limit - a.damping)
        # same breakpoints in every frequency-constrained mode, so the modes nest exactly
        L.seg[a.id] = segmentation(r_lo, rg_max + sum(k.droop_gain for k in links), cfg.segments, cfg.segmentation)
        for t in T:
            M = add(vn("M", a.id, t), 0.0, m_max)
            Rg = add(vn("Rg", a.id, t), 0.0, rg_max)
            Fg = add(vn("Fg", a.id, t), 0.0, fg_max)
            Rc = add(vn("Rc", a.id, t), 0.0, rc_max)
            R = add(vn("R", a.id, t), 0.0, rg_max + rc_max)
            add(vn("S", a.id, t), 0.0, math.inf)
            row = {M: 1.0}
            row.update({m.var(vn("u", g.id, t)): -2.0 * g.inertia * g.p_max for g in gens})
            con(vn("defM", a.id, t), row, "==", 0.0)
            row = {Rg: 1.0}
            row.update({m.var(vn("vg", g.id, t)): -g.droop_gain for g in gens})
            con(vn("defRg", a.id, t), row, "==", 0.0)
            row = {Fg: 1.0}
            row.update({m.var(vn("vg", g.id, t)): -g.droop_gain * g.turbine_fraction for g in gens})
            con(vn("defFg", a.id, t), row, "==", 0.0)
            row = {Rc: 1.0}
            if cfg.spc:
                for b in spec.neighbors(a.id):
                    row[m.var(vn("vc", a.id, b, t))] = -_pair_droop(spec, a.id, b)
            con(vn("defRc", a.id, t), row, "==", 0.0)
            con(vn("defR", a.id, t), {R: 1.0, Rg: -1.0, Rc: -1.0}, "==", 0.0)
            con(vn("rocof", a.id, t), {M: 1.0}, ">=", a.f_base * a.dimensioning_incident / a.rocof_limit)
            con(vn("ssfd", a.id, t), {Rg: 1.0}, ">=", a.f_base * a.dimensioning_incident / a.ssfd_limit - a.damping)
            con(vn("rmin", a.id, t), {R: 1.0}, ">=", 1.0)

    _nadir_rows(m, L)
    _mccormick(m, L)
    _reserve_shares(m, L)


def _plane_terms(m: UcpModel, plane: NadirHyperplane, a: str, t: int, spec: SystemSpec) -> tuple[dict, float]:
    """Row ``terms >= rhs`` equivalent to ``lhs >= plane(rhs axes)`` at (a, t)."""
    row: dict[int, float] = {}

    def put(name: str, c: float):
        j = m.var(name)
        row[j] = row.get(j, 0.0) + c

    if plane.scheme == UNILATERAL:
        # F = Fg + Rc, R = Rg + Rc
        put(vn("Fg", a, t), 1.0)
        put(vn("Rc", a, t), 1.0)
        put(vn("Rg", a, t), -plane.coefficients["R"])
        put(vn("Rc", a, t), -plane.coefficients["R"])
        put(vn("M", a, t), -plane.coefficients["M"])
    else:
        put(vn("Fg", a, t), 1.0)
        for ax, c in plane.coefficients.items():
            if "@" not in ax:
                put(vn(ax, a, t), -c)
                continue
            kind, b = ax.split("@", 1)
            if kind == "Rc":
                if m.has_var(vn("vc", a, b, t)):
                    put(vn("vc", a, b, t), -c * _pair_droop(spec, a, b))
            else:
                put(vn(kind, b, t), -c)
    return {j: c for j, c in row.items() if c != 0.0}, plane.intercept


def _nadir_rows(m: UcpModel, L: UcpLayout) -> None:
    spec, cfg = L.spec, L.cfg
    for a in spec.area_ids:
        nbs = spec.neighbors(a)
        switch = cfg.mode == BILATERAL and bool(nbs)
        if switch:
            L.or_areas.append(a)
        for t in L.T:
            if cfg.mode == BILATERAL and not nbs:
                row, rhs = _plane_terms(m, cfg.planes[(a, BILATERAL)], a, t, spec)
                m.add_constr(vn("nadir", a, t), row, ">=", rhs)
                continue
            row, rhs = _plane_terms(m, cfg.planes[(a, UNILATERAL)], a, t, spec)
            if not switch:
                m.add_constr(vn("nadir", a, t), row, ">=", rhs)
                continue
            # bilateral scheme switch: z = 1 iff any link of the area runs the bilateral scheme.
            # z = 0 keeps the single-area plane (Rc = 0 then); z = 1 uses the bilateral plane.
            z = m.add_var(vn("zb", a, t), kind=BINARY)
            vcs = [m.var(vn("vc", a, b, t)) for b in nbs]
            for b, v in zip(nbs, vcs):
                m.add_constr(vn("zbl", a, b, t), {z: 1.0, v: -1.0}, ">=", 0.0)
            up = {z: 1.0}
            up.update({v: -1.0 for v in vcs})
            m.add_constr(vn("zbu", a, t), up, "<=", 0.0)
            big_u = max(0.0, rhs - _lin_min(row, m)) + 1.0
            m.add_constr(vn("nadir", a, t), {**row, z: big_u}, ">=", rhs)
            brow, brhs = _plane_terms(m, cfg.planes[(a, BILATERAL)], a, t, spec)
            big_b = max(0.0, brhs - _lin_min(brow, m)) + 1.0
            L.plane_big_m[a] = max(L.plane_big_m.get(a, 0.0), big_u, big_b)
            m.add_constr(vn("nadirb", a, t), {**brow, z: -big_b}, ">=", brhs - big_b)


def _mccormick(m: UcpModel, L: UcpLayout) -> None:
    add, con = m.add_var, m.add_constr
    for a in L.spec.area_ids:
        sg = L.seg[a]
        for t in L.T:
            cells = sg.cells()
            Rv, Sv, Wv = {}, {}, {}
            for x, y in cells:
                Rv[x, y] = add(vn("Rxy", a, x + 1, y + 1, t), 0.0, sg.r[x + 1])
                Sv[x, y] = add(vn("Sxy", a, x + 1, y + 1, t), 0.0, sg.s[y + 1])
                Wv[x, y] = add(vn("w", a, x + 1, y + 1, t), kind=BINARY)
            rows = {k: {} for k in ("mc1", "mc2", "mc3", "mc4")}
            for x, y in cells:
                rl, rh, sl, sh = sg.r[x], sg.r[x + 1], sg.s[y], sg.s[y + 1]
                rows["mc1"].update({Rv[x, y]: sl, Sv[x, y]: rl, Wv[x, y]: -sl * rl})
                rows["mc2"].update({Rv[x, y]: sh, Sv[x, y]: rh, Wv[x, y]: -sh * rh})
                rows["mc3"].update({Rv[x, y]: sh, Sv[x, y]: rl, Wv[x, y]: -sh * rl})
                rows["mc4"].update({Rv[x, y]: sl, Sv[x, y]: rh, Wv[x, y]: -sl * rh})
                con(vn("rlo", a, x + 1, y + 1, t), {Rv[x, y]: 1.0, Wv[x, y]: -rl}, ">=", 0.0)
                con(vn("rhi", a, x + 1, y + 1, t), {Rv[x, y]: 1.0, Wv[x, y]: -rh}, "<=", 0.0)
                con(vn("slo", a, x + 1, y + 1, t), {Sv[x, y]: 1.0, Wv[x, y]: -sl}, ">=", 0.0)
                con(vn("shi", a, x + 1, y + 1, t), {Sv[x, y]: 1.0, Wv[x, y]: -sh}, "<=", 0.0)
            con(vn("mc1", a, t), rows["mc1"], "<=", 1.0)
            con(vn("mc2", a, t), rows["mc2"], "<=", 1.0)
            con(vn("mc3", a, t), rows["mc3"], ">=", 1.0)
            con(vn("mc4", a, t), rows["mc4"], ">=", 1.0)
            row = {m.var(vn("R", a, t)): 1.0}
            row.update({Rv[c]: -1.0 for c in cells})
            con(vn("sumR", a, t), row, "==", 0.0)
            row = {m.var(vn("S", a, t)): 1.0}
            row.update({Sv[c]: -1.0 for c in cells})
            con(vn("sumS", a, t), row, "==", 0.0)
            con(vn("sumw", a, t), {Wv[c]: 1.0 for c in cells}, "==", 1.0)


def _reserve_shares(m: UcpModel, L: UcpLayout) -> None:
    spec, cfg = L.spec, L.cfg
    add, con = m.add_var, m.add_constr
    BM = cfg.big_m
    for a in spec.areas:
        dP = a.dimensioning_incident
        for t in L.T:
            S = m.var(vn("S", a.id, t))
            for g in spec.generators_in(a.id):
                vs = add(vn("VSg", g.id, t), 0.0, math.inf)
                v = m.var(vn("vg", g.id, t))
                con(vn("gsdef", g.id, t), {m.var(vn("gs", g.id, t)): 1.0, vs: -g.droop_gain * dP}, "==", 0.0)
                con(vn("vsgM", g.id, t), {vs: 1.0, v: -BM}, "<=", 0.0)
                con(vn("vsgS", g.id, t), {vs: 1.0, S: -1.0}, "<=", 0.0)
                con(vn("vsgL", g.id, t), {vs: 1.0, S: -1.0, v: -BM}, ">=", -BM)
    if not cfg.spc:
        return
    for k in spec.converters:
        fa, ta = spec.link_areas(k)
        cap = k.capacity * (1.0 + (k.overload_factor if cfg.overload else 0.0))
        for a, b in ((ta, fa), (fa, ta)):
            dP = spec.area(a).dimensioning_incident
            for t in L.T:
                S = m.var(vn("S", a, t))
                v = m.var(vn("vc", a, b, t))
                vs = add(vn("VSc", k.id, a, t), 0.0, math.inf)
                ps = add(vn("ps", k.id, a, t), 0.0, math.inf)
                con(vn("psdef", k.id, a, t), {ps: 1.0, vs: -k.droop_gain * dP}, "==", 0.0)
                con(vn("vscM", k.id, a, t), {vs: 1.0, v: -BM}, "<=", 0.0)
                con(vn("vscS", k.id, a, t), {vs: 1.0, S: -1.0}, "<=", 0.0)
                con(vn("vscL", k.id, a, t), {vs: 1.0, S: -1.0, v: -BM}, ">=", -BM)
                p = m.var(vn("pdc", k.id, t))
                # support towards a moves the converter set-point towards a
                if a == ta:
                    if k.technology == "LCC":
                        ul = m.var(vn("ulcc", k.id, L.lcc_blk(t)))
                        con(vn("dchd", k.id, a, t), {p: 1.0, ps: 1.0, ul: -cap}, "<=", 0.0)
                    else:
                        con(vn("dchd", k.id, a, t), {p: 1.0, ps: 1.0}, "<=", cap)
                else:
                    if k.technology == "LCC":
                        ul = m.var(vn("ulcc", k.id, L.lcc_blk(t)))
                        con(vn("dchd", k.id, a, t), {p: 1.0, ps: -1.0, ul: -cap}, ">=", -cap)
                    else:
                        con(vn("dchd", k.id, a, t), {p: 1.0, ps: -1.0}, ">=", -cap)
