"""Energy prices from the fixed-commitment LP and the market summary built on them."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..solver import OPTIMAL, ModelHandle, fix_binaries_and_relax, solve
from ..system import SystemSpec
from .build import vn
from .config import ScenarioConfig
from .solution import UcpSolution

MARKET_FORMAT = "hvdc_spc.market/1"
COST_ROWS = ("energy_cost", "reserve_cost", "shedding_cost", "curtailment_cost", "total_cost",
             "generator_revenue", "load_payment", "hvdc_revenue")


class PriceRecoveryError(RuntimeError):
    pass


@dataclass
class MarketReport:
    system: str
    mode: str
    periods: int
    milp_objective: float
    lp_objective: float
    prices: dict[str, list[float]]  # bus -> EP per period
    balance_duals: dict[str, list[float]]  # bus -> lambda per period
    shed_duals: dict[str, list[float]]  # load -> rho per period
    areas: dict[str, dict[str, float]]  # area -> Table I style rows
    links: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def objective_gap(self) -> float:
        return abs(self.lp_objective - self.milp_objective) / max(1.0, abs(self.milp_objective))

    def price(self, bus: str, t: int) -> float:
        return self.prices[bus][t - 1]

    def totals(self) -> dict[str, float]:
        return {row: sum(a[row] for a in self.areas.values()) for row in COST_ROWS}

    def to_dict(self) -> dict:
        return {
            "format": MARKET_FORMAT,
            "system": self.system,
            "mode": self.mode,
            "periods": self.periods,
            "milp_objective": self.milp_objective,
            "lp_objective": self.lp_objective,
            "prices": self.prices,
            "balance_duals": self.balance_duals,
            "shed_duals": self.shed_duals,
            "areas": self.areas,
            "links": self.links,
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def from_dict(cls, d: dict) -> "MarketReport":
        if d.get("format") != MARKET_FORMAT:
            raise ValueError("not a market report file")
        return cls(d["system"], d["mode"], int(d["periods"]), float(d["milp_objective"]),
                   float(d["lp_objective"]), d["prices"], d["balance_duals"], d["shed_duals"], d["areas"],
                   d.get("links", {}))

    @classmethod
    def load(cls, path: str | Path) -> "MarketReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def write_csv(self, out_dir: str | Path, stem: str = "market") -> list[Path]:
        """Write ``<stem>_prices.csv`` (period x bus) and ``<stem>_areas.csv`` (row x area)."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        buses = sorted(self.prices)
        p1 = out_dir / f"{stem}_prices.csv"
        with p1.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *buses])
            for t in range(1, self.periods + 1):
                w.writerow([t, *(repr(self.prices[b][t - 1]) for b in buses)])
        areas = sorted(self.areas)
        p2 = out_dir / f"{stem}_areas.csv"
        with p2.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["row", *areas, "total"])
            tot = self.totals()
            for row in COST_ROWS:
                w.writerow([row, *(repr(self.areas[a][row]) for a in areas), repr(tot[row])])
        return [p1, p2]


def relaxed_lp(model: ModelHandle, incumbent: UcpSolution) -> ModelHandle:
    return fix_binaries_and_relax(model, incumbent.values)


def _energy_prices(spec: SystemSpec, periods: int, duals: dict[str, float]):
    lam = {b.id: [-duals[vn("bal", b.id, t)] for t in range(1, periods + 1)] for b in spec.buses}
    rho = {ld.id: [-duals[vn("shed", ld.id, t)] for t in range(1, periods + 1)] for ld in spec.loads}
    ep = {b: list(v) for b, v in lam.items()}
    for ld in spec.loads:
        for t in range(periods):
            ep[ld.bus][t] -= rho[ld.id][t]
    return lam, rho, ep


def _market_rows(spec: SystemSpec, sol: UcpSolution, ep: dict[str, list[float]]):
    T = range(1, sol.periods + 1)
    rows = {a: dict.fromkeys(COST_ROWS, 0.0) for a in spec.area_ids}
    for g in spec.generators:
        r = rows[g.area]
        for t in T:
            gen = sol.value("g", g.id, t)
            r["energy_cost"] += (g.cost_energy * gen + g.cost_startup * sol.value("y", g.id, t)
                                 + g.cost_shutdown * sol.value("z", g.id, t))
            r["reserve_cost"] += g.cost_reserve * sol.value("gs", g.id, t)
            r["generator_revenue"] += ep[g.bus][t - 1] * gen
    for ld in spec.loads:
        r = rows[spec.bus_area(ld.bus)]
        for t in T:
            ds = sol.value("ds", ld.id, t)
            r["shedding_cost"] += ld.voll * ds
            r["load_payment"] += ep[ld.bus][t - 1] * (spec.load_series[ld.id][t - 1] - ds)
    for res in spec.res:
        r = rows[spec.bus_area(res.bus)]
        for t in T:
            r["curtailment_cost"] += res.curtail_value * sol.value("wc", res.id, t)
    links = {}
    for k in spec.converters:
        rent, hours = 0.0, 0
        for t in T:
            p = sol.value("pdc", k.id, t)
            rent += abs(ep[k.to_bus][t - 1] - ep[k.from_bus][t - 1]) * abs(p)
            hours += abs(p) >= k.capacity * (1.0 - 1e-6)
        links[k.id] = {"congestion_rent": rent, "congested_hours": hours}
        # the rent is shared evenly between the two end areas
        for a in spec.link_areas(k):
            rows[a]["hvdc_revenue"] += rent / 2.0
    for r in rows.values():
        r["total_cost"] = r["energy_cost"] + r["reserve_cost"] + r["shedding_cost"] + r["curtailment_cost"]
    return rows, links


def recover_prices(spec: SystemSpec, cfg: ScenarioConfig | None, model: ModelHandle, incumbent: UcpSolution,
                   backend: str | None = None) -> MarketReport:
    """Fix the incumbent's binaries, re-solve as an LP and price energy from its duals.

    The LP duals are also stored on ``incumbent.duals``.
    """
    lp = relaxed_lp(model, incumbent)
    res = solve(lp, backend)
    if res.status != OPTIMAL:
        raise PriceRecoveryError(f"fixed-commitment LP ended with status '{res.status}': {res.message}")
    if res.dual is None:
        raise PriceRecoveryError(f"backend '{res.backend}' returned no duals for a continuous model")
    incumbent.duals = dict(res.dual)
    lam, rho, ep = _energy_prices(spec, incumbent.periods, res.dual)
    rows, links = _market_rows(spec, incumbent, ep)
    return MarketReport(spec.name, incumbent.mode, incumbent.periods, incumbent.objective, float(res.objective),
                        ep, lam, rho, rows, links)


def perturbed_price(spec: SystemSpec, model: ModelHandle, incumbent: UcpSolution, bus: str, t: int,
                    delta: float = 1e-3, backend: str | None = None) -> tuple[float, float]:
    """Forward and backward difference of the LP optimum w.r.t. demand at ``bus`` in period ``t``.

    The demand increase enters the balance row and the shedding bound of every
    load at the bus. The value function is piecewise linear, so both quotients
    are exact slopes as long as ``delta`` stays within one basis.
    """
    lp = relaxed_lp(model, incumbent)
    base = solve(lp, backend)
    bal = lp.constr(vn("bal", bus, t))
    sheds = [lp.constr(vn("shed", ld.id, t)) for ld in spec.loads if ld.bus == bus]
    out = []
    for step in (delta, -delta):
        q = lp.copy()
        q.set_rhs(bal, lp.row(bal)[3] - step)
        for i in sheds:
            q.set_rhs(i, lp.row(i)[3] + step)
        r = solve(q, backend)
        if r.status != OPTIMAL:
            raise PriceRecoveryError(f"perturbed LP ended with status '{r.status}'")
        out.append((r.objective - base.objective) / step)
    return out[0], out[1]
