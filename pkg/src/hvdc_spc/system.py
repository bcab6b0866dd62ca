"""Multi-area AC/DC system data model, JSON/CSV loading and validation.

All power quantities are per unit on ``SystemSpec.base_mva``. Frequencies are
in Hz, times in seconds (dynamics) or periods of one hour (scheduling).
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

DEFAULT_BASE_MVA = 1000.0
DEFAULT_OVERLOAD_LIMIT = 0.2


class SystemDataError(ValueError):
    """Base class for system loading errors."""


class ParseError(SystemDataError):
    def __init__(self, message: str, *, line: int | None = None, field_name: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field_name is not None:
            where.append(f"field '{field_name}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field_name = field_name


class DanglingReferenceError(SystemDataError):
    def __init__(self, entity: str, ref: str, kind: str):
        super().__init__(f"{entity} references unknown {kind} '{ref}'")
        self.entity = entity
        self.ref = ref
        self.kind = kind


class UnitError(SystemDataError):
    pass


@dataclass(frozen=True)
class AreaSpec:
    id: str
    f_base: float
    damping: float
    rocof_limit: float
    nadir_limit: float
    ssfd_limit: float
    dimensioning_incident: float
    turbine_time_const: float


@dataclass(frozen=True)
class BusSpec:
    id: str
    area: str


@dataclass(frozen=True)
class GeneratorSpec:
    id: str
    area: str
    bus: str
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float
    t_on: int
    t_off: int
    cost_energy: float
    cost_startup: float
    cost_shutdown: float
    cost_reserve: float
    inertia: float
    droop: float
    gain: float = 1.0
    turbine_fraction: float = 0.3
    turbine_time: float = 8.0
    initial_status: int | None = None

    @property
    def droop_gain(self) -> float:
        """K/R * Pmax: contribution to the area droop sum when participating."""
        return self.gain / self.droop * self.p_max


@dataclass(frozen=True)
class ConverterLinkSpec:
    id: str
    from_bus: str
    to_bus: str
    capacity: float
    technology: str = "VSC"
    pole_config: str = "bipole"
    droop: float = 0.05
    gain: float = 1.0
    time_const: float = 0.05
    overload_factor: float = 0.0

    @property
    def droop_gain(self) -> float:
        return self.gain / self.droop * self.capacity

    @property
    def outage_loss(self) -> float:
        """Power lost on a single-pole outage: full rating for monopoles, half for bipoles."""
        return self.capacity / 2.0 if self.pole_config == "bipole" else self.capacity


@dataclass(frozen=True)
class ACLineSpec:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float
    limit: float


@dataclass(frozen=True)
class LoadSpec:
    id: str
    bus: str
    voll: float


@dataclass(frozen=True)
class ResSpec:
    id: str
    bus: str
    curtail_value: float


@dataclass(frozen=True)
class SystemSpec:
    name: str
    base_mva: float
    horizon: int
    areas: tuple[AreaSpec, ...]
    buses: tuple[BusSpec, ...]
    generators: tuple[GeneratorSpec, ...]
    converters: tuple[ConverterLinkSpec, ...] = ()
    ac_lines: tuple[ACLineSpec, ...] = ()
    loads: tuple[LoadSpec, ...] = ()
    res: tuple[ResSpec, ...] = ()
    load_series: dict[str, tuple[float, ...]] = field(default_factory=dict)
    res_series: dict[str, tuple[float, ...]] = field(default_factory=dict)

    # lookups -------------------------------------------------------------
    def area(self, area_id: str) -> AreaSpec:
        for a in self.areas:
            if a.id == area_id:
                return a
        raise KeyError(f"unknown area '{area_id}'")

    def generator(self, gen_id: str) -> GeneratorSpec:
        for g in self.generators:
            if g.id == gen_id:
                return g
        raise KeyError(f"unknown generator '{gen_id}'")

    def converter(self, link_id: str) -> ConverterLinkSpec:
        for k in self.converters:
            if k.id == link_id:
                return k
        raise KeyError(f"unknown converter '{link_id}'")

    @property
    def area_ids(self) -> list[str]:
        return [a.id for a in self.areas]

    @cached_property
    def _bus_map(self) -> dict[str, str]:
        return {b.id: b.area for b in self.buses}

    def bus_area(self, bus_id: str) -> str:
        try:
            return self._bus_map[bus_id]
        except KeyError:
            raise KeyError(f"unknown bus '{bus_id}'") from None

    def generators_in(self, area_id: str) -> list[GeneratorSpec]:
        return list(self._gens_by_area.get(area_id, ()))

    @cached_property
    def _gens_by_area(self) -> dict[str, tuple[GeneratorSpec, ...]]:
        out: dict[str, list[GeneratorSpec]] = {}
        for g in self.generators:
            out.setdefault(g.area, []).append(g)
        return {a: tuple(v) for a, v in out.items()}

    def link_areas(self, link: ConverterLinkSpec) -> tuple[str, str]:
        return self.bus_area(link.from_bus), self.bus_area(link.to_bus)

    def links_between(self, a: str, b: str) -> list[ConverterLinkSpec]:
        return [k for k in self.converters if set(self.link_areas(k)) == {a, b}]

    def links_at(self, area_id: str) -> list[ConverterLinkSpec]:
        return [k for k in self.converters if area_id in self.link_areas(k)]

    def neighbors(self, area_id: str) -> list[str]:
        out = set()
        for k in self.links_at(area_id):
            fa, ta = self.link_areas(k)
            out.add(ta if fa == area_id else fa)
        return sorted(out)

    def incidence(self, bus_id: str, link: ConverterLinkSpec) -> int:
        """HVDC incidence I[n,k]: +1 at the sending bus, -1 at the receiving bus."""
        if bus_id == link.from_bus:
            return 1
        if bus_id == link.to_bus:
            return -1
        return 0

    def dimensioning_incident(self, area_id: str) -> float:
        return self.area(area_id).dimensioning_incident

    def hvdc_outage_floor(self, area_id: str) -> float:
        """Largest single-link outage loss among links incident to the area (0 if none)."""
        return max((k.outage_loss for k in self.links_at(area_id)), default=0.0)


# ---------------------------------------------------------------------------
# loading

_AREA_REQ = ("id", "f_base", "damping", "rocof_limit", "nadir_limit", "ssfd_limit", "turbine_time_const")
_GEN_REQ = ("id", "bus", "p_min", "p_max", "ramp_up", "ramp_down", "t_on", "t_off",
            "cost_energy", "cost_startup", "cost_shutdown", "cost_reserve", "inertia", "droop")


def _require(obj: dict, keys: tuple[str, ...], where: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object", field_name=where)
    for k in keys:
        if k not in obj:
            raise ParseError(f"{where} '{obj.get('id', '?')}' is missing a required field", field_name=k)


def _known(cls, obj: dict, where: str) -> dict:
    names = {f.name for f in fields(cls)}
    extra = set(obj) - names
    if extra:
        raise ParseError(f"{where} '{obj.get('id', '?')}' has unknown fields {sorted(extra)}",
                         field_name=sorted(extra)[0])
    return obj


def _read_series_csv(path: Path) -> dict[str, tuple[float, ...]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "period":
        raise ParseError(f"{path.name}: header must start with 'period'", line=1)
    ids = rows[0][1:]
    cols: dict[str, list[float]] = {i: [] for i in ids}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(ids) + 1:
            raise ParseError(f"{path.name}: expected {len(ids) + 1} columns", line=lineno)
        for i, v in zip(ids, row[1:]):
            try:
                cols[i].append(float(v))
            except ValueError:
                raise ParseError(f"{path.name}: bad number {v!r}", line=lineno, field_name=i) from None
    return {i: tuple(v) for i, v in cols.items()}


def _write_series_csv(path: Path, series: dict[str, tuple[float, ...]], horizon: int) -> None:
    ids = sorted(series)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", *ids])
        for t in range(horizon):
            w.writerow([t + 1, *(repr(float(series[i][t])) for i in ids)])


def _load_series(spec: Any, base: Path, key: str) -> dict[str, tuple[float, ...]]:
    if spec is None:
        return {}
    if isinstance(spec, str):
        path = base / spec
        if not path.exists():
            raise ParseError(f"series file not found: {spec}", field_name=f"series.{key}")
        return _read_series_csv(path)
    if isinstance(spec, dict):
        return {k: tuple(float(x) for x in v) for k, v in spec.items()}
    raise ParseError("series entries must be a CSV path or an inline mapping", field_name=f"series.{key}")


def system_from_dict(data: dict, base_dir: str | os.PathLike = ".") -> SystemSpec:
    """Build a SystemSpec from the parsed JSON document, resolving all references."""
    base = Path(base_dir)
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    units = data.get("units", "pu")
    if units != "pu":
        raise UnitError(f"only per-unit input is supported, got units={units!r}")
    base_mva = float(data.get("base_mva", DEFAULT_BASE_MVA))
    if not base_mva > 0:
        raise UnitError(f"base_mva must be positive, got {base_mva}")

    buses = []
    for b in data.get("buses", []):
        _require(b, ("id", "area"), "bus")
        buses.append(BusSpec(**_known(BusSpec, b, "bus")))
    bus_area = {b.id: b.area for b in buses}

    raw_gens = data.get("generators", [])
    gens = []
    for g in raw_gens:
        _require(g, _GEN_REQ, "generator")
        g = dict(_known(GeneratorSpec, g, "generator"))
        if g["bus"] not in bus_area:
            raise DanglingReferenceError(f"generator '{g['id']}'", g["bus"], "bus")
        g.setdefault("area", bus_area[g["bus"]])
        if g["area"] != bus_area[g["bus"]]:
            raise DanglingReferenceError(f"generator '{g['id']}'", g["area"], "area for its bus")
        g["t_on"] = int(g["t_on"])
        g["t_off"] = int(g["t_off"])
        gens.append(GeneratorSpec(**g))

    areas = []
    for a in data.get("areas", []):
        _require(a, _AREA_REQ, "area")
        a = dict(_known(AreaSpec, a, "area"))
        if "dimensioning_incident" not in a:
            a["dimensioning_incident"] = max((g.p_max for g in gens if g.area == a["id"]), default=0.0)
        areas.append(AreaSpec(**{k: (v if k == "id" else float(v)) for k, v in a.items()}))
    area_ids = {a.id for a in areas}
    for b in buses:
        if b.area not in area_ids:
            raise DanglingReferenceError(f"bus '{b.id}'", b.area, "area")

    def _check_bus(entity: str, bus: str) -> None:
        if bus not in bus_area:
            raise DanglingReferenceError(entity, bus, "bus")

    convs = []
    for k in data.get("converters", []):
        _require(k, ("id", "from_bus", "to_bus", "capacity"), "converter")
        k = _known(ConverterLinkSpec, k, "converter")
        _check_bus(f"converter '{k['id']}'", k["from_bus"])
        _check_bus(f"converter '{k['id']}'", k["to_bus"])
        convs.append(ConverterLinkSpec(**k))
    lines = []
    for ln in data.get("ac_lines", []):
        _require(ln, ("id", "from_bus", "to_bus", "susceptance", "limit"), "ac_line")
        ln = _known(ACLineSpec, ln, "ac_line")
        _check_bus(f"ac_line '{ln['id']}'", ln["from_bus"])
        _check_bus(f"ac_line '{ln['id']}'", ln["to_bus"])
        lines.append(ACLineSpec(**ln))
    loads = []
    for ld in data.get("loads", []):
        _require(ld, ("id", "bus", "voll"), "load")
        ld = _known(LoadSpec, ld, "load")
        _check_bus(f"load '{ld['id']}'", ld["bus"])
        loads.append(LoadSpec(**ld))
    res = []
    for r in data.get("res", []):
        _require(r, ("id", "bus", "curtail_value"), "res")
        r = _known(ResSpec, r, "res")
        _check_bus(f"res '{r['id']}'", r["bus"])
        res.append(ResSpec(**r))

    series = data.get("series", {}) or {}
    load_series = _load_series(series.get("load"), base, "load")
    res_series = _load_series(series.get("res"), base, "res")
    for sid in load_series:
        if sid not in {ld.id for ld in loads}:
            raise DanglingReferenceError("load series", sid, "load")
    for sid in res_series:
        if sid not in {r.id for r in res}:
            raise DanglingReferenceError("res series", sid, "res")
    lengths = {len(v) for v in (*load_series.values(), *res_series.values())}
    horizon = int(data.get("horizon", max(lengths, default=0)))
    for ld in loads:
        load_series.setdefault(ld.id, (0.0,) * horizon)
    for r in res:
        res_series.setdefault(r.id, (0.0,) * horizon)

    return SystemSpec(
        name=str(data.get("name", "system")),
        base_mva=base_mva,
        horizon=horizon,
        areas=tuple(areas),
        buses=tuple(buses),
        generators=tuple(gens),
        converters=tuple(convs),
        ac_lines=tuple(lines),
        loads=tuple(loads),
        res=tuple(res),
        load_series=load_series,
        res_series=res_series,
    )


def load_system(path: str | os.PathLike) -> SystemSpec:
    """Load a system JSON file (and the CSV series it references)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: {exc.msg}", line=exc.lineno) from None
    return system_from_dict(data, path.parent)


def system_to_dict(spec: SystemSpec) -> dict:
    def rows(items):
        out = []
        for it in items:
            d = asdict(it)
            out.append({k: v for k, v in d.items() if v is not None})
        return out

    return {
        "name": spec.name,
        "units": "pu",
        "base_mva": spec.base_mva,
        "horizon": spec.horizon,
        "areas": rows(spec.areas),
        "buses": rows(spec.buses),
        "generators": rows(spec.generators),
        "converters": rows(spec.converters),
        "ac_lines": rows(spec.ac_lines),
        "loads": rows(spec.loads),
        "res": rows(spec.res),
    }


def save_system(spec: SystemSpec, path: str | os.PathLike) -> Path:
    """Write ``spec`` as JSON plus ``<stem>_load.csv`` / ``<stem>_res.csv`` next to it."""
    path = Path(path)
    data = system_to_dict(spec)
    series = {}
    if spec.load_series:
        name = f"{path.stem}_load.csv"
        _write_series_csv(path.parent / name, spec.load_series, spec.horizon)
        series["load"] = name
    if spec.res_series:
        name = f"{path.stem}_res.csv"
        _write_series_csv(path.parent / name, spec.res_series, spec.horizon)
        series["res"] = name
    data["series"] = series
    path.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True, order=True)
class Violation:
    entity: str
    rule: str


def _positive(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x > 0


def validate(spec: SystemSpec, *, max_overload: float = DEFAULT_OVERLOAD_LIMIT) -> list[Violation]:
    """Check every structural and physical invariant; returns violations sorted by (entity, rule)."""
    v: list[Violation] = []
    bus_area = {b.id: b.area for b in spec.buses}

    for a in spec.areas:
        for name in ("f_base", "rocof_limit", "nadir_limit", "ssfd_limit"):
            if not _positive(getattr(a, name)):
                v.append(Violation(a.id, f"{name} must be positive"))
        if not _positive(a.dimensioning_incident):
            v.append(Violation(a.id, "dimensioning incident must be positive"))
        if not _positive(a.turbine_time_const):
            v.append(Violation(a.id, "turbine time constant must be positive"))
        if a.damping < 0:
            v.append(Violation(a.id, "damping must be non-negative"))

    for g in spec.generators:
        if not (0 <= g.p_min <= g.p_max):
            v.append(Violation(g.id, "output bounds must satisfy 0 <= p_min <= p_max"))
        if not _positive(g.droop):
            v.append(Violation(g.id, "droop must be positive"))
        if not _positive(g.inertia):
            v.append(Violation(g.id, "inertia must be positive"))
        if not (0 <= g.turbine_fraction <= 1):
            v.append(Violation(g.id, "turbine fraction must lie in [0, 1]"))
        if not _positive(g.turbine_time):
            v.append(Violation(g.id, "turbine time constant must be positive"))
        if g.ramp_up < 0 or g.ramp_down < 0:
            v.append(Violation(g.id, "ramp limits must be non-negative"))
        if g.t_on < 1 or g.t_off < 1:
            v.append(Violation(g.id, "minimum up/down times must be at least one period"))

    for k in spec.converters:
        if not _positive(k.capacity):
            v.append(Violation(k.id, "capacity must be positive"))
        if not _positive(k.droop):
            v.append(Violation(k.id, "droop must be positive"))
        if not (0 <= k.overload_factor <= max_overload):
            v.append(Violation(k.id, "overload factor out of range"))
        if k.technology not in ("LCC", "VSC"):
            v.append(Violation(k.id, "technology must be LCC or VSC"))
        if k.pole_config not in ("monopole", "bipole"):
            v.append(Violation(k.id, "pole configuration must be monopole or bipole"))
        if bus_area.get(k.from_bus) == bus_area.get(k.to_bus):
            v.append(Violation(k.id, "HVDC link endpoints in the same area"))

    for ln in spec.ac_lines:
        if bus_area.get(ln.from_bus) != bus_area.get(ln.to_bus):
            v.append(Violation(ln.id, "AC line spans areas"))
        if not _positive(ln.susceptance):
            v.append(Violation(ln.id, "susceptance must be positive"))
        if not _positive(ln.limit):
            v.append(Violation(ln.id, "thermal limit must be positive"))

    # AC connectivity within each area
    for a in spec.areas:
        members = [b.id for b in spec.buses if b.area == a.id]
        if len(members) <= 1:
            continue
        local = {b: i for i, b in enumerate(members)}
        rows, cols = [], []
        for ln in spec.ac_lines:
            if ln.from_bus in local and ln.to_bus in local:
                rows.append(local[ln.from_bus])
                cols.append(local[ln.to_bus])
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(members),) * 2)
        n_comp, _ = connected_components(graph, directed=False)
        if n_comp > 1:
            v.append(Violation(a.id, "AC network of area is not connected"))

    for ld in spec.loads:
        s = spec.load_series.get(ld.id, ())
        if any(x < 0 for x in s):
            v.append(Violation(ld.id, "series must be non-negative"))
        if len(s) != spec.horizon:
            v.append(Violation(ld.id, "series length differs from horizon"))
    for r in spec.res:
        s = spec.res_series.get(r.id, ())
        if any(x < 0 for x in s):
            v.append(Violation(r.id, "series must be non-negative"))
        if len(s) != spec.horizon:
            v.append(Violation(r.id, "series length differs from horizon"))

    return sorted(set(v))


def with_generators(spec: SystemSpec, **changes_by_id: dict) -> SystemSpec:
    """Return a copy with per-generator field overrides, e.g. ``G1={"droop": 0.0}``."""
    gens = tuple(replace(g, **changes_by_id[g.id]) if g.id in changes_by_id else g for g in spec.generators)
    return replace(spec, generators=gens)
