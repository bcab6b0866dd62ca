"""Regenerate the bundled synthetic systems in src/hvdc_spc/data/.

Run from the repository root:  python3 tools/make_systems.py
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from hvdc_spc.system import save_system, system_from_dict, validate

OUT = Path(__file__).resolve().parents[1] / "src" / "hvdc_spc" / "data"

LOAD_SHAPE = [0.68, 0.65, 0.63, 0.62, 0.63, 0.67, 0.75, 0.85, 0.92, 0.95, 0.96, 0.97,
              0.96, 0.95, 0.94, 0.94, 0.95, 0.98, 1.00, 0.99, 0.95, 0.88, 0.80, 0.73]

# (label, energy EUR/MWh, H s, pmin frac, ramp frac, t_on/t_off h, startup EUR/MW, reserve EUR/MWh)
TECH = {
    "base": ((12, 20), (5.0, 6.0), 0.5, 0.5, 8, 80, (8, 12)),
    "coal": ((25, 40), (4.0, 5.0), 0.4, 0.5, 5, 60, (6, 10)),
    "ccgt": ((42, 60), (3.0, 4.0), 0.4, 0.8, 3, 40, (4, 8)),
    "ocgt": ((70, 110), (2.0, 3.0), 0.2, 1.0, 1, 20, (3, 6)),
}

AREA_DEFAULTS = dict(f_base=50.0, rocof_limit=0.625, nadir_limit=0.7, ssfd_limit=0.4, turbine_time_const=8.0)


def fleet(rng, prefix, sizes, buses, cost_scale=1.0, h_scale=1.0, droop=(0.04, 0.08)):
    gens = []
    order = np.argsort(sizes)[::-1]
    n = len(sizes)
    for rank, i in enumerate(order):
        frac = rank / max(n - 1, 1)
        tech = "base" if frac < 0.15 else "coal" if frac < 0.45 else "ccgt" if frac < 0.8 else "ocgt"
        cost, H, pmin, ramp, ton, su, cres = TECH[tech]
        p = float(round(sizes[i], 4))
        gens.append({
            "id": f"{prefix}{rank + 1:02d}",
            "bus": buses[rank % len(buses)],
            "p_min": round(pmin * p, 4),
            "p_max": p,
            "ramp_up": round(ramp * p, 4),
            "ramp_down": round(ramp * p, 4),
            "t_on": ton,
            "t_off": max(1, ton // 2),
            "cost_energy": round(1000 * cost_scale * rng.uniform(*cost), 1),
            "cost_startup": round(1000 * p * su, 1),
            "cost_shutdown": round(100 * p * su, 1),
            "cost_reserve": round(1000 * rng.uniform(*cres), 1),
            "inertia": round(h_scale * rng.uniform(*H), 2),
            "droop": round(rng.uniform(*droop), 3),
            "gain": 1.0,
            "turbine_fraction": round(rng.uniform(0.2, 0.4), 3),
            "turbine_time": AREA_DEFAULTS["turbine_time_const"],
        })
    return gens


def ring(buses, prefix, b, limit):
    lines = []
    for i in range(len(buses)):
        if len(buses) == 2 and i == 1:
            break
        lines.append({"id": f"{prefix}{i + 1}", "from_bus": buses[i], "to_bus": buses[(i + 1) % len(buses)],
                      "susceptance": b, "limit": limit})
    return lines


def profile(peak, shift, rng, noise=0.01):
    shape = np.roll(LOAD_SHAPE, shift)
    return peak * shape * (1 + noise * rng.standard_normal(24))


def wind(cap, phase, rng):
    t = np.arange(24)
    cf = 0.38 + 0.15 * np.sin(2 * np.pi * (t + phase) / 24) + 0.03 * rng.standard_normal(24)
    return cap * np.clip(cf, 0.05, 0.95)


def build(name, areas, seed):
    """``areas``: list of dicts with id, sizes, largest, peak, wind, n_bus, cost_scale."""
    rng = np.random.default_rng(seed)
    doc = {"name": name, "units": "pu", "base_mva": 1000.0, "horizon": 24, "areas": [], "buses": [],
           "generators": [], "converters": [], "ac_lines": [], "loads": [], "res": [],
           "series": {"load": {}, "res": {}}}
    for k, a in enumerate(areas):
        buses = [f"{a['id']}n{i + 1}" for i in range(a["n_bus"])]
        # load damping of 1.5 % of peak load per Hz, in pu power per pu frequency
        damping = round(0.015 * a["peak"] * AREA_DEFAULTS["f_base"], 3)
        doc["areas"].append({"id": a["id"], "damping": damping, **AREA_DEFAULTS})
        doc["buses"] += [{"id": b, "area": a["id"]} for b in buses]
        sizes = np.concatenate([[a["largest"]], a["sizes"]])
        doc["generators"] += fleet(rng, f"{a['id']}G", sizes, buses, a.get("cost_scale", 1.0), a.get("h_scale", 1.0),
                                   a.get("droop", (0.04, 0.08)))
        if len(buses) > 1:
            doc["ac_lines"] += ring(buses, f"{a['id']}L", 20.0, a.get("ac_limit", 0.45 * a["peak"]))
        shares = np.linspace(1.4, 0.6, len(buses))
        shares /= shares.sum()
        total = profile(a["peak"], k, rng)
        for b, s in zip(buses, shares):
            lid = f"{b}_load"
            doc["loads"].append({"id": lid, "bus": b, "voll": 3.0e6})
            doc["series"]["load"][lid] = [round(float(x), 5) for x in s * total]
        rid = f"{a['id']}_wind"
        doc["res"].append({"id": rid, "bus": buses[-1], "curtail_value": 1.0e4})
        doc["series"]["res"][rid] = [round(float(x), 5) for x in wind(a["wind"], 3 * k, rng)]
    return doc


def two_area():
    a1 = dict(id="A1", largest=0.6, sizes=np.linspace(0.55, 0.18, 34), peak=9.0, wind=3.0,
              n_bus=3, cost_scale=1.0)
    a2 = dict(id="A2", largest=0.55, sizes=np.linspace(0.5, 0.22, 29), peak=6.0, wind=1.5,
              n_bus=3, cost_scale=0.85)
    doc = build("two_area", [a1, a2], seed=11)
    doc["converters"].append({"id": "L1", "from_bus": "A2n3", "to_bus": "A1n1", "capacity": 0.5,
                              "technology": "VSC", "pole_config": "bipole", "droop": 0.05, "gain": 1.0,
                              "time_const": 0.05, "overload_factor": 0.0})
    return doc


def two_area_small():
    # few units per area: the largest unit is a large share of capacity, so inertia and droop
    # gains are scaled up to leave the commitment some freedom
    a1 = dict(id="A1", largest=0.25, sizes=np.linspace(0.25, 0.18, 10), peak=1.9, wind=0.5,
              n_bus=2, cost_scale=1.0, h_scale=2.2, droop=(0.03, 0.05))
    a2 = dict(id="A2", largest=0.22, sizes=np.linspace(0.22, 0.16, 8), peak=1.4, wind=0.3,
              n_bus=2, cost_scale=0.85, h_scale=2.2, droop=(0.03, 0.05))
    doc = build("two_area_small", [a1, a2], seed=5)
    doc["converters"].append({"id": "L1", "from_bus": "A2n2", "to_bus": "A1n1", "capacity": 0.3,
                              "technology": "VSC", "pole_config": "bipole", "droop": 0.05, "gain": 1.0,
                              "time_const": 0.05, "overload_factor": 0.0})
    return doc


def three_area():
    areas = [
        dict(id="A", largest=0.25, sizes=np.linspace(0.25, 0.18, 9), peak=1.8, wind=0.4, n_bus=3,
             h_scale=2.2, droop=(0.03, 0.05)),
        dict(id="B", largest=0.22, sizes=np.linspace(0.22, 0.16, 9), peak=1.5, wind=0.3, n_bus=3,
             cost_scale=0.9, h_scale=2.2, droop=(0.03, 0.05)),
        dict(id="C", largest=0.2, sizes=np.linspace(0.2, 0.15, 9), peak=1.3, wind=0.3, n_bus=3,
             cost_scale=0.8, h_scale=2.2, droop=(0.03, 0.05)),
    ]
    doc = build("three_area", areas, seed=23)
    doc["converters"] += [
        {"id": "LAB", "from_bus": "Bn1", "to_bus": "An2", "capacity": 0.4, "technology": "VSC",
         "pole_config": "bipole", "droop": 0.05, "gain": 1.0, "time_const": 0.05, "overload_factor": 0.2},
        {"id": "LBC", "from_bus": "Cn1", "to_bus": "Bn3", "capacity": 0.15, "technology": "LCC",
         "pole_config": "monopole", "droop": 0.05, "gain": 1.0, "time_const": 0.1, "overload_factor": 0.2},
    ]
    return doc


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for doc in (two_area(), two_area_small(), three_area()):
        spec = system_from_dict(doc)
        problems = validate(spec)
        if problems:
            raise SystemExit(f"{doc['name']}: {problems}")
        save_system(spec, OUT / f"{doc['name']}.json")
        caps = {a: round(sum(g.p_max for g in spec.generators_in(a)), 3) for a in spec.area_ids}
        print(doc["name"], len(spec.generators), "units", caps)


if __name__ == "__main__":
    main()
