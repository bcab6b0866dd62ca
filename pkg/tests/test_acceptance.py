"""End-to-end acceptance checks. Each test prints one ``criterion N: PASS/FAIL`` line."""

import math
import time

import numpy as np
import pytest

from hvdc_spc.cli import full_point
from hvdc_spc.dynamics import DynamicScenario, GeneratorTrip, OperatingPoint, extract_metrics, hvdc_outage_event, \
    simulate
from hvdc_spc.metrics import aggregate_area, bilateral_nadir, metrics_ucs_supported, metrics_ucs_supporting
from hvdc_spc.nadir import UNILATERAL, build_grid, fit_area_plane, load_planes
from hvdc_spc.solver import SolverOptions
from hvdc_spc.system import load_system
from hvdc_spc.ucp import ScenarioConfig, build_ucp, market_table, perturbed_price, recover_prices, solve_ucp, \
    verify_solution

from conftest import bundled_path, planes_path, verdict

pytestmark = pytest.mark.slow

MODES = ("no_lim", "no_spc", "unilateral", "bilateral")
SIM_MARGIN = 0.02


# 1 -------------------------------------------------------------------------------


def thinned(spec, every):
    """Every ``every``-th unit online and governing, no converter support."""
    on = {g.id: int(i % every == 0) for i, g in enumerate(spec.generators)}
    return OperatingPoint(on, dict(on), {}, {k.id: 0.0 for k in spec.converters})


def simulated_nadirs(spec, point, area, dt=1e-3, horizon=60.0):
    ev = GeneratorTrip(area, spec.dimensioning_incident(area))
    tr = simulate(DynamicScenario(spec, point, ev, horizon, dt))
    return {a: extract_metrics(tr, a, settle_rate=math.inf).nadir for a in spec.area_ids}


def analytic_pair(spec, point, a, b, link):
    A, B = spec.area(a), spec.area(b)
    gov = dict(point.governor)
    agg_a = aggregate_area(spec, point.commitment, {**gov, link: 1}, a)
    agg_b = aggregate_area(spec, point.commitment, gov, b)
    uni_a = metrics_ucs_supported(agg_a, A.turbine_time_const, A.dimensioning_incident, A.f_base).nadir
    uni_b = metrics_ucs_supporting(agg_b, agg_a.Rc, uni_a, A.dimensioning_incident, agg_a.M,
                                   B.turbine_time_const, A.f_base).nadir
    agg_b_bi = aggregate_area(spec, point.commitment, {**gov, link: 1}, b)
    bi_a, (bi_b,) = bilateral_nadir(agg_a, A.turbine_time_const, A.dimensioning_incident, A.f_base,
                                    [(agg_b_bi, agg_a.Rc, B.turbine_time_const)], A.nadir_limit)
    none = metrics_ucs_supported(aggregate_area(spec, point.commitment, gov, a), A.turbine_time_const,
                                 A.dimensioning_incident, A.f_base).nadir
    return none, (uni_a, uni_b), (bi_a, bi_b)


def test_criterion_1_analytics_match_simulation(two_area):
    spec = two_area
    (link,) = spec.converters
    failures, worst = [], {"none": 0.0, "uni_a": 0.0, "uni_b": 0.0}
    slowest = 0.0
    for every in (1, 2, 3):
        base = full_point(spec) if every == 1 else thinned(spec, every)
        for a, b in (("A1", "A2"), ("A2", "A1")):
            t0 = time.perf_counter()
            none, uni, bi = analytic_pair(spec, base, a, b, link.id)
            s_none = simulated_nadirs(spec, base, a)
            s_uni = simulated_nadirs(spec, OperatingPoint(base.commitment, base.governor, {link.id: a}, base.flows), a)
            s_bi = simulated_nadirs(spec, OperatingPoint(base.commitment, base.governor, {link.id: "both"}, base.flows),
                                    a)
            slowest = max(slowest, time.perf_counter() - t0)
            tag = f"every={every} trip={a}"
            e_none = abs(none - s_none[a])
            e_uni_a = abs(uni[0] - s_uni[a]) / s_uni[a]
            e_uni_b = (uni[1] - s_uni[b]) / s_uni[b]
            worst["none"] = max(worst["none"], e_none)
            worst["uni_a"] = max(worst["uni_a"], e_uni_a)
            worst["uni_b"] = max(worst["uni_b"], e_uni_b)
            if e_none > 1e-3:
                failures.append(f"{tag}: no-SPC |analytic - simulated| = {e_none:.2e} Hz")
            if e_uni_a > 0.02:
                failures.append(f"{tag}: supported area off by {e_uni_a:.2%}")
            if not 0.0 <= e_uni_b <= 0.35:
                failures.append(f"{tag}: supporting area analytic/simulated - 1 = {e_uni_b:.2%}")
            for area, an in ((a, bi[0]), (b, bi[1])):
                if an < s_bi[area]:
                    failures.append(f"{tag}: bilateral analytic {an:.4f} below simulated {s_bi[area]:.4f} in {area}")
    ok = not failures and slowest < 60.0
    verdict(1, ok, f"(no-SPC max err {worst['none']:.1e} Hz, supported {worst['uni_a']:.2%}, "
                   f"supporting over-estimate <= {worst['uni_b']:.1%}, slowest check {slowest:.1f} s)")
    assert ok, failures or f"slowest check took {slowest:.1f} s"


# 2 -------------------------------------------------------------------------------


@pytest.mark.parametrize("area", ["A1", "A2"])
def test_criterion_2_hyperplane_soundness(two_area, area):
    t0 = time.perf_counter()
    plane = fit_area_plane(two_area, area, UNILATERAL, 100, 0.01)
    elapsed = time.perf_counter() - t0
    d = plane.diagnostics

    # independent brute-force sweep of the same lattice
    grid = build_grid(two_area, area, UNILATERAL, 100)
    limit = two_area.area(area).nadir_limit
    bad = 0
    for pts, nd in grid.iter_points():
        keep = ~np.isnan(nd) & grid.realisable(pts)
        F, R, M = pts[keep].T
        accept = F >= plane.threshold({"R": R, "M": M})
        bad += int(np.sum(accept & (nd[keep] > limit + 1e-9)))

    ok = d["false_feasible_count"] == 0 and bad == 0 and d["mean_relative_error"] <= 0.05 and elapsed < 300
    verdict(2, ok, f"[{area}] false-feasible {d['false_feasible_count']} (sweep {bad}), "
                   f"mean relative error {d['mean_relative_error']:.4f}, {elapsed:.0f} s")
    assert ok


# 3-7 -----------------------------------------------------------------------------


def solve_modes(name, modes):
    spec = load_system(bundled_path(name))
    planes = load_planes(planes_path(name))
    out = {}
    for mode in modes:
        cfg = ScenarioConfig(mode, planes=planes, solver=SolverOptions(deterministic=True))
        t0 = time.perf_counter()
        model = build_ucp(spec, cfg)
        sol = solve_ucp(model)
        out[mode] = (cfg, model, sol, time.perf_counter() - t0)
    return spec, out


@pytest.fixture(scope="module")
def small_runs():
    return solve_modes("two_area_small", MODES)


@pytest.fixture(scope="module")
def three_area_runs():
    return solve_modes("three_area", ("unilateral", "bilateral"))


def security_failures(spec, cfg, sol):
    rep = verify_solution(spec, cfg, sol)
    bad = [str(v) for v in rep.violations]
    for c in rep.areas:
        ar = spec.area(c.area)
        for name, val, lim in (("nadir", c.nadir, ar.nadir_limit), ("rocof", c.rocof, ar.rocof_limit),
                               ("ssfd", c.ssfd, ar.ssfd_limit)):
            if val > lim + 1e-9:
                bad.append(f"{name} {c.area} t={c.period}: {val:.4f} > {lim}")
    for s in rep.simulations:
        margin = SIM_MARGIN if s.event.startswith("gen:") else 0.0
        if s.simulated > s.limit + margin + 1e-9:
            bad.append(f"simulated {s.event} {s.area} t={s.period}: {s.simulated:.4f}")
    hvdc = [s.simulated for s in rep.simulations if s.event.startswith("hvdc:")]
    return bad, rep, max(hvdc, default=0.0)


@pytest.mark.parametrize("mode", ["unilateral", "bilateral"])
def test_criterion_3_security_two_area_small(small_runs, mode):
    spec, runs = small_runs
    cfg, _, sol, _ = runs[mode]
    bad, rep, hv = security_failures(spec, cfg, sol)
    verdict(3, not bad, f"[two_area_small/{mode}] worst nadir {rep.worst('nadir'):.4f} Hz, rocof "
                        f"{rep.worst('rocof'):.4f} Hz/s, ssfd {rep.worst('ssfd'):.4f} Hz, "
                        f"{len(rep.simulations)} simulations, worst HVDC-outage nadir {hv:.4f} Hz")
    assert not bad, bad[:5]


@pytest.mark.parametrize("mode", ["unilateral", "bilateral"])
def test_criterion_3_security_three_area(three_area_runs, mode):
    spec, runs = three_area_runs
    cfg, _, sol, _ = runs[mode]
    bad, rep, hv = security_failures(spec, cfg, sol)
    verdict(3, not bad, f"[three_area/{mode}] worst nadir {rep.worst('nadir'):.4f} Hz, rocof "
                        f"{rep.worst('rocof'):.4f} Hz/s, ssfd {rep.worst('ssfd'):.4f} Hz, "
                        f"{len(rep.simulations)} simulations, worst HVDC-outage nadir {hv:.4f} Hz")
    assert not bad, bad[:5]


def test_criterion_4_cost_dominance(small_runs):
    spec, runs = small_runs
    obj = {m: runs[m][2].objective for m in MODES}
    reserve = {}
    for m in ("no_spc", "unilateral", "bilateral"):
        cfg, model, sol, _ = runs[m]
        reserve[m] = market_table(recover_prices(spec, cfg, model, sol))["reserve_cost"]["total"]
    cut = {m: 1.0 - reserve[m] / reserve["no_spc"] for m in ("unilateral", "bilateral")}
    ok = obj["unilateral"] <= obj["no_spc"] and obj["bilateral"] <= obj["no_spc"] and all(v > 0 for v in cut.values())
    verdict(4, ok, "(objective no_spc {no_spc:.1f}, unilateral {unilateral:.1f}, bilateral {bilateral:.1f}; "
                   .format(**obj) + f"reserve cost cut {cut['unilateral']:.1%} / {cut['bilateral']:.1%})")
    assert ok


def test_criterion_5_linearization_tightness(small_runs):
    spec, runs = small_runs
    worst_rs, worst_share, worst_dev, margins, bad = 0.0, 0.0, 0.0, [], []
    for m in ("no_spc", "unilateral", "bilateral"):
        cfg, _, sol, _ = runs[m]
        assert cfg.segments == 4
        rep = verify_solution(spec, cfg, sol, simulate_events=False)
        for c in rep.areas:
            worst_rs = max(worst_rs, abs(c.rs - 1.0))
            worst_share = max(worst_share, abs(c.share_exact - 1.0))
        worst_dev = max(worst_dev, rep.big_m["max_product_error"])
        margins.append(rep.big_m["margin"])
        bad += [str(v) for v in rep.violations if v.check.startswith("big_m")]
    ok = worst_rs <= 0.05 and worst_share <= 1e-9 and min(margins) > 0 and worst_dev <= 1e-9 and not bad
    verdict(5, ok, f"(max |R*S - 1| {worst_rs:.4f}, max share residual {worst_share:.1e}, "
                   f"big-M slack >= {min(margins):.3f}, product error {worst_dev:.1e})")
    assert ok, bad


def test_criterion_6_prices(small_runs):
    spec, runs = small_runs
    rng = np.random.default_rng(2024)
    gaps, errs = [], []
    for m in MODES:
        cfg, model, sol, _ = runs[m]
        gaps.append(recover_prices(spec, cfg, model, sol).objective_gap)
    cfg, model, sol, _ = runs["bilateral"]
    market = recover_prices(spec, cfg, model, sol)
    buses = [b.id for b in spec.buses]
    for _ in range(20):
        bus = buses[rng.integers(len(buses))]
        t = int(rng.integers(1, sol.periods + 1))
        fwd, bwd = perturbed_price(spec, model, sol, bus, t)
        ep = market.price(bus, t)
        errs.append(min(abs(ep - fwd), abs(ep - bwd)))
    ok = max(gaps) <= 1e-6 and max(errs) <= 1e-3
    verdict(6, ok, f"(max LP/MILP relative gap {max(gaps):.1e}, max price error {max(errs):.1e} over 20 samples)")
    assert ok


def test_criterion_7_performance(small_runs):
    spec, runs = small_runs
    info = {m: (runs[m][3], runs[m][2].mip_gap or 0.0) for m in MODES}
    ok = len(spec.generators) <= 25 and spec.horizon == 24 and all(t < 300 and g <= 1e-4 for t, g in info.values())
    verdict(7, ok, f"({len(spec.generators)} units, {spec.horizon} h) " +
            ", ".join(f"{m} {t:.0f} s gap {g:.1e}" for m, (t, g) in info.items()))
    assert ok


# 8 -------------------------------------------------------------------------------


def scenarios(spec):
    """Dimensioning trips under every support setting plus one outage per link, at full commitment."""
    base = full_point(spec)
    flows = {k.id: k.capacity for k in spec.converters}
    for a in spec.area_ids:
        links = [k.id for k in spec.links_at(a)]
        for label, spc in (("none", {}), ("uni", {k: a for k in links}), ("bi", {k: "both" for k in links})):
            if label != "none" and not links:
                continue
            yield f"gen:{a}/{label}", OperatingPoint(base.commitment, base.governor, spc, flows), \
                GeneratorTrip(a, spec.dimensioning_incident(a))
    for k in spec.converters:
        pt = OperatingPoint(base.commitment, base.governor, {}, flows)
        yield f"hvdc:{k.id}", pt, hvdc_outage_event(spec, pt, k.id)


@pytest.mark.parametrize("name", ["two_area", "two_area_small", "three_area"])
def test_criterion_8_step_convergence(name):
    spec = load_system(bundled_path(name))
    worst, where = 0.0, ""
    for label, pt, ev in scenarios(spec):
        coarse = simulate(DynamicScenario(spec, pt, ev, 60.0, 1e-3))
        fine = simulate(DynamicScenario(spec, pt, ev, 60.0, 5e-4))
        for a in spec.area_ids:
            n1 = extract_metrics(coarse, a, settle_rate=math.inf).nadir
            n2 = extract_metrics(fine, a, settle_rate=math.inf).nadir
            if n2 == 0.0:
                continue
            rel = abs(n1 - n2) / n2
            if rel > worst:
                worst, where = rel, f"{label} in {a}"
    ok = worst < 1e-3
    verdict(8, ok, f"[{name}] largest relative nadir change {worst:.1e} ({where})")
    assert ok
