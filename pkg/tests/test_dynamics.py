import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hvdc_spc.dynamics import (DynamicScenario, GeneratorTrip, HvdcOutage, NotSettledError, OperatingPoint,
                               Trajectory, dimensioning_trip, extract_metrics, hvdc_outage_event, simulate,
                               simulate_hvdc_outage)

from conftest import one_area_doc, spec_of, two_area_doc

ALL = {g: 1 for g in ("GA1", "GA2", "GB1", "GB2")}


def pair(capacity=0.2, pole="bipole"):
    doc = two_area_doc()
    doc["converters"][0].update(capacity=capacity, pole_config=pole)
    for a in doc["areas"]:
        a["dimensioning_incident"] = 0.1
    return spec_of(doc)


def single():
    return spec_of(one_area_doc(dimensioning_incident=0.1))


def run(spec, point, event, dt=1e-3, horizon=30.0):
    return simulate(DynamicScenario(spec, point, event, horizon, dt))


def test_no_event_is_flat():
    tr = run(single(), OperatingPoint({"G1": 1, "G2": 1}, {"G1": 1}), None)
    assert not np.any(tr.df["A"]) and not any(np.any(v) for v in tr.gen_dp.values())


def test_initial_slope_matches_inertia():
    spec = single()
    tr = run(spec, OperatingPoint({"G1": 1, "G2": 1}, {"G1": 1, "G2": 1}), GeneratorTrip("A", 0.1))
    slope = (tr.df["A"][1] - tr.df["A"][0]) / (tr.t[1] - tr.t[0])
    assert slope == pytest.approx(-50.0 * 0.1 / 6.0, rel=0.01)
    assert tr.df["A"][0] == 0.0


@settings(max_examples=10)
@given(k=st.floats(0.2, 5.0))
def test_linear_in_disturbance(k):
    spec = single()
    pt = OperatingPoint({"G1": 1, "G2": 1}, {"G1": 1, "G2": 1})
    a = run(spec, pt, GeneratorTrip("A", 0.05), horizon=10.0)
    b = run(spec, pt, GeneratorTrip("A", 0.05 * k), horizon=10.0)
    np.testing.assert_allclose(b.df["A"], k * a.df["A"], rtol=1e-9, atol=1e-14)


def test_steady_state_bookkeeping_without_spc():
    spec = single()
    pt = OperatingPoint({"G1": 1, "G2": 1}, {"G1": 1, "G2": 1})
    tr = run(spec, pt, GeneratorTrip("A", 0.1), horizon=120.0)
    df_pu = tr.df["A"][-1] / 50.0
    gain = sum(g.droop_gain for g in spec.generators)
    assert (1.0 + gain) * df_pu == pytest.approx(-0.1, rel=1e-3)
    assert sum(v[-1] for v in tr.gen_dp.values()) == pytest.approx(0.1 - 1.0 * -df_pu, rel=1e-3)


def test_steady_state_bookkeeping_with_link():
    # the converter keeps its droop response in steady state
    spec = pair()
    pt = OperatingPoint(ALL, ALL, spc={"L": "A"})
    tr = run(spec, pt, GeneratorTrip("A", 0.1), horizon=120.0)
    df_a = tr.df["A"][-1] / 50.0
    df_b = tr.df["B"][-1] / 50.0
    gens_a = sum(spec.generator(g).droop_gain for g in ("GA1", "GA2"))
    gens_b = sum(spec.generator(g).droop_gain for g in ("GB1", "GB2"))
    rc = spec.converters[0].droop_gain
    # area a: own droop plus converter injection cover the loss; b exports the injection
    assert -(1.0 + gens_a) * df_a - rc * df_a == pytest.approx(0.1, rel=1e-3)
    assert -(1.0 + gens_b) * df_b == pytest.approx(-rc * df_a, rel=1e-3)


@pytest.mark.parametrize("scheme", ["A", "both"])
def test_supporting_area_deviates_less(scheme):
    spec = pair()
    tr = run(spec, OperatingPoint(ALL, ALL, spc={"L": scheme}), GeneratorTrip("A", 0.1))
    assert np.all(tr.df["B"] <= 1e-12)
    ia = int(np.argmax(np.abs(tr.df["A"])))
    assert abs(tr.df["B"][ia]) < abs(tr.df["A"][ia])


def test_unilateral_supporting_area_ignores_supported_limit():
    doc = two_area_doc()
    doc["areas"][0]["nadir_limit"] = 0.3
    a = run(spec_of(doc), OperatingPoint(ALL, ALL, spc={"L": "A"}), GeneratorTrip("A", 0.1))
    b = run(pair(), OperatingPoint(ALL, ALL, spc={"L": "A"}), GeneratorTrip("A", 0.1))
    np.testing.assert_array_equal(a.df["B"], b.df["B"])


def test_dt_halving_changes_nadir_little():
    spec = pair()
    pt = OperatingPoint(ALL, ALL, spc={"L": "both"})
    n1 = extract_metrics(run(spec, pt, GeneratorTrip("A", 0.1), dt=1e-3), "A", settle_rate=math.inf).nadir
    n2 = extract_metrics(run(spec, pt, GeneratorTrip("A", 0.1), dt=5e-4), "A", settle_rate=math.inf).nadir
    assert abs(n1 - n2) / n2 < 1e-3


def test_bipole_outage_is_half_capacity():
    spec = pair(capacity=0.5)
    ev = hvdc_outage_event(spec, OperatingPoint(ALL, ALL, flows={"L": 0.5}), "L")
    assert ev.dP == 0.25
    assert (ev.importer, ev.exporter) == ("A", "B")


def test_monopole_outage_with_zero_flow():
    spec = pair(pole="monopole")
    imp, exp = simulate_hvdc_outage(spec, OperatingPoint(ALL, ALL), "L")
    ev = hvdc_outage_event(spec, OperatingPoint(ALL, ALL), "L")
    assert ev.dP == 0.2
    assert imp.df["A"].min() < 0 and np.all(imp.df["A"] <= 1e-12)
    assert exp.df["B"].max() > 0 and np.all(exp.df["B"] >= -1e-12)


def test_reverse_flow_swaps_sides():
    ev = hvdc_outage_event(pair(), OperatingPoint(ALL, ALL, flows={"L": -0.1}), "L")
    assert (ev.importer, ev.exporter) == ("B", "A")


def test_faulted_link_gives_no_support():
    spec = pair()
    pt = OperatingPoint(ALL, ALL, spc={"L": "both"}, flows={"L": 0.2})
    tr = simulate(DynamicScenario(spec, pt, HvdcOutage("L", 0.1, "A", "B")))
    assert "L" not in tr.link_dp


def test_dimensioning_trip_uses_area_value():
    assert dimensioning_trip(pair(), "B") == GeneratorTrip("B", 0.1)


def test_extract_zero_trajectory():
    t = np.linspace(0, 1, 11)
    m = extract_metrics(Trajectory(t, {"A": np.zeros(11)}, {}, {}), "A")
    assert (m.rocof_max, m.nadir, m.ssfd) == (0.0, 0.0, 0.0)


def test_extract_rejects_ramp():
    t = np.linspace(0, 10, 1001)
    with pytest.raises(NotSettledError):
        extract_metrics(Trajectory(t, {"A": -0.05 * t}, {}, {}), "A")


def test_csv_columns_sorted(tmp_path):
    spec = pair()
    tr = run(spec, OperatingPoint(ALL, ALL, spc={"L": "A"}), GeneratorTrip("A", 0.1), horizon=1.0)
    p = tmp_path / "t.csv"
    tr.to_csv(p)
    head = p.read_text().splitlines()[0].split(",")
    assert head == ["t", "A_df_hz", "B_df_hz", "GA1_dp_pu", "GA2_dp_pu", "GB1_dp_pu", "GB2_dp_pu", "L_dp_pu"]


def test_bad_step_rejected():
    with pytest.raises(ValueError):
        DynamicScenario(pair(), OperatingPoint(ALL, ALL), None, 30.0, 0.0)
