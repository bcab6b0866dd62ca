import json

import pytest
from hypothesis import given, settings, strategies as st

from hvdc_spc.system import (DanglingReferenceError, ParseError, UnitError, Violation, load_system, save_system,
                             system_from_dict, validate, with_generators)

from conftest import bundled_path, one_area_doc, spec_of, two_area_doc


def test_bundled_two_area_counts(two_area):
    assert len(two_area.areas) == 2
    assert len(two_area.converters) == 1
    link = two_area.converters[0]
    assert (link.technology, link.pole_config) == ("VSC", "bipole")
    assert len(two_area.generators) == 65
    assert two_area.horizon == 24


@pytest.mark.parametrize("name", ["two_area", "two_area_small", "three_area"])
def test_bundled_systems_are_valid(name):
    assert validate(load_system(bundled_path(name))) == []


def test_unknown_bus_is_dangling():
    doc = one_area_doc()
    doc["generators"][0]["bus"] = "nowhere"
    with pytest.raises(DanglingReferenceError):
        spec_of(doc)


def test_empty_fleet_still_loads():
    doc = one_area_doc()
    doc["generators"] = []
    doc["areas"][0]["dimensioning_incident"] = 0.1
    spec = spec_of(doc)
    assert spec.generators == () and spec.load_series["d1"] == (0.3, 0.4)


def test_non_pu_units_rejected():
    doc = one_area_doc()
    doc["units"] = "MW"
    with pytest.raises(UnitError):
        spec_of(doc)


def test_missing_field_names_the_field():
    doc = one_area_doc()
    del doc["generators"][0]["p_max"]
    with pytest.raises(ParseError, match="p_max"):
        spec_of(doc)


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "name": "x",\n "areas": [\n}', encoding="utf-8")
    with pytest.raises(ParseError) as ei:
        load_system(p)
    assert ei.value.line == 4


def test_zero_droop_violation():
    spec = spec_of(one_area_doc())
    bad = with_generators(spec, G1={"droop": 0.0})
    assert validate(bad) == [Violation("G1", "droop must be positive")]


def test_ac_line_across_areas():
    doc = two_area_doc()
    doc["ac_lines"] = [{"id": "X", "from_bus": "a1", "to_bus": "b1", "susceptance": 10.0, "limit": 1.0}]
    assert validate(spec_of(doc)) == [Violation("X", "AC line spans areas")]


def test_default_dimensioning_incident_is_largest_unit():
    doc = one_area_doc()
    doc["generators"][1]["p_max"] = 0.45
    assert spec_of(doc).dimensioning_incident("A") == 0.45


def test_bipole_and_monopole_outage_loss():
    doc = two_area_doc()
    doc["converters"][0]["capacity"] = 0.5
    assert spec_of(doc).converters[0].outage_loss == 0.25
    doc["converters"][0]["pole_config"] = "monopole"
    assert spec_of(doc).converters[0].outage_loss == 0.5


def test_incidence_signs():
    spec = spec_of(two_area_doc())
    link = spec.converters[0]
    assert spec.incidence("b1", link) == 1 and spec.incidence("a1", link) == -1


@pytest.mark.parametrize("name", ["two_area_small", "three_area"])
def test_round_trip_bundled(tmp_path, name):
    spec = load_system(bundled_path(name))
    back = load_system(save_system(spec, tmp_path / "copy.json"))
    assert back == spec


floats = st.floats(min_value=1e-3, max_value=10.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(p_max=floats, inertia=floats, droop=st.floats(min_value=0.01, max_value=0.2),
       loads=st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=1, max_size=6))
def test_round_trip_is_bit_exact(tmp_path_factory, p_max, inertia, droop, loads):
    doc = one_area_doc(loads=loads)
    doc["generators"][0].update(p_max=p_max, inertia=inertia, droop=droop)
    spec = spec_of(doc)
    path = tmp_path_factory.mktemp("rt") / "s.json"
    assert load_system(save_system(spec, path)) == spec


@settings(max_examples=30, deadline=None)
@given(bad=st.lists(st.sampled_from(["droop", "inertia", "turbine_time", "p_min"]), min_size=1, max_size=4),
       who=st.lists(st.sampled_from(["G1", "G2"]), min_size=1, max_size=2))
def test_validate_is_sorted_and_repeatable(bad, who):
    spec = spec_of(one_area_doc())
    changes = {g: {f: (5.0 if f == "p_min" else 0.0) for f in bad} for g in who}
    broken = with_generators(spec, **changes)
    first = validate(broken)
    assert first == validate(broken)
    assert first == sorted(first)
    assert {v.entity for v in first} == set(who)


def test_series_from_csv(tmp_path):
    (tmp_path / "load.csv").write_text("period,d1\n1,0.3\n2,0.35\n", encoding="utf-8")
    doc = one_area_doc()
    doc["series"] = {"load": "load.csv"}
    (tmp_path / "s.json").write_text(json.dumps(doc), encoding="utf-8")
    spec = load_system(tmp_path / "s.json")
    assert spec.load_series["d1"] == (0.3, 0.35) and spec.horizon == 2


def test_inline_dict_matches_loader():
    doc = one_area_doc()
    assert system_from_dict(doc) == spec_of(doc)
