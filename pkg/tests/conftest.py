from __future__ import annotations

import copy
from pathlib import Path

import pytest
from hypothesis import settings

from hvdc_spc.system import load_system, system_from_dict

DATA = Path(__file__).resolve().parents[1] / "src" / "hvdc_spc" / "data"


def bundled_path(name: str) -> Path:
    return DATA / f"{name}.json"


def planes_path(name: str) -> Path:
    return DATA / f"{name}_planes.json"


AREA = {"f_base": 50.0, "damping": 1.0, "rocof_limit": 0.625, "nadir_limit": 0.7, "ssfd_limit": 0.4,
        "turbine_time_const": 8.0}


def gen(gid: str, bus: str, **kw) -> dict:
    g = {"id": gid, "bus": bus, "p_min": 0.05, "p_max": 0.3, "ramp_up": 0.3, "ramp_down": 0.3, "t_on": 1,
         "t_off": 1, "cost_energy": 40.0, "cost_startup": 100.0, "cost_shutdown": 10.0, "cost_reserve": 5.0,
         "inertia": 5.0, "droop": 0.05, "turbine_fraction": 0.3, "turbine_time": 8.0}
    g.update(kw)
    return g


def one_area_doc(loads=(0.3, 0.4), n_gens: int = 2, **area_kw) -> dict:
    """One area, one bus, ``n_gens`` identical-ish units and one load."""
    area = {"id": "A", **AREA, **area_kw}
    gens = [gen(f"G{i + 1}", "b1", cost_energy=40.0 + 10.0 * i) for i in range(n_gens)]
    return {
        "name": "tiny",
        "areas": [area],
        "buses": [{"id": "b1", "area": "A"}],
        "generators": gens,
        "loads": [{"id": "d1", "bus": "b1", "voll": 3000.0}],
        "series": {"load": {"d1": list(loads)}},
    }


def two_area_doc(periods: int = 2, technology: str = "VSC") -> dict:
    """Two symmetric single-bus areas joined by one link."""
    doc = {
        "name": "pair",
        "areas": [{"id": "A", **AREA}, {"id": "B", **AREA}],
        "buses": [{"id": "a1", "area": "A"}, {"id": "b1", "area": "B"}],
        "generators": [gen("GA1", "a1", cost_energy=30.0), gen("GA2", "a1", cost_energy=50.0),
                       gen("GB1", "b1", cost_energy=35.0), gen("GB2", "b1", cost_energy=55.0)],
        "converters": [{"id": "L", "from_bus": "b1", "to_bus": "a1", "capacity": 0.2, "technology": technology,
                        "pole_config": "bipole", "droop": 0.05}],
        "loads": [{"id": "da", "bus": "a1", "voll": 3000.0}, {"id": "db", "bus": "b1", "voll": 3000.0}],
        "series": {"load": {"da": [0.35] * periods, "db": [0.25] * periods}},
    }
    return doc


def spec_of(doc: dict):
    return system_from_dict(copy.deepcopy(doc))


@pytest.fixture(scope="session")
def two_area_small():
    return load_system(bundled_path("two_area_small"))


@pytest.fixture(scope="session")
def two_area():
    return load_system(bundled_path("two_area"))


@pytest.fixture(scope="session")
def three_area():
    return load_system(bundled_path("three_area"))


# wall-clock deadlines are meaningless on a shared single core
settings.register_profile("repo", deadline=None)
settings.load_profile("repo")


# acceptance verdicts, echoed at the end of the run
VERDICTS: list[str] = []


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
