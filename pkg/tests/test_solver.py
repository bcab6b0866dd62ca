import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hvdc_spc.solver import (BINARY, INFEASIBLE, OPTIMAL, UNBOUNDED, BackendUnavailableError, ModelError,
                             ModelHandle, available_backends, fix_binaries_and_relax, read_lp, solve, write_lp)

BACKENDS = available_backends()


@pytest.mark.parametrize("backend", BACKENDS)
def test_one_variable_lp(backend):
    m = ModelHandle()
    m.add_var("x", lb=-math.inf, obj=1.0)
    m.add_constr("c", {"x": 1.0}, ">=", 3.0)
    r = solve(m, backend)
    assert r.status == OPTIMAL and r.objective == pytest.approx(3.0)
    assert r.dual["c"] == pytest.approx(1.0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_tiny_milp(backend):
    m = ModelHandle()
    m.add_var("x", kind=BINARY, obj=1.0)
    m.add_var("y", kind=BINARY, obj=1.0)
    m.add_constr("c", {"x": 1.0, "y": 1.0}, ">=", 1.0)
    r = solve(m, backend)
    assert r.status == OPTIMAL and r.objective == pytest.approx(1.0)
    assert sorted(round(r.primal[v]) for v in ("x", "y")) == [0, 1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible(backend):
    m = ModelHandle()
    m.add_var("x", obj=1.0)
    m.add_constr("lo", {"x": 1.0}, ">=", 2.0)
    m.add_constr("hi", {"x": 1.0}, "<=", 1.0)
    r = solve(m, backend)
    assert r.status == INFEASIBLE and r.primal is None


@pytest.mark.parametrize("backend", BACKENDS)
def test_unbounded(backend):
    m = ModelHandle()
    m.add_var("x", lb=-math.inf, obj=1.0)
    assert solve(m, backend).status == UNBOUNDED


def test_dual_is_objective_sensitivity():
    m = ModelHandle()
    m.add_var("x", obj=2.0)
    m.add_var("y", obj=5.0)
    m.add_constr("d", {"x": 1.0, "y": 1.0}, "==", 1.0)
    m.add_constr("cap", {"x": 1.0}, "<=", 0.6)
    r = solve(m)
    assert r.dual["d"] == pytest.approx(5.0)
    assert r.dual["cap"] == pytest.approx(-3.0)


def test_fix_binaries():
    m = ModelHandle()
    m.add_var("u", kind=BINARY, obj=10.0)
    m.add_var("p", obj=1.0)
    m.add_constr("link", {"p": 1.0, "u": -5.0}, "<=", 0.0)
    m.add_constr("d", {"p": 1.0}, ">=", 2.0)
    r = solve(m)
    fixed = fix_binaries_and_relax(m, r)
    j = fixed.var("u")
    assert fixed.bounds(j) == (1.0, 1.0) and not fixed.is_mip
    lp = solve(fixed)
    assert lp.objective == pytest.approx(r.objective, rel=1e-6)
    assert lp.dual is not None and "d" in lp.dual
    assert m.is_mip  # original untouched


def test_fix_binaries_needs_values():
    m = ModelHandle()
    m.add_var("u", kind=BINARY)
    with pytest.raises(ModelError):
        fix_binaries_and_relax(m, {})


def test_model_errors():
    m = ModelHandle()
    m.add_var("x")
    with pytest.raises(ModelError):
        m.add_var("x")
    with pytest.raises(ModelError):
        m.add_constr("c", {"nope": 1.0}, "<=", 1.0)
    with pytest.raises(ModelError):
        m.add_constr("c", {"x": 1.0}, "<", 1.0)
    with pytest.raises(ModelError):
        m.add_constr("c", {"x": math.nan}, "<=", 1.0)


def test_unknown_backend():
    with pytest.raises(BackendUnavailableError):
        solve(ModelHandle(), "nope")


def test_backend_from_environment(monkeypatch):
    monkeypatch.setenv("HVDC_UC_BACKEND", "scipy")
    m = ModelHandle()
    m.add_var("x", obj=1.0)
    assert solve(m).backend == "scipy"


def random_milp(seed: int) -> ModelHandle:
    rng = np.random.default_rng(seed)
    m = ModelHandle("rand")
    n = 6
    for j in range(n):
        m.add_var(f"x{j}", ub=float(rng.integers(2, 6)), obj=float(rng.uniform(1, 10)))
        m.add_var(f"u{j}", kind=BINARY, obj=float(rng.uniform(0, 20)))
        m.add_constr(f"on{j}", {f"x{j}": 1.0, f"u{j}": -6.0}, "<=", 0.0)
    for i in range(3):
        m.add_constr(f"d{i}", {f"x{j}": float(rng.uniform(0.5, 2)) for j in range(n)}, ">=", float(rng.uniform(3, 8)))
    return m


@settings(max_examples=15)
@given(seed=st.integers(0, 1000))
def test_backends_agree(seed):
    m = random_milp(seed)
    objs = [solve(m, b).objective for b in BACKENDS]
    assert all(o == pytest.approx(objs[0], rel=1e-6) for o in objs)


@settings(max_examples=10)
@given(seed=st.integers(0, 1000))
def test_lp_file_round_trip(tmp_path_factory, seed):
    m = random_milp(seed)
    p = tmp_path_factory.mktemp("lp") / "m.lp"
    write_lp(m, p)
    back = read_lp(p)
    assert back.var_names == m.var_names and back.con_names == m.con_names
    assert solve(back).objective == pytest.approx(solve(m).objective, rel=1e-9)


def test_lp_file_is_readable_by_highs(tmp_path):
    import highspy
    m = random_milp(1)
    write_lp(m, tmp_path / "m.lp")
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(tmp_path / "m.lp"))
    h.run()
    assert h.getInfo().objective_function_value == pytest.approx(solve(m).objective, rel=1e-9)
