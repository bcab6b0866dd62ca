import csv
import json

import pytest

from hvdc_spc.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, check_manifest, main

from hvdc_spc.nadir import UNILATERAL, NadirHyperplane, save_planes

from conftest import bundled_path, one_area_doc, two_area_doc
from test_ucp import OPEN


def write(tmp_path, doc, name="sys.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def open_planes(path):
    save_planes([NadirHyperplane("A", UNILATERAL, "F", {"R": 0.0, "M": 0.0}, 0.0, 0.7, OPEN)], path, "tiny")
    return str(path)


@pytest.fixture
def toy(tmp_path):
    return write(tmp_path, one_area_doc(dimensioning_incident=0.02))


def test_validate_exit_codes(tmp_path, toy, capsys):
    assert main(["validate", "--system", toy]) == EXIT_OK
    bad = one_area_doc()
    bad["generators"][0]["droop"] = 0.0
    assert main(["validate", "--system", write(tmp_path, bad, "bad.json")]) == EXIT_DOMAIN
    assert "G1" in capsys.readouterr().out
    assert main(["validate", "--system", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_unknown_subcommand_is_usage_error():
    assert main(["frobnicate"]) == EXIT_USAGE


@pytest.mark.parametrize("event", ["bad", "gen:", "gen:Z", "hvdc:nope", "trip:A"])
def test_malformed_event(tmp_path, toy, event):
    assert main(["simulate", "--system", toy, "--event", event, "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_frequency_mode_needs_planes(tmp_path, toy, capsys):
    code = main(["run", "--system", toy, "--mode", "unilateral", "--out", str(tmp_path / "r")])
    assert code == EXIT_USAGE
    assert "--planes" in capsys.readouterr().err


def test_two_point_grid_has_no_boundary(tmp_path):
    code = main(["fit-nadir", "--system", str(bundled_path("two_area_small")), "--scheme", "unilateral",
                 "--grid", "2", "--out", str(tmp_path / "p.json")])
    assert code == EXIT_DOMAIN
    assert not (tmp_path / "p.json").exists()


def test_grid_of_one_rejected(tmp_path):
    code = main(["fit-nadir", "--system", str(bundled_path("two_area_small")), "--grid", "1",
                 "--out", str(tmp_path / "p.json")])
    assert code == EXIT_USAGE


def test_fit_nadir_is_reproducible(tmp_path):
    args = ["fit-nadir", "--system", str(bundled_path("two_area_small")), "--scheme", "unilateral",
            "--area", "A1", "--grid", "30", "--band", "0.02"]
    assert main(args + ["--out", str(tmp_path / "a.json")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b.json")]) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@pytest.mark.parametrize("event", ["gen:A", "hvdc:L"])
def test_simulate_writes_csv_and_figure(tmp_path, event):
    sysf = write(tmp_path, two_area_doc())
    out = tmp_path / "sim"
    assert main(["simulate", "--system", sysf, "--event", event, "--T", "20", "--out", str(out)]) == EXIT_OK
    csvs = list(out.glob("*.csv"))
    assert len(csvs) == 1 and csvs[0].with_suffix(".png").stat().st_size > 0
    with open(csvs[0], newline="") as fh:
        head = next(csv.reader(fh))
    assert head[:3] == ["t", "A_df_hz", "B_df_hz"]


def test_infeasible_run_gives_hint(tmp_path, capsys):
    # the steady-state limit needs both units online, but their minimum output exceeds the load
    doc = one_area_doc(loads=(0.3, 0.3), dimensioning_incident=0.02, ssfd_limit=0.1)
    for g in doc["generators"]:
        g["p_min"] = 0.2
    code = main(["run", "--system", write(tmp_path, doc), "--mode", "no_spc", "--out", str(tmp_path / "r"),
                 "--planes", open_planes(tmp_path / "p.json"), "--no-verify"])
    assert code == EXIT_DOMAIN
    assert "hint:" in capsys.readouterr().err


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    sysf = root / "sys.json"
    sysf.write_text(json.dumps(one_area_doc(dimensioning_incident=0.02)))
    planes = open_planes(root / "p.json")
    out = {}
    for mode in ("no_lim", "no_spc"):
        d = root / mode
        args = ["run", "--system", str(sysf), "--mode", mode, "--out", str(d), "--deterministic"]
        assert main(args + ["--planes", planes]) == EXIT_OK
        out[mode] = d
    return out


def test_run_outputs_and_manifest(runs):
    d = runs["no_spc"]
    for name in ("solution.json", "prices.json", "verification.json", "simulations.csv", "manifest.json"):
        assert (d / name).exists()
    man = json.loads((d / "manifest.json").read_text())
    assert "solution.json" in man["outputs"] and man["backend"]
    assert check_manifest(d / "manifest.json") == []


def test_manifest_detects_tampering(tmp_path, runs):
    import shutil
    d = tmp_path / "copy"
    shutil.copytree(runs["no_lim"], d)
    (d / "prices.json").write_text("{}")
    (d / "simulations.csv").unlink()
    bad = check_manifest(d / "manifest.json")
    assert "prices.json: hash mismatch" in bad and "simulations.csv: missing" in bad


def test_report_single_run_has_no_deltas(tmp_path, runs):
    out = tmp_path / "rep"
    assert main(["report", "--solution", str(runs["no_spc"] / "solution.json"), "--out", str(out)]) == EXIT_OK
    assert (out / "report.png").exists() and (out / "prices.png").exists()
    with open(out / "report.csv", newline="") as fh:
        head = next(csv.reader(fh))
    assert not any(h.endswith("_delta_pct") for h in head)


def test_compare_deltas_against_baseline(tmp_path, runs):
    out = tmp_path / "cmp"
    sols = [str(runs[m] / "solution.json") for m in ("no_spc", "no_lim")]
    assert main(["compare", "--solutions", *sols, "--out", str(out)]) == EXIT_OK
    with open(out / "comparison.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == ["row", "area", "no_spc", "no_lim", "no_lim_delta_pct"]
        rows = list(reader)
    for r in rows:
        base, other = float(r["no_spc"]), float(r["no_lim"])
        if base:
            assert float(r["no_lim_delta_pct"]) == pytest.approx(100.0 * (other - base) / abs(base))


def test_compare_price_count_mismatch(tmp_path, runs):
    s = str(runs["no_spc"] / "solution.json")
    code = main(["compare", "--solutions", s, s, "--prices", str(runs["no_spc"] / "prices.json"),
                 "--out", str(tmp_path / "c")])
    assert code == EXIT_USAGE


def test_report_rejects_foreign_prices(tmp_path, runs):
    code = main(["report", "--solution", str(runs["no_spc"] / "solution.json"),
                 "--prices", str(runs["no_lim"] / "prices.json"), "--out", str(tmp_path / "r")])
    assert code == EXIT_USAGE
