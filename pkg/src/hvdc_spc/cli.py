"""Command line: validate, fit-nadir, run, simulate, report, compare.

Exit codes: 0 success, 1 domain failure (violations, infeasibility, failed
certification), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dynamics import DynamicScenario, GeneratorTrip, OperatingPoint, SimulationError, extract_metrics, \
    hvdc_outage_event, simulate
from .nadir import BILATERAL, UNILATERAL, NadirSurfaceError, fit_area_plane, load_planes, save_planes
from .solver import SolverOptions, backend_name
from .system import SystemDataError, load_system, validate

log = logging.getLogger("hvdc_spc")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


# ---------------------------------------------------------------------------
# manifest


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    inputs: dict[str, str]  # path -> sha256
    config: dict
    tool_version: str = __version__
    backend: str = ""
    started: str = field(default_factory=_now)
    finished: str = ""
    outputs: dict[str, str] = field(default_factory=dict)  # file name (relative to the manifest) -> sha256

    def add_output(self, path: Path, root: Path) -> None:
        self.outputs[str(path.relative_to(root))] = sha256(path)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        self.finished = self.finished or _now()
        path.write_text(json.dumps(asdict(self), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


def check_manifest(path: str | Path) -> list[str]:
    """Listed outputs that are missing or whose content changed."""
    path = Path(path)
    man = RunManifest.load(path)
    bad = []
    for name, digest in man.outputs.items():
        f = path.parent / name
        if not f.exists():
            bad.append(f"{name}: missing")
        elif sha256(f) != digest:
            bad.append(f"{name}: hash mismatch")
    return bad


def _system_inputs(path: Path) -> dict[str, str]:
    out = {str(path): sha256(path)}
    try:
        refs = json.loads(path.read_text(encoding="utf-8")).get("series") or {}
    except (OSError, json.JSONDecodeError):
        return out
    for ref in refs.values():
        if isinstance(ref, str) and (path.parent / ref).exists():
            out[str(path.parent / ref)] = sha256(path.parent / ref)
    return out


# ---------------------------------------------------------------------------
# helpers


def _load_spec(path: str):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"system file not found: {path}")
    return load_system(p)


def _load_solution(path: str):
    from .ucp import UcpSolution

    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"solution file not found: {path}")
    return UcpSolution.load(p)


def parse_event(text: str, spec):
    """``gen:<area>`` (dimensioning incident) or ``hvdc:<link>``."""
    kind, sep, target = text.partition(":")
    if not sep or not target or kind not in ("gen", "hvdc"):
        raise UsageError(f"malformed event '{text}' (expected gen:<area> or hvdc:<link>)")
    if kind == "gen":
        if target not in spec.area_ids:
            raise UsageError(f"unknown area '{target}' (known: {', '.join(spec.area_ids)})")
        return kind, target
    if target not in {k.id for k in spec.converters}:
        raise UsageError(f"unknown link '{target}' (known: {', '.join(k.id for k in spec.converters)})")
    return kind, target


def full_point(spec) -> OperatingPoint:
    """Every unit online and on governor control, no converter support."""
    on = {g.id: 1 for g in spec.generators}
    return OperatingPoint(on, dict(on), {}, {k.id: 0.0 for k in spec.converters})


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    spec = _load_spec(args.system)
    found = validate(spec)
    for v in found:
        print(f"{v.entity}: {v.rule}")
    if found:
        print(f"{len(found)} violation(s)", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"{spec.name}: valid ({len(spec.areas)} areas, {len(spec.generators)} generators, "
          f"{len(spec.converters)} links, {spec.horizon} periods)")
    return EXIT_OK


def cmd_fit_nadir(args) -> int:
    spec = _load_spec(args.system)
    schemes = (UNILATERAL, BILATERAL) if args.scheme == "all" else (args.scheme,)
    areas = args.area or spec.area_ids
    for a in areas:
        if a not in spec.area_ids:
            raise UsageError(f"unknown area '{a}'")
    if args.grid is not None and args.grid < 2:
        raise UsageError("--grid must be at least 2")
    planes = []
    for a in areas:
        for scheme in schemes:
            if scheme == BILATERAL and not spec.neighbors(a):
                log.info("area %s has no neighbours; the bilateral plane equals the single-area case", a)
            p = fit_area_plane(spec, a, scheme, args.grid, args.band, samples=args.samples, seed=args.seed)
            d = p.diagnostics
            print(f"{a} {scheme}: mean relative error {d['mean_relative_error']:.4f}, "
                  f"false-feasible {d['false_feasible_count']}")
            if d["false_feasible_count"] != 0:
                raise DomainError(f"plane of {a}/{scheme} failed certification; nothing written")
            planes.append(p)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_planes(planes, out, system=spec.name)
    print(f"wrote {out}")
    return EXIT_OK


def _scenario(args, spec):
    from .ucp import ScenarioConfig

    planes = {}
    if args.planes:
        planes = load_planes(args.planes)
    solver = SolverOptions(deterministic=args.deterministic, verbose=args.verbose, seed=args.seed)
    if args.time_limit is not None:
        solver.time_limit = args.time_limit
    if args.mip_gap is not None:
        solver.mip_gap = args.mip_gap
    if args.threads is not None:
        solver.threads = args.threads
    cfg = ScenarioConfig(args.mode, reserve_granularity=args.granularity, lcc_block=args.lcc_block,
                         overload=not args.no_overload, planes=planes,
                         plane_files=tuple(str(p) for p in args.planes or ()), horizon=args.horizon,
                         segments=args.segments, segmentation=args.segmentation, solver=solver)
    if cfg.frequency_constrained:
        need = cfg.required_planes(spec.area_ids, lambda a: bool(spec.neighbors(a)))
        missing = [f"{a}/{s}" for a, s in need if (a, s) not in planes]
        if missing:
            raise UsageError(f"mode '{args.mode}' needs --planes covering {', '.join(missing)}")
    return cfg


def cmd_run(args) -> int:
    from .ucp import (MissingHyperplaneError, ScenarioError, UcpSolveError, build_ucp, recover_prices, solve_ucp,
                      verify_solution)

    spec = _load_spec(args.system)
    bad = validate(spec)
    if bad:
        for v in bad:
            print(f"{v.entity}: {v.rule}", file=sys.stderr)
        raise DomainError("system data failed validation")
    try:
        cfg = _scenario(args, spec)
    except MissingHyperplaneError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inputs = _system_inputs(Path(args.system))
    for p in args.planes or ():
        inputs[str(p)] = sha256(p)
    man = RunManifest("run", inputs, cfg.to_dict(), backend=backend_name(args.backend))
    try:
        model = build_ucp(spec, cfg)
        sol = solve_ucp(model, args.backend)
    except UcpSolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.hint:
            print(f"hint: {exc.hint}", file=sys.stderr)
        return EXIT_DOMAIN
    except ScenarioError as exc:
        raise DomainError(str(exc)) from None
    market = recover_prices(spec, cfg, model, sol, args.backend)
    files = [sol.save(out / "solution.json"), market.save(out / "prices.json"), *market.write_csv(out)]
    status = EXIT_OK
    print(f"{spec.name}/{cfg.mode}: {sol.status}, objective {sol.objective:.6f}, gap {sol.mip_gap}, "
          f"{sol.runtime:.1f} s")
    print(f"fixed-commitment LP objective {market.lp_objective:.6f} (relative difference {market.objective_gap:.2e})")
    if not args.no_verify:
        rep = verify_solution(spec, cfg, sol, sample=args.sample)
        files += [rep.save(out / "verification.json"), rep.write_csv(out / "simulations.csv")]
        print(rep.summary())
        if not rep.passed:
            status = EXIT_DOMAIN
    for f in files:
        man.add_output(f, out)
    man.save(out / "manifest.json")
    print(f"wrote {out}")
    return status


def cmd_simulate(args) -> int:
    from .plotting import plot_trajectory

    spec = _load_spec(args.system)
    kind, target = parse_event(args.event, spec)
    if args.solution:
        sol = _load_solution(args.solution)
        if sol.system != spec.name:
            raise UsageError(f"solution is for system '{sol.system}', not '{spec.name}'")
        point = sol.snapshot(spec, args.period)
    else:
        point = full_point(spec)
    ev = GeneratorTrip(target, spec.dimensioning_incident(target)) if kind == "gen" else \
        hvdc_outage_event(spec, point, target)
    traj = simulate(DynamicScenario(spec, point, ev, args.T, args.dt))
    out = Path(args.out)
    if out.suffix.lower() != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"trajectory_{kind}_{target}.csv"
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out)
    for a in spec.area_ids:
        try:
            m = extract_metrics(traj, a)
        except SimulationError as exc:
            print(f"{a}: {exc}")
            continue
        print(f"{a}: nadir {m.nadir:.4f} Hz at {m.t_nadir:.2f} s, RoCoF {m.rocof_max:.4f} Hz/s, "
              f"steady state {m.ssfd:.4f} Hz")
    limits = {a.id: a.nadir_limit for a in spec.areas}
    png = plot_trajectory(traj, out.with_suffix(".png"), title=f"{spec.name}: {args.event}", limits=limits)
    print(f"wrote {out} and {png}")
    return EXIT_OK


def _market_for(sol_path: str, prices: str | None):
    from .ucp import MarketReport

    p = Path(prices) if prices else Path(sol_path).parent / "prices.json"
    if not p.exists():
        raise FileNotFoundError(f"price file not found: {p}")
    return MarketReport.load(p)


def cmd_report(args) -> int:
    from .plotting import plot_prices, plot_table
    from .ucp import compare
    from .ucp.report import TABLE_ROWS

    sol = _load_solution(args.solution)
    market = _market_for(args.solution, args.prices)
    if market.system != sol.system or market.mode != sol.mode:
        raise UsageError("price file does not belong to the solution")
    comp = compare([market])
    out = Path(args.out)
    files = comp.write(out, "report")
    files.append(plot_table(comp.tables, TABLE_ROWS, out / "report.png", title=f"{sol.system} ({sol.mode})"))
    files.append(plot_prices(market.prices, out / "prices.png", title=f"{sol.system} ({sol.mode})"))
    for r in comp.records():
        print(f"{r['row']:>18} {r['area']:>8} {r[comp.labels[0]]:16.2f}")
    print("wrote " + ", ".join(str(f) for f in files))
    return EXIT_OK


def cmd_compare(args) -> int:
    from .plotting import plot_table
    from .ucp import ReportError, compare
    from .ucp.report import TABLE_ROWS

    if args.prices and len(args.prices) != len(args.solutions):
        raise UsageError("--prices must list one file per solution")
    markets = []
    for i, s in enumerate(args.solutions):
        sol = _load_solution(s)
        m = _market_for(s, args.prices[i] if args.prices else None)
        if m.system != sol.system:
            raise UsageError(f"{s}: price file belongs to another system")
        markets.append(m)
    try:
        comp = compare(markets, args.baseline)
    except ReportError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    files = comp.write(out, "comparison")
    files.append(plot_table(comp.tables, TABLE_ROWS, out / "comparison.png", title=comp.system))
    for r in comp.records():
        deltas = "  ".join(f"{k[:-10]} {'n/a' if v is None else f'{v:+.2f}%'}" for k, v in r.items()
                           if k.endswith("_delta_pct"))
        print(f"{r['row']:>18} {r['area']:>8}  {deltas}")
    print("wrote " + ", ".join(str(f) for f in files))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    from .ucp.config import GRANULARITIES, MODES, SEGMENTATIONS

    p = argparse.ArgumentParser(prog="hvdc-spc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a system file")
    s.add_argument("--system", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("fit-nadir", help="fit and certify nadir planes")
    s.add_argument("--system", required=True)
    s.add_argument("--scheme", choices=(UNILATERAL, BILATERAL, "all"), default="all")
    s.add_argument("--area", action="append", help="restrict to this area (repeatable)")
    s.add_argument("--grid", type=int, default=None, help="points per axis (default: per-scheme default)")
    s.add_argument("--band", type=float, default=0.01, help="boundary band half-width in Hz")
    s.add_argument("--samples", type=int, default=None, help="random samples instead of a full lattice")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit_nadir)

    s = sub.add_parser("run", help="solve one scenario, recover prices and verify")
    s.add_argument("--system", required=True)
    s.add_argument("--mode", required=True, choices=MODES)
    s.add_argument("--planes", nargs="+", help="plane files from fit-nadir")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--granularity", choices=GRANULARITIES, default="daily")
    s.add_argument("--lcc-block", type=int, default=24)
    s.add_argument("--no-overload", action="store_true")
    s.add_argument("--horizon", type=int, default=None)
    s.add_argument("--segments", type=int, default=4)
    s.add_argument("--segmentation", choices=SEGMENTATIONS, default="geometric")
    s.add_argument("--backend", default=None, help="solver backend (default: $HVDC_UC_BACKEND or highs)")
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--mip-gap", type=float, default=None)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--deterministic", action="store_true")
    s.add_argument("--sample", type=int, nargs="*", help="periods to simulate (default: all)")
    s.add_argument("--no-verify", action="store_true")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("simulate", help="simulate an incident on a solved period")
    s.add_argument("--system", required=True)
    s.add_argument("--solution", default=None, help="solution file (default: full commitment, no converter support)")
    s.add_argument("--period", type=int, default=1)
    s.add_argument("--event", required=True, help="gen:<area> or hvdc:<link>")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--T", type=float, default=30.0, help="simulated time span in seconds")
    s.add_argument("--out", required=True, help="CSV file or directory")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("report", help="market table of one run")
    s.add_argument("--solution", required=True)
    s.add_argument("--prices", default=None, help="default: prices.json next to the solution")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("compare", help="percentage deltas between runs")
    s.add_argument("--solutions", nargs="+", required=True)
    s.add_argument("--prices", nargs="+", default=None)
    s.add_argument("--baseline", default=None, help="label of the reference run (default: no_spc)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    from .ucp import ScenarioError

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SimulationError, NadirSurfaceError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, SystemDataError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE

if __name__ == "__main__":
    sys.exit(main())
