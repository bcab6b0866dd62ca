"""Linear inner approximation of the frequency-nadir feasibility region.

The nadir is evaluated on a lattice of area parameters, the points close to
the limit are collected, and a plane ``lhs >= c . x + c0`` is fitted to them
by least squares. The fit is constrained so that the plane rejects every
lattice point (and every extra sample) whose nadir exceeds the limit, and a
few rounds of cutting planes push the plane above the continuous limit
surface over the realisable part of the parameter box.

Unilateral planes live in (F, R, M) with ``F`` on the left-hand side.
Bilateral planes use the own-area generator terms (Fg, Rg, M) and, for each
neighbour ``b``, the axes ``Rg@b``, ``M@b``, ``Fg@b`` and ``Rc@b``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy.stats import qmc

from ._qp import lsq_ineq
from .metrics import nadir_factor
from .system import SystemSpec

UNILATERAL = "unilateral"
BILATERAL = "bilateral"
PLANE_FORMAT = "hvdc_spc.hyperplanes/1"
PAD = 0.05
SLACK = 0.01  # relative widening of the realisable lhs window


class NadirSurfaceError(ValueError):
    pass


class RangeConfigurationError(NadirSurfaceError):
    pass


class DegenerateBoundaryError(NadirSurfaceError):
    pass


class CertificationError(NadirSurfaceError):
    pass


class SliceError(NadirSurfaceError):
    pass


# ---------------------------------------------------------------------------
# realisable aggregate ranges


@dataclass(frozen=True)
class FleetRanges:
    """Aggregate ranges realisable by an area's fleet under the RoCoF/SSFD bounds."""

    M: tuple[float, float]
    Rg: tuple[float, float]
    Fg: tuple[float, float]
    Rc: float  # droop of all links at the area
    phi: tuple[float, float]  # min/max turbine fraction


def fleet_ranges(spec: SystemSpec, area: str) -> FleetRanges:
    a = spec.area(area)
    gens = spec.generators_in(area)
    if not gens:
        raise RangeConfigurationError(f"area '{area}' has no generators")
    dP = a.dimensioning_incident
    m_lo = a.f_base * dP / a.rocof_limit
    m_hi = sum(2.0 * g.inertia * g.p_max for g in gens)
    r_lo = max(a.f_base * dP / a.ssfd_limit - a.damping, 1.0)
    r_hi = sum(g.droop_gain for g in gens)
    phis = [g.turbine_fraction for g in gens]
    f_hi = sum(g.droop_gain * g.turbine_fraction for g in gens)
    if m_lo > m_hi:
        raise RangeConfigurationError(f"area '{area}': RoCoF bound needs M >= {m_lo:g}, fleet offers {m_hi:g}")
    if r_lo > r_hi:
        raise RangeConfigurationError(f"area '{area}': SSFD bound needs Rg >= {r_lo:g}, fleet offers {r_hi:g}")
    rc = sum(k.droop_gain for k in spec.links_at(area))
    return FleetRanges((m_lo, m_hi), (r_lo, r_hi), (min(phis) * r_lo, f_hi), rc, (min(phis), max(phis)))


def _pad(lo: float, hi: float) -> tuple[float, float]:
    return lo * (1 - PAD), hi * (1 + PAD)


# ---------------------------------------------------------------------------
# nadir model on named columns


@dataclass(frozen=True)
class Neighbour:
    id: str
    D: float
    T: float


@dataclass(frozen=True)
class NadirModel:
    scheme: str
    f_base: float
    dP: float
    D: float
    T: float
    limit: float
    neighbours: tuple[Neighbour, ...] = ()

    @property
    def lhs(self) -> str:
        return "F" if self.scheme == UNILATERAL else "Fg"

    @property
    def rhs(self) -> tuple[str, ...]:
        if self.scheme == UNILATERAL:
            return ("R", "M")
        out = ["Rg", "M"]
        for nb in self.neighbours:
            out += [f"Rg@{nb.id}", f"M@{nb.id}", f"Fg@{nb.id}", f"Rc@{nb.id}"]
        return tuple(out)

    @property
    def axes(self) -> tuple[str, ...]:
        return (self.lhs,) + self.rhs

    def evaluate(self, cols: Mapping[str, np.ndarray]) -> np.ndarray:
        """Nadir magnitude (Hz); ``nan`` where a radicand is negative."""
        if self.scheme == UNILATERAL:
            return self.f_base * self.dP * nadir_factor(cols["M"], self.D, cols["R"], cols["F"], self.T)
        rc_tot = 0.0
        extra = 0.0
        for nb in self.neighbours:
            rc = np.asarray(cols[f"Rc@{nb.id}"], float)
            fb = nadir_factor(cols[f"M@{nb.id}"], nb.D, cols[f"Rg@{nb.id}"] + rc, cols[f"Fg@{nb.id}"] + rc, nb.T)
            df_b = self.limit * rc * fb
            extra = extra + rc * df_b / self.f_base
            rc_tot = rc_tot + rc
        fa = nadir_factor(cols["M"], self.D, cols["Rg"] + rc_tot, cols["Fg"] + rc_tot, self.T)
        return self.f_base * (self.dP + extra) * fa

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "f_base": self.f_base, "dP": self.dP, "D": self.D, "T": self.T,
                "limit": self.limit, "neighbours": [vars(nb) for nb in self.neighbours]}


def nadir_model(spec: SystemSpec, area: str, scheme: str) -> NadirModel:
    a = spec.area(area)
    nbs = ()
    if scheme == BILATERAL:
        nbs = tuple(Neighbour(b, spec.area(b).damping, spec.area(b).turbine_time_const)
                    for b in spec.neighbors(area))
    elif scheme != UNILATERAL:
        raise ValueError(f"unknown scheme '{scheme}'")
    return NadirModel(scheme, a.f_base, a.dimensioning_incident, a.damping, a.turbine_time_const,
                      a.nadir_limit, nbs)


# ---------------------------------------------------------------------------
# grid


@dataclass
class ParameterGrid:
    area: str
    model: NadirModel
    ranges: dict[str, tuple[float, float]]  # padded axis ranges
    values: tuple[np.ndarray, ...]  # lattice values per axis (lhs first); empty if sample-only
    nadir: np.ndarray  # lattice-shaped, nan where invalid
    samples: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    sample_nadir: np.ndarray = field(default_factory=lambda: np.empty(0))
    lhs_bounds: dict = field(default_factory=dict)  # turbine-fraction bounds defining the realisable wedge

    @property
    def axes(self) -> tuple[str, ...]:
        return self.model.axes

    @property
    def scheme(self) -> str:
        return self.model.scheme

    @property
    def lattice_points(self) -> int:
        return int(self.nadir.size)

    @property
    def n_points(self) -> int:
        return self.lattice_points + len(self.sample_nadir)

    @property
    def n_invalid(self) -> int:
        return int(np.isnan(self.nadir).sum() + np.isnan(self.sample_nadir).sum())

    def lattice_coords(self, flat: np.ndarray) -> np.ndarray:
        idx = np.unravel_index(flat, self.nadir.shape)
        return np.column_stack([v[i] for v, i in zip(self.values, idx)])

    def iter_points(self, chunk: int = 1_000_000) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Yield ``(coords, nadir)`` blocks covering lattice and samples; coords follow ``axes``."""
        flat_nadir = self.nadir.reshape(-1)
        for start in range(0, flat_nadir.size, chunk):
            flat = np.arange(start, min(start + chunk, flat_nadir.size))
            yield self.lattice_coords(flat), flat_nadir[flat]
        if len(self.sample_nadir):
            yield self.samples, self.sample_nadir

    def lhs_window(self, rhs_cols: Mapping[str, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
        """Range of lhs values the fleet can produce at the given right-hand-side values."""
        lb = self.lhs_bounds
        slack = lb.get("slack", 0.0)
        if self.scheme == UNILATERAL:
            r = np.asarray(rhs_cols["R"], float)
            hi = np.minimum(r, lb["phi_max"] * r + (1 - lb["phi_max"]) * lb["rc_max"])
        else:
            r = np.asarray(rhs_cols["Rg"], float)
            hi = lb["phi_max"] * r
        return lb["phi_min"] * r * (1 - slack), hi * (1 + slack)

    def node_ok(self, rhs_cols: Mapping[str, np.ndarray]) -> np.ndarray:
        """Neighbour parameter combinations that a neighbouring fleet can produce."""
        first = np.asarray(rhs_cols[self.axes[1]])
        ok = np.ones(first.shape, bool)
        slack = self.lhs_bounds.get("slack", 0.0)
        for nb in self.model.neighbours:
            lo_phi, hi_phi = self.lhs_bounds["phi@" + nb.id]
            r = np.asarray(rhs_cols[f"Rg@{nb.id}"], float)
            f = np.asarray(rhs_cols[f"Fg@{nb.id}"], float)
            ok &= (f >= lo_phi * r * (1 - slack)) & (f <= hi_phi * r * (1 + slack))
        return ok

    def realisable(self, pts: np.ndarray) -> np.ndarray:
        cols = {a: pts[:, j] for j, a in enumerate(self.axes[1:], start=1)}
        lo, hi = self.lhs_window(cols)
        return self.node_ok(cols) & (pts[:, 0] >= lo) & (pts[:, 0] <= hi)

    @property
    def n_unrealisable(self) -> int:
        return int(sum(int(np.sum(~self.realisable(p) & ~np.isnan(n))) for p, n in self.iter_points()))


def _evaluate_chunked(model: NadirModel, pts: np.ndarray, chunk: int = 1_000_000) -> np.ndarray:
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        block = pts[s:s + chunk]
        out[s:s + chunk] = model.evaluate({ax: block[:, j] for j, ax in enumerate(model.axes)})
    return out


def axis_ranges(spec: SystemSpec, area: str, scheme: str) -> tuple[dict[str, tuple[float, float]], dict]:
    fr = fleet_ranges(spec, area)
    if scheme == UNILATERAL:
        r_lo, r_hi = fr.Rg[0], fr.Rg[1] + fr.Rc
        f_lo, f_hi = fr.Fg[0], fr.Fg[1] + fr.Rc
        ranges = {"F": _pad(f_lo, f_hi), "R": _pad(r_lo, r_hi), "M": _pad(*fr.M)}
        bounds = {"phi_min": fr.phi[0], "phi_max": fr.phi[1], "rc_max": fr.Rc, "slack": SLACK}
        return ranges, bounds
    ranges = {"Fg": _pad(*fr.Fg), "Rg": _pad(*fr.Rg), "M": _pad(*fr.M)}
    bounds = {"phi_min": fr.phi[0], "phi_max": fr.phi[1], "slack": SLACK}
    for b in spec.neighbors(area):
        fb = fleet_ranges(spec, b)
        rc = sum(k.droop_gain for k in spec.links_between(area, b))
        ranges[f"Rg@{b}"] = _pad(*fb.Rg)
        ranges[f"M@{b}"] = _pad(*fb.M)
        ranges[f"Fg@{b}"] = _pad(*fb.Fg)
        ranges[f"Rc@{b}"] = (0.0, rc * (1 + PAD))
        bounds["phi@" + b] = fb.phi
    return ranges, bounds


def build_grid(spec: SystemSpec, area: str, scheme: str = UNILATERAL, points_per_axis: int | None = None,
               *, samples: int | None = None, seed: int = 0, max_lattice: int = 50_000_000) -> ParameterGrid:
    """Evaluate the nadir over the realisable parameter box of ``area``.

    Defaults: 100 points per axis for the unilateral scheme; 12 points per
    axis plus 100 000 Latin-hypercube samples for the bilateral scheme. When
    the full lattice would exceed ``max_lattice`` points only samples are used.
    """
    model = nadir_model(spec, area, scheme)
    if scheme == BILATERAL and not model.neighbours:
        raise RangeConfigurationError(f"area '{area}' has no HVDC neighbours")
    if points_per_axis is None:
        points_per_axis = 100 if scheme == UNILATERAL else 12
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be at least 2")
    if samples is None:
        samples = 0 if scheme == UNILATERAL else 100_000
    ranges, bounds = axis_ranges(spec, area, scheme)
    axes = model.axes
    d = len(axes)

    if points_per_axis ** d <= max_lattice:
        values = tuple(np.linspace(*ranges[ax], points_per_axis) for ax in axes)
        shape = (points_per_axis,) * d
        nadir = np.empty(shape)
        flat = nadir.reshape(-1)
        tmp = ParameterGrid(area, model, ranges, values, nadir, lhs_bounds=bounds)
        step = 1_000_000
        for s in range(0, flat.size, step):
            idx = np.arange(s, min(s + step, flat.size))
            flat[idx] = _evaluate_chunked(model, tmp.lattice_coords(idx))
    else:
        values, nadir = (), np.empty((0,) * d)
        if samples == 0:
            samples = 1_000_000

    pts = np.empty((0, d))
    pn = np.empty(0)
    if samples:
        sampler = qmc.LatinHypercube(d=d, seed=seed)
        lo = np.array([ranges[ax][0] for ax in axes])
        hi = np.array([ranges[ax][1] for ax in axes])
        pts = qmc.scale(sampler.random(samples), lo, hi)
        pn = _evaluate_chunked(model, pts)

    grid = ParameterGrid(area, model, ranges, values, nadir, pts, pn, bounds)
    if grid.n_points and grid.n_invalid == grid.n_points:
        raise RangeConfigurationError("every grid point has a negative radicand; check the axis ranges")
    return grid


# ---------------------------------------------------------------------------
# boundary and fit


@dataclass(frozen=True)
class BoundarySet:
    rhs: np.ndarray  # (n, k) coordinates of the plane variables
    lhs: np.ndarray  # (n,)
    nadir: np.ndarray


def extract_boundary(grid: ParameterGrid, nadir_limit: float, band: float) -> BoundarySet:
    rhs, lhs, nad = [], [], []
    for pts, nd in grid.iter_points():
        sel = (np.abs(nd - nadir_limit) <= band) & grid.realisable(pts)  # nan compares False
        if sel.any():
            rhs.append(pts[sel, 1:])
            lhs.append(pts[sel, 0])
            nad.append(nd[sel])
    k = len(grid.axes) - 1
    if not rhs or sum(len(x) for x in lhs) < k + 1:
        raise DegenerateBoundaryError(
            f"fewer than {k + 1} grid points within {band:g} Hz of {nadir_limit:g} Hz; widen the band or the ranges")
    b = BoundarySet(np.concatenate(rhs), np.concatenate(lhs), np.concatenate(nad))
    design = np.column_stack([b.rhs, np.ones(len(b.lhs))])
    if np.linalg.matrix_rank(design) < k + 1:
        raise DegenerateBoundaryError("boundary points do not span the fit dimensions; refine the grid")
    return b


@dataclass(frozen=True)
class NadirHyperplane:
    area: str
    scheme: str
    lhs: str
    coefficients: dict[str, float]
    intercept: float
    limit: float
    diagnostics: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    @property
    def axes(self) -> tuple[str, ...]:
        return tuple(self.coefficients)

    @property
    def neighbours(self) -> list[str]:
        return sorted({ax.split("@", 1)[1] for ax in self.coefficients if "@" in ax})

    def threshold(self, cols: Mapping[str, np.ndarray]):
        """Right-hand side of ``lhs >= threshold``."""
        out = self.intercept
        for ax, c in self.coefficients.items():
            out = out + c * np.asarray(cols[ax], float)
        return out

    def is_feasible(self, cols: Mapping[str, np.ndarray]):
        return np.asarray(cols[self.lhs], float) >= self.threshold(cols)

    def to_dict(self) -> dict:
        return {"area": self.area, "scheme": self.scheme, "lhs": self.lhs,
                "coefficients": dict(self.coefficients), "intercept": self.intercept,
                "limit": self.limit, "diagnostics": self.diagnostics, "grid": self.grid}

    @classmethod
    def from_dict(cls, d: dict) -> "NadirHyperplane":
        return cls(d["area"], d["scheme"], d["lhs"], {k: float(v) for k, v in d["coefficients"].items()},
                   float(d["intercept"]), float(d["limit"]), d.get("diagnostics", {}), d.get("grid", {}))


def _node_constraints(grid: ParameterGrid, limit: float) -> tuple[np.ndarray, np.ndarray]:
    """Largest realisable infeasible lhs value at every lattice node, plus infeasible samples."""
    rows, rhs_vals = [], []
    if grid.lattice_points:
        n_lhs = grid.nadir.shape[0]
        nad = grid.nadir.reshape(n_lhs, -1)
        lhs_vals = grid.values[0]
        nodes = np.arange(nad.shape[1])
        idx = np.unravel_index(nodes, grid.nadir.shape[1:])
        node_pts = np.column_stack([v[i] for v, i in zip(grid.values[1:], idx)])
        cols = {a: node_pts[:, j] for j, a in enumerate(grid.axes[1:])}
        lo, hi = grid.lhs_window(cols)
        inside = (lhs_vals[:, None] >= lo[None, :]) & (lhs_vals[:, None] <= hi[None, :]) & grid.node_ok(cols)[None, :]
        bad = (nad > limit) & inside  # nan is not infeasible
        worst = np.where(bad, lhs_vals[:, None], -np.inf).max(axis=0)
        keep = np.nonzero(np.isfinite(worst))[0]
        if keep.size:
            rows.append(node_pts[keep])
            rhs_vals.append(worst[keep])
    if len(grid.sample_nadir):
        bad = (grid.sample_nadir > limit) & grid.realisable(grid.samples)
        rows.append(grid.samples[bad, 1:])
        rhs_vals.append(grid.samples[bad, 0])
    if not rows:
        k = len(grid.axes) - 1
        return np.empty((0, k)), np.empty(0)
    return np.concatenate(rows), np.concatenate(rhs_vals)


def _check_points(grid: ParameterGrid, n_random: int, seed: int) -> np.ndarray:
    k = len(grid.axes) - 1
    rhs_axes = grid.axes[1:]
    parts = []
    if grid.lattice_points and k <= 3:
        mids = [np.concatenate([v, 0.5 * (v[1:] + v[:-1])]) for v in grid.values[1:]]
        mesh = np.meshgrid(*mids, indexing="ij")
        parts.append(np.column_stack([m.reshape(-1) for m in mesh]))
    rng = np.random.default_rng(seed)
    lo = np.array([grid.ranges[a][0] for a in rhs_axes])
    hi = np.array([grid.ranges[a][1] for a in rhs_axes])
    parts.append(lo + (hi - lo) * rng.random((n_random, k)))
    return np.concatenate(parts)


def _boundary_lhs(grid: ParameterGrid, rhs_pts: np.ndarray, limit: float,
                  start: np.ndarray, hi: np.ndarray, iters: int = 60) -> np.ndarray:
    """Bisection for the largest lhs value in [start, hi] with nadir above the limit.

    Requires nadir(start) > limit; returns ``hi`` where even ``hi`` is infeasible.
    """
    model = grid.model
    cols = {a: rhs_pts[:, j] for j, a in enumerate(grid.axes[1:])}

    def nad(x):
        return model.evaluate({**cols, model.lhs: x})

    out = hi.copy()
    open_ = ~(nad(hi) > limit)
    lo_v, hi_v = start[open_].copy(), hi[open_].copy()
    sub = {a: c[open_] for a, c in cols.items()}
    for _ in range(iters):
        mid = 0.5 * (lo_v + hi_v)
        bad = model.evaluate({**sub, model.lhs: mid}) > limit
        lo_v = np.where(bad, mid, lo_v)
        hi_v = np.where(bad, hi_v, mid)
    out[open_] = hi_v
    return out


def fit_hyperplane(boundary: BoundarySet, grid: ParameterGrid, *, limit: float | None = None,
                   margin: float = 1e-3, max_rounds: int = 25, check_points: int = 20_000,
                   seed: int = 0) -> NadirHyperplane:
    """Least-squares plane through the boundary set that never admits an infeasible point.

    Constraints are generated from the lattice/sample points above the limit
    and from cutting planes against the continuous limit surface over the
    realisable lhs range. The result is certified by an exhaustive sweep.
    """
    model = grid.model
    limit = model.limit if limit is None else limit
    k = len(grid.axes) - 1

    G_pts, h = _node_constraints(grid, limit)
    X = np.column_stack([boundary.rhs, np.ones(len(boundary.lhs))])
    y = boundary.lhs
    scale = np.maximum(np.abs(X).max(axis=0), 1e-12)
    if len(G_pts):
        scale[:k] = np.maximum(scale[:k], np.abs(G_pts).max(axis=0))

    def solve(G_pts, h):
        G = np.column_stack([G_pts, np.ones(len(h))]) / scale
        hh = h + margin
        a0 = np.zeros(k + 1)
        a0[k] = (max(float(hh.max(initial=0.0)), float(y.max())) + 1.0) / scale[k]
        a, _ = lsq_ineq(X / scale, y, G, hh, a0)
        return a / scale

    coef = solve(G_pts, h)
    pts = _check_points(grid, check_points, seed)
    rounds = added = 0
    for rounds in range(1, max_rounds + 1):
        cols = {a: pts[:, j] for j, a in enumerate(grid.axes[1:])}
        z = pts @ coef[:k] + coef[k]
        lo, hi = grid.lhs_window(cols)
        q = np.maximum(z, lo)
        live = (q < hi) & grid.node_ok(cols)
        nad = np.full(len(q), -np.inf)
        nad[live] = model.evaluate({**{a: c[live] for a, c in cols.items()}, model.lhs: q[live]})
        viol = np.nonzero(nad > limit)[0]
        if viol.size == 0:
            break
        fstar = _boundary_lhs(grid, pts[viol], limit, q[viol], hi[viol])
        G_pts = np.concatenate([G_pts, pts[viol]])
        h = np.concatenate([h, fstar])
        added += viol.size
        coef = solve(G_pts, h)
    else:
        raise CertificationError("cutting-plane rounds did not converge; increase max_rounds")

    plane = NadirHyperplane(grid.area, grid.scheme, model.lhs,
                            {a: float(c) for a, c in zip(grid.axes[1:], coef[:k])}, float(coef[k]), limit)
    false_feasible, rejected, feasible = certify(plane, grid)
    pred = boundary.rhs @ coef[:k] + coef[k]
    diag = {
        "boundary_size": int(len(y)),
        "mean_relative_error": float(np.mean(np.abs(pred - y) / np.abs(y))),
        "mean_relative_error_reference": "boundary set",
        "false_feasible_count": int(false_feasible),
        "rejected_feasible_fraction": float(rejected / feasible) if feasible else 0.0,
        "invalid_count": grid.n_invalid,
        "unrealisable_count": grid.n_unrealisable,
        "grid_points": grid.n_points,
        "constraint_rows": int(len(h)),
        "cut_rounds": rounds,
        "cut_rows": int(added),
        "margin": margin,
    }
    meta = {"axes": list(grid.axes), "ranges": {a: list(r) for a, r in grid.ranges.items()},
            "points_per_axis": int(grid.values[0].size) if grid.values else 0,
            "samples": int(len(grid.sample_nadir)), "model": model.to_dict()}
    plane = NadirHyperplane(plane.area, plane.scheme, plane.lhs, plane.coefficients, plane.intercept,
                            limit, diag, meta)
    if false_feasible:
        raise CertificationError(f"{false_feasible} grid points above the limit lie on the feasible side")
    return plane


def certify(plane: NadirHyperplane, grid: ParameterGrid, tol: float = 1e-9) -> tuple[int, int, int]:
    """Sweep every valid point: (false feasible, feasible rejected, feasible) counts."""
    ff = rej = feas = 0
    for pts, nd in grid.iter_points():
        ok = ~np.isnan(nd) & grid.realisable(pts)
        cols = {a: pts[ok, j] for j, a in enumerate(grid.axes)}
        accept = plane.is_feasible(cols)
        truly = nd[ok] <= plane.limit + tol
        ff += int(np.sum(accept & ~truly))
        feas += int(np.sum(truly))
        rej += int(np.sum(truly & ~accept))
    return ff, rej, feas


def fit_area_plane(spec: SystemSpec, area: str, scheme: str = UNILATERAL, points_per_axis: int | None = None,
                   band: float = 0.01, *, samples: int | None = None, seed: int = 0) -> NadirHyperplane:
    grid = build_grid(spec, area, scheme, points_per_axis, samples=samples, seed=seed)
    limit = spec.area(area).nadir_limit
    return fit_hyperplane(extract_boundary(grid, limit, band), grid, limit=limit, seed=seed)


# ---------------------------------------------------------------------------
# files


def save_planes(planes: Iterable[NadirHyperplane], path: str | Path, system: str = "") -> None:
    doc = {"format": PLANE_FORMAT, "system": system,
           "planes": [p.to_dict() for p in sorted(planes, key=lambda p: (p.area, p.scheme))]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_planes(paths: str | Path | Iterable[str | Path]) -> dict[tuple[str, str], NadirHyperplane]:
    """Read and merge plane files, keyed by (area, scheme)."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    out: dict[tuple[str, str], NadirHyperplane] = {}
    for p in paths:
        doc = json.loads(Path(p).read_text(encoding="utf-8"))
        if doc.get("format") != PLANE_FORMAT:
            raise NadirSurfaceError(f"{p}: not a hyperplane file")
        for d in doc["planes"]:
            plane = NadirHyperplane.from_dict(d)
            out[(plane.area, plane.scheme)] = plane
    return out


def visualize_export(grid: ParameterGrid, plane: NadirHyperplane | None, x_axis: str, y_axis: str,
                     fixed: Mapping[str, float], path: str | Path) -> int:
    """Write a slice of the nadir surface as CSV (x, y, z, nadir, plane_z).

    ``x_axis`` and ``y_axis`` vary over their lattice values; every other
    right-hand-side axis takes the value in ``fixed``. The lhs axis (``z``)
    is fixed when listed in ``fixed`` and otherwise swept too. Returns the
    number of data rows.
    """
    axes = grid.axes
    lhs = axes[0]
    for ax in (x_axis, y_axis):
        if ax not in axes[1:]:
            raise SliceError(f"'{ax}' is not a right-hand-side axis of this grid ({', '.join(axes[1:])})")
    if x_axis == y_axis:
        raise SliceError("slice axes must differ")
    missing = [a for a in axes[1:] if a not in (x_axis, y_axis) and a not in fixed]
    if missing:
        raise SliceError(f"values needed for fixed axes: {', '.join(missing)}")
    header = ["x", "y", "z", "nadir", "plane_z"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        if not grid.values or grid.lattice_points == 0:
            return 0
        val = dict(zip(axes, grid.values))
        zs = np.array([fixed[lhs]]) if lhs in fixed else val[lhs]
        X, Y, Z = np.meshgrid(val[x_axis], val[y_axis], zs, indexing="ij")
        cols = {a: np.full(X.size, float(fixed[a])) for a in axes if a in fixed}
        cols.update({x_axis: X.reshape(-1), y_axis: Y.reshape(-1), lhs: Z.reshape(-1)})
        nad = grid.model.evaluate(cols)
        pz = plane.threshold(cols) if plane is not None else np.full(X.size, math.nan)
        pz = np.broadcast_to(pz, X.reshape(-1).shape)
        for row in zip(cols[x_axis], cols[y_axis], cols[lhs], nad, pz):
            w.writerow([repr(float(v)) for v in row])
        return int(X.size)
