"""Time-domain simulation of the multi-area linear frequency model.

State vector: one frequency deviation per area (pu of nominal frequency),
one governor/turbine lag per participating generator and one first-order lag
per converter branch with supplementary power control. The system is linear
and time-invariant, so the classical RK4 step reduces to a fixed transition
matrix applied at every step; results are bit-reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .metrics import FrequencyMetrics
from .system import SystemSpec

DIVERGENCE_HZ = 10.0
SETTLE_RATE = 1e-4  # Hz/s


class SimulationError(RuntimeError):
    pass


class StepSizeError(SimulationError):
    pass


class NotSettledError(SimulationError):
    pass


@dataclass(frozen=True)
class OperatingPoint:
    """Commitment and support state of the system during one period.

    ``spc`` maps link ids to the area they support (unilateral) or to
    ``"both"`` (bilateral). ``flows`` holds scheduled converter set-points,
    positive from the ``from_bus`` side to the ``to_bus`` side.
    """

    commitment: Mapping[str, float]
    governor: Mapping[str, float]
    spc: Mapping[str, str] = field(default_factory=dict)
    flows: Mapping[str, float] = field(default_factory=dict)

    @property
    def scheme(self) -> str:
        if not self.spc:
            return "none"
        return "bilateral" if any(v == "both" for v in self.spc.values()) else "unilateral"


@dataclass(frozen=True)
class GeneratorTrip:
    area: str
    dP: float  # pu lost in the area


@dataclass(frozen=True)
class HvdcOutage:
    link: str
    dP: float  # pu lost by the importer and gained by the exporter
    importer: str
    exporter: str


Event = Union[GeneratorTrip, HvdcOutage]


@dataclass(frozen=True)
class DynamicScenario:
    spec: SystemSpec
    point: OperatingPoint
    event: Event | None
    horizon: float = 30.0
    dt: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.horizon > self.dt:
            raise ValueError("horizon must exceed dt")


@dataclass
class Trajectory:
    t: np.ndarray
    df: dict[str, np.ndarray]  # Hz
    gen_dp: dict[str, np.ndarray]  # pu
    link_dp: dict[str, np.ndarray]  # pu, positive into the supported / from side

    def restrict(self, area: str, spec: SystemSpec) -> "Trajectory":
        gens = {g.id for g in spec.generators_in(area)}
        links = {k.id for k in spec.links_at(area)}
        return Trajectory(self.t, {area: self.df[area]},
                          {g: v for g, v in self.gen_dp.items() if g in gens},
                          {k: v for k, v in self.link_dp.items() if k in links})

    def to_csv(self, path: str | Path) -> None:
        areas, gens, links = sorted(self.df), sorted(self.gen_dp), sorted(self.link_dp)
        header = ["t"] + [f"{a}_df_hz" for a in areas] + [f"{g}_dp_pu" for g in gens] + [f"{k}_dp_pu" for k in links]
        cols = [self.t] + [self.df[a] for a in areas] + [self.gen_dp[g] for g in gens] + [self.link_dp[k] for k in links]
        data = np.column_stack(cols) if cols else np.empty((0, 0))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in data:
                w.writerow([repr(float(x)) for x in row])


def _rk4_maps(A: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    # one RK4 step of x' = A x + b is exactly x+ = Phi x + Gamma b
    n = A.shape[0]
    I = np.eye(n)
    hA = h * A
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    phi = I + hA + hA2 / 2 + hA3 / 6 + hA3 @ hA / 24
    gamma = h * (I + hA / 2 + hA2 / 6 + hA3 / 24)
    return phi, gamma


def _assemble(sc: DynamicScenario):
    spec, pt = sc.spec, sc.point
    areas = spec.area_ids
    ai = {a: i for i, a in enumerate(areas)}
    gens = [g for g in spec.generators if float(pt.governor.get(g.id, 0)) > 0
            and float(pt.commitment.get(g.id, 0)) > 0]
    faulted = sc.event.link if isinstance(sc.event, HvdcOutage) else None
    links = [k for k in spec.converters if k.id in pt.spc and k.id != faulted]
    na, ng, nl = len(areas), len(gens), len(links)
    n = na + ng + nl
    A = np.zeros((n, n))
    b = np.zeros(n)

    M = np.zeros(na)
    for g in spec.generators:
        M[ai[g.area]] += 2.0 * g.inertia * g.p_max * float(pt.commitment.get(g.id, 0))
    for a in areas:
        if M[ai[a]] <= 0:
            raise SimulationError(f"area '{a}' has no online inertia")
    D = np.array([spec.area(a).damping for a in areas])
    for i in range(na):
        A[i, i] -= D[i] / M[i]

    # mechanical power output rows: dPm = C_g @ state
    C_gen = np.zeros((ng, n))
    for j, g in enumerate(gens):
        ia, s = ai[g.area], na + j
        kr = g.droop_gain
        C_gen[j, ia] = -kr * g.turbine_fraction
        C_gen[j, s] = kr * (1.0 - g.turbine_fraction)
        A[s, ia] = -1.0 / g.turbine_time
        A[s, s] = -1.0 / g.turbine_time
        A[ia] += C_gen[j] / M[ia]

    C_link = np.zeros((nl, n))
    link_ends = []
    for j, k in enumerate(links):
        fa, ta = spec.link_areas(k)
        s = na + ng + j
        mode = pt.spc[k.id]
        if mode == "both":
            sup, oth = fa, ta
            A[s, ai[sup]] = -1.0 / k.time_const
            A[s, ai[oth]] = 1.0 / k.time_const
        else:
            if mode not in (fa, ta):
                raise SimulationError(f"link '{k.id}' cannot support area '{mode}'")
            sup = mode
            oth = ta if sup == fa else fa
            A[s, ai[sup]] = -1.0 / k.time_const
        A[s, s] = -1.0 / k.time_const
        C_link[j, s] = k.droop_gain
        A[ai[sup]] += C_link[j] / M[ai[sup]]
        A[ai[oth]] -= C_link[j] / M[ai[oth]]
        link_ends.append((sup, oth))

    ev = sc.event
    if isinstance(ev, GeneratorTrip):
        b[ai[ev.area]] = -ev.dP / M[ai[ev.area]]
    elif isinstance(ev, HvdcOutage):
        b[ai[ev.importer]] = -ev.dP / M[ai[ev.importer]]
        b[ai[ev.exporter]] = ev.dP / M[ai[ev.exporter]]
    return areas, gens, links, A, b, C_gen, C_link


def simulate(sc: DynamicScenario) -> Trajectory:
    """Integrate the scenario from the pre-event equilibrium."""
    areas, gens, links, A, b, C_gen, C_link = _assemble(sc)
    steps = int(round(sc.horizon / sc.dt))
    t = np.arange(steps + 1) * sc.dt
    X = np.zeros((steps + 1, A.shape[0]))
    if sc.event is not None:
        phi, gamma = _rk4_maps(A, sc.dt)
        phiT = phi.T.copy()
        drive = gamma @ b
        x = X[0]
        guard = DIVERGENCE_HZ / np.array([sc.spec.area(a).f_base for a in areas])
        na = len(areas)
        for i in range(1, steps + 1):
            x = x @ phiT + drive
            X[i] = x
            if i % 1000 == 0 and not np.all(np.abs(x[:na]) <= guard):
                raise StepSizeError(f"frequency deviation diverged at t={t[i]:.3f} s; reduce dt below {sc.dt:g} s")
        if not np.all(np.abs(X[:, :na]) <= guard[None, :]):
            raise StepSizeError(f"frequency deviation diverged; reduce dt below {sc.dt:g} s")
    df = {a: X[:, i] * sc.spec.area(a).f_base for i, a in enumerate(areas)}
    gen_dp = {g.id: X @ C_gen[j] for j, g in enumerate(gens)}
    link_dp = {k.id: X @ C_link[j] for j, k in enumerate(links)}
    return Trajectory(t, df, gen_dp, link_dp)


def extract_metrics(traj: Trajectory, area: str, *, settle_rate: float = SETTLE_RATE) -> FrequencyMetrics:
    """Measure RoCoF, nadir and steady-state deviation of one area (magnitudes)."""
    df = traj.df[area]
    t = traj.t
    if not np.any(df):
        return FrequencyMetrics(0.0, 0.0, 0.0, 0.0, math.nan, math.nan)
    dt = t[1] - t[0]
    tail_rate = abs(df[-1] - df[-2]) / dt
    if tail_rate >= settle_rate:
        raise NotSettledError(f"area '{area}' still moving at {tail_rate:.3g} Hz/s at t={t[-1]:g} s")
    first = t <= 1.0 + 0.5 * dt
    slope = np.gradient(df[first], dt)
    i_max = int(np.argmax(np.abs(df)))
    n_tail = max(1, int(math.ceil(0.05 * len(df))))
    return FrequencyMetrics(
        rocof_max=float(np.max(np.abs(slope))),
        nadir=float(abs(df[i_max])),
        ssfd=float(abs(np.mean(df[-n_tail:]))),
        t_nadir=float(t[i_max]),
        omega_n=math.nan,
        zeta=math.nan,
    )


def hvdc_outage_event(spec: SystemSpec, point: OperatingPoint, link_id: str) -> HvdcOutage:
    """Outage of one pole (bipole) or the whole link (monopole).

    The magnitude is capacity based. The importer is the receiving side of
    the scheduled flow; a zero schedule is treated as flow in the positive
    direction so that the event is still defined.
    """
    link = spec.converter(link_id)
    fa, ta = spec.link_areas(link)
    p = float(point.flows.get(link_id, 0.0))
    importer, exporter = (ta, fa) if p >= 0 else (fa, ta)
    return HvdcOutage(link_id, link.outage_loss, importer, exporter)


def simulate_hvdc_outage(spec: SystemSpec, point: OperatingPoint, link_id: str, *,
                         horizon: float = 30.0, dt: float = 1e-3) -> tuple[Trajectory, Trajectory]:
    """Simulate the loss of ``link_id``; returns (importer, exporter) views."""
    ev = hvdc_outage_event(spec, point, link_id)
    traj = simulate(DynamicScenario(spec, point, ev, horizon, dt))
    return traj.restrict(ev.importer, spec), traj.restrict(ev.exporter, spec)


def dimensioning_trip(spec: SystemSpec, area: str) -> GeneratorTrip:
    return GeneratorTrip(area, spec.dimensioning_incident(area))
