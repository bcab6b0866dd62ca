"""Weighted area parameters and closed-form frequency metrics.

The reduced model of one area is the second-order-with-zero transfer function

    G(s) = (1 + s T) / (M T s^2 + (M + T (D + F)) s + (D + R))

obtained when all turbine lags in the area share the constant ``T`` and the
converter lags are neglected. Every metric returned here is a magnitude
(positive number); an under-frequency event produces a negative deviation
physically, but signs are dropped throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .system import SystemSpec


class FrequencyModelError(ValueError):
    pass


class NoInertiaError(FrequencyModelError):
    pass


class DegenerateSystemError(FrequencyModelError):
    pass


class NegativeRadicandError(FrequencyModelError):
    pass


@dataclass(frozen=True)
class AreaAggregates:
    """Per-area weighted model parameters (all in pu on the system base)."""

    M: float  # total inertia, sum of 2 H Pmax over online units
    D: float  # load damping
    Rg: float  # sum of K/R Pmax over participating generators
    Rc: float  # sum of K/R Pmax over participating converters
    Fg: float  # sum of K F/R Pmax over participating generators

    @property
    def R(self) -> float:
        return self.Rg + self.Rc

    @property
    def F(self) -> float:
        return self.Fg + self.Rc

    def __add__(self, other: "AreaAggregates") -> "AreaAggregates":
        if other.D != self.D:
            raise ValueError("cannot add aggregates of areas with different damping")
        return AreaAggregates(self.M + other.M, self.D, self.Rg + other.Rg,
                              self.Rc + other.Rc, self.Fg + other.Fg)

    def generators_only(self) -> "AreaAggregates":
        return AreaAggregates(self.M, self.D, self.Rg, 0.0, self.Fg)


@dataclass(frozen=True)
class FrequencyMetrics:
    rocof_max: float  # Hz/s
    nadir: float  # Hz
    ssfd: float  # Hz
    t_nadir: float  # s
    omega_n: float  # rad/s
    zeta: float


def aggregate_area(spec: SystemSpec, commitment: Mapping[str, float],
                   participation: Mapping[str, float], area: str) -> AreaAggregates:
    """Aggregate inertia and droop sums for ``area``.

    ``commitment`` maps generator ids to online flags; ``participation`` maps
    generator ids (governor response) and converter ids (supplementary power
    control towards this area) to support flags. Missing ids count as 0.
    """
    a = spec.area(area)
    M = Rg = Fg = Rc = 0.0
    for g in spec.generators_in(area):
        M += 2.0 * g.inertia * g.p_max * float(commitment.get(g.id, 0))
        v = float(participation.get(g.id, 0))
        Rg += g.droop_gain * v
        Fg += g.droop_gain * g.turbine_fraction * v
    for k in spec.links_at(area):
        Rc += k.droop_gain * float(participation.get(k.id, 0))
    return AreaAggregates(M=M, D=a.damping, Rg=Rg, Rc=Rc, Fg=Fg)


def second_order_params(agg: AreaAggregates, T: float) -> tuple[float, float]:
    """Natural frequency (rad/s) and damping ratio of the reduced area model."""
    if agg.M <= 0:
        raise NoInertiaError("area has no online inertia")
    if T <= 0:
        raise ValueError("turbine time constant must be positive")
    stiffness = agg.D + agg.R
    if stiffness <= 0:
        raise DegenerateSystemError("damping plus droop is zero: natural frequency vanishes")
    omega = math.sqrt(stiffness / (agg.M * T))
    zeta = (agg.M + T * (agg.D + agg.F)) / (2.0 * math.sqrt(agg.M * T * stiffness))
    return omega, zeta


def _impulse(t: float, M: float, D: float, R: float, F: float, T: float) -> float:
    # inverse Laplace of (1 + sT)/(M T s^2 + b s + c), evaluated through the 2x2 modal form
    b = M + T * (D + F)
    c = D + R
    roots = np.roots([M * T, b, c])
    p1, p2 = roots
    if abs(p1 - p2) < 1e-12 * max(1.0, abs(p1)):
        p = p1.real
        return math.exp(p * t) * (T + (1 + p * T) * t) / (M * T)
    val = ((1 + p1 * T) * np.exp(p1 * t) - (1 + p2 * T) * np.exp(p2 * t)) / (M * T * (p1 - p2))
    return float(np.real(val))


def time_to_nadir(agg: AreaAggregates, T: float) -> float:
    """Time (s) of the frequency extremum after a step disturbance.

    Underdamped models use the closed form; for zeta >= 1 the first zero of
    the analytic derivative is bracketed and refined with Brent's method.
    Returns ``inf`` when the response is monotone (no interior extremum).
    """
    omega, zeta = second_order_params(agg, T)
    if zeta < 1.0:
        sigma = zeta * omega
        wd = omega * math.sqrt(1.0 - zeta * zeta)
        return math.atan2(T * wd, sigma * T - 1.0) / wd

    def deriv(t: float) -> float:
        return _impulse(t, agg.M, agg.D, agg.R, agg.F, T)

    # the derivative decays like exp(-omega t / (zeta + sqrt(zeta^2 - 1)))
    slow = omega * (zeta - math.sqrt(zeta * zeta - 1.0))
    horizon = 60.0 / slow
    grid = np.linspace(0.0, horizon, 4001)[1:]
    vals = np.array([deriv(t) for t in grid])
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if sign_change.size == 0:
        return math.inf
    i = sign_change[0]
    return brentq(deriv, grid[i], grid[i + 1], xtol=1e-12)


def nadir_factor(M, D, R, F, T):
    """Peak step response of the reduced model, per unit of disturbance.

    Vectorised over numpy arrays. Returns ``nan`` where ``R < F`` (the
    overshoot radicand is negative) or where ``M <= 0``. Multiply by the
    disturbance (pu) and the nominal frequency to obtain Hz.
    """
    M, D, R, F, T = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (M, D, R, F, T)))
    out = np.full(M.shape, np.nan)
    stiff = D + R
    ok = (M > 0) & (stiff > 0) & (R >= F) & (T > 0)
    if not ok.any():
        return out if out.ndim else float(out)
    m, d, r, f, tt = (x[ok] for x in (M, D, R, F, T))
    s = d + r
    omega = np.sqrt(s / (m * tt))
    zeta = (m + tt * (d + f)) / (2.0 * np.sqrt(m * tt * s))
    sigma = zeta * omega
    res = np.empty_like(m)

    under = zeta < 1.0 - 1e-9
    if under.any():
        w, z, sg, t_ = omega[under], zeta[under], sigma[under], tt[under]
        wd = w * np.sqrt(1.0 - z * z)
        tm = np.arctan2(t_ * wd, sg * t_ - 1.0) / wd
        over = np.sqrt(t_ * (r[under] - f[under]) / m[under]) * np.exp(-sg * tm)
        res[under] = (1.0 + over) / s[under]

    crit = np.abs(zeta - 1.0) <= 1e-9
    if crit.any():
        w, t_ = omega[crit], tt[crit]
        a = 1.0 - w * t_
        # extremum only if the zero at -1/T is slower than the double pole
        tm = np.where(a < 0, t_ / np.maximum(-a, 1e-300), np.inf)
        e = np.exp(-w * tm)
        y = (t_ * (1 - e) / w + a * (1 - e * (1 + w * tm)) / w**2) / (m[crit] * t_)
        res[crit] = np.where(np.isfinite(tm), y, 1.0 / s[crit])

    od = zeta > 1.0 + 1e-9
    if od.any():
        w, sg, t_, mm = omega[od], sigma[od], tt[od], m[od]
        disc = np.sqrt(sg * sg - w * w)
        p1, p2 = -sg + disc, -sg - disc
        ratio = (1 + p2 * t_) / (1 + p1 * t_)
        has = (1 + p1 * t_ < 0) & (ratio > 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            tm = np.where(has, np.log(np.where(has, ratio, 1.0)) / (p1 - p2), np.inf)
            r1 = (1 + p1 * t_) / (mm * t_ * p1 * (p1 - p2))
            r2 = (1 + p2 * t_) / (mm * t_ * p2 * (p2 - p1))
            y = 1.0 / s[od] + r1 * np.exp(p1 * tm) + r2 * np.exp(p2 * tm)
        res[od] = np.where(has, y, 1.0 / s[od])

    out[ok] = res
    return out if out.ndim else float(out)


def _check(agg: AreaAggregates, R: float, F: float) -> None:
    if agg.M <= 0:
        raise NoInertiaError("area has no online inertia")
    if R < F:
        raise NegativeRadicandError(f"droop sum {R:g} is below turbine-weighted sum {F:g}")


def metrics_ucs_supported(agg: AreaAggregates, T: float, dP: float, f_base: float) -> FrequencyMetrics:
    """RoCoF, nadir and steady-state deviation of the area hit by ``dP``.

    Converters supporting the area add to the containment droop but not to
    the steady-state term.
    """
    _check(agg, agg.R, agg.F)
    omega, zeta = second_order_params(agg, T)
    t_m = time_to_nadir(agg, T)
    rocof = f_base * dP / agg.M
    nadir = f_base * dP * nadir_factor(agg.M, agg.D, agg.R, agg.F, T)
    ssfd = f_base * dP / (agg.D + agg.Rg) if dP else 0.0
    return FrequencyMetrics(rocof, nadir, ssfd, t_m, omega, zeta)


def metrics_ucs_supporting(agg_b: AreaAggregates, Rc_ab: float, df_a_max: float, dP_a: float,
                           M_a: float, T_b: float, f_base: float) -> FrequencyMetrics:
    """Metrics of a supporting area under the unilateral scheme.

    ``df_a_max`` (Hz) is the nadir of the supported area, applied to area b as
    a step. Only generators in b provide droop, so converter terms in
    ``agg_b`` are ignored.
    """
    gen = agg_b.generators_only()
    _check(gen, gen.R, gen.F)
    omega, zeta = second_order_params(gen, T_b)
    t_m = time_to_nadir(gen, T_b)
    if Rc_ab == 0:
        return FrequencyMetrics(0.0, 0.0, 0.0, t_m, omega, zeta)
    if M_a <= 0:
        raise NoInertiaError("supported area has no online inertia")
    rocof = f_base * dP_a * Rc_ab / (M_a * gen.M)
    nadir = df_a_max * Rc_ab * nadir_factor(gen.M, gen.D, gen.R, gen.F, T_b)
    return FrequencyMetrics(rocof, nadir, 0.0, t_m, omega, zeta)


def bilateral_nadir(agg_a: AreaAggregates, T_a: float, dP_a: float, f_base: float,
                    neighbors: list[tuple[AreaAggregates, float, float]],
                    df_a_limit: float) -> tuple[float, list[float]]:
    """Nadir of area a and of each neighbour under the bilateral scheme.

    ``neighbors`` holds ``(agg_b, Rc_ab, T_b)`` triples; ``agg_b`` must include
    the converter droop of b. Each neighbour sees a step of ``df_a_limit``
    (Hz) and its peak deviation is fed back as an extra disturbance on area a,
    which makes the area-a value an over-estimate.
    """
    df_b = []
    extra = 0.0
    for agg_b, rc, t_b in neighbors:
        if rc == 0:
            df_b.append(0.0)
            continue
        _check(agg_b, agg_b.R, agg_b.F)
        nb = df_a_limit * rc * nadir_factor(agg_b.M, agg_b.D, agg_b.R, agg_b.F, t_b)
        df_b.append(nb)
        extra += rc * nb / f_base
    _check(agg_a, agg_a.R, agg_a.F)
    na = f_base * (dP_a + extra) * nadir_factor(agg_a.M, agg_a.D, agg_a.R, agg_a.F, T_a)
    return na, df_b


def metrics_bcs(agg_a: AreaAggregates, agg_b: AreaAggregates, Rc_ab: float, T_a: float, T_b: float,
                dP_a: float, df_a_max_limit: float, f_base: float) -> tuple[FrequencyMetrics, FrequencyMetrics]:
    """Metrics of both areas for a disturbance in ``a`` under the bilateral scheme."""
    nadir_a, (nadir_b,) = bilateral_nadir(agg_a, T_a, dP_a, f_base, [(agg_b, Rc_ab, T_b)], df_a_max_limit)
    wa, za = second_order_params(agg_a, T_a)
    ma = FrequencyMetrics(
        rocof_max=f_base * dP_a / agg_a.M,
        nadir=nadir_a,
        ssfd=f_base * dP_a / (agg_a.D + agg_a.Rg) if dP_a else 0.0,
        t_nadir=time_to_nadir(agg_a, T_a),
        omega_n=wa,
        zeta=za,
    )
    wb, zb = second_order_params(agg_b, T_b)
    mb = FrequencyMetrics(
        rocof_max=f_base * dP_a * Rc_ab / (agg_a.M * agg_b.M),
        nadir=nadir_b,
        ssfd=0.0,
        t_nadir=time_to_nadir(agg_b, T_b),
        omega_n=wb,
        zeta=zb,
    )
    return ma, mb
