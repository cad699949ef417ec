"""Landau-Khalatnikov ferroelectric model.

Static relation, well/coercive extraction and time-domain switching of a
single-domain polarization under a piecewise-linear voltage drive.

Units are SI throughout: polarization in C/m^2, field in V/m, time in s.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConvergenceFailure, NoDoubleWell

# Viscosity that makes a 0.7 V step across 600 nm of the default PZT-5H
# landscape reach 0.9*P_s from -P_s in 1.0 ns (see calibrate_viscosity).
DEFAULT_RHO = 1.0752289007849852e-3

SWITCH_THRESHOLD = 0.9


@dataclass(frozen=True)
class LandauParams:
    """Landau free-energy coefficients and kinetic viscosity.

    U(P) = alpha*P^2 + beta*P^4 + gamma*P^6, rho*dP/dt = E - dU/dP.
    """

    alpha: float = -3.95e6  # m/F
    beta: float = 1.26e6  # m^5/F/C^2
    gamma: float = 3.21e8  # m^9/F/C^4
    rho: float = DEFAULT_RHO  # ohm*m

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    def validate(self):
        if not self.alpha < 0:
            raise NoDoubleWell(f"alpha={self.alpha} >= 0 gives a single well")
        if self.beta <= 0 and self.gamma <= 0:
            raise NoDoubleWell("beta and gamma both non-positive: landscape unbounded")


@dataclass(frozen=True)
class PolarizationState:
    p: float
    t: float = 0.0


@dataclass
class SwitchingTrace:
    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    i_pol: np.ndarray
    switch_time: float | None = None
    t_pe: float = field(default=600e-9, repr=False)

    @property
    def final_p(self) -> float:
        return float(self.p[-1])

    def samples(self):
        return list(zip(self.t.tolist(), self.p.tolist(), self.v.tolist(), self.i_pol.tolist()))

    def loop_area(self) -> float:
        """Closed-path integral of E dP (J/m^3); positive for a dissipative loop."""
        e = self.v / self.t_pe
        return float(np.sum(0.5 * (e[1:] + e[:-1]) * np.diff(self.p)))

    def switching_energy(self, area: float) -> float:
        """Energy delivered to the polarization, integral of v * dP/dt * A dt."""
        return float(np.sum(0.5 * (self.v[1:] + self.v[:-1]) * np.diff(self.p)) * area)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "p", "v", "i_pol"])
            for row in self.samples():
                w.writerow([f"{x:.12g}" for x in row])


# -----------------------------------------------------------------------------
# Statics
# -----------------------------------------------------------------------------

def lk_field(p, params: LandauParams):
    """Quasi-static field in equilibrium with polarization ``p``."""
    p2 = p * p
    return p * (2.0 * params.alpha + p2 * (4.0 * params.beta + 6.0 * params.gamma * p2))


def lk_field_slope(p, params: LandauParams):
    p2 = p * p
    return 2.0 * params.alpha + p2 * (12.0 * params.beta + 30.0 * params.gamma * p2)


def free_energy(p, params: LandauParams):
    p2 = p * p
    return p2 * (params.alpha + p2 * (params.beta + params.gamma * p2))


def spontaneous_polarization(params: LandauParams) -> float:
    """Outer-well polarization, the positive root of the static field."""
    params.validate()
    a, b, g = params.alpha, params.beta, params.gamma
    # root in P^2 of 6g x^2 + 4b x + 2a, rationalized so gamma -> 0 is exact
    x = -4.0 * a / (4.0 * b + math.sqrt(16.0 * b * b - 48.0 * a * g))
    return math.sqrt(x)


def _coercive_polarization(params: LandauParams) -> float:
    a, b, g = params.alpha, params.beta, params.gamma
    x = -4.0 * a / (12.0 * b + math.sqrt(144.0 * b * b - 240.0 * a * g))
    return math.sqrt(x)


def coercive_field(params: LandauParams) -> float:
    """|E| at the turning point of the unstable branch."""
    params.validate()
    return abs(float(lk_field(_coercive_polarization(params), params)))


def coercive_voltage(params: LandauParams, t_pe: float) -> float:
    return coercive_field(params) * t_pe


# -----------------------------------------------------------------------------
# Dynamics
# -----------------------------------------------------------------------------

_NEWTON_MAX = 60
_NEWTON_TOL = 1e-15


def _tr_step(p0: float, e0: float, e1: float, h: float, params: LandauParams) -> float:
    """One trapezoidal step of rho*dP/dt = E - f(P), Newton inner solve."""
    rho = params.rho
    rhs0 = e0 - lk_field(p0, params)
    # explicit Euler predictor
    p = p0 + h * rhs0 / rho
    c = rho / h
    for _ in range(_NEWTON_MAX):
        g = c * (p - p0) - 0.5 * (rhs0 + e1 - lk_field(p, params))
        dg = c + 0.5 * lk_field_slope(p, params)
        if dg <= 0.0:
            raise ConvergenceFailure("trapezoidal Jacobian lost positivity", last=p)
        dp = g / dg
        p -= dp
        if abs(dp) <= _NEWTON_TOL * (1.0 + abs(p)):
            return p
    raise ConvergenceFailure("trapezoidal Newton solve did not converge", last=p)


class _Integrator:
    """Adaptive trapezoidal integrator with step-doubling error control."""

    def __init__(self, params: LandauParams, rtol=1e-8, max_step=None, h0=1e-13):
        self.params = params
        self.rtol = rtol
        self.max_step = max_step
        self.h = h0
        self.scale = spontaneous_polarization(params)

    def segment(self, p, t0, t1, e0, e1, out=None):
        """Advance p over [t0, t1] with field linear from e0 to e1."""
        params = self.params
        span = t1 - t0
        slope = (e1 - e0) / span if span > 0 else 0.0
        t = t0
        h = self.h
        while t1 - t > 1e-12 * span:
            h = min(h, t1 - t)
            if self.max_step is not None:
                h = min(h, self.max_step)
            ea = e0 + slope * (t - t0)
            em = ea + slope * 0.5 * h
            eb = ea + slope * h
            try:
                full = _tr_step(p, ea, eb, h, params)
                half = _tr_step(_tr_step(p, ea, em, 0.5 * h, params), em, eb, 0.5 * h, params)
            except ConvergenceFailure:
                h *= 0.25
                if h < 1e-22:
                    raise
                continue
            err = abs(half - full) / 3.0
            tol = self.rtol * (abs(half) + 1e-3 * self.scale)
            if err <= tol:
                p = half
                t = t + h
                if out is not None:
                    out.append((t, p, eb))
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0)))
            h *= fac
        self.h = h
        return p


def step_polarization(state: PolarizationState, e_applied: float, dt: float,
                      params: LandauParams, rtol: float = 1e-8) -> PolarizationState:
    """Advance the polarization by ``dt`` under a constant field."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    integ = _Integrator(params, rtol=rtol, h0=min(dt, 1e-13))
    p = integ.segment(state.p, state.t, state.t + dt, e_applied, e_applied)
    return PolarizationState(p=p, t=state.t + dt)


def _check_waveform(waveform):
    if len(waveform) < 2:
        raise ValueError("waveform needs at least two breakpoints")
    ts = [w[0] for w in waveform]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("waveform times must be strictly increasing")


def simulate_switching(p0: float, waveform: Sequence[tuple[float, float]], t_pe: float,
                       params: LandauParams, threshold: float = SWITCH_THRESHOLD,
                       rtol: float = 1e-8, max_step: float | None = None) -> SwitchingTrace:
    """Integrate the polarization along a piecewise-linear voltage waveform.

    The field across the ferroelectric is v(t)/t_pe. ``switch_time`` is the
    first crossing of threshold*P_s toward the sign of a super-coercive drive,
    for a cell that started on the other side of that level.
    """
    _check_waveform(waveform)
    ps = spontaneous_polarization(params)
    ec = coercive_field(params)
    integ = _Integrator(params, rtol=rtol, max_step=max_step)
    rows = [(waveform[0][0], p0, waveform[0][1] / t_pe)]
    p = p0
    for (ta, va), (tb, vb) in zip(waveform, waveform[1:]):
        p = integ.segment(p, ta, tb, va / t_pe, vb / t_pe, out=rows)
    arr = np.array(rows)
    t, pp, e = arr[:, 0], arr[:, 1], arr[:, 2]
    i_pol = (e - lk_field(pp, params)) / params.rho
    trace = SwitchingTrace(t=t, p=pp, v=e * t_pe, i_pol=i_pol, t_pe=t_pe)
    trace.switch_time = _detect_switch(trace, ps, ec, threshold)
    return trace


def _detect_switch(trace: SwitchingTrace, ps: float, ec: float, threshold: float):
    e = trace.v / trace.t_pe
    p = trace.p
    strong = np.nonzero(np.abs(e) > ec)[0]
    if strong.size == 0:
        return None
    sign = math.copysign(1.0, e[strong[0]])
    level = sign * threshold * ps
    beyond = sign * (p - level) >= 0.0
    if beyond[0]:
        return None
    hit = np.nonzero(beyond)[0]
    if hit.size == 0:
        return None
    k = hit[0]
    # linear interpolation between the bracketing samples
    frac = (level - p[k - 1]) / (p[k] - p[k - 1])
    return float(trace.t[k - 1] + frac * (trace.t[k] - trace.t[k - 1]))


def time_to_switch(v: float, t_pe: float, params: LandauParams,
                   threshold: float = SWITCH_THRESHOLD, p0: float | None = None,
                   horizon: float = 1e-6) -> float:
    """Time for a step of ``v`` to carry the cell from -sign(v)*P_s past threshold.

    Returns ``inf`` for a sub-coercive step.
    """
    ps = spontaneous_polarization(params)
    sign = math.copysign(1.0, v)
    if abs(v) / t_pe <= coercive_field(params):
        return math.inf
    if p0 is None:
        p0 = -sign * ps
    level = sign * threshold * ps
    integ = _Integrator(params)
    e = v / t_pe
    t, p = 0.0, p0
    chunk = 1e-11
    while t < horizon:
        prev_t, prev_p = t, p
        rows = []
        p = integ.segment(p, t, t + chunk, e, e, out=rows)
        for tt, pp, _ in rows:
            if sign * (pp - level) >= 0.0:
                return prev_t + (level - prev_p) / (pp - prev_p) * (tt - prev_t)
            prev_t, prev_p = tt, pp
        t += chunk
        chunk = min(chunk * 2.0, 1e-9)
    raise ConvergenceFailure(f"no switch within {horizon:g} s at {v:g} V", last=p)


def calibrate_viscosity(params: LandauParams, v: float, t_pe: float,
                        target_time: float, threshold: float = SWITCH_THRESHOLD) -> LandauParams:
    """Return params with rho scaled so a step of ``v`` switches in ``target_time``.

    Switching time is linear in rho, so one unit-viscosity run fixes it.
    """
    unit = replace(params, rho=1.0)
    t1 = time_to_switch(v, t_pe, unit, threshold)
    return replace(params, rho=target_time / t1)


def integrate_explicit(p0: float, waveform, t_pe: float, params: LandauParams,
                       dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step forward Euler; reference path for checking the adaptive integrator."""
    _check_waveform(waveform)
    tw = np.array([w[0] for w in waveform])
    vw = np.array([w[1] for w in waveform])
    n = int(math.ceil((tw[-1] - tw[0]) / dt))
    ts = tw[0] + dt * np.arange(n + 1)
    ts[-1] = min(ts[-1], tw[-1])
    es = np.interp(ts, tw, vw) / t_pe
    ps = np.empty_like(ts)
    ps[0] = p = p0
    inv_rho = 1.0 / params.rho
    for k in range(n):
        h = ts[k + 1] - ts[k]
        p = p + h * inv_rho * (es[k] - lk_field(p, params))
        ps[k + 1] = p
    return ts, ps


def square_pulse(v: float, width: float, edge: float = 1e-11, lead: float = 0.0,
                 tail: float = 1e-9):
    """Breakpoints for a trapezoidal pulse starting and ending at 0 V."""
    t0 = lead
    pts = [(0.0, 0.0)] if lead > 0 else []
    pts += [(t0, 0.0), (t0 + edge, v), (t0 + edge + width, v), (t0 + 2 * edge + width, 0.0)]
    if tail > 0:
        pts.append((t0 + 2 * edge + width + tail, 0.0))
    return pts


def triangle_sweep(v_max: float, period: float, cycles: int = 1):
    """Breakpoints 0 -> +v -> -v -> 0 repeated."""
    q = period / 4.0
    pts = [(0.0, 0.0)]
    for c in range(cycles):
        base = c * period
        pts += [(base + q, v_max), (base + 3 * q, -v_max), (base + 4 * q, 0.0)]
    return pts
