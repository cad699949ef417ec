"""Charge-sheet compact model of the monolayer MoS2 FET.

Sheet charge follows a softplus in gate overdrive, current is the
charge-based drift-diffusion expression between source- and drain-side
charge, and contact resistance is resolved self-consistently. The bandgap
shift enters only as a threshold shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, least_squares

from .errors import ConvergenceFailure, FitFailure

EPS0 = 8.8541878128e-12
_RTOL = 4 * float(np.finfo(float).eps)
K_B = 1.380649e-23
Q_E = 1.602176634e-19


@dataclass(frozen=True)
class FetParams:
    mu: float = 90e-4  # m^2/(V s)
    r_c: float = 200e-6 * 1e-6  # ohm*m per contact edge (200 ohm*um)
    e_g0: float = 1.5  # eV
    t_tox: float = 3e-9
    eps_ox: float = 3.9 * EPS0
    w: float = 30e-9
    l: float = 20e-9
    v_t0: float = 0.2663020919  # joint ratio-anchor fit, see calibrate.py
    n_id: float = 1.0
    temp: float = 300.0
    band_split: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.w > 0 and self.l > 0 and self.r_c >= 0):
            raise ValueError("mu, w, l must be positive and r_c non-negative")
        if not 1.0 <= self.n_id <= 2.0:
            raise ValueError(f"n_id must lie in [1, 2], got {self.n_id}")
        if not 0.0 <= self.band_split <= 1.0:
            raise ValueError("band_split must lie in [0, 1]")

    @property
    def c_ox(self) -> float:
        return self.eps_ox / self.t_tox

    @property
    def v_th(self) -> float:
        """Thermal voltage kT/q."""
        return K_B * self.temp / Q_E

    @property
    def r_series(self) -> float:
        """Source plus drain contact resistance in ohms."""
        return 2.0 * self.r_c / self.w

    def scaled(self, width: float) -> "FetParams":
        return replace(self, w=width)


def threshold_shift(delta_eg: float, band_split: float = 1.0) -> float:
    """Threshold shift (V) for a gap shift (eV) carried by the conduction band."""
    return band_split * delta_eg


def _softplus(u: float) -> float:
    return max(u, 0.0) + math.log1p(math.exp(-abs(u)))


def _sheet_charge(x, n_vt, c_ox):
    return c_ox * n_vt * _softplus(x / n_vt)


def _intrinsic_current(v_gs, v_ds, v_t, p: FetParams):
    n_vt = p.n_id * p.v_th
    c_ox = p.c_ox
    qs = _sheet_charge(v_gs - v_t, n_vt, c_ox)
    qd = _sheet_charge(v_gs - v_t - v_ds, n_vt, c_ox)
    return (p.w / p.l) * p.mu * ((qs * qs - qd * qd) / (2.0 * c_ox) + n_vt * (qs - qd))


def drain_current(v_gs: float, v_ds: float, delta_eg: float, params: FetParams) -> float:
    """Drain current (A) including the contact-resistance drop.

    Negative ``v_ds`` is handled by swapping source and drain.
    """
    if abs(delta_eg) >= params.e_g0:
        raise ValueError(f"|delta_eg|={abs(delta_eg)} eV exceeds the nominal gap")
    if v_ds < 0.0:
        return -drain_current(v_gs - v_ds, -v_ds, delta_eg, params)
    if v_ds == 0.0:
        return 0.0
    v_t = params.v_t0 + threshold_shift(delta_eg, params.band_split)
    i0 = float(_intrinsic_current(v_gs, v_ds, v_t, params))
    r = 0.5 * params.r_series
    if r == 0.0 or i0 == 0.0:
        return i0

    def g(i):
        return i - _intrinsic_current(v_gs - i * r, v_ds - 2.0 * i * r, v_t, params)

    try:
        return brentq(g, 0.0, i0, xtol=1e-300, rtol=_RTOL, maxiter=200)
    except RuntimeError as exc:
        raise ConvergenceFailure(f"series-resistance solve failed: {exc}") from exc


def subthreshold_swing(v_gs: float, v_ds: float, params: FetParams, dv: float = 1e-3) -> float:
    """Local swing in V/decade from a central difference of log10(I)."""
    hi = math.log10(drain_current(v_gs + dv, v_ds, 0.0, params))
    lo = math.log10(drain_current(v_gs - dv, v_ds, 0.0, params))
    return 2 * dv / (hi - lo)


# -----------------------------------------------------------------------------
# Calibration
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class FetAnchor:
    """Target current ratio I(delta_eg) / I(de_ref) at a bias point."""

    delta_eg: float
    v_gs: float
    target: float
    de_ref: float = 0.0
    v_ds: float = 0.7
    tol: float = 0.10
    label: str = ""

    @property
    def informative(self) -> bool:
        return self.delta_eg != self.de_ref

    def ratio(self, params: FetParams) -> float:
        return (drain_current(self.v_gs, self.v_ds, self.delta_eg, params)
                / drain_current(self.v_gs, self.v_ds, self.de_ref, params))


@dataclass
class FetCalibration:
    params: FetParams
    residual_norm: float
    achieved: list[float] = field(default_factory=list)
    anchors: list[FetAnchor] = field(default_factory=list)

    def rel_errors(self) -> list[float]:
        return [a / anc.target - 1.0 for a, anc in zip(self.achieved, self.anchors)]


_VT_BOUNDS = (-0.5, 1.0)
_N_BOUNDS = (1.0, 2.0)


def calibrate_fet(anchors: Sequence[FetAnchor], params: FetParams) -> FetCalibration:
    """Least-squares fit of v_t0 and n_id to current-ratio anchors (log residuals)."""
    anchors = list(anchors)
    informative = [a for a in anchors if a.informative]
    if len(informative) < 2:
        raise FitFailure(f"need at least 2 informative anchors, got {len(informative)}")

    def resid(x):
        p = replace(params, v_t0=x[0], n_id=x[1])
        return np.array([math.log(a.ratio(p) / a.target) for a in informative])

    best = None
    for start in ((0.3, 1.2), (0.1, 1.05), (0.5, 1.6)):
        try:
            sol = least_squares(resid, start, bounds=(( _VT_BOUNDS[0], _N_BOUNDS[0]),
                                                      (_VT_BOUNDS[1], _N_BOUNDS[1])),
                                xtol=1e-14, ftol=1e-14, gtol=1e-14)
        except (ValueError, ConvergenceFailure):
            continue
        if best is None or sol.cost < best.cost:
            best = sol
    if best is None:
        raise FitFailure("no starting point produced a finite fit")
    fitted = replace(params, v_t0=float(best.x[0]), n_id=float(best.x[1]))
    achieved = [a.ratio(fitted) for a in anchors]
    cal = FetCalibration(params=fitted, residual_norm=float(np.linalg.norm(best.fun)),
                         achieved=achieved, anchors=anchors)
    bad = [(a, r) for a, r in zip(anchors, achieved) if abs(r / a.target - 1.0) > a.tol]
    if bad:
        desc = ", ".join(f"{a.label or a.target}: got {r:.3g} want {a.target:g}+-{a.tol:.0%}"
                         for a, r in bad)
        raise FitFailure(f"calibration residual out of tolerance ({desc})")
    return cal
