"""Lumped piezoelectric stress transduction into the 2D channel.

Polarization and the PE voltage set a PE stress; the hammer-and-nail area
ratio boosts it into the channel; the channel stress shifts the bandgap.
The boost is a power law b0 * kappa**-q fitted to two FEM anchor points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from .errors import GeometryError, OutOfCalibrationRange

# Published anchor points the lumped model is calibrated to.
BOOST_REF_KAPPA = 0.04
BOOST_REF = 12.0
BOOST_PAIR = (0.03, 0.07)
BOOST_PAIR_RATIO = 1.78
REF_V_GB = 0.35
REF_SIGMA_TMD = 0.64e9  # Pa, +P at the reference read bias
REF_DELTA_EG = 0.051  # eV magnitude at the reference point

CALIBRATED_KAPPA_RANGE = (0.03, 0.07)
SUPPORTED_KAPPA_RANGE = (0.02, 1.0)


def fit_boost(kappa_ref=BOOST_REF_KAPPA, boost_ref=BOOST_REF,
              kappa_pair=BOOST_PAIR, pair_ratio=BOOST_PAIR_RATIO) -> tuple[float, float]:
    """Fit B(kappa) = b0 * kappa**-q through a level anchor and a ratio anchor.

    Two equations, two unknowns: q comes from the ratio, b0 from the level.
    """
    k_lo, k_hi = kappa_pair
    if not (0 < k_lo < k_hi) or pair_ratio <= 1.0:
        raise ValueError("ratio anchor needs k_lo < k_hi and ratio > 1")
    q = math.log(pair_ratio) / math.log(k_hi / k_lo)
    b0 = boost_ref * kappa_ref ** q
    return b0, q


_B0, _Q = fit_boost()


@dataclass(frozen=True)
class DeviceGeometry:
    f: float = 20e-9
    w_tmd: float = 30e-9
    l_g: float = 20e-9
    a_pe: float = 15000e-18
    t_pe: float = 600e-9
    t_nail: float = 10e-9
    t_tox: float = 3e-9
    t_tmd: float = 0.65e-9

    def __post_init__(self):
        for name in ("f", "w_tmd", "l_g", "a_pe", "t_pe", "t_nail", "t_tox", "t_tmd"):
            if not getattr(self, name) > 0:
                raise GeometryError(f"{name} must be positive")

    @property
    def lam(self) -> float:
        """Layout lambda, half the gate length."""
        return self.l_g / 2.0

    @property
    def a_tmd(self) -> float:
        return self.l_g * self.w_tmd

    def pe_width(self, pe_length: float) -> float:
        return self.a_pe / pe_length

    def with_kappa(self, kappa: float) -> "DeviceGeometry":
        """Same device with the PE area resized to hit ``kappa``."""
        if not 0 < kappa <= 1:
            raise GeometryError(f"kappa must lie in (0, 1], got {kappa}")
        return replace(self, a_pe=self.a_tmd / kappa)


def _default_y_eff():
    # stiffness that puts sigma_TMD at the reference value for +P at 0.35 V
    sigma_pe = REF_SIGMA_TMD / BOOST_REF
    return sigma_pe / (650e-12 * REF_V_GB / 600e-9)


@dataclass(frozen=True)
class PiezoParams:
    d33: float = 650e-12  # m/V
    d31: float = -320e-12  # m/V, housed only
    y_eff: float = _default_y_eff()  # Pa
    boost_b0: float = _B0
    boost_q: float = _Q
    a_bg: float = REF_DELTA_EG / REF_SIGMA_TMD  # eV/Pa
    clamp_v: float | None = None

    def __post_init__(self):
        if not self.d33 > 0:
            raise ValueError("d33 must be positive")
        if not self.boost_b0 > 0 or not 0 < self.boost_q <= 1:
            raise ValueError("boost law needs b0 > 0 and 0 < q <= 1")
        if self.a_bg < 0:
            raise ValueError("a_bg must be non-negative")

    def boost(self, kappa: float) -> float:
        return self.boost_b0 * kappa ** (-self.boost_q)


def compute_kappa(geom: DeviceGeometry) -> float:
    """Hammer-and-nail area ratio A_TMD / A_PE."""
    if geom.a_pe < geom.a_tmd * (1 - 1e-12):
        raise GeometryError(
            f"PE area {geom.a_pe:.3g} m^2 smaller than channel area {geom.a_tmd:.3g} m^2")
    return min(1.0, geom.a_tmd / geom.a_pe)


def pe_stress(p_norm: float, v_gb: float, geom: DeviceGeometry, piezo: PiezoParams) -> float:
    """Signed PE stress (Pa) from normalized polarization and PE voltage."""
    if abs(p_norm) > 1.0 + 1e-9:
        raise ValueError(f"|p_norm| must not exceed 1, got {p_norm}")
    if piezo.clamp_v is not None:
        v_gb = max(-piezo.clamp_v, min(piezo.clamp_v, v_gb))
    return piezo.y_eff * piezo.d33 * (v_gb / geom.t_pe) * p_norm


def tmd_stress(sigma_pe: float, kappa: float, piezo: PiezoParams) -> float:
    lo, hi = SUPPORTED_KAPPA_RANGE
    if not lo <= kappa <= hi:
        raise ValueError(f"kappa {kappa} outside supported range [{lo}, {hi}]")
    c_lo, c_hi = CALIBRATED_KAPPA_RANGE
    if not c_lo - 1e-9 <= kappa <= c_hi + 1e-9:
        warnings.warn(f"kappa={kappa} outside calibrated range {CALIBRATED_KAPPA_RANGE}",
                      OutOfCalibrationRange, stacklevel=2)
    return piezo.boost(kappa) * sigma_pe


def bandgap_shift(sigma_tmd: float, piezo: PiezoParams) -> float:
    """Gap change in eV; compressive (positive) channel stress narrows the gap."""
    return -piezo.a_bg * sigma_tmd


def transduce(p_norm: float, v_gb: float, geom: DeviceGeometry, piezo: PiezoParams,
              kappa: float | None = None) -> float:
    """Full chain polarization + PE voltage -> bandgap shift (eV)."""
    if kappa is None:
        kappa = compute_kappa(geom)
    return bandgap_shift(tmd_stress(pe_stress(p_norm, v_gb, geom, piezo), kappa, piezo), piezo)
