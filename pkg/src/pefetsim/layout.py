"""Lambda-rule cell geometry, line capacitances and driver models.

Shared by the array simulator (line loads, RC time constants) and the
metrics layer (area, energy). All layout lengths are in units of lambda
unless a name ends in ``_m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.optimize import minimize_scalar

from .errors import UnsupportedArch
from .tmdfet import EPS0, FetParams, drain_current

ARCHS = ("HD", "TALL", "WIDE", "CC")

# Area of a 2D-FET 6T SRAM cell in lambda^2, anchored on the HD ratio.
SRAM_AREA = 761.4
HD_WIDTH_REF = 18.0
KAPPA_REF = 0.04


def norm_arch(arch: str) -> str:
    a = str(arch).strip().upper()
    if a not in ARCHS:
        raise UnsupportedArch(f"unknown architecture {arch!r}; expected one of {ARCHS}")
    return a


@dataclass(frozen=True)
class LayoutRules:
    lam: float = 10e-9
    poly_pitch: float = 9.0
    heights: dict = field(default_factory=lambda: {"HD": 9.0, "TALL": 22.5, "WIDE": 18.0,
                                                   "CC": 13.5})
    # width model: W(kappa) = max(w_min, w_contact + a_pe(kappa) / l_pe)
    w_contact: float = 4.889210777682759  # from fit_width_model
    l_pe: float = 11.440958851254306
    w_min: float = 9.0
    # extra horizontal room for the access transistor and its contacts
    w_ax_wide: float = 9.5
    w_ax_cc: float = 8.0
    a_tmd: float = 6.0  # channel area in lambda^2 (20 nm x 30 nm at 10 nm lambda)
    sram_area: float = SRAM_AREA
    sram_height: float = 18.0

    def pe_width(self, kappa: float) -> float:
        return self.a_tmd / kappa / self.l_pe

    def device_width(self, kappa: float) -> float:
        return max(self.w_min, self.w_contact + self.pe_width(kappa))

    def cell_dims(self, arch: str, kappa: float) -> tuple[float, float]:
        """(height, width) of one physical cell in lambda."""
        arch = norm_arch(arch)
        h = self.heights[arch]
        w = self.device_width(kappa)
        if arch == "WIDE":
            w += self.w_ax_wide
        elif arch == "CC":
            w = 2.0 * w + self.w_ax_cc
        return h, w

    @property
    def sram_width(self) -> float:
        return self.sram_area / self.sram_height


def cell_area(arch: str, kappa: float, rules: LayoutRules | None = None) -> float:
    """Area per bit in lambda^2 (a CC cell holds two bits)."""
    rules = rules or LayoutRules()
    arch = norm_arch(arch)
    h, w = rules.cell_dims(arch, kappa)
    area = h * w
    return area / 2.0 if arch == "CC" else area


def fit_width_model(rules: LayoutRules, targets=((0.03, 4.0), (0.07, 7.0)),
                    kappa_ref: float = KAPPA_REF, width_ref: float = HD_WIDTH_REF):
    """Fit (w_contact, l_pe) so HD width hits ``width_ref`` at ``kappa_ref``.

    The remaining freedom is spent on a log least-squares fit of the
    HD-vs-SRAM area ratio to ``targets``. Returns (rules, residuals).
    """
    h = rules.heights["HD"]

    def build(l_pe):
        w_c = width_ref - rules.a_tmd / kappa_ref / l_pe
        return replace(rules, l_pe=l_pe, w_contact=w_c)

    def cost(l_pe):
        r = build(l_pe)
        return sum(math.log(rules.sram_area / (h * r.device_width(k)) / t) ** 2 for k, t in targets)

    lo = rules.a_tmd / kappa_ref / width_ref * 1.0001  # keeps w_contact positive
    sol = minimize_scalar(cost, bounds=(lo, 200.0), method="bounded",
                          options={"xatol": 1e-12})
    fitted = build(float(sol.x))
    resid = [rules.sram_area / (h * fitted.device_width(k)) / t - 1.0 for k, t in targets]
    return fitted, resid


# -----------------------------------------------------------------------------
# Capacitance and drivers
# -----------------------------------------------------------------------------

def c_pe(a_pe: float, t_pe: float, eps_r: float = 4000.0) -> float:
    """Linear PE capacitance (F)."""
    return eps_r * EPS0 * a_pe / t_pe


@dataclass(frozen=True)
class WireParams:
    c_wire: float = 0.2e-15 / 1e-6  # F/m
    r_drv: float = 10e3  # ohm, line drivers
    eps_pe: float = 4000.0
    # per-cell taps hanging on lines (contacts, vias, junctions)
    c_tap_hd: float = 0.112e-15  # HD shared back-contact stack on WBL
    c_tap_bl: float = 0.195e-15  # access-transistor drain on WBL / BL
    c_tap_rbl: float = 0.0413e-15  # PeFET drain on RBL
    c_buf_in: float = 0.0507e-15  # segment buffer input on GPL
    w_buf: float = 120e-9  # segment buffer driver width
    w_ax: float = 360e-9  # access transistor width

    def __post_init__(self):
        for name in ("c_wire", "r_drv", "eps_pe", "c_tap_hd", "c_tap_bl", "c_tap_rbl", "c_buf_in"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.w_buf <= 0 or self.w_ax <= 0:
            raise ValueError("w_buf and w_ax must be positive")


def gate_cap(fet: FetParams, width: float) -> float:
    return fet.c_ox * width * fet.l


def driver_resistance(fet: FetParams, width: float, v_supply: float) -> float:
    """Effective on-resistance V / I_on of an n-FET driver at its supply."""
    if v_supply <= 0:
        return math.inf
    i_on = drain_current(v_supply, v_supply, 0.0, fet.scaled(width))
    return v_supply / i_on
