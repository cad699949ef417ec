"""Four-terminal PeFET: stored polarization, read current and write transient."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import ferroelectric as fe
from .errors import ReadDisturbRisk, ReadDisturbWarning
from .tmdfet import FetParams, drain_current
from .transduction import DeviceGeometry, PiezoParams, compute_kappa, transduce


@dataclass(frozen=True)
class BiasPoint:
    v_g: float
    v_b: float
    v_d: float
    v_s: float = 0.0

    @property
    def v_gb(self) -> float:
        return self.v_g - self.v_b


@dataclass(frozen=True)
class PeFetConfig:
    landau: fe.LandauParams = field(default_factory=fe.LandauParams)
    piezo: PiezoParams = field(default_factory=PiezoParams)
    geom: DeviceGeometry = field(default_factory=DeviceGeometry)
    fet: FetParams = field(default_factory=FetParams)
    v_r: float = 0.35
    v_dd: float = 0.7
    disturb_margin: float = 0.1
    warn_margin: float = 0.2
    kappa: float | None = None  # overrides geom.a_pe when set

    def __post_init__(self):
        if self.kappa is not None:
            object.__setattr__(self, "geom", self.geom.with_kappa(self.kappa))
        v_c = self.v_c
        if self.v_r > v_c - self.disturb_margin:
            raise ReadDisturbRisk(
                f"read voltage {self.v_r} V within {self.disturb_margin} V of V_C={v_c:.3f} V")
        if self.v_dd <= v_c:
            raise ValueError(f"v_dd={self.v_dd} V cannot switch (V_C={v_c:.3f} V)")

    @property
    def v_c(self) -> float:
        return fe.coercive_voltage(self.landau, self.geom.t_pe)

    @property
    def p_s(self) -> float:
        return fe.spontaneous_polarization(self.landau)

    @property
    def k(self) -> float:
        return compute_kappa(self.geom)

    def with_kappa(self, kappa: float) -> "PeFetConfig":
        return replace(self, kappa=kappa)


def delta_eg(p: float, v_gb: float, cfg: PeFetConfig) -> float:
    """Bandgap shift for stored polarization ``p`` under gate-to-back bias."""
    p_norm = float(np.clip(p / cfg.p_s, -1.0, 1.0))
    return transduce(p_norm, v_gb, cfg.geom, cfg.piezo, cfg.k)


def check_read_bias(v_gb: float, cfg: PeFetConfig) -> None:
    v_c = cfg.v_c
    if abs(v_gb) >= v_c - cfg.disturb_margin:
        raise ReadDisturbRisk(
            f"|V_GB|={abs(v_gb):.3f} V leaves less than {cfg.disturb_margin} V to V_C={v_c:.3f} V")
    if abs(v_gb) >= v_c - cfg.warn_margin:
        warnings.warn(f"|V_GB|={abs(v_gb):.3f} V is close to V_C={v_c:.3f} V",
                      ReadDisturbWarning, stacklevel=3)


def read_current(p: float, bias: BiasPoint, cfg: PeFetConfig, fet: FetParams | None = None) -> float:
    """Drain current for stored ``p``; polarization is held frozen."""
    check_read_bias(bias.v_gb, cfg)
    de = delta_eg(p, bias.v_gb, cfg)
    return drain_current(bias.v_g - bias.v_s, bias.v_d - bias.v_s, de, fet or cfg.fet)


def standard_read_bias(cfg: PeFetConfig) -> BiasPoint:
    return BiasPoint(v_g=cfg.v_r, v_b=0.0, v_d=cfg.v_dd, v_s=0.0)


def device_distinguishability(cfg: PeFetConfig) -> float:
    bias = standard_read_bias(cfg)
    return read_current(cfg.p_s, bias, cfg) / read_current(-cfg.p_s, bias, cfg)


@dataclass
class WriteResult:
    p_final: float
    trace: fe.SwitchingTrace
    q_switched: float


def write_transient(p0: float, v_gb_waveform, cfg: PeFetConfig, **kw) -> WriteResult:
    """LK switching of the PE under a V_GB waveform; charge moved is |p_final - p0|."""
    trace = fe.simulate_switching(p0, v_gb_waveform, cfg.geom.t_pe, cfg.landau, **kw)
    return WriteResult(trace.final_p, trace, abs(trace.final_p - p0))


def two_phase_waveform(v1: float, v2: float, phase: float, edge: float = 1e-11):
    """Piecewise-linear drive holding ``v1`` then ``v2`` for ``phase`` seconds each."""
    return [(0.0, 0.0), (edge, v1), (phase, v1), (phase + edge, v2), (2 * phase, v2),
            (2 * phase + edge, 0.0)]


def iv_sweep(cfg: PeFetConfig, v_gs=None) -> dict[str, np.ndarray]:
    """Transfer curves at V_B = 0 for +P, -P and the unstrained baseline."""
    if v_gs is None:
        v_gs = np.round(np.arange(0.0, cfg.v_c - cfg.disturb_margin, 0.01), 10)
    v_gs = np.asarray(v_gs, dtype=float)
    ps = cfg.p_s
    out = {"v_gs": v_gs, "i_lrs": [], "i_hrs": [], "i_baseline": []}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ReadDisturbWarning)
        for v in v_gs:
            b = BiasPoint(v_g=v, v_b=0.0, v_d=cfg.v_dd)
            out["i_lrs"].append(read_current(ps, b, cfg))
            out["i_hrs"].append(read_current(-ps, b, cfg))
            out["i_baseline"].append(read_current(0.0, b, cfg))
    near = [w for w in caught if issubclass(w.category, ReadDisturbWarning)]
    for w in caught:
        if not issubclass(w.category, ReadDisturbWarning):
            warnings.warn(w.message, w.category, stacklevel=2)
    if near:
        warnings.warn(f"{len(near) // 3} sweep points sit close to V_C={cfg.v_c:.3f} V",
                      ReadDisturbWarning, stacklevel=2)
    return {k: np.asarray(v) for k, v in out.items()}


def write_iv_csv(path: str | Path, sweep: dict[str, np.ndarray]) -> None:
    cols = ("v_gs", "i_lrs", "i_hrs", "i_baseline")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in zip(*(sweep[c] for c in cols)):
            w.writerow([f"{x:.10g}" for x in row])
