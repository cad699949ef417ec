"""Energy, latency and area accounting, the 6T SRAM baseline and comparisons."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .arrays import ArrayConfig, EventLog, LineEvent, PeFetArray
from .layout import LayoutRules, WireParams, cell_area, gate_cap
from .tmdfet import FetParams, drain_current

ENERGY_COMPONENTS = ("c_pe_charging", "metal_lines", "p_switching", "leakage")
LATENCY_COMPONENTS = ("line_rc", "p_switch", "phase_overheads")

PROVENANCE_ANCHOR = "anchored"
PROVENANCE_CAL = "calibration-sensitive"
PROVENANCE_MODEL = "model"


@dataclass
class EnergyReport:
    total: float
    components: dict[str, float]
    per_class: dict[str, float] = field(default_factory=dict)

    def share(self, name: str) -> float:
        return self.components[name] / self.total if self.total else 0.0


@dataclass
class LatencyReport:
    total: float
    components: dict[str, float]


def operation_energy(log: EventLog) -> EnergyReport:
    """Sum 1/2 C dV^2 over line transitions, LK switching work and leakage."""
    comp = dict.fromkeys(ENERGY_COMPONENTS, 0.0)
    per = {}
    for e in log.events:
        pe = e.energy("c_pe")
        metal = e.energy("c_wire") + e.energy("c_dev")
        comp["c_pe_charging"] += pe
        comp["metal_lines"] += metal
        per[e.line_class] = per.get(e.line_class, 0.0) + pe + metal
    for s in log.switching:
        w = s.count * s.energy
        comp["p_switching"] += w
        key = f"switch:{s.cell_class}"
        per[key] = per.get(key, 0.0) + w
    comp["leakage"] = log.leakage
    return EnergyReport(sum(comp.values()), comp, per)


def operation_latency(log: EventLog) -> LatencyReport:
    comp = dict.fromkeys(LATENCY_COMPONENTS, 0.0)
    total = 0.0
    for ph in log.phases:
        comp[ph.binding] += ph.duration - ph.overhead
        comp["phase_overheads"] += ph.overhead
        total += ph.duration
    return LatencyReport(total, comp)


# -----------------------------------------------------------------------------
# 6T SRAM baseline
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class SramBaseline:
    """6T cell built from the same 2D FETs and wired with the same wire model."""

    area: float = 761.4  # lambda^2
    height: float = 18.0  # lambda
    n_r: int = 256
    n_c: int = 256
    n_w: int = 64
    v_dd: float = 0.7
    dv_read: float = 0.339  # sensed bit-line swing
    c_tap: float = 0.266e-15  # access-transistor drain on each bit line
    w_ax: float = 30e-9
    utilization: float = 0.3
    n_leak: int = 2  # off devices per cell between the rails

    def __post_init__(self):
        if not 0.0 <= self.utilization <= 1.0:
            raise ValueError("utilization must lie in [0, 1]")
        if not 0.0 < self.dv_read <= self.v_dd:
            raise ValueError("dv_read must lie in (0, v_dd]")

    def width(self) -> float:
        return self.area / self.height

    def loads(self, rules: LayoutRules, wire: WireParams, fet: FetParams):
        lam = rules.lam
        c_bl = wire.c_wire * self.n_r * self.height * lam + self.n_r * self.c_tap
        c_wl = (wire.c_wire * self.n_c * self.width() * lam
                + 2 * self.n_c * gate_cap(fet, self.w_ax))
        return c_bl, c_wl

    def i_off(self, fet: FetParams) -> float:
        return drain_current(0.0, self.v_dd, 0.0, fet.scaled(self.w_ax))

    def leakage_power(self, fet: FetParams) -> float:
        return self.n_r * self.n_c * self.n_leak * self.i_off(fet) * self.v_dd

    def op_time(self, rules, wire, fet, k_rc: float = 5.0) -> float:
        c_bl, c_wl = self.loads(rules, wire, fet)
        return k_rc * wire.r_drv * (c_bl + c_wl)

    def leakage_energy(self, rules, wire, fet, k_rc: float = 5.0) -> float:
        """Standby leakage charged to one access: idle time per access is t_op (1-u)/u."""
        if self.utilization == 0.0:
            return math.inf
        t_idle = self.op_time(rules, wire, fet, k_rc) * (1.0 - self.utilization) / self.utilization
        return self.leakage_power(fet) * t_idle


def _sram_log(op: str, sram: SramBaseline, rules: LayoutRules, wire: WireParams,
              fet: FetParams, k_rc: float) -> EventLog:
    c_bl, c_wl = sram.loads(rules, wire, fet)
    v, dv = sram.v_dd, sram.dv_read
    log = EventLog("SRAM", op, float("nan"))

    def ev(phase, line, group, n, v0, v1, c):
        log.events.append(LineEvent(phase, line, group, n, v0, v1, c, 0.0, 0.0))

    ev("access", "WL", "sel", 1, 0.0, v, c_wl)
    ev("restore", "WL", "sel", 1, v, 0.0, c_wl)
    half = sram.n_c - sram.n_w
    if op == "write":
        # one rail of each written column goes to ground, the rest see a read-like swing
        ev("access", "BL", "sel", sram.n_w, v, 0.0, c_bl)
        ev("restore", "BL", "sel", sram.n_w, 0.0, v, c_bl)
        ev("access", "BL", "half", half, v, v - dv, c_bl)
        ev("restore", "BL", "half", half, v - dv, v, c_bl)
    else:
        ev("access", "BL", "sel", sram.n_c, v, v - dv, c_bl)
        ev("restore", "BL", "sel", sram.n_c, v - dv, v, c_bl)
    log.leakage = sram.leakage_energy(rules, wire, fet, k_rc)
    return log


def sram_energy(op: str, sram: SramBaseline, cfg: ArrayConfig) -> EnergyReport:
    log = _sram_log(op, sram, cfg.rules, cfg.wire, cfg.device.fet, cfg.timing.k_rc)
    return operation_energy(log)


def sram_latency(op: str, sram: SramBaseline, cfg: ArrayConfig) -> LatencyReport:
    t = sram.op_time(cfg.rules, cfg.wire, cfg.device.fet, cfg.timing.k_rc)
    return LatencyReport(t, {"line_rc": t, "p_switch": 0.0, "phase_overheads": 0.0})


# -----------------------------------------------------------------------------
# Per-architecture evaluation
# -----------------------------------------------------------------------------

def canonical_word(n_w: int, phase: int = 0) -> np.ndarray:
    """Alternating bits; two consecutive phases flip every bit."""
    return (np.arange(n_w) + phase) % 2


@dataclass
class MetricsReport:
    arch: str
    kappa: float
    area: float
    write_energy: EnergyReport
    read_energy: EnergyReport
    write_latency: LatencyReport
    read_latency: LatencyReport
    write_log: EventLog | None = None
    read_log: EventLog | None = None


def evaluate(cfg: ArrayConfig, address=(1, 0)) -> MetricsReport:
    """Write the alternating word over its complement, then read it back.

    Only the second write is reported, so every accessed bit switches.
    """
    arr = PeFetArray(cfg)
    arr.write(address, canonical_word(cfg.n_w, 1))
    wlog = arr.write(address, canonical_word(cfg.n_w, 0))
    res = arr.read(address)
    if not np.array_equal(res.bits, canonical_word(cfg.n_w, 0)):
        raise AssertionError(f"{cfg.arch}: canonical workload read back wrong data")
    return MetricsReport(
        cfg.arch, cfg.kappa, cell_area(cfg.arch, cfg.kappa, cfg.rules),
        operation_energy(wlog), operation_energy(res.log),
        operation_latency(wlog), operation_latency(res.log), wlog, res.log)


# -----------------------------------------------------------------------------
# Comparison tables
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    arch: str
    kappa: float
    metric: str
    value: float
    sram: float
    unit: str
    provenance: str

    @property
    def ratio(self) -> float:
        return self.value / self.sram

    @property
    def improvement(self) -> float:
        """Fractional reduction relative to SRAM (negative means overhead)."""
        return 1.0 - self.ratio


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow]

    def get(self, arch: str, metric: str, kappa: float | None = None) -> ComparisonRow:
        for r in self.rows:
            if r.arch == arch and r.metric == metric and (kappa is None or r.kappa == kappa):
                return r
        raise KeyError((arch, metric, kappa))

    def text(self) -> str:
        head = f"{'arch':5s} {'kappa':>6s} {'metric':14s} {'value':>11s} {'sram':>11s} " \
               f"{'ratio':>7s}  provenance"
        out = [head]
        for r in self.rows:
            out.append(f"{r.arch:5s} {r.kappa:6.3f} {r.metric:14s} {r.value:11.4g} "
                       f"{r.sram:11.4g} {r.ratio:7.3f}  {r.provenance}")
        return "\n".join(out)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["arch", "kappa", "metric", "value", "sram", "ratio", "unit", "provenance"])
            for r in self.rows:
                w.writerow([r.arch, r.kappa, r.metric, f"{r.value:.6e}", f"{r.sram:.6e}",
                            f"{r.ratio:.6f}", r.unit, r.provenance])


def compare_to_sram(reports: Iterable[MetricsReport], sram: SramBaseline,
                    cfg: ArrayConfig) -> ComparisonTable:
    s = {"area": (sram.area, "lambda^2", PROVENANCE_ANCHOR),
         "write_energy": (sram_energy("write", sram, cfg).total, "J", PROVENANCE_CAL),
         "read_energy": (sram_energy("read", sram, cfg).total, "J", PROVENANCE_CAL),
         "write_latency": (sram_latency("write", sram, cfg).total, "s", PROVENANCE_MODEL),
         "read_latency": (sram_latency("read", sram, cfg).total, "s", PROVENANCE_MODEL)}
    rows = []
    for rep in reports:
        vals = {"area": rep.area, "write_energy": rep.write_energy.total,
                "read_energy": rep.read_energy.total, "write_latency": rep.write_latency.total,
                "read_latency": rep.read_latency.total}
        for m, v in vals.items():
            ref, unit, prov = s[m]
            rows.append(ComparisonRow(rep.arch, rep.kappa, m, v, ref, unit, prov))
    return ComparisonTable(rows)


REPORT_COLUMNS = ("arch", "kappa", "metric", "component", "value", "unit", "provenance")


def report_rows(rep: MetricsReport) -> list[tuple]:
    rows = [(rep.arch, rep.kappa, "area", "total", rep.area, "lambda^2", PROVENANCE_ANCHOR)]
    for name, er in (("write_energy", rep.write_energy), ("read_energy", rep.read_energy)):
        rows.append((rep.arch, rep.kappa, name, "total", er.total, "J", PROVENANCE_CAL))
        rows.extend((rep.arch, rep.kappa, name, c, v, "J", PROVENANCE_CAL)
                    for c, v in er.components.items())
    for name, lr in (("write_latency", rep.write_latency), ("read_latency", rep.read_latency)):
        rows.append((rep.arch, rep.kappa, name, "total", lr.total, "s", PROVENANCE_MODEL))
        rows.extend((rep.arch, rep.kappa, name, c, v, "s", PROVENANCE_MODEL)
                    for c, v in lr.components.items())
    return rows


def write_report_csv(path: str | Path, rows: Sequence[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow([r[0], f"{r[1]:g}", r[2], r[3], f"{r[4]:.6e}", r[5], r[6]])
