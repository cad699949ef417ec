"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and also when this file is run as a script.
"""

import time
import warnings

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from pefetsim import ferroelectric as fe
from pefetsim import transduction as tr
from pefetsim.arrays import ArrayConfig, PeFetArray, cc_current_table, cc_ratios
from pefetsim.layout import SRAM_AREA, cell_area
from pefetsim.metrics import SramBaseline, evaluate, operation_energy, sram_energy
from pefetsim.pefet import PeFetConfig, device_distinguishability
from pefetsim.tmdfet import FetParams, drain_current

ARCHS = ("HD", "TALL", "WIDE", "CC")
RESULTS: list[str] = []


def record(num: int, name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def close(x, target, rel):
    return abs(x / target - 1.0) <= rel


_reports: dict = {}


def reports(kappa):
    if kappa not in _reports:
        _reports[kappa] = {a: evaluate(ArrayConfig(arch=a).with_kappa(kappa)) for a in ARCHS}
    return _reports[kappa]


# -----------------------------------------------------------------------------

def test_01_coercive_voltage():
    t0 = time.perf_counter()
    v_c = fe.coercive_voltage(fe.LandauParams(), 600e-9)
    dt = time.perf_counter() - t0
    record(1, "coercive voltage", close(v_c, 0.6, 0.10) and dt < 1.0,
           f"V_C={v_c:.4f} V (0.6 +-10%), {dt * 1e3:.2f} ms")


def test_02_spontaneous_polarization():
    lp = fe.LandauParams()
    ps = fe.spontaneous_polarization(lp)
    # independent oracle: dense grid then bounded refinement of U(P)
    grid = np.linspace(0.0, 0.6, 600001)
    p0 = grid[np.argmin(fe.free_energy(grid, lp))]
    res = minimize_scalar(lambda p: fe.free_energy(p, lp), bounds=(p0 - 1e-5, p0 + 1e-5),
                          method="bounded", options={"xatol": 1e-14})
    rel = abs(ps / res.x - 1.0)
    record(2, "spontaneous polarization", close(ps, 0.2505, 1e-3) and rel <= 1e-6,
           f"P_s={ps:.6f} C/m^2, oracle rel diff {rel:.1e}")


def test_03_transduction_anchors():
    g, pz = tr.DeviceGeometry(), tr.PiezoParams()
    b = pz.boost(0.04)
    pair = pz.boost(0.03) / pz.boost(0.07)
    sig = tr.tmd_stress(tr.pe_stress(1.0, tr.REF_V_GB, g, pz), 0.04, pz)
    deg = tr.transduce(1.0, tr.REF_V_GB, g, pz, 0.04)
    ok = (close(b, 12.0, 0.01) and close(pair, 1.78, 0.01) and close(sig, 0.64e9, 0.01)
          and close(deg, -0.051, 0.01))
    record(3, "transduction anchors", ok,
           f"B(0.04)={b:.4f}, B ratio={pair:.4f}, sigma={sig / 1e9:.4f} GPa, "
           f"dEG={deg * 1e3:.2f} meV")


def test_04_fet_calibration():
    p = FetParams()
    i0 = drain_current(0.35, 0.7, 0.0, p)
    up = drain_current(0.35, 0.7, -0.051, p) / i0
    dn = i0 / drain_current(0.35, 0.7, 0.051, p)
    record(4, "FET calibration", close(up, 2.3, 0.10) and close(dn, 3.4, 0.10),
           f"I(-51meV)/I(0)={up:.3f} (2.3), I(0)/I(+51meV)={dn:.3f} (3.4)")


def test_05_distinguishability():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ks = [0.03, 0.035, 0.04, 0.05, 0.06, 0.07]
        r = {k: device_distinguishability(PeFetConfig(kappa=k)) for k in ks}
    mono = all(r[a] > r[b] for a, b in zip(ks, ks[1:]))
    ok = close(r[0.04], 8, 0.20) and close(r[0.03], 11, 0.25) and close(r[0.07], 3, 0.25)
    record(5, "distinguishability", ok and mono,
           f"{r[0.03]:.2f}@0.03 {r[0.04]:.2f}@0.04 {r[0.07]:.2f}@0.07, monotone={mono}")


def test_06_cc_read():
    t = cc_current_table(ArrayConfig(arch="CC"))
    ratio = cc_ratios(t)["LRS11/HRS00"]
    order = (t["I_LRS11"] < t["I_LRS01"] and t["I_LRS01"] == t["I_LRS10"]
             and t["I_HRS00"] > t["I_HRS01"] and t["I_HRS01"] == t["I_HRS10"])
    record(6, "CC read", close(ratio, 3.0, 0.30) and order,
           f"LRS11/HRS00={ratio:.3f}, orderings exact={order}")


def test_07_area():
    hd = cell_area("HD", 0.04)
    targets = {"HD": 4.7, "CC": 2.5, "TALL": 1.87, "WIDE": 1.53}
    ratios = {a: SRAM_AREA / cell_area(a, 0.04) for a in ARCHS}
    r03, r07 = SRAM_AREA / cell_area("HD", 0.03), SRAM_AREA / cell_area("HD", 0.07)
    ok = (hd == 162.0 and all(close(ratios[a], targets[a], 0.10) for a in ARCHS)
          and close(r03, 4.0, 0.15) and close(r07, 7.0, 0.15))
    record(7, "area", ok, f"HD={hd:g} lambda^2, ratios "
           + " ".join(f"{a}={ratios[a]:.3f}" for a in ARCHS)
           + f", HD span {r03:.2f}..{r07:.2f}")


def test_08_hd_breakdown():
    w = reports(0.04)["HD"].write_energy
    s = {k: w.share(k) for k in ("c_pe_charging", "metal_lines", "p_switching")}
    ok = (abs(s["c_pe_charging"] - 0.78) <= 0.08 and abs(s["metal_lines"] - 0.12) <= 0.05
          and abs(s["p_switching"] - 0.10) <= 0.05)
    record(8, "HD write breakdown", ok,
           f"C_PE {s['c_pe_charging']:.1%} metal {s['metal_lines']:.1%} "
           f"switching {s['p_switching']:.1%}")


def test_09_orderings():
    r = reports(0.04)
    we = {a: r[a].write_energy.total for a in ARCHS}
    wl = {a: r[a].write_latency.total for a in ARCHS}
    re_ = {a: r[a].read_energy.total for a in ARCHS}
    rl = {a: r[a].read_latency.total for a in ARCHS}
    checks = {
        "WE HD>TALL>WIDE>CC": we["HD"] > we["TALL"] > we["WIDE"] > we["CC"],
        "WL WIDE<TALL<CC<HD": wl["WIDE"] < wl["TALL"] < wl["CC"] < wl["HD"],
        "RE CC min": all(re_["CC"] < re_[a] for a in ARCHS if a != "CC"),
        "RL CC<HD<TALL<WIDE": rl["CC"] < rl["HD"] < rl["TALL"] < rl["WIDE"],
    }
    record(9, "orderings", all(checks.values()),
           ", ".join(f"{k}={v}" for k, v in checks.items()))


def test_10_kappa_trends():
    ks = (0.03, 0.04, 0.07)
    reps = {k: reports(k) for k in ks}
    bad = []
    worst_var = 0.0
    for a in ARCHS:
        for m in ("write_energy", "write_latency", "read_latency"):
            v = [getattr(reps[k][a], m).total for k in ks]
            if not all(x > y for x, y in zip(v, v[1:])):
                bad.append(f"{a}.{m}")
        re_ = [reps[k][a].read_energy.total for k in ks]
        var = max(re_) / min(re_) - 1.0
        worst_var = max(worst_var, var)
        if var >= 0.05:
            bad.append(f"{a}.read_energy var {var:.1%}")
    record(10, "kappa trends", not bad,
           f"violations={bad or 'none'}, worst read-energy variation {worst_var:.1%}")


def test_11_sram_relative():
    cfg = ArrayConfig()
    s = SramBaseline()
    sw, sr = sram_energy("write", s, cfg).total, sram_energy("read", s, cfg).total
    w_t = {"HD": 48, "TALL": 56, "WIDE": 61, "CC": 65}
    r_t = {"TALL": 74, "WIDE": 77, "HD": 85, "CC": 87}
    r = reports(0.04)
    parts, worst = [], 0.0
    for a in ARCHS:
        wr = 100 * (1 - r[a].write_energy.total / sw)
        rr = 100 * (1 - r[a].read_energy.total / sr)
        worst = max(worst, abs(wr - w_t[a]), abs(rr - r_t[a]))
        parts.append(f"{a} W{wr:.1f}/{w_t[a]} R{rr:.1f}/{r_t[a]}")
    record(11, "SRAM-relative energy (calibration-sensitive)", worst <= 10.0,
           "; ".join(parts) + f"; worst miss {worst:.1f} pts")


@pytest.mark.slow
def test_12_property_suites():
    rng = np.random.default_rng(2024)
    mism = flips = 0
    t0 = time.perf_counter()
    for k in (0.03, 0.04, 0.07):
        for a in ARCHS:
            cfg = ArrayConfig(arch=a, n_r=64, n_c=256).with_kappa(k)
            arr = PeFetArray(cfg)
            for _ in range(100):
                addr = (int(rng.integers(cfg.n_r)), int(rng.integers(cfg.n_words)))
                d = rng.integers(0, 2, cfg.n_w)
                before = arr.bits()
                arr.write(addr, d)
                after = arr.bits()
                lo = addr[1] * cfg.n_w
                keep = np.ones(after.shape, bool)
                keep[addr[0], lo:lo + cfg.n_w] = False
                flips += int(np.count_nonzero(before[keep] != after[keep]))
                mism += int(np.count_nonzero(arr.read(addr).bits != d))
                flips += int(np.count_nonzero(arr.bits() != after))
    t_rt = time.perf_counter() - t0

    worst = 0.0
    for a in ARCHS:
        cfg = ArrayConfig(arch=a, n_r=8, n_c=8, n_w=4)
        st = np.where(rng.integers(0, 2, (8, 8)) > 0, cfg.device.p_s, -cfg.device.p_s)
        x, y = PeFetArray(cfg, st), PeFetArray(cfg, st, mode="cell")
        for _ in range(4):
            addr = (int(rng.integers(8)), int(rng.integers(cfg.n_words)))
            d = rng.integers(0, 2, 4)
            ex = operation_energy(x.write(addr, d)).total
            ey = operation_energy(y.write(addr, d)).total
            worst = max(worst, abs(ex / ey - 1.0))
            worst = max(worst, abs(operation_energy(x.read(addr).log).total
                                   / operation_energy(y.read(addr).log).total - 1.0))
            if not np.array_equal(x.state, y.state):
                worst = np.inf

    lp = fe.LandauParams()
    ps = fe.spontaneous_polarization(lp)
    up = fe.simulate_switching(-ps, fe.square_pulse(0.7, 2e-9), 600e-9, lp)
    dn = fe.simulate_switching(ps, fe.square_pulse(-0.7, 2e-9), 600e-9, lp)
    odd = abs(up.final_p + dn.final_p) <= 1e-9 * ps and abs(up.switch_time / dn.switch_time - 1) < 1e-9
    coarse = fe.simulate_switching(-ps, fe.square_pulse(0.7, 2e-9), 600e-9, lp, rtol=1e-6)
    fine = fe.simulate_switching(-ps, fe.square_pulse(0.7, 2e-9), 600e-9, lp, rtol=1e-10)
    refine = abs(coarse.switch_time / fine.switch_time - 1) < 1e-3

    ok = mism == 0 and flips == 0 and worst <= 1e-9 and odd and refine
    record(12, "property suites", ok,
           f"roundtrip 1200 words: {mism} mismatches, {flips} flips ({t_rt:.0f} s); "
           f"class vs cell energy {worst:.1e}; LK odd={odd} refine={refine}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
