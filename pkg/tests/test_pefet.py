import numpy as np
import pytest

from pefetsim import pefet as pf
from pefetsim.errors import ReadDisturbRisk

CFG = pf.PeFetConfig()


def test_distinguishability_monotone_in_kappa():
    ks = [0.03, 0.04, 0.05, 0.06, 0.07]
    r = [pf.device_distinguishability(CFG.with_kappa(k)) for k in ks]
    assert all(a > b for a, b in zip(r, r[1:]))
    assert r[1] == pytest.approx(8.0, rel=0.20)


def test_lrs_above_hrs_and_symmetric_shift():
    b = pf.standard_read_bias(CFG)
    assert pf.read_current(CFG.p_s, b, CFG) > pf.read_current(-CFG.p_s, b, CFG)
    assert pf.delta_eg(CFG.p_s, 0.35, CFG) == pytest.approx(-pf.delta_eg(-CFG.p_s, 0.35, CFG))


def test_read_bias_guard():
    with pytest.raises(ReadDisturbRisk):
        pf.check_read_bias(0.6, CFG)
    with pytest.raises(ReadDisturbRisk):
        pf.PeFetConfig(v_r=0.6)
    with pytest.raises(ValueError):
        pf.PeFetConfig(v_dd=0.5)


def test_write_transient_switches_and_holds():
    ps = CFG.p_s
    w = pf.write_transient(-ps, pf.two_phase_waveform(0.7, 0.0, 3e-9), CFG)
    assert w.p_final == pytest.approx(ps, rel=1e-3)
    assert w.q_switched == pytest.approx(2 * ps, rel=1e-3)
    # a read-level pulse bends P but it relaxes back once the bias is removed
    r = pf.write_transient(-ps, pf.two_phase_waveform(0.35, 0.0, 10e-9), CFG)
    assert r.trace.switch_time is None
    assert r.p_final == pytest.approx(-ps, rel=1e-3)


def test_iv_sweep_columns(tmp_path):
    s = pf.iv_sweep(CFG)
    on = s["v_gs"] > 0
    assert s["i_lrs"][0] == pytest.approx(s["i_hrs"][0])  # no drive, no strain
    assert np.all(s["i_lrs"][on] > s["i_baseline"][on])
    assert np.all(s["i_baseline"][on] > s["i_hrs"][on])
    assert s["v_gs"].max() < CFG.v_c - CFG.disturb_margin
    pf.write_iv_csv(tmp_path / "iv.csv", s)
    head = (tmp_path / "iv.csv").read_text().splitlines()[0]
    assert head.startswith("v_gs")
