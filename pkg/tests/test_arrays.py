import numpy as np
import pytest

from pefetsim import arrays as ar
from pefetsim.errors import DisturbViolation, UnsupportedArch
from pefetsim.metrics import evaluate, operation_energy
from pefetsim.pefet import PeFetConfig

ARCHS = ("HD", "TALL", "WIDE", "CC")


# -----------------------------------------------------------------------------
# configuration
# -----------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(UnsupportedArch):
        ar.ArrayConfig(arch="HD", segmented=True)
    with pytest.raises(UnsupportedArch):
        ar.ArrayConfig(arch="XL")
    with pytest.raises(ValueError):
        ar.ArrayConfig(n_c=100, n_w=64)
    with pytest.raises(ValueError):
        ar.ArrayConfig(arch="CC", n_c=9, n_w=3)
    assert ar.ArrayConfig(arch="tall").segmented is True
    assert ar.ArrayConfig(arch="hd").segmented is False


def test_address_checks():
    arr = ar.PeFetArray(ar.ArrayConfig(n_r=8, n_c=8, n_w=4))
    with pytest.raises((IndexError, ValueError)):
        arr.write((8, 0), [0, 1, 0, 1])
    with pytest.raises(ValueError):
        arr.write((0, 0), [0, 1, 2, 1])


# -----------------------------------------------------------------------------
# disturb
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("arch", ARCHS)
def test_default_plans_disturb_free(arch):
    cfg = ar.ArrayConfig(arch=arch)
    for bits in (np.zeros(64, int), np.ones(64, int), np.arange(64) % 2):
        assert ar.check_disturb(ar.plan_write(cfg, (0, 0), bits), cfg).passed
    rep = ar.check_disturb(ar.plan_read(cfg, (0, 0)), cfg)
    assert rep.margin >= cfg.device.disturb_margin


def test_overdriven_hd_write_rejected():
    cfg = ar.ArrayConfig(arch="HD", n_r=8, n_c=8, n_w=4, device=PeFetConfig(v_dd=1.4))
    rep = ar.check_disturb(ar.plan_write(cfg, (0, 0), [1, 0, 1, 0]), cfg)
    assert not rep.passed and rep.margin < 0
    with pytest.raises(DisturbViolation):
        ar.PeFetArray(cfg).write((0, 0), [1, 0, 1, 0])


# -----------------------------------------------------------------------------
# cross-coupled read
# -----------------------------------------------------------------------------

def test_cc_current_orderings():
    t = ar.cc_current_table(ar.ArrayConfig(arch="CC"))
    assert t["I_LRS11"] < t["I_LRS01"] == t["I_LRS10"]
    assert t["I_HRS00"] > t["I_HRS01"] == t["I_HRS10"]
    assert ar.cc_ratios(t)["LRS11/HRS00"] == pytest.approx(3.0, rel=0.30)


def test_cc_solution_symmetric():
    cfg = ar.ArrayConfig(arch="CC")
    ps = cfg.device.p_s
    a = ar.solve_cc_read(ps, -ps, cfg)
    b = ar.solve_cc_read(-ps, ps, cfg)
    assert a.i_bl1 == pytest.approx(b.i_bl2, rel=1e-9)
    assert a.v_da == pytest.approx(b.v_db, rel=1e-9)
    assert a.i_bl2 == pytest.approx(b.i_bl1, rel=1e-9)


# -----------------------------------------------------------------------------
# protocols
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("arch", ARCHS)
def test_class_mode_matches_brute_force(arch):
    rng = np.random.default_rng(7)
    cfg = ar.ArrayConfig(arch=arch, n_r=8, n_c=8, n_w=4)
    st = np.where(rng.integers(0, 2, (8, 8)) > 0, cfg.device.p_s, -cfg.device.p_s)
    fast, slow = ar.PeFetArray(cfg, st), ar.PeFetArray(cfg, st, mode="cell")
    for _ in range(3):
        addr = (int(rng.integers(8)), int(rng.integers(cfg.n_words)))
        d = rng.integers(0, 2, 4)
        ea = operation_energy(fast.write(addr, d)).total
        eb = operation_energy(slow.write(addr, d)).total
        assert ea == pytest.approx(eb, rel=1e-9)
        np.testing.assert_array_equal(fast.state, slow.state)
        ra, rb = fast.read(addr), slow.read(addr)
        np.testing.assert_array_equal(ra.bits, rb.bits)
        assert operation_energy(ra.log).total == pytest.approx(operation_energy(rb.log).total,
                                                               rel=1e-9)


@pytest.mark.parametrize("arch", ARCHS)
def test_roundtrip_small(arch):
    rng = np.random.default_rng(11)
    cfg = ar.ArrayConfig(arch=arch, n_r=16, n_c=128)
    arr = ar.PeFetArray(cfg)
    for _ in range(10):
        addr = (int(rng.integers(cfg.n_r)), int(rng.integers(cfg.n_words)))
        d = rng.integers(0, 2, cfg.n_w)
        before = arr.bits()
        arr.write(addr, d)
        after = arr.bits()
        lo = addr[1] * cfg.n_w
        mask = np.ones_like(after, dtype=bool)
        mask[addr[0], lo:lo + cfg.n_w] = False
        np.testing.assert_array_equal(before[mask], after[mask])
        np.testing.assert_array_equal(arr.read(addr).bits, d)
        np.testing.assert_array_equal(arr.bits(), after)


def test_read_is_non_destructive_in_state():
    cfg = ar.ArrayConfig(arch="TALL", n_r=8, n_c=64)
    arr = ar.PeFetArray(cfg)
    arr.write((2, 0), np.arange(64) % 2)
    st = arr.state.copy()
    arr.read((2, 0))
    np.testing.assert_allclose(arr.state, st)


@pytest.mark.parametrize("arch", ("TALL", "WIDE", "CC"))
def test_segmentation_saves_write_energy(arch):
    seg = evaluate(ar.ArrayConfig(arch=arch, segmented=True)).write_energy.total
    flat = evaluate(ar.ArrayConfig(arch=arch, segmented=False)).write_energy.total
    assert seg < flat


def test_snapshot_roundtrip(tmp_path):
    cfg = ar.ArrayConfig(arch="WIDE", n_r=4, n_c=8, n_w=4)
    arr = ar.PeFetArray(cfg)
    arr.write((1, 1), [1, 1, 0, 1])
    arr.snapshot(tmp_path / "s.txt")
    back = ar.PeFetArray.from_snapshot(cfg, tmp_path / "s.txt")
    np.testing.assert_array_equal(back.bits(), arr.bits())


def test_event_log_csv(tmp_path):
    cfg = ar.ArrayConfig(arch="HD", n_r=8, n_c=8, n_w=4)
    log = ar.PeFetArray(cfg).write((0, 0), [1, 0, 1, 0])
    log.to_csv(tmp_path / "ev.csv")
    assert len((tmp_path / "ev.csv").read_text().splitlines()) == len(log.events) + 1


def test_timing_positive_and_write_slower_for_hd():
    hd = ar.design_timing(ar.ArrayConfig(arch="HD"))
    wide = ar.design_timing(ar.ArrayConfig(arch="WIDE"))
    assert all(p.duration > 0 for p in hd.write)
    assert hd.write_latency > wide.write_latency
