import csv

import numpy as np
import pytest

from pefetsim import metrics as mx
from pefetsim.arrays import ArrayConfig, PeFetArray

CFG = ArrayConfig()


@pytest.fixture(scope="module")
def reports():
    return {a: mx.evaluate(ArrayConfig(arch=a)) for a in ("HD", "TALL", "WIDE", "CC")}


def test_components_sum_to_total(reports):
    for rep in reports.values():
        for er in (rep.write_energy, rep.read_energy):
            assert sum(er.components.values()) == pytest.approx(er.total, rel=1e-12)
        for lr in (rep.write_latency, rep.read_latency):
            assert sum(lr.components.values()) == pytest.approx(lr.total, rel=1e-12)


def test_hd_breakdown(reports):
    w = reports["HD"].write_energy
    assert w.share("c_pe_charging") == pytest.approx(0.78, abs=0.08)
    assert w.share("metal_lines") == pytest.approx(0.12, abs=0.05)
    assert w.share("p_switching") == pytest.approx(0.10, abs=0.05)


def test_pefet_arrays_beat_sram_energy(reports):
    s = mx.SramBaseline()
    sw = mx.sram_energy("write", s, CFG).total
    sr = mx.sram_energy("read", s, CFG).total
    for rep in reports.values():
        assert rep.write_energy.total < sw
        assert rep.read_energy.total < sr


def test_sram_write_costs_more_than_read():
    s = mx.SramBaseline()
    assert mx.sram_energy("write", s, CFG).total > mx.sram_energy("read", s, CFG).total
    assert s.leakage_energy(CFG.rules, CFG.wire, CFG.device.fet) > 0


def test_sram_validation():
    with pytest.raises(ValueError):
        mx.SramBaseline(utilization=1.5)
    with pytest.raises(ValueError):
        mx.SramBaseline(dv_read=0.0)


def test_idle_sram_leakage_unbounded():
    s = mx.SramBaseline(utilization=0.0)
    assert s.leakage_energy(CFG.rules, CFG.wire, CFG.device.fet) == float("inf")


def test_canonical_word_alternates():
    a, b = mx.canonical_word(8, 0), mx.canonical_word(8, 1)
    assert np.all(a != b)


def test_latency_attribution():
    arr = PeFetArray(ArrayConfig(arch="WIDE", n_r=8, n_c=64))
    lr = mx.operation_latency(arr.write((0, 0), np.ones(64, int)))
    assert set(lr.components) == set(mx.LATENCY_COMPONENTS)
    assert lr.total > 0


def test_comparison_and_csv(tmp_path, reports):
    table = mx.compare_to_sram(reports.values(), mx.SramBaseline(), CFG)
    row = table.get("HD", "area")
    assert row.ratio == pytest.approx(162 / 761.4)
    assert row.improvement == pytest.approx(1 - row.ratio)
    assert "calibration-sensitive" in table.text()
    table.to_csv(tmp_path / "t.csv")
    mx.write_report_csv(tmp_path / "r.csv", mx.report_rows(reports["CC"]))
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == mx.REPORT_COLUMNS
    assert any(r[2] == "read_energy" and r[6] == "calibration-sensitive" for r in rows[1:])
    with pytest.raises(KeyError):
        table.get("HD", "nope")
