import pytest

from pefetsim import layout as lo
from pefetsim.errors import UnsupportedArch


def test_hd_area_exact():
    assert lo.cell_area("HD", 0.04) == pytest.approx(162.0, abs=1e-9)


def test_area_shrinks_with_kappa():
    for a in lo.ARCHS:
        vals = [lo.cell_area(a, k) for k in (0.03, 0.04, 0.05, 0.07)]
        assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_cc_area_is_per_bit():
    r = lo.LayoutRules()
    h, w = r.cell_dims("CC", 0.04)
    assert lo.cell_area("CC", 0.04) == pytest.approx(h * w / 2)


def test_width_fit_reproduces_defaults():
    fitted, resid = lo.fit_width_model(lo.LayoutRules())
    assert fitted.w_contact == pytest.approx(lo.LayoutRules().w_contact, rel=1e-6)
    assert all(abs(r) < 0.15 for r in resid)


def test_norm_arch():
    assert lo.norm_arch(" wide ") == "WIDE"
    with pytest.raises(UnsupportedArch):
        lo.norm_arch("3d")
