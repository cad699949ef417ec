import pytest

from pefetsim import calibrate as cb
from pefetsim.arrays import DEFAULT_R_SENSE, ArrayConfig
from pefetsim.config import load_config
from pefetsim.errors import FitFailure
from pefetsim.tmdfet import FetParams


@pytest.fixture(scope="module")
def card():
    return cb.run_calibration(load_config())


def test_card_reproduces_defaults(card):
    assert card.value("fet", "v_t0") == pytest.approx(FetParams().v_t0, abs=1e-6)
    assert card.value("array", "r_sense") == pytest.approx(DEFAULT_R_SENSE, rel=1e-6)
    assert abs([e for e in card.entries if e.name == "rho"][0].residual) < 1e-4


def test_card_is_deterministic(card):
    assert cb.run_calibration(load_config()).to_text() == card.to_text()


def test_card_text(tmp_path, card):
    card.write(tmp_path / "card.txt")
    text = (tmp_path / "card.txt").read_text()
    assert "[fet]" in text and "r_sense" in text


def test_unreachable_anchor_fails():
    anchors = cb.default_fet_anchors()
    anchors[0] = type(anchors[0])(-0.051, 0.35, 23.0, label="lrs")
    with pytest.raises(FitFailure):
        cb.run_calibration(load_config(), anchors)


def test_r_sense_bracket_failure():
    with pytest.raises(FitFailure):
        cb.fit_r_sense(ArrayConfig(arch="CC"), target=3.0, bracket=(1e4, 2e4))
