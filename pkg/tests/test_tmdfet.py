import math

import numpy as np
import pytest

from pefetsim import tmdfet as tf
from pefetsim.calibrate import default_fet_anchors
from pefetsim.errors import FitFailure

P = tf.FetParams()


def test_swing_not_below_thermal_limit():
    limit = math.log(10) * P.v_th
    for v in (0.0, 0.05, 0.1):
        assert tf.subthreshold_swing(v, 0.7, P) >= limit * (1 - 1e-6)


def test_current_monotone_in_gate_and_drain():
    vg = np.linspace(0, 0.7, 29)
    ig = [tf.drain_current(v, 0.7, 0.0, P) for v in vg]
    assert all(b > a for a, b in zip(ig, ig[1:]))
    vd = np.linspace(0.01, 0.7, 20)
    idd = [tf.drain_current(0.5, v, 0.0, P) for v in vd]
    assert all(b > a for a, b in zip(idd, idd[1:]))
    assert tf.drain_current(0.5, 0.0, 0.0, P) == pytest.approx(0.0, abs=1e-18)


def test_narrower_gap_more_current():
    assert tf.drain_current(0.35, 0.7, -0.051, P) > tf.drain_current(0.35, 0.7, 0.0, P)
    assert tf.threshold_shift(-0.1, 1.0) < 0


def test_reference_ratios():
    i0 = tf.drain_current(0.35, 0.7, 0.0, P)
    assert tf.drain_current(0.35, 0.7, -0.051, P) / i0 == pytest.approx(2.3, rel=0.10)
    assert i0 / tf.drain_current(0.35, 0.7, 0.051, P) == pytest.approx(3.4, rel=0.10)


def test_fit_reproduces_defaults():
    cal = tf.calibrate_fet(default_fet_anchors(), P)
    assert cal.params.v_t0 == pytest.approx(P.v_t0, abs=1e-6)
    for err, anc in zip(cal.rel_errors(), cal.anchors):
        assert abs(err) <= anc.tol


def test_fit_is_deterministic():
    a = tf.calibrate_fet(default_fet_anchors(), P)
    b = tf.calibrate_fet(default_fet_anchors(), P)
    assert a.params == b.params


def test_impossible_anchor_fails():
    anchors = default_fet_anchors()
    anchors[0] = tf.FetAnchor(-0.051, 0.35, 23.0, label="lrs")
    with pytest.raises(FitFailure):
        tf.calibrate_fet(anchors, P)


def test_too_few_anchors():
    with pytest.raises(FitFailure):
        tf.calibrate_fet([tf.FetAnchor(-0.05, 0.35, 2.0)], P)


def test_param_validation():
    with pytest.raises(ValueError):
        tf.FetParams(n_id=0.5)
    with pytest.raises(ValueError):
        tf.FetParams(w=0.0)
