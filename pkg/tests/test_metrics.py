import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtcbench import ScenarioConfig, TimeSeriesLog
from dtcbench.engine import COLUMNS, FLSVM
from dtcbench.metrics import NOT_SETTLED, compare, rise_time, ripple_stats, settle_time

DT = 50e-6
T = np.arange(20001) * DT


def synthetic(torque, speed=None, cfg=None):
    data = np.zeros((T.size, len(COLUMNS)))
    data[:, COLUMNS.index("t")] = T
    data[:, COLUMNS.index("Te_plant")] = torque
    data[:, COLUMNS.index("omega_m")] = 157.08 if speed is None else speed
    return TimeSeriesLog(data, cfg or ScenarioConfig())


def test_constant_signal():
    s = ripple_stats(synthetic(np.full(T.size, 3.5)))
    assert (s.mean, s.rms_dev, s.p2p) == (3.5, 0.0, 0.0)


def test_square_wave():
    sq = np.where((np.arange(T.size) // 10) % 2 == 0, 1.0, -1.0)
    s = ripple_stats(synthetic(sq), window=(0.7, 0.9 - DT))
    assert s.mean == pytest.approx(0.0, abs=1e-12)
    assert s.rms_dev == pytest.approx(1.0)
    assert s.p2p == 2.0


def test_sine_wave():
    a = 2.5
    # 50 Hz over 0.7..0.9 s spans ten whole periods
    s = ripple_stats(synthetic(a * np.sin(2 * math.pi * 50 * T)), window=(0.7, 0.9 - DT))
    assert s.rms_dev == pytest.approx(a / math.sqrt(2), rel=1e-9)
    assert s.p2p == pytest.approx(2 * a, rel=1e-6)


def test_window_validation():
    log = synthetic(np.zeros(T.size))
    with pytest.raises(ValueError):
        ripple_stats(log, window=(0.5, 1.5))
    with pytest.raises(ValueError):
        ripple_stats(log, window=(0.5, 0.501))
    with pytest.raises(ValueError):
        ripple_stats(log, signal="current")


# |c| kept away from the range where squaring underflows
scales = st.one_of(st.just(0.0), st.floats(1e-100, 50), st.floats(-50, -1e-100))


@given(st.floats(-1e3, 1e3, allow_nan=False), scales)
def test_shift_invariance_and_scale_covariance(shift, c):
    y = np.sin(T * 377.0) + 0.3 * np.cos(T * 2100.0)
    base = ripple_stats(synthetic(y))
    moved = ripple_stats(synthetic(y + shift))
    assert moved.rms_dev == pytest.approx(base.rms_dev, rel=1e-9, abs=1e-9 * (1 + abs(shift)))
    assert moved.p2p == pytest.approx(base.p2p, rel=1e-9, abs=1e-9 * (1 + abs(shift)))
    assert moved.mean == pytest.approx(base.mean + shift, abs=1e-9 * (1 + abs(shift)))
    scaled = ripple_stats(synthetic(c * y))
    assert scaled.rms_dev == pytest.approx(abs(c) * base.rms_dev, rel=1e-9, abs=1e-300)
    assert scaled.p2p == pytest.approx(abs(c) * base.p2p, rel=1e-9, abs=1e-300)


def _pair(rms_a, rms_b):
    sq = np.where(np.arange(T.size) % 2 == 0, 1.0, -1.0)
    a = synthetic(5.0 + rms_a * sq)
    b = synthetic(5.0 + rms_b * sq, cfg=ScenarioConfig(controller=FLSVM))
    return compare(a, b)


def test_compare_examples():
    assert _pair(2.0, 1.2).reduction == pytest.approx(0.40)
    assert _pair(2.0, 2.5).reduction == pytest.approx(-0.25)
    assert _pair(2.0, 1.2).reduction_sampled == pytest.approx(0.40)


def test_reduction_counts_ripple_between_samples():
    a = synthetic(5.0 + np.where(np.arange(T.size) % 2 == 0, 1.0, -1.0))
    data = a.data.copy()
    data[:, COLUMNS.index("Te_plant")] = 5.0
    data[:, COLUMNS.index("Te_intra_rms")] = 0.5
    b = TimeSeriesLog(data, ScenarioConfig(controller=FLSVM))
    rep = compare(a, b)
    assert rep.reduction_sampled == 1.0
    assert rep.reduction == pytest.approx(0.5)


def test_compare_identical_is_all_zero():
    log = synthetic(5.0 + np.sin(T * 1000.0))
    rep = compare(log, log)
    assert rep.reduction == 0.0
    assert rep.rise_delta == 0.0 and rep.speed_fluct_delta == 0.0
    assert rep.torque_a == rep.torque_b


def test_compare_rejects_different_scenarios():
    a = synthetic(np.zeros(T.size))
    b = synthetic(np.zeros(T.size), cfg=ScenarioConfig(flux_ref=0.7))
    with pytest.raises(ValueError):
        compare(a, b)


def test_report_renders_and_serialises():
    rep = _pair(2.0, 1.2)
    assert "ripple reduction" in rep.render()
    assert len(rep.csv_header().split(",")) == len(rep.csv_row().split(","))


def test_rise_time_ideal_ramp():
    t_star, target = 0.08, 100.0
    y = np.minimum(T / t_star, 1.0) * target
    # first sample inside the 2% band is where the ramp crosses 98
    assert settle_time(T, y, target) == pytest.approx(0.98 * t_star, abs=DT)
    assert rise_time(synthetic(0, y), target) == pytest.approx(0.98 * t_star, abs=DT)


def test_rise_time_touch_then_leave():
    target = 100.0
    y = np.full(T.size, 50.0)
    y[(T >= 0.03) & (T < 0.04)] = 100.0     # 10 ms visit, shorter than the hold
    y[T >= 0.1] = 100.0
    assert settle_time(T, y, target) == pytest.approx(0.1, abs=DT / 2)


def test_rise_time_never_settles():
    assert settle_time(T, np.zeros(T.size), 10.0) == NOT_SETTLED
    with pytest.raises(ValueError):
        settle_time(T, np.zeros(T.size), 0.0)


def test_config_default_target():
    cfg = dataclasses.replace(ScenarioConfig(), speed_ref=((0.0, 50.0),))
    y = np.where(T >= 0.2, 50.0, 0.0)
    assert rise_time(synthetic(0, y, cfg)) == pytest.approx(0.2, abs=DT / 2)
