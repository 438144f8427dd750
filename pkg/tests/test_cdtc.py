import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dtcbench.cdtc import (
    HysteresisState, flux_hysteresis, select_vector, switching_table, torque_hysteresis,
    update_hysteresis,
)
from dtcbench.plant import SwitchState, VECTORS, switch_to_voltage


def test_flux_comparator_examples():
    h = HysteresisState(flux_band=0.01)
    assert flux_hysteresis(0.02, h) == 1
    assert flux_hysteresis(-0.02, h) == 0
    assert flux_hysteresis(0.005, HysteresisState(flux_out=1, flux_band=0.01)) == 1
    assert flux_hysteresis(0.005, HysteresisState(flux_out=0, flux_band=0.01)) == 0


def test_torque_comparator_examples():
    assert torque_hysteresis(1.0, HysteresisState(torque_band=0.25)) == 1
    assert torque_hysteresis(-0.05, HysteresisState(torque_out=1, torque_band=0.25)) == 0
    assert torque_hysteresis(-0.3, HysteresisState(torque_out=0, torque_band=0.25)) == -1
    # still inside the band on the saturated side: hold
    assert torque_hysteresis(0.1, HysteresisState(torque_out=1, torque_band=0.25)) == 1


def test_bands_must_be_positive():
    with pytest.raises(ValueError):
        HysteresisState(flux_band=0.0)


@given(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=200))
def test_comparators_switch_only_at_thresholds(errs):
    h = HysteresisState(flux_band=0.1, torque_band=0.25)
    for e in errs:
        nxt = update_hysteresis(h, e * 0.4, e)
        if nxt.flux_out != h.flux_out:
            assert abs(e * 0.4) > h.flux_band
        if nxt.torque_out != h.torque_out:
            if nxt.torque_out != 0:
                assert abs(e) > h.torque_band
            else:
                # release to zero only once the error has crossed zero
                assert e * h.torque_out <= 0
        h = nxt


def test_switching_table_examples():
    assert select_vector(1, 1, 1) == SwitchState(1, 1, 0)
    assert select_vector(0, -1, 1) == SwitchState(0, 0, 1)
    assert select_vector(1, 0, 3, prev=SwitchState(1, 1, 0)) == SwitchState(1, 1, 1)
    assert select_vector(0, 0, 3, prev=SwitchState(1, 0, 0)) == SwitchState(0, 0, 0)


def test_invalid_sector_rejected():
    with pytest.raises(ValueError):
        select_vector(1, 1, 0)
    with pytest.raises(ValueError):
        select_vector(1, 1, 7)


def _geometric_choice(sector, flux_out, torque_out, dt=50e-6):
    """Brute force: the active vectors whose one-step flux change has the wanted signs."""
    phi = math.radians((sector - 1) * 60.0)
    lam = np.array([0.8 * math.cos(phi), 0.8 * math.sin(phi)])
    hits = []
    for k in range(1, 7):
        dl = np.array(switch_to_voltage(VECTORS[k], 400.0)) * dt
        d_mag = np.linalg.norm(lam + dl) - np.linalg.norm(lam)
        tangential = lam[0] * dl[1] - lam[1] * dl[0]
        if abs(tangential) < 1e-12:
            continue
        if np.sign(d_mag) == (1 if flux_out else -1) and np.sign(tangential) == torque_out:
            hits.append(k)
    return hits


def test_table_agrees_with_geometric_oracle_on_all_36_cells():
    table = switching_table()
    assert len(table) == 36
    for (sector, f, t), k in table.items():
        if t == 0:
            assert k in (0, 7)
        else:
            assert _geometric_choice(sector, f, t) == [k]


def test_active_entries_never_use_sector_axis_vectors():
    table = switching_table()
    for (sector, f, t), k in table.items():
        if t != 0:
            assert k not in (sector, (sector + 2) % 6 + 1)
