"""Conventional DTC: hysteresis comparators and the six-sector switching table."""
from __future__ import annotations

from dataclasses import dataclass, replace

from ._jit import njit
from .plant import SwitchState, VECTORS


@dataclass(frozen=True)
class HysteresisState:
    flux_out: int = 1
    torque_out: int = 0
    flux_band: float = 0.01
    torque_band: float = 0.25

    def __post_init__(self):
        if not (self.flux_band > 0 and self.torque_band > 0):
            raise ValueError("hysteresis bands must be > 0")
        if self.flux_out not in (0, 1) or self.torque_out not in (-1, 0, 1):
            raise ValueError("comparator outputs out of range")


@njit
def flux_comparator(err, band, prev):
    if err > band:
        return 1
    if err < -band:
        return 0
    return prev


@njit
def torque_comparator(err, band, prev):
    # three-level: saturate outside the band, drop to 0 once the error
    # changes sign, hold otherwise
    if err > band:
        return 1
    if err < -band:
        return -1
    if prev == 1 and err <= 0.0:
        return 0
    if prev == -1 and err >= 0.0:
        return 0
    return prev


@njit
def select_vector_index(flux_out, torque_out, sector, prev_index):
    """Index 0..7 of the basic vector chosen by the classical table.

    Returns -1 for an invalid sector.
    """
    if sector < 1 or sector > 6:
        return -1
    if torque_out == 0:
        ones = VECTORS[prev_index, 0] + VECTORS[prev_index, 1] + VECTORS[prev_index, 2]
        return 7 if ones >= 2 else 0
    if flux_out == 1:
        shift = 1 if torque_out > 0 else -1
    else:
        shift = 2 if torque_out > 0 else -2
    return (sector - 1 + shift) % 6 + 1


def flux_hysteresis(err: float, st: HysteresisState) -> int:
    return int(flux_comparator(float(err), st.flux_band, st.flux_out))


def torque_hysteresis(err: float, st: HysteresisState) -> int:
    return int(torque_comparator(float(err), st.torque_band, st.torque_out))


def update_hysteresis(st: HysteresisState, flux_err: float, torque_err: float) -> HysteresisState:
    return replace(st, flux_out=flux_hysteresis(flux_err, st),
                   torque_out=torque_hysteresis(torque_err, st))


def select_vector(flux_out: int, torque_out: int, sector: int,
                  prev: SwitchState | None = None) -> SwitchState:
    if flux_out not in (0, 1) or torque_out not in (-1, 0, 1):
        raise ValueError("invalid comparator outputs")
    if not 1 <= sector <= 6:
        raise ValueError(f"sector must be in 1..6, got {sector}")
    prev_index = 0 if prev is None else prev.index
    return SwitchState.from_index(int(select_vector_index(flux_out, torque_out, sector, prev_index)))


def switching_table() -> dict[tuple[int, int, int], int]:
    """The full (sector, flux_out, torque_out) -> vector-index mapping, null rows from V0."""
    return {(k, f, t): int(select_vector_index(f, t, k, 0))
            for k in range(1, 7) for f in (0, 1) for t in (-1, 0, 1)}

