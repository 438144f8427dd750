"""Voltage-model stator flux and torque observer."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit

TWO_PI = 2.0 * math.pi
UNDEFINED_SECTOR = 0
# lower edges of sectors 2..6 and the wrap back into sector 1
SECTOR_EDGES = np.array([math.radians(30.0 + 60.0 * k) for k in range(6)])


@njit
def flux_polar_kernel(la, lb):
    mag = math.hypot(la, lb)
    if mag == 0.0:
        return mag, math.nan, 0
    th = math.atan2(lb, la)
    if th < 0.0:
        th += TWO_PI
    if th >= TWO_PI:
        th -= TWO_PI
    return mag, th, sector_of(th)


@njit
def sector_of(theta):
    """Sector 1..6 of an angle in [0, 2pi); sector 1 is [-30, 30) degrees."""
    k = 1
    for b in SECTOR_EDGES:
        if theta >= b:
            k += 1
    return 1 if k == 7 else k


@njit
def torque_kernel(la, lb, ia, ib, p):
    return 1.5 * p * (la * ib - lb * ia)


@dataclass(frozen=True)
class FluxEstimate:
    """Observer output. ``theta`` is NaN and ``sector`` 0 while the flux is zero."""

    lambda_alpha: float = 0.0
    lambda_beta: float = 0.0
    lambda_mag: float = 0.0
    theta: float = math.nan
    sector: int = UNDEFINED_SECTOR
    torque: float = 0.0

    @classmethod
    def from_components(cls, la: float, lb: float, torque: float = 0.0) -> "FluxEstimate":
        mag, th, sec = flux_polar_kernel(la, lb)
        return cls(la, lb, mag, th, sec, torque)


def flux_polar(lambda_alpha: float, lambda_beta: float) -> tuple[float, float, int]:
    """Magnitude, angle in [0, 2pi) and sector of a flux vector.

    For a zero vector the angle is NaN and the sector is ``UNDEFINED_SECTOR``.
    """
    mag, th, sec = flux_polar_kernel(float(lambda_alpha), float(lambda_beta))
    return float(mag), float(th), int(sec)


def estimate_torque(lambda_alpha, lambda_beta, i_alpha, i_beta, p) -> float:
    return float(torque_kernel(lambda_alpha, lambda_beta, i_alpha, i_beta, float(p)))


def update_flux(est: FluxEstimate, v_alpha: float, v_beta: float, i_alpha: float,
                i_beta: float, Rs: float, dt: float, p: int = 2) -> FluxEstimate:
    """One explicit-Euler step of the voltage model.

    The torque field is refreshed from the new flux and the supplied currents.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    vals = (v_alpha, v_beta, i_alpha, i_beta, Rs)
    if not all(math.isfinite(v) for v in vals):
        raise FloatingPointError("non-finite input to flux estimator")
    la = est.lambda_alpha + (v_alpha - Rs * i_alpha) * dt
    lb = est.lambda_beta + (v_beta - Rs * i_beta) * dt
    return FluxEstimate.from_components(la, lb, estimate_torque(la, lb, i_alpha, i_beta, p))
