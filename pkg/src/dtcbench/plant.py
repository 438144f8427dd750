"""Induction machine, ideal two-level inverter and frame transforms.

The machine is modelled in the stationary alpha-beta frame with stator and
rotor flux linkages as electrical states. Scalar kernels are compiled with
numba; the dataclasses below are the Python-facing surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, astuple

import numpy as np

from ._jit import njit

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi

# layout of the packed parameter vector handed to kernels
RS, RR, LLS, LLR, LM, JM, FV, PP, VDC = range(9)
N_PARAMS = 9


@dataclass(frozen=True)
class MachineParams:
    """Electrical and mechanical parameters of the drive.

    Defaults are a common 4 kW, 400 V, 50 Hz reference machine. ``Lls`` is
    the 0.0058 H stator inductance of the benchmark table.
    """

    Rs: float = 1.405
    Rr: float = 1.395
    Lls: float = 0.0058
    Llr: float = 0.005839
    Lm: float = 0.1722
    J: float = 0.0131
    F: float = 0.002985
    p: int = 2
    Vdc: float = 400.0

    def __post_init__(self):
        for name in ("Rs", "Rr", "Lls", "Llr", "Lm", "J"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not (math.isfinite(self.F) and self.F >= 0):
            raise ValueError(f"F must be >= 0, got {self.F}")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be an integer >= 1, got {self.p}")
        if not (math.isfinite(self.Vdc) and self.Vdc >= 0):
            raise ValueError(f"Vdc must be >= 0, got {self.Vdc}")
        if self.Ls * self.Lr - self.Lm**2 <= 0:
            raise ValueError("leakage coefficient must be positive")

    @property
    def Ls(self) -> float:
        return self.Lls + self.Lm

    @property
    def Lr(self) -> float:
        return self.Llr + self.Lm

    @property
    def sigma(self) -> float:
        return 1.0 - self.Lm**2 / (self.Ls * self.Lr)

    @property
    def rated_torque(self) -> float:
        # 4 kW at 1500 rpm
        return 4000.0 / (1500.0 * TWO_PI / 60.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.Rs, self.Rr, self.Lls, self.Llr, self.Lm,
                         self.J, self.F, float(self.p), self.Vdc], dtype=np.float64)


@dataclass(frozen=True)
class MachineState:
    psi_s_alpha: float = 0.0
    psi_s_beta: float = 0.0
    psi_r_alpha: float = 0.0
    psi_r_beta: float = 0.0
    omega_m: float = 0.0
    theta_m: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def from_array(cls, x) -> "MachineState":
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class SwitchState:
    sa: int
    sb: int
    sc: int

    def __post_init__(self):
        for s in (self.sa, self.sb, self.sc):
            if s not in (0, 1):
                raise ValueError("leg states must be 0 or 1")

    @property
    def index(self) -> int:
        """Basic vector number: 0 and 7 are null, 1..6 counter-clockwise from alpha."""
        return int(SWITCH_INDEX[self.sa, self.sb, self.sc])

    @classmethod
    def from_index(cls, k: int) -> "SwitchState":
        return cls(*(int(v) for v in VECTORS[k]))

    def __iter__(self):
        return iter((self.sa, self.sb, self.sc))


# V0..V7; V1..V6 sit at 0, 60, ..., 300 degrees
VECTORS = np.array([
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 1, 1],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
], dtype=np.int64)

SWITCH_INDEX = np.zeros((2, 2, 2), dtype=np.int64)
for _k, (_a, _b, _c) in enumerate(VECTORS):
    SWITCH_INDEX[_a, _b, _c] = _k


@njit
def abc_to_alphabeta(xa, xb, xc):
    """Amplitude-invariant Clarke transform."""
    x_alpha = (2.0 / 3.0) * (xa - 0.5 * xb - 0.5 * xc)
    x_beta = (xb - xc) / SQRT3
    return x_alpha, x_beta


@njit
def alphabeta_to_abc(x_alpha, x_beta):
    xa = x_alpha
    xb = -0.5 * x_alpha + 0.5 * SQRT3 * x_beta
    xc = -0.5 * x_alpha - 0.5 * SQRT3 * x_beta
    return xa, xb, xc


@njit
def legs_to_voltage(sa, sb, sc, vdc):
    van = vdc * (2.0 * sa - sb - sc) / 3.0
    vbn = vdc * (2.0 * sb - sa - sc) / 3.0
    vcn = vdc * (2.0 * sc - sa - sb) / 3.0
    return abc_to_alphabeta(van, vbn, vcn)


def switch_to_voltage(s, vdc: float) -> tuple[float, float]:
    """alpha-beta voltage produced by inverter leg states ``s`` on a ``vdc`` bus."""
    if vdc < 0:
        raise ValueError("Vdc must be >= 0")
    sa, sb, sc = s
    return legs_to_voltage(float(sa), float(sb), float(sc), float(vdc))


@njit
def _derivs(psa, psb, pra, prb, wm, va, vb, tl, prm):
    rs = prm[RS]
    rr = prm[RR]
    lm = prm[LM]
    ls = prm[LLS] + lm
    lr = prm[LLR] + lm
    det = ls * lr - lm * lm
    isa = (lr * psa - lm * pra) / det
    isb = (lr * psb - lm * prb) / det
    ira = (ls * pra - lm * psa) / det
    irb = (ls * prb - lm * psb) / det
    we = prm[PP] * wm
    te = 1.5 * prm[PP] * (psa * isb - psb * isa)
    return (va - rs * isa,
            vb - rs * isb,
            -rr * ira - we * prb,
            -rr * irb + we * pra,
            (te - tl - prm[FV] * wm) / prm[JM],
            wm)


@njit
def stator_currents(x, prm):
    lm = prm[LM]
    ls = prm[LLS] + lm
    lr = prm[LLR] + lm
    det = ls * lr - lm * lm
    return (lr * x[0] - lm * x[2]) / det, (lr * x[1] - lm * x[3]) / det


@njit
def rotor_currents(x, prm):
    lm = prm[LM]
    ls = prm[LLS] + lm
    lr = prm[LLR] + lm
    det = ls * lr - lm * lm
    return (ls * x[2] - lm * x[0]) / det, (ls * x[3] - lm * x[1]) / det


@njit
def plant_torque(x, prm):
    isa, isb = stator_currents(x, prm)
    return 1.5 * prm[PP] * (x[0] * isb - x[1] * isa)


@njit
def rk4_inplace(x, va, vb, tl, h, prm):
    """Advance the 6-element state ``x`` by one RK4 step of length ``h``."""
    a0, a1, a2, a3, a4, a5 = x[0], x[1], x[2], x[3], x[4], x[5]
    k1 = _derivs(a0, a1, a2, a3, a4, va, vb, tl, prm)
    hh = 0.5 * h
    k2 = _derivs(a0 + hh * k1[0], a1 + hh * k1[1], a2 + hh * k1[2],
                 a3 + hh * k1[3], a4 + hh * k1[4], va, vb, tl, prm)
    k3 = _derivs(a0 + hh * k2[0], a1 + hh * k2[1], a2 + hh * k2[2],
                 a3 + hh * k2[3], a4 + hh * k2[4], va, vb, tl, prm)
    k4 = _derivs(a0 + h * k3[0], a1 + h * k3[1], a2 + h * k3[2],
                 a3 + h * k3[3], a4 + h * k3[4], va, vb, tl, prm)
    s = h / 6.0
    x[0] = a0 + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    x[1] = a1 + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    x[2] = a2 + s * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    x[3] = a3 + s * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    x[4] = a4 + s * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])
    th = a5 + s * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5])
    th = th % TWO_PI
    if th < 0.0:
        th += TWO_PI
    x[5] = th


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("non-finite input to machine model")


def machine_derivatives(st: MachineState, v_alpha: float, v_beta: float,
                        t_load: float, prm: MachineParams) -> MachineState:
    """Time derivative of every state field, returned as a MachineState."""
    x = st.as_array()
    _check_finite(x, v_alpha, v_beta, t_load)
    d = _derivs(x[0], x[1], x[2], x[3], x[4], float(v_alpha), float(v_beta),
                float(t_load), prm.as_array())
    return MachineState(*(float(v) for v in d))


def step_machine(st: MachineState, v_ab, t_load: float, dt: float,
                 prm: MachineParams) -> MachineState:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    x = st.as_array()
    _check_finite(x, v_ab, t_load)
    rk4_inplace(x, float(v_ab[0]), float(v_ab[1]), float(t_load), float(dt), prm.as_array())
    _check_finite(x)
    return MachineState.from_array(x)


def currents(st: MachineState, prm: MachineParams) -> tuple[float, float]:
    """Stator alpha-beta currents of a state."""
    return stator_currents(st.as_array(), prm.as_array())


def electromagnetic_torque(st: MachineState, prm: MachineParams) -> float:
    return float(plant_torque(st.as_array(), prm.as_array()))
