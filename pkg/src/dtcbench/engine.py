"""Closed-loop drive simulation: speed PI, DTC controller, plant sub-stepping, logging."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .cdtc import flux_comparator, torque_comparator, select_vector_index
from .estimator import flux_polar_kernel, torque_kernel
from .flsvm import FuzzyConfig, RuleTable, infer_kernel, dwell_kernel, pattern_kernel, MAX_LINEAR
from .plant import (MachineParams, VECTORS, RS, PP, VDC, legs_to_voltage, rk4_inplace,
                    stator_currents, plant_torque, alphabeta_to_abc)

CDTC = "CDTC"
FLSVM = "FLSVM"
CONTROLLERS = (CDTC, FLSVM)

COLUMNS = ("t", "omega_m", "omega_ref", "Te_est", "Te_plant", "T_ref", "lambda_mag",
           "theta", "sector", "ia", "ib", "ic", "sa", "sb", "sc",
           "delta_theta", "flux_out", "torque_out", "Te_intra_rms",
           "psi_s_alpha", "psi_s_beta")
(C_T, C_W, C_WREF, C_TE, C_TP, C_TREF, C_LAM, C_TH, C_SEC, C_IA, C_IB, C_IC,
 C_SA, C_SB, C_SC, C_DTH, C_FO, C_TO, C_TI, C_PSA, C_PSB) = range(len(COLUMNS))

RPM = 2.0 * math.pi / 60.0


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """One closed-loop experiment.

    Profiles are piecewise constant, given as ``((t0, v0), (t1, v1), ...)``
    with ``t0 == 0``; speeds in rad/s, loads in N*m.
    """

    controller: str = CDTC
    speed_ref: tuple = ((0.0, 1500.0 * RPM),)
    load: tuple = ((0.0, 0.0), (0.5, 5.0))
    flux_ref: float = 0.8
    t_end: float = 1.0
    dt_ctrl: float = 50e-6
    machine: MachineParams = field(default_factory=MachineParams)
    flux_band: float = 0.01
    torque_band: float = 0.25
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    rules: RuleTable = field(default_factory=RuleTable)
    kp: float = 3.0
    ki: float = 50.0
    t_max: float = 27.0
    plant_substeps: int = 5
    flux_build_time: float = 0.01
    svm_magnitude: str = "scaled"

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        if not self.t_end > 0:
            raise ValueError("t_end must be > 0")
        if not self.dt_ctrl > 0:
            raise ValueError("dt_ctrl must be > 0")
        if not self.flux_ref > 0:
            raise ValueError("flux_ref must be > 0")
        if not (self.flux_band > 0 and self.torque_band > 0):
            raise ValueError("hysteresis bands must be > 0")
        if not self.t_max > 0 or self.kp < 0 or self.ki < 0:
            raise ValueError("PI gains must be >= 0 and t_max > 0")
        if int(self.plant_substeps) != self.plant_substeps or self.plant_substeps < 1:
            raise ValueError("plant_substeps must be a positive integer")
        if self.svm_magnitude not in ("scaled", "fixed"):
            raise ValueError("svm_magnitude must be 'scaled' or 'fixed'")
        if self.flux_build_time < 0:
            raise ValueError("flux_build_time must be >= 0")
        for name in ("speed_ref", "load"):
            prof = tuple((float(t), float(v)) for t, v in getattr(self, name))
            if not prof or prof[0][0] != 0.0:
                raise ValueError(f"{name} profile must start at t = 0")
            if any(b[0] <= a[0] for a, b in zip(prof, prof[1:])):
                raise ValueError(f"{name} profile times must be increasing")
            object.__setattr__(self, name, prof)

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.t_end / self.dt_ctrl + 1e-9)) + 1


class TimeSeriesLog:
    """Per-period record of a run, one row per control instant ``k * dt_ctrl``.

    Columns are in ``COLUMNS`` order. For FLSVM runs ``sa``/``sb``/``sc`` hold
    the fraction of the period each leg is high. ``Te_intra_rms`` is the RMS
    deviation of plant torque over the plant sub-steps of the period that
    starts at that row. ``psi_s_*`` are the plant's true stator flux linkages,
    logged for observer checks.
    """

    columns = COLUMNS

    def __init__(self, data: np.ndarray, config: ScenarioConfig):
        self.data = data
        self.config = config

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, C_T]

    def window(self, t_start: float, t_stop: float) -> np.ndarray:
        t = self.t
        return (t >= t_start - 1e-12) & (t <= t_stop + 1e-12)


@njit
def pi_kernel(err, integ, kp, ki, t_max, dt):
    u = kp * err + integ
    if u > t_max:
        out = t_max
        if err <= 0.0:
            integ += ki * err * dt
    elif u < -t_max:
        out = -t_max
        if err >= 0.0:
            integ += ki * err * dt
    else:
        out = u
        integ += ki * err * dt
    return out, integ


def pi_step(speed_err: float, integ: float, Kp: float, Ki: float, T_max: float,
            dt: float) -> tuple[float, float]:
    """Clamped PI with conditional-integration anti-windup.

    Returns ``(T_ref, integ')``. The output uses the integrator value from
    before this step.
    """
    if not dt > 0 or not T_max > 0:
        raise ValueError("dt and T_max must be > 0")
    out, integ = pi_kernel(float(speed_err), float(integ), float(Kp), float(Ki),
                           float(T_max), float(dt))
    return float(out), float(integ)


@njit
def _profile(times, values, t, tol):
    v = values[0]
    for i in range(times.shape[0]):
        if times[i] <= t + tol:
            v = values[i]
    return v


@njit
def simulate_kernel(prm, use_flsvm, t_end_steps, dt, n_sub,
                    w_times, w_vals, l_times, l_vals, flux_ref,
                    kp, ki, t_max, flux_band, torque_band,
                    f_centers, t_centers, f_scale, t_scale, table,
                    build_steps, scaled_mag, x, log):
    """Run the closed loop in place on state ``x``, filling ``log``.

    Returns the index of the first non-finite step, or -1 on success.
    """
    rs = prm[RS]
    p = prm[PP]
    vdc = prm[VDC]
    h_max = dt / n_sub
    tol = 1e-6 * dt

    la = 0.0
    lb = 0.0
    v_prev_a = 0.0
    v_prev_b = 0.0
    i_prev_a = 0.0
    i_prev_b = 0.0
    integ = 0.0
    flux_out = 1
    torque_out = 0
    vec = 0
    building = build_steps > 0
    idx = np.zeros(7, dtype=np.int64)
    dur = np.zeros(7)

    for k in range(t_end_steps + 1):
        t = k * dt
        ia, ib = stator_currents(x, prm)
        w_now = x[4]
        psa = x[0]
        psb = x[1]
        te_plant = plant_torque(x, prm)
        if k > 0:
            # commanded volt-seconds of the last period; resistive drop from
            # the mean of the currents sampled at both ends of it
            la += (v_prev_a - rs * 0.5 * (i_prev_a + ia)) * dt
            lb += (v_prev_b - rs * 0.5 * (i_prev_b + ib)) * dt
        mag, th, sec = flux_polar_kernel(la, lb)
        te_est = torque_kernel(la, lb, ia, ib, p)
        w_ref = _profile(w_times, w_vals, t, tol)
        t_load = _profile(l_times, l_vals, t, tol)

        if building and (k >= build_steps or mag >= 0.95 * flux_ref):
            building = False

        t_ref = 0.0
        dth = math.nan
        da = 0.0
        db = 0.0
        dc = 0.0
        va = 0.0
        vb = 0.0
        if building or sec == 0:
            # open-loop magnetisation along V1
            vec = 1
            n_seg = 1
            idx[0] = 1
            dur[0] = dt
        else:
            t_ref, integ = pi_kernel(w_ref - w_now, integ, kp, ki, t_max, dt)
            e_flux = flux_ref - mag
            e_torque = t_ref - te_est
            if use_flsvm:
                dth_all, zshare, dth_act = infer_kernel(e_flux, e_torque, f_centers,
                                                        t_centers, f_scale, t_scale, table)
                if scaled_mag:
                    dth = dth_act
                    m = MAX_LINEAR * (1.0 - zshare)
                else:
                    dth = dth_all
                    m = MAX_LINEAR if zshare <= 0.999 else 0.0
                ref = th + dth * math.pi / 180.0
                s, t1, t2, t0 = dwell_kernel(ref, m, dt)
                pattern_kernel(s, t1, t2, t0, idx, dur)
                n_seg = 7
            else:
                flux_out = flux_comparator(e_flux, flux_band, flux_out)
                torque_out = torque_comparator(e_torque, torque_band, torque_out)
                vec = select_vector_index(flux_out, torque_out, sec, vec)
                n_seg = 1
                idx[0] = vec
                dur[0] = dt

        # apply the period, sub-stepping each segment; torque is also sampled
        # at every sub-step so carrier ripple hidden between control
        # instants is not lost
        s1 = te_plant
        s2 = te_plant * te_plant
        ns = 1
        for j in range(n_seg):
            d = dur[j]
            if d <= 0.0:
                continue
            sv = VECTORS[idx[j]]
            sva, svb = legs_to_voltage(float(sv[0]), float(sv[1]), float(sv[2]), vdc)
            va += sva * d
            vb += svb * d
            da += sv[0] * d
            db += sv[1] * d
            dc += sv[2] * d
            if k < t_end_steps:
                n = int(math.ceil(d / h_max - 1e-9))
                if n < 1:
                    n = 1
                h = d / n
                for _ in range(n):
                    rk4_inplace(x, sva, svb, t_load, h, prm)
                    tq = plant_torque(x, prm)
                    s1 += tq
                    s2 += tq * tq
                    ns += 1

        row = log[k]
        row[0] = t
        row[1] = w_now
        row[2] = w_ref
        row[3] = te_est
        row[4] = te_plant
        row[5] = t_ref
        row[6] = mag
        row[7] = th
        row[8] = sec
        row[9] = ia
        row[10] = ib
        row[11] = alphabeta_to_abc(ia, ib)[2]
        row[12] = da / dt
        row[13] = db / dt
        row[14] = dc / dt
        row[15] = dth
        row[16] = flux_out if not use_flsvm else math.nan
        row[17] = torque_out if not use_flsvm else math.nan
        mean_s = s1 / ns
        row[18] = math.sqrt(max(s2 / ns - mean_s * mean_s, 0.0))
        row[19] = psa
        row[20] = psb

        v_prev_a = va / dt
        v_prev_b = vb / dt
        i_prev_a = ia
        i_prev_b = ib
        if k < t_end_steps:
            bad = False
            for q in range(6):
                if not math.isfinite(x[q]):
                    bad = True
            if bad:
                return k
    return -1


def run_scenario(cfg: ScenarioConfig, state=None) -> TimeSeriesLog:
    """Simulate ``cfg`` from rest (or from ``state``, a 6-vector) and return the log."""
    n = cfg.n_samples
    log = np.zeros((n, len(COLUMNS)))
    x = np.zeros(6) if state is None else np.array(state, dtype=np.float64)
    w = np.array(cfg.speed_ref, dtype=np.float64)
    ld = np.array(cfg.load, dtype=np.float64)
    build_steps = int(math.floor(cfg.flux_build_time / cfg.dt_ctrl + 1e-9))
    bad = simulate_kernel(
        cfg.machine.as_array(), cfg.controller == FLSVM, n - 1, cfg.dt_ctrl,
        int(cfg.plant_substeps), w[:, 0].copy(), w[:, 1].copy(), ld[:, 0].copy(),
        ld[:, 1].copy(), cfg.flux_ref, cfg.kp, cfg.ki, cfg.t_max, cfg.flux_band,
        cfg.torque_band, cfg.fuzzy.flux_centers, cfg.fuzzy.torque_centers,
        cfg.fuzzy.flux_scale, cfg.fuzzy.torque_scale, cfg.rules.angles,
        build_steps, cfg.svm_magnitude == "scaled", x, log)
    if bad >= 0:
        raise SimulationError(
            f"numerical blow-up at t = {bad * cfg.dt_ctrl:.6f} s, "
            f"state norm {np.linalg.norm(x):.3e}")
    return TimeSeriesLog(log, cfg)
