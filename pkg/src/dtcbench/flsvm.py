"""Fuzzy-logic space-vector-modulation DTC.

A zero-order Sugeno fuzzy system maps the flux and torque errors to an angle
increment relative to the stator flux. A discrete SVM stage then synthesises
a voltage vector at that angle over one control period with a symmetric
seven-segment pattern.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .plant import VECTORS

TWO_PI = 2.0 * math.pi
SIXTY = math.pi / 3.0
SQRT3 = math.sqrt(3.0)
MAX_LINEAR = 1.0 / SQRT3

FLUX_LABELS = ("BD", "SD", "SI", "BI")
TORQUE_LABELS = ("BD", "SD", "Z", "SI", "BI")
Z_ROW = 2

# rows: torque BD, SD, Z, SI, BI; columns: flux BD, SD, SI, BI (degrees)
RULE_ANGLES = np.array([
    [-135.0, -105.0, -75.0, -45.0],
    [-165.0, -135.0, -45.0, -15.0],
    [0.0, 0.0, 0.0, 0.0],
    [165.0, 135.0, 45.0, 15.0],
    [135.0, 105.0, 75.0, 45.0],
])


def _default_flux_centers():
    return np.array([-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0])


def _default_torque_centers():
    return np.array([-1.0, -0.5, 0.0, 0.5, 1.0])


@dataclass(frozen=True, eq=False)
class FuzzyConfig:
    """Triangular partitions over normalised errors in [-1, 1].

    Each label is a triangle peaking at its centre and reaching zero at the
    neighbouring centres; the outermost labels saturate beyond +-1.
    """

    flux_centers: np.ndarray = field(default_factory=_default_flux_centers)
    torque_centers: np.ndarray = field(default_factory=_default_torque_centers)
    flux_scale: float = 0.05
    torque_scale: float = 5.0

    def __post_init__(self):
        fc = np.asarray(self.flux_centers, dtype=np.float64)
        tc = np.asarray(self.torque_centers, dtype=np.float64)
        object.__setattr__(self, "flux_centers", fc)
        object.__setattr__(self, "torque_centers", tc)
        if fc.shape != (4,) or tc.shape != (5,):
            raise ValueError("need 4 flux and 5 torque label centres")
        for c in (fc, tc):
            if np.any(np.diff(c) <= 0):
                raise ValueError("label centres must be strictly increasing")
            if c[0] < -1 or c[-1] > 1:
                raise ValueError("label centres must lie in [-1, 1]")
        if not (self.flux_scale > 0 and self.torque_scale > 0):
            raise ValueError("normalisation scales must be > 0")

    def __eq__(self, other):
        if not isinstance(other, FuzzyConfig):
            return NotImplemented
        return (np.array_equal(self.flux_centers, other.flux_centers)
                and np.array_equal(self.torque_centers, other.torque_centers)
                and self.flux_scale == other.flux_scale
                and self.torque_scale == other.torque_scale)


@dataclass(frozen=True, eq=False)
class RuleTable:
    angles: np.ndarray = field(default_factory=RULE_ANGLES.copy)

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64)
        object.__setattr__(self, "angles", a)
        if a.shape != (5, 4):
            raise ValueError("rule table must be 5 x 4")
        if np.any(a[Z_ROW] != 0.0):
            raise ValueError("zero-torque row must be all zero")
        if not np.array_equal(a[::-1], -a):
            raise ValueError("rule table must be odd-symmetric in the torque rows")

    def __eq__(self, other):
        if not isinstance(other, RuleTable):
            return NotImplemented
        return np.array_equal(self.angles, other.angles)

    def cell(self, torque_label: str, flux_label: str) -> float:
        return float(self.angles[TORQUE_LABELS.index(torque_label),
                                 FLUX_LABELS.index(flux_label)])


@dataclass(frozen=True)
class SvmCommand:
    ref_angle: float
    ref_mag: float
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be > 0")
        if not 0.0 <= self.ref_mag <= MAX_LINEAR + 1e-9:
            raise ValueError(
                f"ref_mag {self.ref_mag} outside the linear region [0, 1/sqrt(3)]")


@njit
def memberships(u, centers):
    n = centers.shape[0]
    mu = np.zeros(n)
    if u <= centers[0]:
        mu[0] = 1.0
        return mu
    if u >= centers[n - 1]:
        mu[n - 1] = 1.0
        return mu
    for i in range(n - 1):
        lo = centers[i]
        hi = centers[i + 1]
        if u <= hi:
            w = (hi - u) / (hi - lo)
            mu[i] = w
            mu[i + 1] = 1.0 - w
            break
    return mu


@njit
def infer_kernel(flux_err, torque_err, flux_centers, torque_centers,
                 flux_scale, torque_scale, table):
    """Return (delta_deg, zero-row weight share, delta_deg over non-zero rows)."""
    uf = min(max(flux_err / flux_scale, -1.0), 1.0)
    ut = min(max(torque_err / torque_scale, -1.0), 1.0)
    mf = memberships(uf, flux_centers)
    mt = memberships(ut, torque_centers)
    num = 0.0
    den = 0.0
    wz = 0.0
    for r in range(5):
        if mt[r] == 0.0:
            continue
        for c in range(4):
            w = min(mt[r], mf[c])
            num += w * table[r, c]
            den += w
            if r == Z_ROW:
                wz += w
    if den == 0.0:
        return 0.0, 1.0, 0.0
    # angle of the non-zero rows alone; the zero row only carries "null"
    active = den - wz
    d_active = (num / active) if active > 0.0 else 0.0
    return num / den, wz / den, d_active


@njit
def dwell_kernel(ref_angle, ref_mag, ts):
    th = ref_angle % TWO_PI
    k = int(math.floor(th / SIXTY))
    if k > 5:
        k = 5
    alpha = th - k * SIXTY
    g = SQRT3 * ref_mag * ts
    t1 = g * math.sin(SIXTY - alpha)
    t2 = g * math.sin(alpha)
    if t1 < 0.0:
        t1 = 0.0
    if t2 < 0.0:
        t2 = 0.0
    t0 = ts - t1 - t2
    if t0 < 0.0:
        t0 = 0.0
    return k + 1, t1, t2, t0


@njit
def pattern_kernel(sector, t1, t2, t0, idx, dur):
    """Fill the seven-segment centred pattern into ``idx`` (vector numbers) and ``dur``."""
    vk = sector
    vk1 = sector % 6 + 1
    if sector % 2 == 1:
        a, ta, b, tb = vk, t1, vk1, t2
    else:
        a, ta, b, tb = vk1, t2, vk, t1
    idx[0] = 0
    idx[1] = a
    idx[2] = b
    idx[3] = 7
    idx[4] = b
    idx[5] = a
    idx[6] = 0
    dur[0] = 0.25 * t0
    dur[1] = 0.5 * ta
    dur[2] = 0.5 * tb
    dur[3] = 0.5 * t0
    dur[4] = 0.5 * tb
    dur[5] = 0.5 * ta
    dur[6] = 0.25 * t0


def fuzzify(err: float, scale: float, centers) -> np.ndarray:
    """Membership degree of ``err`` in each label, after normalising by ``scale``."""
    if not scale > 0:
        raise ValueError("scale must be > 0")
    u = min(max(err / scale, -1.0), 1.0)
    return memberships(float(u), np.asarray(centers, dtype=np.float64))


def infer_delta_angle(flux_err: float, torque_err: float,
                      cfg: FuzzyConfig | None = None, tbl: RuleTable | None = None) -> float:
    """Angle increment in degrees, weighted average of the fired rule singletons."""
    cfg = cfg or FuzzyConfig()
    tbl = tbl or RuleTable()
    d, _, _ = infer_kernel(float(flux_err), float(torque_err), cfg.flux_centers,
                        cfg.torque_centers, cfg.flux_scale, cfg.torque_scale, tbl.angles)
    return float(d)


def zero_row_share(flux_err: float, torque_err: float, cfg: FuzzyConfig | None = None,
                   tbl: RuleTable | None = None) -> float:
    cfg = cfg or FuzzyConfig()
    tbl = tbl or RuleTable()
    _, z, _ = infer_kernel(float(flux_err), float(torque_err), cfg.flux_centers,
                        cfg.torque_centers, cfg.flux_scale, cfg.torque_scale, tbl.angles)
    return float(z)


def build_reference(theta_flux: float, delta_deg: float, torque_active: bool,
                    Vdc: float, Ts: float, activity: float = 1.0) -> SvmCommand:
    """Absolute SVM reference: the flux angle advanced by ``delta_deg``.

    The magnitude is the linear-region limit times ``activity`` (in [0, 1]),
    or zero when ``torque_active`` is false. ``Vdc`` only enters through the
    normalisation and is kept for call-site symmetry.
    """
    if not 0.0 <= activity <= 1.0:
        raise ValueError("activity must be in [0, 1]")
    angle = (theta_flux + math.radians(delta_deg)) % TWO_PI
    return SvmCommand(angle, MAX_LINEAR * activity if torque_active else 0.0, Ts)


def fuzzy_reference(flux_err: float, torque_err: float, theta_flux: float, Ts: float,
                    cfg: FuzzyConfig | None = None, tbl: RuleTable | None = None,
                    magnitude: str = "scaled") -> tuple[float, SvmCommand]:
    """Reference the closed loop applies for the given errors.

    ``magnitude="fixed"`` averages all rule angles (zero row included) and
    always commands the full linear magnitude unless the zero row carries
    more than 99.9% of the weight. ``"scaled"`` takes the angle from the
    non-zero torque rows only and shrinks the magnitude by the zero row's
    weight share. Returns ``(delta_deg, command)``.
    """
    cfg = cfg or FuzzyConfig()
    tbl = tbl or RuleTable()
    d_all, z, d_act = infer_kernel(float(flux_err), float(torque_err), cfg.flux_centers,
                                   cfg.torque_centers, cfg.flux_scale, cfg.torque_scale,
                                   tbl.angles)
    if magnitude == "scaled":
        return float(d_act), build_reference(theta_flux, d_act, True, 0.0, Ts, 1.0 - z)
    if magnitude == "fixed":
        return float(d_all), build_reference(theta_flux, d_all, z <= 0.999, 0.0, Ts)
    raise ValueError("magnitude must be 'scaled' or 'fixed'")


def dwell_times(cmd: SvmCommand) -> tuple[float, float, float]:
    if cmd.ref_mag > MAX_LINEAR + 1e-9:
        raise ValueError("over-modulation is not supported")
    _, t1, t2, t0 = dwell_kernel(cmd.ref_angle, min(cmd.ref_mag, MAX_LINEAR), cmd.period)
    return t1, t2, t0


def svm_sector(ref_angle: float) -> int:
    """SVM sector 1..6, sector 1 being [0, 60) degrees between V1 and V2."""
    return int(dwell_kernel(ref_angle, 0.0, 1.0)[0])


def switching_pattern(sector: int, t1: float, t2: float, t0: float, Ts: float,
                      drop_empty: bool = True) -> list[tuple[tuple[int, int, int], float]]:
    """Centred seven-segment sequence as ``[(legs, duration), ...]``.

    With ``drop_empty`` zero-length segments are removed; otherwise all seven
    are kept, which makes every transition a single-leg toggle.
    """
    if not 1 <= sector <= 6:
        raise ValueError("sector must be in 1..6")
    if min(t1, t2, t0) < 0:
        raise ValueError("dwell times must be non-negative")
    if abs(t1 + t2 + t0 - Ts) > 1e-12 * max(1.0, Ts) + 1e-15:
        raise ValueError("dwell times must sum to the period")
    idx = np.zeros(7, dtype=np.int64)
    dur = np.zeros(7)
    pattern_kernel(sector, t1, t2, t0, idx, dur)
    out = []
    for k, d in zip(idx, dur):
        if drop_empty and d == 0.0:
            continue
        legs = tuple(int(v) for v in VECTORS[k])
        if drop_empty and out and out[-1][0] == legs:
            out[-1] = (legs, out[-1][1] + float(d))
        else:
            out.append((legs, float(d)))
    return out
