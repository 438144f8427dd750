"""Torque ripple, speed fluctuation and rise-time metrics; controller comparison."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .engine import TimeSeriesLog

NOT_SETTLED = math.inf
DEFAULT_WINDOW = (0.7, 0.9)
MIN_SAMPLES = 100

_SIGNALS = {"torque": "Te_plant", "speed": "omega_m"}


@dataclass(frozen=True)
class RippleStats:
    mean: float
    rms_dev: float
    p2p: float
    window: tuple[float, float]
    # RMS deviation including ripple between control instants (torque only)
    rms_total: float = math.nan


def stats_of(y, window=(math.nan, math.nan), intra=None) -> RippleStats:
    """Mean, RMS deviation about the mean and peak-to-peak of the samples ``y``."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty window")
    if y.size < MIN_SAMPLES:
        raise ValueError(f"window holds {y.size} samples, need at least {MIN_SAMPLES}")
    mean = float(np.mean(y))
    rms = float(np.sqrt(np.mean((y - mean) ** 2)))
    total = math.nan
    if intra is not None:
        total = float(np.sqrt(rms**2 + np.mean(np.asarray(intra) ** 2)))
    return RippleStats(mean, rms, float(np.ptp(y)), tuple(window), total)


def ripple_stats(log: TimeSeriesLog, signal: str = "torque",
                 window=DEFAULT_WINDOW) -> RippleStats:
    if signal not in _SIGNALS:
        raise ValueError(f"signal must be one of {tuple(_SIGNALS)}")
    t = log.t
    t0, t1 = window
    if t0 < t[0] - 1e-12 or t1 > t[-1] + 1e-12 or t1 <= t0:
        raise ValueError(f"window {window} not inside log range [{t[0]}, {t[-1]}]")
    m = log.window(t0, t1)
    intra = log["Te_intra_rms"][m] if signal == "torque" else None
    return stats_of(log[_SIGNALS[signal]][m], (t0, t1), intra)


def settle_time(t, y, target: float, band: float = 0.02, hold: float = 0.02) -> float:
    """First time ``y`` enters ``target +- band*|target|`` and stays there for ``hold``.

    Returns ``NOT_SETTLED`` if that never happens within the record.
    """
    if not target > 0:
        raise ValueError("target must be > 0")
    t = np.asarray(t)
    inside = np.abs(np.asarray(y) - target) <= band * target
    n = len(t)
    i = 0
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        if t[j] - t[i] >= hold - 1e-12:
            return float(t[i])
        i = j + 1
    return NOT_SETTLED


def rise_time(log: TimeSeriesLog, target: float | None = None, band: float = 0.02) -> float:
    """Settling time of the rotor speed; ``target`` defaults to the initial speed reference."""
    if target is None:
        target = log.config.speed_ref[0][1]
    return settle_time(log.t, log["omega_m"], target, band)


@dataclass(frozen=True)
class ComparisonReport:
    controller_a: str
    controller_b: str
    window: tuple[float, float]
    torque_a: RippleStats
    torque_b: RippleStats
    speed_a: RippleStats
    speed_b: RippleStats
    # headline figure, from the RMS including ripple between control instants
    reduction: float
    # same ratio from the control-instant samples only
    reduction_sampled: float
    rise_a: float
    rise_b: float
    rise_delta: float
    speed_fluct_delta: float

    def render(self) -> str:
        a, b = self.controller_a, self.controller_b
        rows = [
            ("torque mean [N*m]", self.torque_a.mean, self.torque_b.mean),
            ("torque rms ripple [N*m]", self.torque_a.rms_dev, self.torque_b.rms_dev),
            ("torque rms incl. carrier [N*m]", self.torque_a.rms_total, self.torque_b.rms_total),
            ("torque p2p [N*m]", self.torque_a.p2p, self.torque_b.p2p),
            ("speed mean [rad/s]", self.speed_a.mean, self.speed_b.mean),
            ("speed rms fluctuation [rad/s]", self.speed_a.rms_dev, self.speed_b.rms_dev),
            ("rise time [s]", self.rise_a, self.rise_b),
        ]
        w = max(len(r[0]) for r in rows)
        lines = [f"window {self.window[0]:g}..{self.window[1]:g} s",
                 f"{'':<{w}}  {a:>12}  {b:>12}"]
        lines += [f"{name:<{w}}  {va:>12.6g}  {vb:>12.6g}" for name, va, vb in rows]
        lines.append(f"{'ripple reduction':<{w}}  {self.reduction:>12.4f}")
        lines.append(f"{'reduction, sampled only':<{w}}  {self.reduction_sampled:>12.4f}")
        lines.append(f"{'rise-time delta [s]':<{w}}  {self.rise_delta:>12.6g}")
        lines.append(f"{'speed fluctuation delta':<{w}}  {self.speed_fluct_delta:>12.6g}")
        return "\n".join(lines)

    def csv_header(self) -> str:
        return ",".join(_csv_fields())

    def csv_row(self) -> str:
        vals = [self.controller_a, self.controller_b, self.window[0], self.window[1],
                self.torque_a.rms_dev, self.torque_b.rms_dev, self.torque_a.rms_total,
                self.torque_b.rms_total, self.torque_a.p2p, self.torque_b.p2p,
                self.speed_a.rms_dev, self.speed_b.rms_dev, self.reduction,
                self.reduction_sampled, self.rise_a, self.rise_b, self.rise_delta,
                self.speed_fluct_delta]
        return ",".join(v if isinstance(v, str) else repr(float(v)) for v in vals)


def _csv_fields():
    return ["controller_a", "controller_b", "window_start", "window_end",
            "torque_rms_a", "torque_rms_b", "torque_rms_total_a", "torque_rms_total_b",
            "torque_p2p_a", "torque_p2p_b", "speed_rms_a", "speed_rms_b", "reduction",
            "reduction_sampled", "rise_a", "rise_b", "rise_delta", "speed_fluct_delta"]


def _reduction(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if a == 0.0:
        return -math.inf
    return 1.0 - b / a


def _delta(a: float, b: float) -> float:
    return 0.0 if a == b else b - a


def compare(log_a: TimeSeriesLog, log_b: TimeSeriesLog, window=DEFAULT_WINDOW) -> ComparisonReport:
    """Compare two runs of the same scenario; ``reduction`` is ``1 - ripple_b / ripple_a``.

    Ripple here is ``rms_total``. Control-instant samples alone under-read
    SVM ripple, since every sample lands at the same phase of the pattern.
    """
    cfg_a, cfg_b = log_a.config, log_b.config
    if dataclasses.replace(cfg_b, controller=cfg_a.controller) != cfg_a:
        raise ValueError("logs come from different scenarios")
    ta = ripple_stats(log_a, "torque", window)
    tb = ripple_stats(log_b, "torque", window)
    sa = ripple_stats(log_a, "speed", window)
    sb = ripple_stats(log_b, "speed", window)
    ra, rb = rise_time(log_a), rise_time(log_b)
    return ComparisonReport(
        cfg_a.controller, cfg_b.controller, tuple(window), ta, tb, sa, sb,
        _reduction(ta.rms_total, tb.rms_total), _reduction(ta.rms_dev, tb.rms_dev),
        ra, rb, _delta(ra, rb), _delta(sa.rms_dev, sb.rms_dev))
