"""Command-line front end.

    dtcbench run <config> [--out DIR]
    dtcbench compare <config> [--threshold R] [--out DIR]
    dtcbench sweep <config> --key SECTION.KEY --values V1,V2,... [--out DIR]

Output goes to ``--out``, else ``$DTCBENCH_OUT``, else the current directory.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

from .config import ConfigError, echo, load_config, parse_text, set_key
from .engine import CDTC, FLSVM, COLUMNS, ScenarioConfig, SimulationError, run_scenario
from .metrics import DEFAULT_WINDOW, compare, rise_time, ripple_stats


def _fmt(v: float) -> str:
    # repr gives the shortest round-trip form and ignores locale
    return repr(float(v))


def write_csv(log, path: Path) -> None:
    lines = [",".join(COLUMNS)]
    lines.extend(",".join(map(_fmt, row)) for row in log.data.tolist())
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _window_for(cfg: ScenarioConfig) -> tuple[float, float]:
    if cfg.t_end >= DEFAULT_WINDOW[1]:
        return DEFAULT_WINDOW
    return (0.5 * cfg.t_end, cfg.t_end)


def summary(log) -> str:
    cfg = log.config
    w = _window_for(cfg)
    lines = [f"controller {cfg.controller}, {len(log)} samples"]
    rt = rise_time(log) if cfg.speed_ref[0][1] > 0 else math.nan
    lines.append(f"rise time (2% band): {'not settled' if math.isinf(rt) else f'{rt:.4f} s'}")
    try:
        tq = ripple_stats(log, "torque", w)
        sp = ripple_stats(log, "speed", w)
    except ValueError as exc:
        lines.append(f"ripple: {exc}")
    else:
        lines.append(f"torque over {w[0]:g}..{w[1]:g} s: mean {tq.mean:.4f} N*m, "
                     f"rms ripple {tq.rms_dev:.4f}, incl. carrier {tq.rms_total:.4f}, "
                     f"p2p {tq.p2p:.4f}")
        lines.append(f"speed over {w[0]:g}..{w[1]:g} s: mean {sp.mean:.4f} rad/s, "
                     f"rms fluctuation {sp.rms_dev:.5f}")
    return "\n".join(lines)


def _out_dir(arg: str | None) -> Path:
    d = Path(arg or os.environ.get("DTCBENCH_OUT") or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_run(config, out: str | None = None) -> int:
    cfg, prov = load_config(config)
    print(echo(cfg, prov), file=sys.stderr)
    log = run_scenario(cfg)
    path = _out_dir(out) / f"{Path(config).stem}_{cfg.controller}.csv"
    write_csv(log, path)
    print(summary(log))
    print(f"wrote {path}")
    return 0


def _compare_cfg(cfg: ScenarioConfig, out: Path, stem: str):
    logs = {}
    for ctrl in (CDTC, FLSVM):
        logs[ctrl] = run_scenario(dataclasses.replace(cfg, controller=ctrl))
        write_csv(logs[ctrl], out / f"{stem}_{ctrl}.csv")
    return compare(logs[CDTC], logs[FLSVM], _window_for(cfg))


def cmd_compare(config, threshold: float = 0.0, out: str | None = None) -> int:
    cfg, prov = load_config(config)
    print(echo(cfg, prov), file=sys.stderr)
    d = _out_dir(out)
    stem = Path(config).stem
    rep = _compare_cfg(cfg, d, stem)
    (d / f"{stem}_compare.csv").write_text(rep.csv_header() + "\n" + rep.csv_row() + "\n",
                                          encoding="ascii")
    print(rep.render())
    ok = rep.reduction >= threshold
    print(f"reduction {rep.reduction:.4f} {'>=' if ok else '<'} threshold {threshold:g}")
    return 0 if ok else 1


def cmd_sweep(config, key: str, values: list[str], out: str | None = None) -> int:
    text = Path(config).read_text(encoding="utf-8")
    d = _out_dir(out)
    stem = Path(config).stem
    header = None
    rows = []
    for v in values:
        cfg, _ = parse_text(set_key(text, key, v), f"{config}[{key}={v}]")
        rep = _compare_cfg(cfg, d, f"{stem}_{key.replace('.', '-')}-{v}")
        header = header or f"{key},{rep.csv_header()}"
        rows.append(f"{v},{rep.csv_row()}")
        print(f"{key} = {v}: reduction {rep.reduction:.4f}, "
              f"rise {rep.rise_a:.4g} / {rep.rise_b:.4g} s")
    path = d / f"{stem}_sweep.csv"
    path.write_text("\n".join([header] + rows) + "\n", encoding="ascii")
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dtcbench", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("run", help="simulate one scenario and write its CSV log")
    p.add_argument("config")
    p.add_argument("--out")
    p = sub.add_parser("compare", help="run C-DTC and FLSVM on the same scenario")
    p.add_argument("config")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--out")
    p = sub.add_parser("sweep", help="repeat compare over values of one key")
    p.add_argument("config")
    p.add_argument("--key", required=True, help="section.key, e.g. control.torque_band")
    p.add_argument("--values", required=True, help="comma separated")
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "run":
            return cmd_run(args.config, args.out)
        if args.cmd == "compare":
            return cmd_compare(args.config, args.threshold, args.out)
        return cmd_sweep(args.config, args.key, args.values.split(","), args.out)
    except (ConfigError, SimulationError, OSError) as exc:
        print(f"dtcbench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
