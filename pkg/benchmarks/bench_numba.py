#!/usr/bin/env python3
"""Wall-clock comparison of the numba kernels against the pure-Python fallback.

Each backend runs in its own interpreter because the switch is read at import.
The numba figure excludes compilation (one short warm-up run first) and the
two results are checked for agreement.

Usage:
    python benchmarks/bench_numba.py [--t-end 0.2] [--repeat 3] [--controller CDTC]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

WORKER = """
import json, sys, time
import numpy as np
import dtcbench
from dtcbench import ScenarioConfig, run_scenario

controller, t_end, repeat, out = sys.argv[1], float(sys.argv[2]), int(sys.argv[3]), sys.argv[4]
run_scenario(ScenarioConfig(controller=controller, t_end=0.01))
best = float("inf")
for _ in range(repeat):
    t0 = time.perf_counter()
    log = run_scenario(ScenarioConfig(controller=controller, t_end=t_end))
    best = min(best, time.perf_counter() - t0)
np.save(out, log.data)
print(json.dumps({"numba": dtcbench.USING_NUMBA, "seconds": best}))
"""


def run_backend(controller, t_end, repeat, disable, out):
    env = dict(os.environ, DTCBENCH_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, controller, str(t_end),
                           str(repeat), str(out)], env=env, check=True,
                          capture_output=True, text=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--t-end", type=float, default=0.2, help="simulated seconds per run")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--controller", choices=("CDTC", "FLSVM", "both"), default="both")
    args = ap.parse_args(argv)
    ctrls = ("CDTC", "FLSVM") if args.controller == "both" else (args.controller,)

    print(f"{'controller':<10} {'backend':<8} {'best [s]':>10} {'s per sim-s':>12} {'speed-up':>9}")
    with tempfile.TemporaryDirectory() as tmp:
        for c in ctrls:
            fast_path, slow_path = Path(tmp, f"{c}_jit.npy"), Path(tmp, f"{c}_py.npy")
            fast = run_backend(c, args.t_end, args.repeat, False, fast_path)
            slow = run_backend(c, args.t_end, 1, True, slow_path)
            if not fast["numba"]:
                print("numba unavailable; both rows are the Python path", file=sys.stderr)
            agree = np.allclose(np.load(fast_path), np.load(slow_path), rtol=1e-9, atol=1e-9,
                                equal_nan=True)
            for name, r in (("numba", fast), ("python", slow)):
                gain = slow["seconds"] / r["seconds"]
                print(f"{c:<10} {name:<8} {r['seconds']:>10.3f} "
                      f"{r['seconds'] / args.t_end:>12.3f} {gain:>8.1f}x")
            print(f"{c:<10} results agree: {agree}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
