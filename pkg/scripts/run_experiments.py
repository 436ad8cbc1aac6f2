"""Run every experiment with default settings and write CSV + summary JSON per experiment."""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from pauli_sew.harness import ExperimentConfig, run_experiment

CONFIGS = {
    "concentration": dict(generator={"kind": "random", "n": 5, "d": 2, "kappa_max": 4, "density": 0.6},
                          kappa=3, seeds=[0, 1, 2]),
    "ancilla": dict(generator={"kind": "clean", "n": 3, "a": 2}, seeds=list(range(5))),
    "learn": dict(generator={"kind": "random", "n": 4, "d": 1, "kappa_max": 4, "density": 0.6},
                  ell=2, kappa=2, mode="sampled", eta=0.0625, delta=0.05, seeds=list(range(5))),
    "sew": dict(generator={"kind": "random", "n": 4, "d": 2, "kappa_max": 2, "density": 0.5},
                ell=4, mode="exact", seeds=list(range(5))),
    "synth": dict(generator={"kind": "random", "n": 3, "d": 1, "kappa_max": 2, "density": 1.0},
                  ell=2, kappa=2, net_eps=0.75, synth_d=1, seeds=[0, 1]),
    "hardness": dict(generator={"n": 4}),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory (default: results)")
    ap.add_argument("--only", nargs="*", choices=sorted(CONFIGS), help="subset of experiments")
    args = ap.parse_args()
    for name in args.only or CONFIGS:
        cfg = ExperimentConfig.from_dict({"experiment": name, "out_dir": str(Path(args.out)), **CONFIGS[name]})
        t0 = time.perf_counter()
        csv_path, summary_path = run_experiment(cfg)
        summary = json.loads(summary_path.read_text())["summary"]
        print(f"{name:14s} {time.perf_counter() - t0:6.1f}s  rows={summary['rows']}  -> {csv_path}")


if __name__ == "__main__":
    main()
