#!/usr/bin/env python3
"""Run one experiment from a config file and write CSV + plot data under results/.

    python scripts/run_experiment.py exp1 [--config scripts/configs/exp1.ini] [--seed N]
"""

import argparse
import os
import sys

from encclone.harness.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG_NAMES = {"corr-scan": "corr_scan", "mixedness": "mixedness"}


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("experiment")
    ap.add_argument("--config")
    ap.add_argument("--seed")
    ap.add_argument("--backend")
    ap.add_argument("--outdir", default=os.path.join(HERE, "..", "results"))
    args = ap.parse_args()
    name = CONFIG_NAMES.get(args.experiment, args.experiment)
    config = args.config or os.path.join(HERE, "configs", f"{name}.ini")
    out = os.path.join(args.outdir, os.path.splitext(os.path.basename(config))[0] + ".csv")
    argv = ["-v", "run", args.experiment, "--config", config, "--out", out]
    if args.seed is not None:
        argv += ["--seed", args.seed]
    if args.backend is not None:
        argv += ["--backend", args.backend]
    sys.exit(main(argv))
