#!/usr/bin/env python3
"""Run every bundled config in scripts/configs, writing results/<config>.csv."""

import glob
import os
import sys

from encclone.harness.cli import main
from encclone.harness.config import load_config

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    outdir = os.path.join(HERE, "..", "results")
    status = 0
    for path in sorted(glob.glob(os.path.join(HERE, "configs", "*.ini"))):
        exp = load_config(path).experiment
        out = os.path.join(outdir, os.path.splitext(os.path.basename(path))[0] + ".csv")
        print(f"== {os.path.basename(path)} ({exp})", flush=True)
        status |= main(["-v", "run", exp, "--config", path, "--out", out])
    sys.exit(status)
