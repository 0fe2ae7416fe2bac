"""Command line entry point.

    encclone run exp1 --config configs/exp1.ini --seed 3 --out results/exp1.csv
    encclone verify
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import EXPERIMENTS, load_config
from .engine import BACKEND_CHOICES
from .experiments import run_experiment
from .outputs import emit_outputs

log = logging.getLogger("encclone")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="encclone", description="encrypted cloning simulations")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment sweep")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", help="INI-style config file")
    run.add_argument("--seed", type=int)
    run.add_argument("--shots", type=int)
    run.add_argument("--backend", choices=BACKEND_CHOICES)
    run.add_argument("--out", help="CSV path (stdout if omitted)")

    sub.add_parser("verify", help="oracle-equivalence and invariant checks")
    return p


def _run(args) -> int:
    cfg = load_config(args.config, experiment=args.experiment)
    cfg = cfg.with_overrides(seed=args.seed, shots=args.shots, backend=args.backend, out=args.out)
    log.info("running %s with backend=%s seed=%d", cfg.experiment, cfg.backend, cfg.seed)
    t0 = time.perf_counter()
    rows = run_experiment(cfg)
    for path in emit_outputs(rows, cfg.experiment, cfg.out):
        log.info("wrote %s", path)
    log.info("%d rows in %.2f s", len(rows), time.perf_counter() - t0)
    return 0


def _verify() -> int:
    from ..verify import run_all

    return 0 if run_all() else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "run":
            return _run(args)
        return _verify()
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"encclone: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
