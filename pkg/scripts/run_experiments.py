"""Run every shipped experiment config through the replication engine.

Writes one artifact directory per config under results/ (or --out). The
pytest acceptance suite is the authoritative pass/fail gate; this script
reproduces the same runs as diffable CSV/JSON artifacts.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from subgauss import harness
from subgauss.harness import ExperimentConfig

REPO = Path(__file__).resolve().parent.parent
STEMS = ["e1", "e2", "e2_runs", "e3", "e3b", "e4", "e5", "e6", "e7"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(REPO / "results"))
    ap.add_argument("--only", nargs="*", default=None,
                    help="subset of config stems to run")
    ap.add_argument("--reps", type=int, default=None,
                    help="override replication count (quick smoke pass)")
    args = ap.parse_args(argv)

    stems = args.only or STEMS
    for stem in stems:
        cfg = ExperimentConfig.from_json(
            (REPO / "configs" / f"{stem}.json").read_text()
        )
        if args.reps is not None:
            cfg = ExperimentConfig(
                name=cfg.name, generator=cfg.generator, n=cfg.n, tau=cfg.tau,
                reps=args.reps, base_seed=cfg.base_seed,
                analyses=cfg.analyses, out=cfg.out,
            )
        t0 = time.time()
        summary = harness.run(cfg, str(Path(args.out) / stem))
        print(f"{stem}: reps={cfg.reps} failures={len(summary['failures'])} "
              f"({time.time() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
