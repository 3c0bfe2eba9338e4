#!/usr/bin/env python3
"""Sweep the claim battery across catalog models and print a summary table.

Usage:
    python scripts/verify_catalog.py [--samples N] [--seed S]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hamext import cage_model, harmonic_model, ttw_model  # noqa: E402
from hamext.verify import VerifySettings, run_model_verification  # noqa: E402

CASES = [
    ("ttw", ttw_model, [(1, 1), (2, 1), (1, 2), (3, 2)],
     {"alpha1": 1.25, "alpha2": 1.75, "omega": 2 / 3}),
    ("cage", cage_model, [(1, 1), (2, 1), (3, 2), (4, 3)],
     {"L0": 0.75, "b": 0.5, "omega": 2 / 3, "A": 1.0}),
    ("harmonic", harmonic_model, [(1, 1)],
     {"L0": 0.5, "c1": 0.0, "omega": 0.0, "A": 1.0}),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=60)
    ap.add_argument("--seed", type=int, default=20240901)
    args = ap.parse_args()
    settings = VerifySettings(samples=args.samples, rng_seed=args.seed)

    print(f"{'model':<10} {'(m,n)':<8} {'branch':<12} {'K deg':<6} "
          f"{'claims':<8} {'time':<8} verdict")
    failures = 0
    for name, builder, grid, params in CASES:
        for m, n in grid:
            t0 = time.monotonic()
            mdl = builder(m, n)
            report = run_model_verification(mdl, params, settings)
            dt = time.monotonic() - t0
            n_ok = sum(c.ok for c in report.claims)
            verdict = "ok" if report.all_ok else "FAILED"
            failures += 0 if report.all_ok else 1
            print(f"{name:<10} {f'({m},{n})':<8} {mdl.Kbar.branch:<12} "
                  f"{mdl.Kbar.poly.momentum_degree():<6} "
                  f"{f'{n_ok}/{len(report.claims)}':<8} {dt:<8.2f} {verdict}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
