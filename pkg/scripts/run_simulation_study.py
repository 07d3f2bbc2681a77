"""Run the six-forecaster simulation study and print a table of results.

Usage: python scripts/run_simulation_study.py [--n 1000] [--seed 1] [--alpha 0.1]
                                              [--replicates 0] [--out-dir DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from winkler.report import McbDscEntry, atomic_write_text, make_plot_spec, mcb_dsc_plot, study_csv
from winkler.simulation import replicate_scores, run_simulation_study


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--replicates", type=int, default=0,
                    help="also report the spread of mean scores over this many extra seeds")
    ap.add_argument("--out-dir", type=Path, help="write study.csv and mcb_dsc.svg here")
    args = ap.parse_args()

    rows = run_simulation_study(args.n, args.seed, args.alpha)
    head = f"{'forecaster':<15}{'IS':>8}{'cov':>7}{'len':>8}{'recal cov':>14}{'recal len':>11}{'DSC':>9}{'MCB':>9}"
    print(head)
    print("-" * len(head))
    for r in rows:
        cov = f"{r.recal_open_coverage:.3f}-{r.recal_closed_coverage:.3f}"
        print(f"{r.label:<15}{r.interval_score:>8.3f}{r.coverage:>7.3f}{r.length:>8.3f}{cov:>14}"
              f"{r.recal_length:>11.3f}{r.report.dsc:>9.4f}{r.report.mcb:>9.4f}")
    print(f"UNC = {rows[0].report.unc:.4f}")

    if args.replicates:
        seeds = range(args.seed + 1000, args.seed + 1000 + args.replicates)
        reps = replicate_scores(args.n, seeds, args.alpha)
        print(f"\nmean score over {args.replicates} seeds (mean +- sd)")
        for r in rows:
            s = reps[r.forecaster]["score"]
            print(f"{r.label:<15}{np.mean(s):>8.3f} +- {np.std(s, ddof=1):.3f}")

    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(args.out_dir / "study.csv", study_csv(rows))
        entries = [McbDscEntry.from_report(r.label, r.report) for r in rows]
        atomic_write_text(args.out_dir / "mcb_dsc.svg", mcb_dsc_plot(make_plot_spec(entries)))
        print(f"\nwrote {args.out_dir}/study.csv and mcb_dsc.svg")


if __name__ == "__main__":
    main()
