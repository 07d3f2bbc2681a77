"""Regenerate the packaged synthetic grouped CSV (four methods, shared outcomes).

Usage: python scripts/make_grouped_example.py [--n 400] [--seed 20240]
"""

import argparse
import csv
from pathlib import Path

import numpy as np
from scipy.special import ndtri

OUT = Path(__file__).resolve().parents[1] / "src" / "winkler" / "data" / "grouped_example.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    x = rng.uniform(0, 4, args.n)
    sd = 0.5 + 0.25 * x
    y = 2 * x + sd * rng.standard_normal(args.n)
    z = ndtri(0.95)
    x_noisy = x + rng.normal(0, 1, args.n)
    methods = {
        # heteroscedastic and correctly centred
        "adaptive": (2 * x - z * sd, 2 * x + z * sd),
        # constant width, correct centre
        "constant": (2 * x - z * 1.0, 2 * x + z * 1.0),
        # right width, biased centre
        "shifted": (2 * x + 0.6 - z * sd, 2 * x + 0.6 + z * sd),
        # centred on a noisy covariate: less information, so lower dsc
        "noisy": (2 * x_noisy - z * 2.2, 2 * x_noisy + z * 2.2),
    }
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lower", "upper", "observed", "group"])
        for name, (lo, up) in methods.items():
            for a, b, v in zip(lo, up, y):
                w.writerow([f"{a:.4f}", f"{b:.4f}", f"{v:.4f}", name])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
