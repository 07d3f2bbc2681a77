"""Search nested-interval configurations for a negative miscalibration term
under the midpoint order, and freeze the first hit as a regression fixture.

Usage: python scripts/find_midpoint_counterexample.py [--out PATH] [--seed S]
"""

import argparse
import json
import warnings
from pathlib import Path

import numpy as np

from winkler.decomposition import EvaluationSet, decompose
from winkler.ordering import OrderKind

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "midpoint_negative_mcb.json"


def candidate(rng, n):
    # strictly increasing midpoints with randomly wide or narrow intervals whose
    # outcome spread matches the width: bounds then cross (nested pairs) while
    # the midpoints form a chain that cannot express the width pattern
    centre = np.cumsum(rng.integers(1, 3, size=n)) / 64
    half = np.where(rng.random(n) < 0.5, 0.5, 3.0)
    lower, upper = centre - half, centre + half
    y = np.round(4 * (centre + rng.normal(0.0, half / 1.6449))) / 4
    return lower, upper, y


def mcb(lower, upper, y, kind, alpha):
    es = EvaluationSet(lower, upper, y, alpha=alpha, order_kind=kind, allow_unsafe_order=True)
    return decompose(es).mcb


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--tries", type=int, default=200_000)
    args = ap.parse_args()
    warnings.simplefilter("ignore")
    rng = np.random.default_rng(args.seed)
    for t in range(args.tries):
        n = int(rng.integers(10, 41))
        lower, upper, y = candidate(rng, n)
        if np.unique(lower + upper).size < n:
            continue  # require a strict chain of midpoints, no pooling by ties
        m_mid = mcb(lower, upper, y, OrderKind.MIDPOINT, args.alpha)
        if m_mid < -1e-6:
            m_cw = mcb(lower, upper, y, OrderKind.COMPONENTWISE, args.alpha)
            payload = {
                "alpha": args.alpha,
                "lower": lower.tolist(),
                "upper": upper.tolist(),
                "observed": y.tolist(),
                "mcb_midpoint": m_mid,
                "mcb_componentwise": m_cw,
                "search": {"seed": args.seed, "try": t},
            }
            args.out.write_text(json.dumps(payload, indent=2) + "\n")
            print(f"found after {t + 1} tries (n={n}): mcb midpoint={m_mid:.6g}, componentwise={m_cw:.6g}")
            print(f"written to {args.out}")
            return 0
    print("no counterexample found")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
