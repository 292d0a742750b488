"""Compare the closed-form and iterated one-fold routes on random draws.

Prints, per fold, the worst scaled discrepancy of u and v at regular points
and how many of the sampled points counted as regular.

    python3 scripts/route_agreement.py [--draws 20] [--points 200]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import PROFILE_PAIRS, random_seeds  # noqa: E402
from dfcb.darboux import TransformedSolution, mode_discrepancy  # noqa: E402
from dfcb.jet import Point  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--draws", type=int, default=20)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for fold in (2, 3, 4):
        worst, regular, total = 0.0, 0, 0
        for i in range(args.draws):
            ts = TransformedSolution(PROFILE_PAIRS[i % 3], random_seeds(rng, fold, 0.05, 2.0, 1e-3))
            p = Point.make(*rng.uniform(-2, 2, (3, args.points)))
            err, ok = mode_discrepancy(ts, p)
            if ok.any():
                worst = max(worst, float(err[ok].max()))
            regular += int(ok.sum())
            total += ok.size
        print(f"N={fold}: closed form vs iterated {worst:.2e} at {regular}/{total} regular points")


if __name__ == "__main__":
    main()
