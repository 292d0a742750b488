"""Run the damping sweep of configs/sweep_damping.json and print A(t) per damping rate.

    python3 scripts/damping_sweep.py [--out runs/sweep]
"""

import argparse
import csv
from collections import defaultdict
from pathlib import Path

from dfcb.cli import cmd_sweep, load_config

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "sweep_damping.json")
    ap.add_argument("--out", type=Path, default=Path("runs/sweep"))
    args = ap.parse_args()
    path = cmd_sweep(load_config(args.config), args.out)
    table = defaultdict(list)
    with open(path) as fh:
        for row in csv.DictReader(fh):
            table[float(row["param"])].append((float(row["t"]), float(row["amplitude"])))
    ts = [t for t, _ in next(iter(table.values()))]
    print("b \\ t  " + "  ".join(f"{t:7.3f}" for t in ts))
    for b, rows in sorted(table.items()):
        print(f"{b:+6.2f} " + "  ".join(f"{a:7.4f}" for _, a in rows))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
