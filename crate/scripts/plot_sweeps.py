"""Plot every sweep CSV in a directory: infidelity against the eta ratio."""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with path.open() as f:
        rows = list(csv.DictReader(f))
    label = rows[0]["scenario"] + ("" if rows[0]["k"] == "0" else f" k={rows[0]['k']}")
    return label, [float(r["eta_ratio"]) for r in rows], [float(r["infidelity"]) for r in rows]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", type=Path)
    parser.add_argument("-o", "--output", type=Path, default=None)
    args = parser.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for path in sorted(args.directory.glob("*.csv")):
        if path.name.endswith("_pulse.csv") or path.name == "error_cumulant.csv":
            continue
        label, x, y = load(path)
        ax.semilogy(x, [max(v, 1e-16) for v in y], marker=".", label=label)
    ax.set_xlabel("eta ratio")
    ax.set_ylabel("1 - F")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output or args.directory / "infidelity.png", dpi=150)


if __name__ == "__main__":
    main()
