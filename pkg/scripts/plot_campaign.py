"""Draw load curves from a campaign CSV.

    python scripts/plot_campaign.py results.csv --out curves.png

Panels: establishment probability, search effort (or time, when recorded),
connection length and edge fragments, each against mean utilization.  One line
per router/policy pair.  Needs matplotlib.
"""

import argparse
import csv
import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    series = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            series[(row["router"], row["policy"])].append({k: _num(v) for k, v in row.items()})
    for rows in series.values():
        rows.sort(key=lambda r: r["lambda"])
    return series


def _num(text):
    try:
        return float(text)
    except ValueError:
        return text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--out", default="curves.png")
    args = ap.parse_args()
    series = load(args.csv)
    timed = any(not math.isnan(r["min_search_seconds"]) for rows in series.values() for r in rows)
    panels = [
        ("p_establish", "probability of establishing"),
        ("min_search_seconds" if timed else "search_ops", "search time [s]" if timed else "search operations"),
        ("length_km", "connection length [km]"),
        ("edge_fragments", "fragments per link"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(11, 8))
    for ax, (col, label) in zip(axes.flat, panels):
        for (router, policy), rows in sorted(series.items()):
            ax.plot([r["utilization"] for r in rows], [r[col] for r in rows], marker="o", ms=3, label=f"{router}/{policy}")
        ax.set_xlabel("utilization")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes.flat[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
