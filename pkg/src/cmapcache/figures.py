"""Rate-vs-t_p figures from sweep CSVs (matplotlib, Agg backend)."""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path

CURVES = [
    ("scheme_rate", "Proposed scheme", "o-"),
    ("alpha_bound", "Alpha lower bound", "s--"),
    ("cutset_bound", "Cut-set bound", "v:"),
    ("man_rate", r"MAN, $M = rM_a + M_p$", "^-."),
    ("cmacc_rate", r"CMACC, $M = M_a + M_p/r$", "d-."),
]


def read_sweep(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_sweep(rows: list[dict[str, str]], out, title: str = "") -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out)
    tp = [int(r["tp"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    for col, label, style in CURVES:
        ys = [float(Fraction(r[col + "_exact"])) for r in rows]
        ax.plot(tp, ys, style, label=label, markersize=4, linewidth=1.2)
    ax.set_xlabel(r"$t_p$")
    ax.set_ylabel("Rate")
    ax.set_xticks(tp)
    if title:
        ax.set_title(title, fontsize=9)
    ax.grid(True, linewidth=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    # no timestamps or version strings, so reruns are byte-identical
    meta = {"svg": {"Date": None, "Creator": None}, "pdf": {"CreationDate": None, "Creator": None},
            "png": {"Software": None}}
    fmt = out.suffix.lstrip(".").lower() or "png"
    if fmt == "svg":
        matplotlib.rcParams["svg.hashsalt"] = "cmapcache"
    fig.savefig(out, format=fmt, metadata=meta.get(fmt))
    plt.close(fig)
    return out
