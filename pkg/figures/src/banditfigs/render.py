"""Render histogram panel grids and Markdown tables from banditlab CSVs.

This package is a pure downstream consumer of the CSV contract: it never
re-runs simulations. Rendering is deterministic given the input files (fixed
figure geometry, bin edges taken from the CSVs themselves).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "POLICIES",
    "KAPPAS",
    "MissingCellError",
    "load_histogram",
    "binned_mass_below",
    "render_histograms",
    "render_table",
]

POLICIES = ("SE", "UCB", "TS", "SE_new", "UCB_new", "UCB_any")
KAPPAS = (0.1, 0.2, 0.4, 0.8)


class MissingCellError(FileNotFoundError):
    """A (policy, kappa) histogram CSV is absent from the data directory."""


def cell_filename(policy: str, kappa: float) -> str:
    return f"hist_{policy}_{kappa:g}.csv"


def load_histogram(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Read one histogram CSV; returns (edges, counts)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"bin_left", "bin_right", "count"} <= set(rows[0]):
        raise ValueError(f"{path}: not a histogram CSV (bin_left,bin_right,count)")
    lefts = np.array([float(r["bin_left"]) for r in rows])
    rights = np.array([float(r["bin_right"]) for r in rows])
    counts = np.array([int(r["count"]) for r in rows])
    edges = np.append(lefts, rights[-1])
    return edges, counts


def binned_mass_below(edges: np.ndarray, counts: np.ndarray, cut: float) -> float:
    """Fraction of mass below `cut`, interpolating linearly inside bins."""
    total = counts.sum()
    if total == 0:
        return 0.0
    widths = np.diff(edges)
    frac = np.clip((cut - edges[:-1]) / np.where(widths > 0, widths, 1.0), 0.0, 1.0)
    return float((counts * frac).sum() / total)


def _collect_cells(data_dir: Path) -> dict:
    cells = {}
    for policy in POLICIES:
        for kappa in KAPPAS:
            path = data_dir / cell_filename(policy, kappa)
            if not path.exists():
                raise MissingCellError(
                    f"missing histogram for cell ({policy}, kappa={kappa:g}): {path}"
                )
            cells[(policy, kappa)] = load_histogram(path)
    return cells


def render_histograms(data_dir: str | Path, out_path: str | Path) -> Path:
    """One 6x4 panel image (policies by rows, kappa by columns).

    All panels share the x-axis range of the pooled data so the tails are
    visually comparable across policies.
    """
    data_dir = Path(data_dir)
    out_path = Path(out_path)
    cells = _collect_cells(data_dir)
    x_lo = min(edges[0] for edges, _ in cells.values())
    x_hi = max(edges[-1] for edges, _ in cells.values())

    fig, axes = plt.subplots(
        len(POLICIES), len(KAPPAS), figsize=(14, 16), dpi=110, sharex=True
    )
    for i, policy in enumerate(POLICIES):
        for j, kappa in enumerate(KAPPAS):
            ax = axes[i, j]
            edges, counts = cells[(policy, kappa)]
            ax.bar(
                edges[:-1], counts, width=np.diff(edges), align="edge",
                color="#4878b0", edgecolor="none",
            )
            ax.set_title(f"{policy}, κ={kappa:g}", fontsize=9)
            ax.set_xlim(x_lo, x_hi)
            ax.tick_params(labelsize=7)
            if j == 0:
                ax.set_ylabel("paths", fontsize=8)
            if i == len(POLICIES) - 1:
                ax.set_xlabel("cumulative reward", fontsize=8)
    fig.tight_layout()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_table(table_csv: str | Path, out_path: str | Path) -> Path:
    """Markdown version of a reproduction table CSV (policies x kappa grid).

    Values are re-formatted to exactly two decimals and otherwise copied
    verbatim.
    """
    table_csv = Path(table_csv)
    out_path = Path(out_path)
    with open(table_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["policy"] or len(rows[0]) != len(KAPPAS) + 1:
        raise ValueError(f"{table_csv}: expected header 'policy' plus {len(KAPPAS)} kappa columns")
    body = {r[0]: r[1:] for r in rows[1:]}
    missing = [p for p in POLICIES if p not in body]
    if missing:
        raise ValueError(f"{table_csv}: missing policy row(s) {missing}")
    lines = [
        "| policy | " + " | ".join(h for h in rows[0][1:]) + " |",
        "| --- | " + " | ".join("---" for _ in rows[0][1:]) + " |",
    ]
    for policy in POLICIES:
        cells = [f"{float(v):.2f}" for v in body[policy]]
        lines.append(f"| {policy} | " + " | ".join(cells) + " |")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")
    return out_path
