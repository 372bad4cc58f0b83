"""Downstream rendering of banditlab CSV output: histogram grids, tables."""

from .render import (
    KAPPAS,
    POLICIES,
    MissingCellError,
    binned_mass_below,
    load_histogram,
    render_histograms,
    render_table,
)

__all__ = [
    "KAPPAS",
    "POLICIES",
    "MissingCellError",
    "binned_mass_below",
    "load_histogram",
    "render_histograms",
    "render_table",
]
