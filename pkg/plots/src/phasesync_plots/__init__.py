"""Standalone figure rendering for phasesync sweep CSVs."""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaMismatch, load_rows, render, tightness_grid

__all__ = ["PlotSpec", "SchemaMismatch", "load_rows", "render", "tightness_grid"]
