"""Figures from pac-topopt energy traces and VTK snapshots."""

from .cli import FigureSpec, cli, make_figure
from .render import render_phase
from .trace import TraceFormatError, plot_trace, read_trace
from .vtkread import VtkFormatError, read_snapshot

__version__ = "0.1.0"

__all__ = [
    "FigureSpec", "cli", "make_figure",
    "render_phase",
    "TraceFormatError", "plot_trace", "read_trace",
    "VtkFormatError", "read_snapshot",
    "__version__",
]
