"""`plot` command line: figures from solver traces and snapshots."""

import argparse
import os
import sys
from dataclasses import dataclass

from .render import render_phase
from .trace import TraceFormatError, plot_trace
from .vtkread import VtkFormatError

FIGURE_KINDS = ("trace", "proportions", "log_target", "phase_render")


@dataclass(frozen=True)
class FigureSpec:
    """One requested figure: input artifact, kind, output image path."""

    input_path: str
    kind: str
    output_path: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not os.path.exists(self.input_path):
            raise FileNotFoundError(f"input {self.input_path!r} does not exist")


def make_figure(spec):
    """Render a FigureSpec; the trace kinds all emit the three-panel sheet."""
    if spec.kind == "phase_render":
        return render_phase(spec.input_path, spec.output_path)
    return plot_trace(spec.input_path, spec.output_path)


def cli(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot", description="Figures from pac-topopt output files")
    sub = parser.add_subparsers(dest="command", required=True)
    p_trace = sub.add_parser("trace", help="cost/proportions/log-target panels")
    p_trace.add_argument("csv")
    p_trace.add_argument("out")
    p_phase = sub.add_parser("phase", help="phase-field render of a snapshot")
    p_phase.add_argument("vtk")
    p_phase.add_argument("out")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "trace":
            make_figure(FigureSpec(args.csv, "trace", args.out))
        else:
            make_figure(FigureSpec(args.vtk, "phase_render", args.out))
        return 0
    except (TraceFormatError, VtkFormatError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli())
