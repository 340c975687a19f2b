"""Energy-trace CSV reading and the three-panel cost figure."""

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

EXPECTED_COLUMNS = ["step", "time", "J", "E_target", "E_interface",
                    "vi_iters", "cg_iters"]


class TraceFormatError(ValueError):
    pass


def read_trace(path):
    """Columns of a solver trace as float arrays, keyed by header name."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file, expected a header") from None
        for column in EXPECTED_COLUMNS:
            if column not in header:
                raise TraceFormatError(f"{path}: missing column {column!r}")
        for column in header:
            if column not in EXPECTED_COLUMNS:
                raise TraceFormatError(f"{path}: unexpected column {column!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(
                    f"{path}: line {lineno} has {len(row)} fields, "
                    f"expected {len(header)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise TraceFormatError(f"{path}: line {lineno}: {exc}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def plot_trace(csv_path, out_path):
    """Cost decay, energy proportions, and log-scale target energy.

    Emits one PNG with three panels: the cost J versus step, the stacked
    proportions E_target/J and E_interface/J, and log10 of the target
    energy.  An empty (header-only) trace yields empty axes.
    """
    data = read_trace(csv_path)
    step = data["step"]
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))

    axes[0].plot(step, data["J"], color="black")
    axes[0].set_xlabel("step")
    axes[0].set_ylabel("J")
    axes[0].set_title("cost")

    if step.size:
        with np.errstate(divide="ignore", invalid="ignore"):
            p_target = np.where(data["J"] > 0, data["E_target"] / data["J"], 0.0)
            p_interface = np.where(data["J"] > 0, data["E_interface"] / data["J"], 0.0)
        axes[1].plot(step, p_target, color="tab:blue", label="target / J")
        axes[1].plot(step, p_interface, color="tab:red", linestyle="--",
                     label="interface / J")
        axes[1].legend(loc="best", fontsize=8)
    axes[1].set_xlabel("step")
    axes[1].set_ylabel("proportion of J")
    axes[1].set_ylim(-0.05, 1.05)
    axes[1].set_title("energy proportions")

    if step.size:
        positive = data["E_target"] > 0
        axes[2].plot(step[positive], np.log10(data["E_target"][positive]),
                     color="tab:blue")
    axes[2].set_xlabel("step")
    axes[2].set_ylabel("log10 E_target")
    axes[2].set_title("target energy")

    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
