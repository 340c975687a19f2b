import numpy as np
import pytest


def square_snapshot_text(phi, u_bar=None, u_hat=None):
    """Legacy-ASCII snapshot of the 2-triangle unit square, matching the
    solver's writer layout."""
    points = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    cells = [(0, 2, 3), (0, 3, 1)]
    n = len(points)
    u_bar = np.zeros((n, 2)) if u_bar is None else np.asarray(u_bar, dtype=float)
    u_hat = np.zeros((n, 2)) if u_hat is None else np.asarray(u_hat, dtype=float)
    lines = [
        "# vtk DataFile Version 3.0",
        "test snapshot",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    lines += [f"{p[0]:.17g} {p[1]:.17g} 0" for p in points]
    lines.append(f"CELLS {len(cells)} {len(cells) * 4}")
    lines += ["3 " + " ".join(map(str, c)) for c in cells]
    lines.append(f"CELL_TYPES {len(cells)}")
    lines += ["5"] * len(cells)
    lines.append(f"POINT_DATA {n}")
    lines.append("SCALARS phi double 1")
    lines.append("LOOKUP_TABLE default")
    lines += [f"{v:.17g}" for v in phi]
    for name, vec in (("u_bar", u_bar), ("u_hat", u_hat)):
        lines.append(f"VECTORS {name} double")
        lines += [f"{v[0]:.17g} {v[1]:.17g} 0" for v in vec]
    return "\n".join(lines) + "\n"


@pytest.fixture
def snapshot_factory(tmp_path):
    def build(phi, name="snap.vtk", **kwargs):
        path = tmp_path / name
        path.write_text(square_snapshot_text(np.asarray(phi, dtype=float), **kwargs))
        return path

    return build
