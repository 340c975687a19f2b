"""Phase-field and displacement renders from VTK snapshots.

2D snapshots become cell-colored plots with the publication convention
(black passive material at phi = -1, grey active at phi = +1) and the two
displacement fields overlaid as displaced wireframes (programming stage in
red, programmed stage in green).  3D snapshots are shown as three
axis-aligned mid-plane slices of phi.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection
from matplotlib.colors import LinearSegmentedColormap
from matplotlib.tri import Triangulation
from scipy.interpolate import LinearNDInterpolator

from .vtkread import read_snapshot

# black = passive, grey = active
PHASE_CMAP = LinearSegmentedColormap.from_list(
    "phase", [(0.0, 0.0, 0.0), (0.6, 0.6, 0.6)])


def _is_flat(points):
    return np.all(points[:, 2] == points[0, 2])


def _wireframe(axis, points, displacement, edges, color):
    displaced = points + displacement
    segments = np.stack([displaced[edges[:, 0]], displaced[edges[:, 1]]], axis=1)
    axis.add_collection(LineCollection(segments[:, :, :2], colors=color,
                                       linewidths=0.4, alpha=0.7))


def render_phase(vtk_path, out_path):
    """Render one snapshot to a PNG; dispatches on the mesh dimension."""
    data = read_snapshot(vtk_path)
    if _is_flat(data["points"]) and data["cells"].shape[1] == 3:
        _render_2d(data, out_path)
    else:
        _render_3d(data, out_path)
    return out_path


def _render_2d(data, out_path):
    points, cells, phi = data["points"], data["cells"], data["phi"]
    tri = Triangulation(points[:, 0], points[:, 1], triangles=cells)
    cell_phi = phi[cells].mean(axis=1)

    fig, axis = plt.subplots(figsize=(9, 3))
    axis.tripcolor(tri, facecolors=cell_phi, cmap=PHASE_CMAP, vmin=-1.0, vmax=1.0)
    edges = tri.edges
    _wireframe(axis, points, data["u_bar"], edges, "red")
    _wireframe(axis, points, data["u_hat"], edges, "green")
    axis.set_aspect("equal")
    axis.set_title("phase field (black passive, grey active); "
                   "u_bar red, u_hat green")
    axis.autoscale()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _render_3d(data, out_path, samples=80):
    points, phi = data["points"], data["phi"]
    interp = LinearNDInterpolator(points, phi, fill_value=np.nan)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    mid = 0.5 * (lo + hi)
    planes = [(2, "x3", (0, 1)), (1, "x2", (0, 2)), (0, "x1", (1, 2))]

    fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))
    for axis_obj, (fixed, label, (a, b)) in zip(axes, planes):
        u = np.linspace(lo[a], hi[a], samples)
        v = np.linspace(lo[b], hi[b], samples)
        uu, vv = np.meshgrid(u, v)
        query = np.empty((uu.size, 3))
        query[:, a] = uu.ravel()
        query[:, b] = vv.ravel()
        query[:, fixed] = mid[fixed]
        values = interp(query).reshape(uu.shape)
        axis_obj.imshow(values, origin="lower", cmap=PHASE_CMAP, vmin=-1, vmax=1,
                        extent=(lo[a], hi[a], lo[b], hi[b]), aspect="equal")
        axis_obj.set_title(f"slice {label} = {mid[fixed]:.3g}")
        axis_obj.set_xlabel(f"x{a + 1}")
        axis_obj.set_ylabel(f"x{b + 1}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
