import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pytest

from pac_postproc import VtkFormatError, read_snapshot, render_phase


def center_color(png_path):
    image = plt.imread(png_path)
    h, w = image.shape[:2]
    region = image[h // 2 - 5:h // 2 + 5, w // 2 - 5:w // 2 + 5, :3]
    return np.median(region.reshape(-1, 3), axis=0)


def test_read_snapshot(snapshot_factory):
    path = snapshot_factory([-1.0, 0.0, 0.5, 1.0])
    data = read_snapshot(path)
    assert data["points"].shape == (4, 3)
    assert data["cells"].shape == (2, 3)
    assert np.array_equal(data["phi"], [-1.0, 0.0, 0.5, 1.0])
    assert data["u_bar"].shape == (4, 3)


def test_malformed_vtk_reports_byte_offset(tmp_path):
    path = tmp_path / "bad.vtk"
    text = "junk with no dataset marker\n"
    path.write_text(text)
    with pytest.raises(VtkFormatError, match="byte"):
        read_snapshot(path)
    truncated = tmp_path / "trunc.vtk"
    truncated.write_text(
        "DATASET UNSTRUCTURED_GRID\nPOINTS 4 double\n0 0 0\n")
    with pytest.raises(VtkFormatError, match="byte"):
        read_snapshot(truncated)


def test_all_passive_renders_black(snapshot_factory, tmp_path):
    path = snapshot_factory([-1.0] * 4, name="passive.vtk")
    out = tmp_path / "passive.png"
    render_phase(path, out)
    color = center_color(out)
    assert np.all(color <= 0.15), color  # black field


def test_all_active_renders_grey(snapshot_factory, tmp_path):
    path = snapshot_factory([1.0] * 4, name="active.vtk")
    out = tmp_path / "active.png"
    render_phase(path, out)
    color = center_color(out)
    assert np.all(np.abs(color - 0.6) <= 0.15), color  # grey field


def test_render_with_displacements(snapshot_factory, tmp_path):
    u = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1]])
    path = snapshot_factory([0.0, 0.0, 1.0, -1.0], name="mixed.vtk",
                            u_bar=u, u_hat=-u)
    out = tmp_path / "mixed.png"
    assert render_phase(path, out) == out
    assert out.stat().st_size > 0


def test_rerender_identical_and_input_untouched(snapshot_factory, tmp_path):
    path = snapshot_factory([0.0, 0.3, -0.3, 1.0], name="idem.vtk")
    before = path.read_bytes()
    out1 = tmp_path / "r1.png"
    out2 = tmp_path / "r2.png"
    render_phase(path, out1)
    render_phase(path, out2)
    assert path.read_bytes() == before
    assert np.array_equal(plt.imread(out1), plt.imread(out2))


def test_render_3d_slices(tmp_path):
    # tiny hand-built tetrahedral snapshot: one cube corner tet
    lines = [
        "# vtk DataFile Version 3.0", "t", "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        "POINTS 4 double",
        "0 0 0", "1 0 0", "0 1 0", "0 0 1",
        "CELLS 1 5", "4 0 1 2 3",
        "CELL_TYPES 1", "10",
        "POINT_DATA 4",
        "SCALARS phi double 1", "LOOKUP_TABLE default",
        "-1", "1", "1", "-1",
        "VECTORS u_bar double", "0 0 0", "0 0 0", "0 0 0", "0 0 0",
        "VECTORS u_hat double", "0 0 0", "0 0 0", "0 0 0", "0 0 0",
    ]
    path = tmp_path / "tet.vtk"
    path.write_text("\n".join(lines) + "\n")
    out = tmp_path / "tet.png"
    render_phase(path, out)
    assert out.stat().st_size > 0
