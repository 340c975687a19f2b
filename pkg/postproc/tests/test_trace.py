import numpy as np
import pytest

from pac_postproc import TraceFormatError, plot_trace, read_trace

HEADER = "step,time,J,E_target,E_interface,vi_iters,cg_iters"


def test_read_trace_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(HEADER + "\n0,0,2.5,2,0.5,0,100\n1,0.1,2.0,1.6,0.4,3,80\n")
    data = read_trace(path)
    assert np.array_equal(data["step"], [0.0, 1.0])
    assert np.array_equal(data["J"], [2.5, 2.0])
    assert np.array_equal(data["E_interface"], [0.5, 0.4])


def test_read_trace_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("step,time,J,E_target,vi_iters,cg_iters\n")
    with pytest.raises(TraceFormatError, match="E_interface"):
        read_trace(path)


def test_read_trace_bad_field_count(tmp_path):
    path = tmp_path / "bad2.csv"
    path.write_text(HEADER + "\n0,0,1\n")
    with pytest.raises(TraceFormatError, match="line 2"):
        read_trace(path)


def test_read_trace_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(TraceFormatError):
        read_trace(path)


def test_plot_header_only(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(HEADER + "\n")
    out = tmp_path / "fig.png"
    assert plot_trace(path, out) == out
    assert out.stat().st_size > 0


def test_plot_two_rows(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(HEADER + "\n0,0,2.5,2,0.5,0,100\n1,0.1,2.0,1.6,0.4,3,80\n")
    out = tmp_path / "fig.png"
    plot_trace(path, out)
    assert out.stat().st_size > 0
