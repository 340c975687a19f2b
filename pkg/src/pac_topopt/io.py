"""Configuration files, CSV/VTK artifact output, and the command line.

The config format is flat `key = value` text in six fixed sections; `#`
starts a comment.  Serialization is canonical (fixed section and key order,
shortest round-trip float formatting), so parse -> serialize is the identity
on canonical documents.  Traces are CSV with 17 significant digits; field
snapshots are legacy ASCII VTK unstructured grids.  All writes go to a
temporary file first and are renamed into place.
"""

import argparse
import os
import sys
import tempfile

import numpy as np

from . import targets as targets_mod
from .assembly import BoundarySpec, ConfigurationError
from .material import IsotropicElasticity, MaterialModel
from .mesh import FacetTag
from .pipeline import Pipeline, PipelineError, RunConfig, with_overrides
from .targets import TargetProfile, TargetSpec

__all__ = [
    "ConfigError",
    "parse_config",
    "serialize_config",
    "write_trace_csv",
    "write_vtk_snapshot",
    "cli",
    "main",
    "CONFIG_KEYS",
]


class ConfigError(ValueError):
    pass


# Every legal key, in canonical output order.  Values are filled from the
# document, then the base config (when given), then these defaults; None
# marks a required key, "(derived)" one computed from other keys.
CONFIG_KEYS = {
    "mesh": {
        "dim": None,
        "extents": None,
        "resolution": None,
        "dirichlet_stage1": "Left",
        "dirichlet_stage2": "Left",
    },
    "material": {
        "stage1_E_plus": "3.0",
        "stage1_nu_plus": "0.45",
        "stage1_E_minus": "0.7",
        "stage1_nu_minus": "0.45",
        "stage2_E_plus": "13.0",
        "stage2_nu_plus": "0.45",
        "stage2_E_minus": "0.6",
        "stage2_nu_minus": "0.45",
    },
    "loads": {
        "body_stage1": "(derived)",  # zero vector of the mesh dimension
        "body_stage2": "(derived)",
        "traction_stage1": "(derived)",  # pull of 0.1 along x1 on the Right face
        "traction_stage2": "",
    },
    "target": {
        "profile": None,
        "c_tar": None,
        "k_tar": "(derived)",  # required for the cosine profile, else absent
        "axis": "(derived)",  # unit vector along the last axis
        "weight": "(derived)",  # identity matrix
        "faces": None,
    },
    "flow": {
        "epsilon": None,
        "gamma": None,
        "tau": "(derived)",  # eps^2 / (100 gamma)
        "max_steps": "200",
        "seed": "0",
        "init": "random",
        "init_amplitude": "0.1",
        "init_value": "0.0",
        "cg_tol": "1e-09",
        "cg_max_iter": "50000",
        "vi_tol": "1e-09",
        "vi_max_sweeps": "10000",
        "stop_rtol": "1e-12",
        "stop_patience": "20",
    },
    "output": {
        "snapshot_every": "0",
    },
}


# -- parsing ----------------------------------------------------------------


def _parse_document(text):
    """Flat section/key/value dict from the raw text, with line diagnostics."""
    data = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {raw!r}")
            section = line[1:-1].strip()
            if section not in CONFIG_KEYS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            data.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any section")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS[section]:
            raise ConfigError(f"line {lineno}: unknown key {section}.{key}")
        if key in data[section]:
            raise ConfigError(f"line {lineno}: duplicate key {section}.{key}")
        data[section][key] = value
    return data


def _floats(text, expected, what):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != expected:
        raise ConfigError(f"{what}: expected {expected} numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _tags(text, what):
    tags = []
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            tags.append(FacetTag[name.upper()])
        except KeyError:
            raise ConfigError(f"{what}: unknown face {name!r}") from None
    return frozenset(tags)


def _tractions(text, dim, what):
    result = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(f"{what}: expected 'Face: g1,g2', got {chunk!r}")
        face, vec = chunk.split(":", 1)
        tag = next(iter(_tags(face, what)), None)
        if tag is None:
            raise ConfigError(f"{what}: missing face name in {chunk!r}")
        result[tag] = _floats(vec, dim, what)
    return result


def parse_config(text, base=None):
    """Validated RunConfig from a config document.

    Keys present in the document override `base` (a RunConfig, e.g. a
    preset); remaining gaps are filled from the defaults table.  Unknown
    sections/keys and invariant violations are rejected.
    """
    doc = _parse_document(text)

    def get(section, key, fallback=None):
        return doc.get(section, {}).get(key, fallback)

    if base is not None:
        merged = _document_from_config(base)
        for section, entries in doc.items():
            merged[section].update(entries)
        doc = merged

    def require(section, key):
        value = get(section, key, CONFIG_KEYS[section][key])
        if value is None or value == "(derived)":
            raise ConfigError(f"missing required key {section}.{key}")
        return value

    dim = int(require("mesh", "dim"))
    if dim not in (2, 3):
        raise ConfigError(f"mesh.dim must be 2 or 3, got {dim}")
    ext_parts = [p for p in require("mesh", "extents").split(";") if p.strip()]
    if len(ext_parts) != dim:
        raise ConfigError(f"mesh.extents: expected {dim} 'lo,hi' pairs")
    extents = tuple(_floats(p, 2, "mesh.extents") for p in ext_parts)
    resolution = tuple(
        int(v) for v in _floats(require("mesh", "resolution"), dim, "mesh.resolution"))

    boundary = BoundarySpec(
        dirichlet_stage1=_tags(require("mesh", "dirichlet_stage1"), "mesh.dirichlet_stage1"),
        dirichlet_stage2=_tags(require("mesh", "dirichlet_stage2"), "mesh.dirichlet_stage2"),
        target=_tags(require("target", "faces"), "target.faces"),
    )

    mat = MaterialModel(
        stage1_plus=IsotropicElasticity(
            float(require("material", "stage1_E_plus")),
            float(require("material", "stage1_nu_plus"))),
        stage1_minus=IsotropicElasticity(
            float(require("material", "stage1_E_minus")),
            float(require("material", "stage1_nu_minus"))),
        stage2_plus=IsotropicElasticity(
            float(require("material", "stage2_E_plus")),
            float(require("material", "stage2_nu_plus"))),
        stage2_minus=IsotropicElasticity(
            float(require("material", "stage2_E_minus")),
            float(require("material", "stage2_nu_minus"))),
    )

    profile = require("target", "profile").lower()
    try:
        profile = TargetProfile(profile)
    except ValueError:
        raise ConfigError(f"target.profile: unknown profile {profile!r}") from None
    k_raw = get("target", "k_tar")
    axis_raw = get("target", "axis")
    if axis_raw in (None, "(derived)"):
        axis = (0.0,) * (dim - 1) + (1.0,)
    else:
        axis = _floats(axis_raw, dim, "target.axis")
    weight_raw = get("target", "weight")
    if weight_raw in (None, "(derived)", "id"):
        weight = tuple(np.eye(dim).ravel())
    elif weight_raw == "axis":
        w = np.outer(axis, axis)
        weight = tuple(w.ravel())
    else:
        weight = _floats(weight_raw, dim * dim, "target.weight")
    target = TargetSpec(
        profile=profile,
        c_tar=float(require("target", "c_tar")),
        k_tar=None if k_raw in (None, "(derived)", "") else float(k_raw),
        axis=axis,
        weight=weight,
    )

    epsilon = float(require("flow", "epsilon"))
    gamma = float(require("flow", "gamma"))
    tau_raw = get("flow", "tau", CONFIG_KEYS["flow"]["tau"])
    if tau_raw == "(derived)":
        if gamma <= 0.0:
            raise ConfigError("flow.gamma must be positive")
        tau = epsilon * epsilon / (100.0 * gamma)
    else:
        tau = float(tau_raw)

    zero = ",".join(["0.0"] * dim)
    body1 = _floats(get("loads", "body_stage1") or zero, dim, "loads.body_stage1")
    body2 = _floats(get("loads", "body_stage2") or zero, dim, "loads.body_stage2")
    pull = "Right: " + ",".join([str(targets_mod.TRACTION_MAGNITUDE)] + ["0.0"] * (dim - 1))
    tr1 = _tractions(get("loads", "traction_stage1", pull), dim, "loads.traction_stage1")
    tr2 = _tractions(get("loads", "traction_stage2", ""), dim, "loads.traction_stage2")

    config = RunConfig(
        extents=extents,
        resolution=resolution,
        boundary=boundary,
        target=target,
        epsilon=epsilon,
        gamma=gamma,
        tau=tau,
        material=mat,
        body_force_stage1=body1,
        body_force_stage2=body2,
        tractions_stage1=tr1,
        tractions_stage2=tr2,
        max_steps=int(require("flow", "max_steps")),
        seed=int(require("flow", "seed")),
        init_kind=require("flow", "init"),
        init_amplitude=float(require("flow", "init_amplitude")),
        init_value=float(require("flow", "init_value")),
        cg_tol=float(require("flow", "cg_tol")),
        cg_max_iter=int(require("flow", "cg_max_iter")),
        vi_tol=float(require("flow", "vi_tol")),
        vi_max_sweeps=int(require("flow", "vi_max_sweeps")),
        stop_rtol=float(require("flow", "stop_rtol")),
        stop_patience=int(require("flow", "stop_patience")),
        snapshot_every=int(require("output", "snapshot_every")),
    )
    return config.validate()


# -- serialization ------------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_vec(values):
    return ",".join(_fmt(float(v)) for v in values)


def _fmt_tags(tags):
    return ",".join(t.name.capitalize() for t in sorted(tags, key=int))


def _fmt_tractions(tractions):
    parts = []
    for tag in sorted(tractions, key=int):
        parts.append(f"{tag.name.capitalize()}: {_fmt_vec(tractions[tag])}")
    return " ; ".join(parts)


def _document_from_config(config):
    d = config.dim
    mat = config.material
    doc = {
        "mesh": {
            "dim": str(d),
            "extents": " ; ".join(_fmt_vec(pair) for pair in config.extents),
            "resolution": ",".join(str(n) for n in config.resolution),
            "dirichlet_stage1": _fmt_tags(config.boundary.dirichlet_stage1),
            "dirichlet_stage2": _fmt_tags(config.boundary.dirichlet_stage2),
        },
        "material": {
            "stage1_E_plus": _fmt(mat.stage1_plus.youngs_modulus),
            "stage1_nu_plus": _fmt(mat.stage1_plus.poisson_ratio),
            "stage1_E_minus": _fmt(mat.stage1_minus.youngs_modulus),
            "stage1_nu_minus": _fmt(mat.stage1_minus.poisson_ratio),
            "stage2_E_plus": _fmt(mat.stage2_plus.youngs_modulus),
            "stage2_nu_plus": _fmt(mat.stage2_plus.poisson_ratio),
            "stage2_E_minus": _fmt(mat.stage2_minus.youngs_modulus),
            "stage2_nu_minus": _fmt(mat.stage2_minus.poisson_ratio),
        },
        "loads": {
            "body_stage1": _fmt_vec(config.body_force_stage1 or (0.0,) * d),
            "body_stage2": _fmt_vec(config.body_force_stage2 or (0.0,) * d),
            "traction_stage1": _fmt_tractions(config.tractions_stage1),
            "traction_stage2": _fmt_tractions(config.tractions_stage2),
        },
        "target": {
            "profile": config.target.profile.value,
            "c_tar": _fmt(config.target.c_tar),
            "axis": _fmt_vec(config.target.axis),
            "weight": _fmt_vec(config.target.weight),
            "faces": _fmt_tags(config.boundary.target),
        },
        "flow": {
            "epsilon": _fmt(config.epsilon),
            "gamma": _fmt(config.gamma),
            "tau": _fmt(config.tau),
            "max_steps": str(config.max_steps),
            "seed": str(config.seed),
            "init": config.init_kind,
            "init_amplitude": _fmt(config.init_amplitude),
            "init_value": _fmt(config.init_value),
            "cg_tol": _fmt(config.cg_tol),
            "cg_max_iter": str(config.cg_max_iter),
            "vi_tol": _fmt(config.vi_tol),
            "vi_max_sweeps": str(config.vi_max_sweeps),
            "stop_rtol": _fmt(config.stop_rtol),
            "stop_patience": str(config.stop_patience),
        },
        "output": {
            "snapshot_every": str(config.snapshot_every),
        },
    }
    if config.target.k_tar is not None:
        doc["target"]["k_tar"] = _fmt(config.target.k_tar)
    return doc


def serialize_config(config):
    """Canonical text form of a RunConfig."""
    doc = _document_from_config(config)
    lines = []
    for section, keys in CONFIG_KEYS.items():
        lines.append(f"[{section}]")
        for key in keys:
            if key in doc[section]:
                lines.append(f"{key} = {doc[section][key]}")
        lines.append("")
    return "\n".join(lines)


# -- artifact output ----------------------------------------------------------


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError:
        try:
            os.unlink(tmp)
        finally:
            raise


TRACE_HEADER = "step,time,J,E_target,E_interface,vi_iters,cg_iters"


def write_trace_csv(trace, path):
    """Energy trace as CSV, floats printed with 17 significant digits."""
    lines = [TRACE_HEADER]
    for row in trace.rows:
        lines.append(
            f"{row.step},{row.time:.17g},{row.cost:.17g},"
            f"{row.target_energy:.17g},{row.interface_energy:.17g},"
            f"{row.vi_iterations},{row.cg_iterations}")
    try:
        _atomic_write(path, "\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def write_vtk_snapshot(mesh, phi, u_bar, u_hat, path):
    """Legacy ASCII VTK unstructured grid with phi, u_bar, u_hat point data."""
    d = mesh.dim
    n = mesh.n_vertices
    cell_type = 5 if d == 2 else 10  # VTK_TRIANGLE / VTK_TETRA

    def pad(vec):
        arr = np.asarray(vec, dtype=float).reshape(n, d)
        if d == 2:
            arr = np.hstack([arr, np.zeros((n, 1))])
        return arr

    lines = [
        "# vtk DataFile Version 3.0",
        "pac-topopt snapshot",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    for p in pad(mesh.vertices.ravel()):
        lines.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    m = mesh.n_cells
    lines.append(f"CELLS {m} {m * (d + 2)}")
    for cell in mesh.cells:
        lines.append(f"{d + 1} " + " ".join(str(int(v)) for v in cell))
    lines.append(f"CELL_TYPES {m}")
    lines.extend([str(cell_type)] * m)
    lines.append(f"POINT_DATA {n}")
    lines.append("SCALARS phi double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(f"{v:.17g}" for v in np.asarray(phi, dtype=float))
    for name, vec in (("u_bar", u_bar), ("u_hat", u_hat)):
        lines.append(f"VECTORS {name} double")
        for p in pad(vec):
            lines.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    try:
        _atomic_write(path, "\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc


# -- command line --------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pac-topopt",
        description="Phase-field topology optimization of printed active composites")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("config", help="preset id or config file path")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--steps", type=int, default=None)
    p_run.add_argument("--out", default="pac-topopt-out")

    p_verify = sub.add_parser("verify", help="run the verification oracles")
    p_verify.add_argument("suite", nargs="?", default=None)

    p_preset = sub.add_parser("preset", help="list or show experiment presets")
    p_sub = p_preset.add_subparsers(dest="action", required=True)
    p_sub.add_parser("list")
    p_show = p_sub.add_parser("show")
    p_show.add_argument("id")
    return parser


def _load_run_config(token):
    if token in targets_mod.PRESET_IDS:
        return targets_mod.preset(token)
    if not os.path.exists(token):
        raise FileNotFoundError(
            f"{token!r} is neither a preset id ({', '.join(targets_mod.PRESET_IDS)}) "
            "nor a config file")
    with open(token, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


def _cmd_run(args):
    config = _load_run_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.steps is not None:
        overrides["max_steps"] = args.steps
    if overrides:
        config = with_overrides(config, **overrides)
    pipe = Pipeline(config)
    trace_path = os.path.join(args.out, "trace.csv")
    try:
        result = pipe.run()
    except PipelineError as exc:
        write_trace_csv(exc.partial.trace, trace_path)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_trace_csv(result.trace, trace_path)
    for step, phi, u_bar, u_hat in result.snapshots:
        path = os.path.join(args.out, f"snapshot_{step:06d}.vtk")
        write_vtk_snapshot(pipe.mesh, phi, u_bar, u_hat, path)
    print(f"wrote {trace_path} and {len(result.snapshots)} snapshots")
    return 0


def _cmd_verify(args):
    from . import verify as verify_mod

    suites = verify_mod.default_suites()
    if args.suite is not None and args.suite not in suites:
        print(f"error: unknown suite {args.suite!r}; "
              f"known: {', '.join(suites)}", file=sys.stderr)
        return 1
    selected = [args.suite] if args.suite else list(suites)
    reports = [suites[name]() for name in selected]
    width = max(len(r.name) for r in reports)
    all_pass = True
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        print(f"{report.name:<{width}}  measured={report.measured:.6e}  "
              f"bound={report.bound:.6e}  {status}")
        all_pass &= report.passed
    return 0 if all_pass else 2


def _cmd_preset(args):
    if args.action == "list":
        for pid in targets_mod.PRESET_IDS:
            print(pid)
        return 0
    config = targets_mod.preset(args.id)
    print(serialize_config(config), end="")
    return 0


def cli(argv=None):
    """Entry point; returns 0 on success, 1 on usage error, 2 on failure."""
    threads = os.environ.get("PAC_TOPOPT_THREADS")
    if threads is not None and threads.strip() != "1":
        print("note: PAC_TOPOPT_THREADS is reserved; running single-threaded",
              file=sys.stderr)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "preset":
            return _cmd_preset(args)
        return 1
    except (ConfigError, ConfigurationError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver failures and the like
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli())
