"""Uniform simplex meshes of axis-aligned boxes with tagged boundary facets.

2D rectangles are cut into triangles along the lower-left to upper-right
diagonal of every grid cell; 3D boxes are cut into six tetrahedra per grid
cell (Kuhn subdivision).  Both choices are conforming across neighbouring
cells and make vertex/cell numbering a pure function of (extents,
resolution), so identical arguments always produce bit-identical meshes.
"""

import itertools
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

__all__ = [
    "FacetTag",
    "SimplexMesh",
    "build_box_mesh",
    "facet_area",
]


class FacetTag(IntEnum):
    """Which box face a boundary facet lies on.

    Axis 0 carries LEFT/RIGHT, the last axis BOTTOM/TOP (so TOP is x2=max in
    2D and x3=max in 3D), and the middle axis of a 3D box FRONT/BACK.
    """

    LEFT = 0
    RIGHT = 1
    BOTTOM = 2
    TOP = 3
    FRONT = 4
    BACK = 5


def _axis_tags(dim):
    """(min_tag, max_tag) per axis for a mesh of dimension `dim`."""
    if dim == 2:
        return [(FacetTag.LEFT, FacetTag.RIGHT), (FacetTag.BOTTOM, FacetTag.TOP)]
    return [
        (FacetTag.LEFT, FacetTag.RIGHT),
        (FacetTag.FRONT, FacetTag.BACK),
        (FacetTag.BOTTOM, FacetTag.TOP),
    ]


@dataclass(frozen=True)
class SimplexMesh:
    """Conforming triangulation of a box.

    vertices      : (n_vertices, dim) coordinates
    cells         : (n_cells, dim+1) vertex indices, positively oriented
    facet_vertices: (n_boundary_facets, dim) vertex indices of boundary facets
    facet_tags    : (n_boundary_facets,) FacetTag codes
    extents       : per-axis (min, max)
    resolution    : per-axis grid cell counts
    """

    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    facet_vertices: np.ndarray
    facet_tags: np.ndarray
    extents: tuple = field(default=())
    resolution: tuple = field(default=())

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_cells(self):
        return self.cells.shape[0]

    @property
    def boundary_facets(self):
        """List of (vertex-index tuple, FacetTag) pairs."""
        return [
            (tuple(int(v) for v in verts), FacetTag(int(tag)))
            for verts, tag in zip(self.facet_vertices, self.facet_tags)
        ]

    def cell_volumes(self):
        """Signed volumes of all cells; positive by construction."""
        x = self.vertices[self.cells]
        edges = x[:, 1:, :] - x[:, :1, :]
        if self.dim == 2:
            det = edges[:, 0, 0] * edges[:, 1, 1] - edges[:, 0, 1] * edges[:, 1, 0]
            return det / 2.0
        det = np.linalg.det(edges)
        return det / 6.0

    def facet_measures(self):
        """(d-1)-measures of all boundary facets."""
        x = self.vertices[self.facet_vertices]
        if self.dim == 2:
            return np.linalg.norm(x[:, 1, :] - x[:, 0, :], axis=1)
        cross = np.cross(x[:, 1, :] - x[:, 0, :], x[:, 2, :] - x[:, 0, :])
        return 0.5 * np.linalg.norm(cross, axis=1)


# Local faces of a simplex, as index tuples into the cell's vertex list.
_TRI_FACES = ((0, 1), (1, 2), (2, 0))
_TET_FACES = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))

# Kuhn subdivision: one tetrahedron per permutation of the axes, each walking
# from the cell's min corner to its max corner one axis at a time.
_KUHN_PERMS = tuple(itertools.permutations(range(3)))


def build_box_mesh(extents, resolution):
    """Mesh the box prod_i [lo_i, hi_i] with resolution_i cells per axis.

    Returns a SimplexMesh with 2*n1*n2 triangles (2D) or 6*n1*n2*n3
    tetrahedra (3D), all with positive signed volume, and every boundary
    facet tagged with the box face it lies on.
    """
    extents = tuple((float(lo), float(hi)) for lo, hi in extents)
    resolution = tuple(int(n) for n in resolution)
    dim = len(extents)
    if dim not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {dim}")
    if len(resolution) != dim:
        raise ValueError("extents and resolution must have matching length")
    for lo, hi in extents:
        if not hi > lo:
            raise ValueError(f"degenerate extent [{lo}, {hi}]")
    for n in resolution:
        if n < 1:
            raise ValueError(f"resolution must be >= 1, got {n}")

    # linspace pins the endpoints exactly, which makes face tagging exact
    axes = [np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(extents, resolution)]
    grids = np.meshgrid(*axes, indexing="ij")
    vertices = np.stack([g.ravel() for g in grids], axis=1)

    if dim == 2:
        cells = _triangulate_2d(resolution)
    else:
        cells = _triangulate_3d(resolution)

    facet_vertices, facet_tags = _boundary_facets(dim, vertices, cells, extents)
    mesh = SimplexMesh(
        dim=dim,
        vertices=vertices,
        cells=cells,
        facet_vertices=facet_vertices,
        facet_tags=facet_tags,
        extents=extents,
        resolution=resolution,
    )
    vols = mesh.cell_volumes()
    if not np.all(vols > 0.0):
        raise AssertionError("negative cell volume in structured mesh")
    return mesh


def _triangulate_2d(resolution):
    nx, ny = resolution
    stride = ny + 1

    def vid(i, j):
        return i * stride + j

    cells = np.empty((2 * nx * ny, 3), dtype=np.int64)
    k = 0
    for i in range(nx):
        for j in range(ny):
            v00 = vid(i, j)
            v10 = vid(i + 1, j)
            v01 = vid(i, j + 1)
            v11 = vid(i + 1, j + 1)
            # diagonal v00 -> v11, both triangles counter-clockwise
            cells[k] = (v00, v10, v11)
            cells[k + 1] = (v00, v11, v01)
            k += 2
    return cells


def _triangulate_3d(resolution):
    nx, ny, nz = resolution
    sy = nz + 1
    sx = (ny + 1) * sy

    def vid(i, j, k):
        return i * sx + j * sy + k

    cells = np.empty((6 * nx * ny * nz, 4), dtype=np.int64)
    m = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                corner = np.array((i, j, k), dtype=np.int64)
                for perm in _KUHN_PERMS:
                    path = [corner.copy()]
                    for axis in perm:
                        nxt = path[-1].copy()
                        nxt[axis] += 1
                        path.append(nxt)
                    tet = [vid(*p) for p in path]
                    # odd permutations walk the cube with negative
                    # orientation; swap the last two vertices to fix it
                    parity = _perm_sign(perm)
                    if parity < 0:
                        tet[2], tet[3] = tet[3], tet[2]
                    cells[m] = tet
                    m += 1
    return cells


def _perm_sign(perm):
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _boundary_facets(dim, vertices, cells, extents):
    """Faces owned by exactly one cell, in (cell, local face) order."""
    local_faces = _TRI_FACES if dim == 2 else _TET_FACES
    counts = {}
    for cell in cells:
        for face in local_faces:
            key = tuple(sorted(int(cell[l]) for l in face))
            counts[key] = counts.get(key, 0) + 1

    facet_list = []
    for cell in cells:
        for face in local_faces:
            verts = tuple(int(cell[l]) for l in face)
            if counts[tuple(sorted(verts))] == 1:
                facet_list.append(verts)

    facet_vertices = np.asarray(facet_list, dtype=np.int64)
    tags = np.empty(len(facet_list), dtype=np.int64)
    axis_tags = _axis_tags(dim)
    for f, verts in enumerate(facet_list):
        coords = vertices[list(verts)]
        hits = []
        for axis, (lo, hi) in enumerate(extents):
            if np.all(coords[:, axis] == lo):
                hits.append(axis_tags[axis][0])
            elif np.all(coords[:, axis] == hi):
                hits.append(axis_tags[axis][1])
        if len(hits) != 1:
            raise AssertionError(f"boundary facet {verts} lies on {len(hits)} box faces")
        tags[f] = int(hits[0])
    return facet_vertices, tags


def facet_area(mesh, facet_id):
    """(d-1)-measure of boundary facet `facet_id`."""
    n = mesh.facet_vertices.shape[0]
    if not 0 <= facet_id < n:
        raise ValueError(f"facet id {facet_id} out of range [0, {n})")
    return float(mesh.facet_measures()[facet_id])
