"""P1 finite-element assembly for the two-stage elasticity systems.

All phase-dependent coefficients are evaluated at the cell mean of the nodal
phase field (one-point barycenter rule), which is exact for the constant
per-cell strains of P1 elements up to the coefficient interpolation.  Body
loads use the vertex-lumped inner product; boundary terms distribute each
facet's measure equally among its d vertices.  Assembly order is fixed, so
identical inputs give bit-identical matrices and vectors.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .material import Stage, fixity, fixity_prime
from .mesh import FacetTag

__all__ = [
    "ConfigurationError",
    "BoundarySpec",
    "SparseSpdSystem",
    "Assembler",
    "elementwise_phase",
]

# cells per assembly chunk; bounds scratch memory on fine meshes
_CHUNK = 65536


class ConfigurationError(ValueError):
    """Inconsistent boundary/load/target configuration."""


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary roles per stage: Dirichlet tag sets and the target surface.

    Tags not listed as Dirichlet are Neumann for that stage.  The target
    surface must avoid the stage-2 Dirichlet part so the adjoint boundary
    load acts on Neumann facets only.
    """

    dirichlet_stage1: frozenset
    dirichlet_stage2: frozenset
    target: frozenset

    def __post_init__(self):
        object.__setattr__(self, "dirichlet_stage1", frozenset(self.dirichlet_stage1))
        object.__setattr__(self, "dirichlet_stage2", frozenset(self.dirichlet_stage2))
        object.__setattr__(self, "target", frozenset(self.target))
        if not self.dirichlet_stage1:
            raise ConfigurationError("stage-1 Dirichlet set must be nonempty")
        if not self.dirichlet_stage2:
            raise ConfigurationError("stage-2 Dirichlet set must be nonempty")
        overlap = self.target & self.dirichlet_stage2
        if overlap:
            raise ConfigurationError(
                f"target faces {sorted(t.name for t in overlap)} overlap the "
                "stage-2 Dirichlet boundary")

    def dirichlet(self, stage):
        return self.dirichlet_stage1 if stage is Stage.PROGRAMMING else self.dirichlet_stage2


@dataclass
class SparseSpdSystem:
    """Symmetric sparse system with Dirichlet constraints.

    `matrix` is the full unconstrained operator; `constrained` marks
    Dirichlet dofs and `prescribed` holds their values.  Elimination is
    symmetric: solves run on the free-free block with the constrained
    columns moved to the right-hand side.
    """

    matrix: sp.csr_matrix
    constrained: np.ndarray
    prescribed: np.ndarray
    _free: np.ndarray = field(default=None, repr=False)
    _reduced: sp.csr_matrix = field(default=None, repr=False)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def free(self):
        if self._free is None:
            self._free = np.flatnonzero(~self.constrained)
        return self._free

    def reduced_matrix(self):
        if self._reduced is None:
            self._reduced = self.matrix[self.free][:, self.free].tocsr()
        return self._reduced

    def reduce_rhs(self, rhs):
        """Right-hand side of the free-dof system, Dirichlet data moved over."""
        rhs = np.asarray(rhs, dtype=float)
        if np.any(self.prescribed[self.constrained] != 0.0):
            lifted = np.zeros(self.dimension)
            lifted[self.constrained] = self.prescribed[self.constrained]
            return rhs[self.free] - (self.matrix @ lifted)[self.free]
        return rhs[self.free]

    def expand(self, x_free):
        x = np.zeros(self.dimension)
        x[self.free] = x_free
        x[self.constrained] = self.prescribed[self.constrained]
        return x


def elementwise_phase(phi, cells):
    """Cell means of a nodal field: the P1 value at each barycenter."""
    phi = np.asarray(phi, dtype=float)
    return phi[cells].mean(axis=1)


def _check_phase_bounds(phi, n_vertices):
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (n_vertices,):
        raise ValueError(f"phase field must have shape ({n_vertices},), got {phi.shape}")
    if np.max(np.abs(phi)) > 1.0 + 1e-12:
        raise ValueError("phase field violates |phi| <= 1")
    return phi


class Assembler:
    """Caches mesh geometry and assembles all discrete operators."""

    def __init__(self, mesh, material, boundary):
        self.mesh = mesh
        self.material = material
        self.boundary = boundary
        d = mesh.dim
        self.volumes = mesh.cell_volumes()
        self.grads = self._basis_gradients()

        # scatter indices for the vector-valued element matrices
        n_loc = (d + 1) * d
        dofs = (mesh.cells[:, :, None] * d + np.arange(d)[None, None, :]).reshape(-1, n_loc)
        self._cell_dofs = dofs
        self._rows = np.repeat(dofs, n_loc, axis=1).ravel()
        self._cols = np.tile(dofs, (1, n_loc)).ravel()

        self._facet_measures = mesh.facet_measures()
        self._dirichlet_vertices = {
            stage: self._vertices_on(boundary.dirichlet(stage))
            for stage in (Stage.PROGRAMMING, Stage.PROGRAMMED)
        }
        self._lumped_mass = None
        self._laplacian = None
        self._target_weights = None

    # -- geometry ---------------------------------------------------------

    def _basis_gradients(self):
        """Gradients of the barycentric basis, shape (n_cells, d+1, d)."""
        mesh = self.mesh
        n = mesh.dim + 1
        a = np.empty((mesh.n_cells, n, n))
        a[:, :, 0] = 1.0
        a[:, :, 1:] = mesh.vertices[mesh.cells]
        inv = np.linalg.inv(a)
        # column i of inv(a) holds (constant, gradient) of basis function i
        return inv[:, 1:, :].transpose(0, 2, 1).copy()

    def _vertices_on(self, tags):
        mask = np.zeros(self.mesh.n_vertices, dtype=bool)
        tag_codes = {int(t) for t in tags}
        for verts, tag in zip(self.mesh.facet_vertices, self.mesh.facet_tags):
            if int(tag) in tag_codes:
                mask[verts] = True
        return mask

    def dirichlet_mask(self, stage):
        """Boolean mask over all n_vertices*d dofs constrained for `stage`."""
        d = self.mesh.dim
        return np.repeat(self._dirichlet_vertices[stage], d)

    def cell_strains(self, u):
        """Constant symmetric gradient per cell of a nodal vector field."""
        d = self.mesh.dim
        u_cells = u.reshape(-1, d)[self.mesh.cells]
        grad = np.einsum("mia,mib->mab", u_cells, self.grads)
        return 0.5 * (grad + grad.transpose(0, 2, 1))

    def _cell_stress(self, stage, s_cells, strains):
        lam, mu = self.material.lame(stage, s_cells)
        tr = np.trace(strains, axis1=1, axis2=2)
        eye = np.eye(self.mesh.dim)
        return 2.0 * mu[:, None, None] * strains + (lam * tr)[:, None, None] * eye

    def _cell_stress_derivative(self, stage, strains):
        dlam, dmu = self.material.lame_difference(stage)
        tr = np.trace(strains, axis1=1, axis2=2)
        eye = np.eye(self.mesh.dim)
        return 2.0 * dmu * strains + dlam * tr[:, None, None] * eye

    # -- operators --------------------------------------------------------

    def stiffness(self, stage, phi, prescribed=None):
        """Elasticity stiffness with coefficients C(phi) frozen per cell.

        Dirichlet dofs for `stage` are recorded in the returned system;
        `prescribed` optionally sets nonzero Dirichlet values (nodal lifting).
        """
        mesh = self.mesh
        phi = _check_phase_bounds(phi, mesh.n_vertices)
        d = mesh.dim
        n = d + 1
        n_loc = n * d
        ndof = mesh.n_vertices * d
        s_cells = elementwise_phase(phi, mesh.cells)
        lam, mu = self.material.lame(stage, s_cells)
        eye = np.eye(d)

        matrix = sp.csr_matrix((ndof, ndof))
        for start in range(0, mesh.n_cells, _CHUNK):
            sl = slice(start, min(start + _CHUNK, mesh.n_cells))
            g = self.grads[sl]
            gg = np.einsum("mid,mjd->mij", g, g)
            k_mu = np.einsum("mij,ab->miajb", gg, eye)
            k_mu += np.einsum("mib,mja->miajb", g, g)
            k_lam = np.einsum("mia,mjb->miajb", g, g)
            k_loc = (self.volumes[sl, None, None, None, None]
                     * (mu[sl, None, None, None, None] * k_mu
                        + lam[sl, None, None, None, None] * k_lam))
            k_loc = k_loc.reshape(-1, n_loc, n_loc)
            nloc2 = n_loc * n_loc
            rows = self._rows[start * nloc2:sl.stop * nloc2]
            cols = self._cols[start * nloc2:sl.stop * nloc2]
            matrix = matrix + sp.coo_matrix(
                (k_loc.ravel(), (rows, cols)), shape=(ndof, ndof)).tocsr()
        matrix.sum_duplicates()

        constrained = self.dirichlet_mask(stage)
        values = np.zeros(ndof)
        if prescribed is not None:
            values[constrained] = np.asarray(prescribed, dtype=float)[constrained]
        return SparseSpdSystem(matrix=matrix, constrained=constrained, prescribed=values)

    def body_and_traction(self, stage, body_force, tractions):
        """Lumped body load plus exact constant-traction boundary load.

        `tractions` maps FacetTag -> constant traction vector; every tag must
        be Neumann for `stage`.
        """
        mesh = self.mesh
        d = mesh.dim
        load = np.zeros((mesh.n_vertices, d))
        body = np.asarray(body_force, dtype=float)
        if body.shape != (d,):
            raise ValueError(f"body force must be a {d}-vector")
        if np.any(body != 0.0):
            load += self.lumped_mass_diagonal()[:, None] * body[None, :]

        dirichlet = self.boundary.dirichlet(stage)
        for tag, g in tractions.items():
            tag = FacetTag(tag)
            if tag in dirichlet:
                raise ConfigurationError(
                    f"traction on {tag.name} conflicts with the Dirichlet set")
            g = np.asarray(g, dtype=float)
            on_tag = self.mesh.facet_tags == int(tag)
            share = self._facet_measures[on_tag] / d
            for verts, s in zip(mesh.facet_vertices[on_tag], share):
                load[verts] += s * g
        return load.ravel()

    def eigenstrain_rhs(self, phi, u_bar):
        """Stage-2 load from the programmed strains chi(phi) E(u_bar)."""
        mesh = self.mesh
        phi = _check_phase_bounds(phi, mesh.n_vertices)
        s_cells = elementwise_phase(phi, mesh.cells)
        strains = self.cell_strains(u_bar)
        sigma = fixity(s_cells)[:, None, None] * self._cell_stress(
            Stage.PROGRAMMED, s_cells, strains)
        return self._scatter_stress(sigma)

    def _scatter_stress(self, sigma):
        """Load vector with entries vol * sigma : E(N_i e_a), per cell."""
        mesh = self.mesh
        d = mesh.dim
        contrib = np.einsum("m,mab,mib->mia", self.volumes, sigma, self.grads)
        out = np.zeros(mesh.n_vertices * d)
        np.add.at(out, self._cell_dofs.reshape(mesh.n_cells, d + 1, d), contrib)
        return out

    def target_vertex_weights(self):
        """Boundary quadrature weights of the target surface, one per vertex."""
        if self._target_weights is None:
            mesh = self.mesh
            d = mesh.dim
            w = np.zeros(mesh.n_vertices)
            tag_codes = {int(t) for t in self.boundary.target}
            for verts, tag, measure in zip(
                    mesh.facet_vertices, mesh.facet_tags, self._facet_measures):
                if int(tag) in tag_codes:
                    w[verts] += measure / d
            self._target_weights = w
        return self._target_weights

    def target_rhs(self, u_hat, weight, u_target):
        """Boundary load from the weighted target mismatch W (u_hat - u_target)."""
        if not self.boundary.target:
            raise ConfigurationError("target surface is empty")
        d = self.mesh.dim
        w = self.target_vertex_weights()
        r = u_hat.reshape(-1, d) - u_target.reshape(-1, d)
        load = w[:, None] * (r @ np.asarray(weight, dtype=float).T)
        return load.ravel()

    def target_energy(self, u_hat, weight, u_target):
        """(1/2) int_target W(u_hat - u_target) . (u_hat - u_target)."""
        if not self.boundary.target:
            raise ConfigurationError("target surface is empty")
        d = self.mesh.dim
        w = self.target_vertex_weights()
        r = u_hat.reshape(-1, d) - u_target.reshape(-1, d)
        return 0.5 * float(np.sum(w * np.einsum("ia,ab,ib->i", r, weight, r)))

    def vi_source(self, phi, u_bar, u_hat, q_hat, p_bar):
        """Nodal elastic source of the gradient-flow variational inequality.

        Per cell the scalar density is

            chi'(s) C2(s) E(u_bar) : E(q_hat)
            - C2'(s) (E(u_hat) - chi(s) E(u_bar)) : E(q_hat)
            - C1'(s) E(u_bar) : E(p_bar),

        lumped to the cell's vertices with weight vol/(d+1).  The sign is
        such that the VI reads (A phi - b, zeta - phi) >= 0 with w entering
        b as -w.
        """
        mesh = self.mesh
        phi = _check_phase_bounds(phi, mesh.n_vertices)
        for name, u in (("u_bar", u_bar), ("u_hat", u_hat),
                        ("q_hat", q_hat), ("p_bar", p_bar)):
            if u.shape != (mesh.n_vertices * mesh.dim,):
                raise ValueError(f"{name} has wrong shape {u.shape}")
        s_cells = elementwise_phase(phi, mesh.cells)
        e_bar = self.cell_strains(u_bar)
        e_hat = self.cell_strains(u_hat)
        e_q = self.cell_strains(q_hat)
        e_p = self.cell_strains(p_bar)

        chi = fixity(s_cells)[:, None, None]
        chi_p = fixity_prime(s_cells)[:, None, None]
        sig_q2 = self._cell_stress(Stage.PROGRAMMED, s_cells, e_q)
        dsig_q2 = self._cell_stress_derivative(Stage.PROGRAMMED, e_q)
        dsig_p1 = self._cell_stress_derivative(Stage.PROGRAMMING, e_p)

        density = (
            np.einsum("mab,mab->m", chi_p * sig_q2, e_bar)
            - np.einsum("mab,mab->m", dsig_q2, e_hat - chi * e_bar)
            - np.einsum("mab,mab->m", dsig_p1, e_bar)
        )
        out = np.zeros(mesh.n_vertices)
        weights = density * self.volumes / (mesh.dim + 1)
        np.add.at(out, mesh.cells, weights[:, None])
        return out

    def lumped_mass_diagonal(self):
        """m_i = sum of adjacent cell volumes / (d+1); sums to |Omega|."""
        if self._lumped_mass is None:
            mesh = self.mesh
            m = np.zeros(mesh.n_vertices)
            np.add.at(m, mesh.cells, (self.volumes / (mesh.dim + 1))[:, None])
            self._lumped_mass = m
        return self._lumped_mass

    def scalar_laplacian(self):
        """P1 stiffness of the scalar Laplacian (no boundary conditions)."""
        if self._laplacian is None:
            mesh = self.mesh
            n = mesh.dim + 1
            gg = np.einsum("m,mid,mjd->mij", self.volumes, self.grads, self.grads)
            rows = np.repeat(mesh.cells, n, axis=1).ravel()
            cols = np.tile(mesh.cells, (1, n)).ravel()
            lap = sp.coo_matrix(
                (gg.ravel(), (rows, cols)),
                shape=(mesh.n_vertices, mesh.n_vertices)).tocsr()
            lap.sum_duplicates()
            self._laplacian = lap
        return self._laplacian
