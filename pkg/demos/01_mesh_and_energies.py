"""Meshes and the Ginzburg-Landau interface energy.

Builds the 2D strip and 3D box meshes used by the experiments, checks the
basic bookkeeping, and evaluates the discrete interface energy of a planar
transition profile against the exact constant pi/2.
"""

import math

import numpy as np

import pac_topopt as pt
from pac_topopt.assembly import Assembler, BoundarySpec
from pac_topopt.material import default_material
from pac_topopt.verify import _gl_energy, sine_interface_profile

# the 2D strip of the first experiment family
strip = pt.build_box_mesh(((0.0, 6.0), (-0.5, 0.5)), (48, 8))
print(f"strip: {strip.n_vertices} vertices, {strip.n_cells} triangles, "
      f"{len(strip.boundary_facets)} boundary edges")
print(f"  cell volumes sum to {strip.cell_volumes().sum():.12f} (box volume 6)")

# the 3D box of the twist experiment
box = pt.build_box_mesh(((0.0, 6.0), (-3.0, 3.0), (0.0, 1.0)), (12, 12, 2))
print(f"box: {box.n_vertices} vertices, {box.n_cells} tetrahedra")
print(f"  surface measure {box.facet_measures().sum():.12f} (exact 96)")

# a diffuse interface of width pi*eps carries energy pi/2 per unit length
eps = 1.0 / (8.0 * math.pi)
res = round(1.0 / (eps / 4.0))
unit = pt.build_box_mesh(((0.0, 1.0), (0.0, 1.0)), (res, res))
asm = Assembler(unit, default_material(),
                BoundarySpec(dirichlet_stage1={pt.FacetTag.LEFT},
                             dirichlet_stage2={pt.FacetTag.LEFT},
                             target={pt.FacetTag.RIGHT}))
phi = sine_interface_profile(unit.vertices[:, 0], 0.5, eps)
energy = _gl_energy(asm, phi, eps)
print(f"interface energy {energy:.6f} vs pi/2 = {math.pi / 2:.6f} "
      f"({100 * abs(energy / (math.pi / 2) - 1):.2f}% off)")
