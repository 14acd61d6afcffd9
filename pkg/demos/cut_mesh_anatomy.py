"""Walk through one cut mesh: what gets cut, how the pieces look, and what
the quadrilateral element computes from its four edge DoFs.

    python demos/cut_mesh_anatomy.py
"""

import math

import numpy as np

from cutvem import Circle, build_background_mesh, cut_mesh, verify_max_angle
from cutvem.element import QuadKernel, element_curl_from_dofs, recover_interior_dof
from cutvem.mesh import CUT_TRIANGLE, PLAIN, SPLIT_TRIANGLE

circle = Circle(math.pi / 5)
bm = build_background_mesh(10)
cm = cut_mesh(bm, circle)

kinds = np.bincount(cm.tri_kind, minlength=3)
print(f"background: {len(bm.triangles)} triangles, {len(bm.edges)} edges")
print(f"cut mesh:   {kinds[PLAIN]} plain, {kinds[CUT_TRIANGLE]} cut and {kinds[SPLIT_TRIANGLE]} split "
      f"triangles, {len(cm.quads)} quads")
print(f"unknowns:   {cm.n_dofs} edges ({cm.n_diagonals} quad diagonals are not DoFs)")

cert = verify_max_angle(cm)
print(cert.summary())

# the discrete interface is a closed polygon through the cut points
seg = cm.gamma_polyline()
print(f"interface polygon: {len(seg)} chords, "
      f"length {np.linalg.norm(np.diff(cm.vertices[seg], axis=1), axis=-1).sum():.5f} "
      f"(circle: {2 * math.pi * circle.radius:.5f})")

# one quadrilateral: its DoFs fix the diagonal DoF, the curl and the projection
q = QuadKernel(cm.quad_coords()[0])
field = lambda p: np.stack([1.0 + p[..., 1], 0.5 - p[..., 0]], axis=-1)
g = q.dofs(field)
print("\nfirst quad vertices:\n", np.round(q.vertices, 4))
print("edge DoFs of (1 + y, 0.5 - x):", np.round(g, 6))
print("recovered diagonal DoF:       ", round(recover_interior_dof(q, g), 6))
print("curl from the boundary:       ", round(element_curl_from_dofs(q.vertices, g), 12))
print("projection vs centroid value: ", np.round(q.projection @ g, 12), np.round(field(q.centroid), 12))
