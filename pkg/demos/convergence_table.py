"""Convergence of the edge VEM for the circular interface problem.

Prints errors and observed rates for a jump alpha+ = beta+ = 10 (edit the
config below for other coefficients), then the same sweep for the
fitted-mesh Galerkin comparator.

    python demos/convergence_table.py [N ...]
"""

import math
import sys

from cutvem import build_background_mesh, cut_mesh
from cutvem.harness import StudyConfig, emit_report, run_convergence_study
from cutvem.verify import galerkin_oracle_solve

levels = tuple(int(a) for a in sys.argv[1:]) or (10, 20, 40, 80)
config = StudyConfig(n_values=levels, alpha_plus=10.0, beta_plus=10.0)

report = run_convergence_study(config, progress=lambda r: print(f"  solved N={r.n}", file=sys.stderr))
print(emit_report(report, "markdown"))
print("CG iterations:", report.column("cg_iters"))

# the comparator keeps the quad diagonals as unknowns and uses exact mass matrices
case = config.case()
prev = None
print("\ncomparator (fitted triangulation):")
for n in levels:
    sol = galerkin_oracle_solve(cut_mesh(build_background_mesh(n), case.interface), case)
    rate = "" if prev is None else f"  rates {math.log2(prev[0] / sol.e0):.2f} {math.log2(prev[1] / sol.e1):.2f}"
    print(f"  N={n:4d}  e0={sol.e0:.4f}  e1={sol.e1:.4f}{rate}")
    prev = (sol.e0, sol.e1)
