"""Acceptance criteria 1-10.

Each test appends one ``CRITERION k: PASS|FAIL ...`` line that is printed in
the terminal summary, then asserts.  Run this file directly to get only the
acceptance lines.
"""

import math
import sys
import time

import numpy as np
import pytest

from cutvem.assembly import CoefficientField, apply_dirichlet, assemble_system, boundary_values
from cutvem.harness import ConstantField, ManufacturedCase, compute_errors, solve_vem
from cutvem.mesh import build_background_mesh, cut_mesh
from cutvem.solver import cg_solve, spd_probe, spec_iteration_cap
from cutvem.verify import (
    MAX_ANGLE_BOUND,
    galerkin_oracle_solve,
    interpolate_exact,
    max_angle_sweep,
    quad_checks,
    random_circles,
    random_cut_quads,
)

pytestmark = pytest.mark.slow

LEVELS = (10, 20, 40, 80, 160)
# reference convergence data for alpha+ = beta+ = 10
REF_E0 = (0.6257, 0.3258, 0.1661, 0.0843, 0.0424)
REF_E1 = (1.3893, 0.6998, 0.3534, 0.1784, 0.0894)
REF_RATE0 = (0.94, 0.97, 0.98, 0.99)
REF_RATE1 = (0.99, 0.99, 0.99, 1.00)
# alpha+ = beta+ = 100 at h = 1/40
HIGH_CONTRAST_E0_H40 = 0.0698
HIGH_CONTRAST_E1_H40 = 0.1976
GAMMAS = (0.1, 1.0, 10.0)
SEED = 0

_SOLVES = {}
_PATCH = {}


def vem(alpha_plus, beta_plus, n, gamma=1.0):
    key = (alpha_plus, beta_plus, gamma, n)
    if key not in _SOLVES:
        case = ManufacturedCase(alpha_plus=alpha_plus, beta_plus=beta_plus)
        _SOLVES[key] = solve_vem(case, n, gamma_k=gamma, keep_system=True)
    return _SOLVES[key]


def rates(values):
    return [math.log2(a / b) for a, b in zip(values, values[1:])]


def record(log, k, ok, detail):
    log.append(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def reference_check(gamma):
    runs = [vem(10.0, 10.0, n, gamma) for n in LEVELS]
    e0 = [r.e0 for r in runs]
    e1 = [r.e1 for r in runs]
    dev = max(max(abs(a / b - 1) for a, b in zip(e0, REF_E0)),
              max(abs(a / b - 1) for a, b in zip(e1, REF_E1)))
    rdev = max(max(abs(a - b) for a, b in zip(rates(e0), REF_RATE0)),
               max(abs(a - b) for a, b in zip(rates(e1), REF_RATE1)))
    return runs, e0, e1, dev, rdev


def test_criterion_1_reference_errors(acceptance_log):
    start = time.perf_counter()
    runs, e0, e1, dev, rdev = reference_check(1.0)
    elapsed = time.perf_counter() - start
    ok = dev <= 0.15 and rdev <= 0.1 + 1e-12
    detail = (f"(max value deviation {100 * dev:.1f}% <= 15%, max rate deviation {rdev:.3f} <= 0.1; "
              f"e0 {[round(v, 4) for v in e0]}, e1 {[round(v, 4) for v in e1]}; "
              f"{runs[-1].n_unknowns} unknowns at h=1/160, {elapsed:.0f} s)")
    record(acceptance_log, 1, ok, detail)


def test_criterion_2_high_contrast(acceptance_log):
    runs = [vem(100.0, 100.0, n) for n in LEVELS[1:]]
    h40 = runs[1]
    d0 = abs(h40.e0 / HIGH_CONTRAST_E0_H40 - 1)
    d1 = abs(h40.e1 / HIGH_CONTRAST_E1_H40 - 1)
    r = [min(a, b) for a, b in zip(rates([x.e0 for x in runs]), rates([x.e1 for x in runs]))]
    ok = d0 <= 0.15 and d1 <= 0.15 and min(r) >= 0.85
    detail = (f"(h=1/40: e0={h40.e0:.4f} vs {HIGH_CONTRAST_E0_H40} ({100 * d0:.0f}%), "
              f"e1={h40.e1:.4f} vs {HIGH_CONTRAST_E1_H40} ({100 * d1:.0f}%); "
              f"min rate for h <= 1/40 = {min(r):.2f} >= 0.85)")
    record(acceptance_log, 2, ok, detail)


def test_criterion_3_patch(acceptance_log):
    case = ConstantField((0.7, -1.2), coefficients=CoefficientField(1.0, 1.0, 1.0, 1.0))
    cm = cut_mesh(build_background_mesh(10), case.interface)
    sys_ = assemble_system(cm, case.coefficients, case.f)
    red = apply_dirichlet(sys_, boundary_values(cm, case.u))
    x, stats = cg_solve(red.matrix, red.rhs, tol=1e-12)
    e0, e1 = compute_errors(cm, red.expand(x), case)
    _PATCH["system"], _PATCH["stats"] = red, stats
    ok = e0 <= 1e-9 and e1 <= 1e-9
    record(acceptance_log, 3, ok, f"(N=10: e0={e0:.2e}, e1={e1:.2e}, both <= 1e-9)")


def test_criterion_4_geometry(acceptance_log):
    circles = random_circles(np.random.default_rng(SEED), 100)
    angle, viol = max_angle_sweep(circles, (8, 16, 32))
    ok = angle.worst <= MAX_ANGLE_BOUND + 1e-12 and viol.worst == 0
    detail = (f"(max angle {angle.worst:.6f} deg <= 135 deg over {angle.detail}; "
              f"assumption violations: {viol.detail})")
    record(acceptance_log, 4, ok, detail)


@pytest.fixture(scope="module")
def quad_sweep():
    rng = np.random.default_rng(SEED)
    Q, diag = random_cut_quads(rng, 1000, max_aspect=1e4)
    return quad_checks(Q, diag, rng.standard_normal((1000, 4)), rng.standard_normal((1000, 2)))


def test_criterion_5_unisolvence(acceptance_log, quad_sweep):
    qc = quad_sweep
    rec = max(qc.dof_error.max(), qc.diagonal_mismatch.max())
    curl = qc.curl_mismatch.max()
    ok = rec <= 1e-10 and curl <= 1e-10
    detail = (f"(1000 quads, max aspect {qc.aspect.max():.3g}: DoF reconstruction {rec:.2e}, "
              f"sub-curl mismatch {curl:.2e}, both <= 1e-10)")
    record(acceptance_log, 5, ok, detail)


def test_criterion_6_projection(acceptance_log, quad_sweep):
    qc = quad_sweep
    c, o = qc.constant_error.max(), qc.orthogonality.max()
    ok = c <= 1e-12 and o <= 1e-9
    record(acceptance_log, 6, ok, f"(constants reproduced to {c:.2e} <= 1e-12, orthogonality {o:.2e} <= 1e-9)")


def test_criterion_7_interpolation(acceptance_log):
    case = ManufacturedCase()
    errs = []
    for n in LEVELS[:4]:
        cm = vem(10.0, 10.0, n).mesh
        e0, e1 = compute_errors(cm, interpolate_exact(cm, case.u_minus, case.u_plus), case)
        errs.append(e0 + e1)
    eoc = rates(errs)
    ok = all(0.85 <= r <= 1.15 for r in eoc)
    record(acceptance_log, 7, ok, f"(EOC {[round(r, 3) for r in eoc]} in [0.85, 1.15])")


def test_criterion_8_oracle(acceptance_log):
    case = ManufacturedCase()
    o0, o1, ratios = [], [], []
    for n in LEVELS[:4]:
        v = vem(10.0, 10.0, n)
        o = galerkin_oracle_solve(v.mesh, case)
        o0.append(o.e0)
        o1.append(o.e1)
        ratios += [o.e0 / v.e0, o.e1 / v.e1]
    eoc = rates(o0) + rates(o1)
    ok = all(0.5 <= q <= 2.0 for q in ratios) and all(0.85 <= r <= 1.15 for r in eoc)
    detail = (f"(oracle/VEM ratios in [{min(ratios):.3f}, {max(ratios):.3f}] within factor 2; "
              f"oracle EOC in [{min(eoc):.3f}, {max(eoc):.3f}] within [0.85, 1.15])")
    record(acceptance_log, 8, ok, detail)


def test_criterion_9_gamma(acceptance_log):
    parts, ok = [], True
    for g in GAMMAS:
        _, e0, e1, _, rdev = reference_check(g)
        ok &= rdev <= 0.1 + 1e-12
        parts.append(f"gamma={g:g}: max rate deviation {rdev:.3f}")
    record(acceptance_log, 9, ok, "(" + "; ".join(parts) + ")")


def test_criterion_10_spd(acceptance_log):
    # every system built for the acceptance runs above
    for n in LEVELS:
        for g in GAMMAS:
            vem(10.0, 10.0, n, g)
        vem(100.0, 100.0, n)
    if "system" not in _PATCH:
        test_criterion_3_patch([])
    systems = [(f"a+={k[0]:g},b+={k[1]:g},gamma={k[2]:g},N={k[3]}", r.system.matrix, r.iterations, r.residual)
               for k, r in sorted(_SOLVES.items())]
    systems.append(("patch N=10", _PATCH["system"].matrix, _PATCH["stats"].iterations, _PATCH["stats"].residual))
    bad_spd, over_cap = [], []
    for name, A, iters, res in systems:
        d = spd_probe(A, n_probes=100, seed=SEED)
        if not d.passed or res > 1e-12:
            bad_spd.append(name)
        cap = spec_iteration_cap(A.shape[0])
        if iters > cap:
            over_cap.append(f"{name}: {iters} > {cap}")
    ok = not bad_spd and not over_cap
    detail = (f"({len(systems)} systems; symmetric with 100 positive probes and residual <= 1e-12: "
              f"{len(systems) - len(bad_spd)}/{len(systems)}; within iteration cap 20 sqrt(n) + 1000: "
              f"{len(systems) - len(over_cap)}/{len(systems)}"
              + (f"; over cap: {', '.join(over_cap)}" if over_cap else "") + ")")
    record(acceptance_log, 10, ok, detail)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
