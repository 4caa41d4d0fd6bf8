"""Acceptance criteria, one test per criterion, each printing a PASS line.

Every tolerance below is pinned; the independent oracles (boundary-matching
determinants, finite-difference discretizations, residue closed forms,
brute-force grid search) are never shared with the code paths they check.

Criterion 5 has one sub-check (the k value at z = -1e-6 against its limit 2
at absolute tolerance 1e-3) that cannot pass: k approaches its limit with a
square-root cusp, so the deviation at that argument is 2 sqrt(2e-6) = 2.83e-3
> 1e-3.  The check is implemented exactly as stated and is expected to fail;
see test_acceptance_05b.
"""

import math
import time

import numpy as np
import pytest
import scipy.sparse as sp

from kreinext import defect, dirac, schrodinger as sch
from kreinext.defect import CParams, compose_u, decompose_u, u_with_c_symmetry
from kreinext.errors import SingularConfigurationError
from kreinext.numerics import (Grid, discretize_dirac, discretize_schrodinger,
                               discretize_schrodinger_separated, point_spectrum,
                               resolvent_solve)

from conftest import haar_unitary

SYM = defect.standard_symmetries()


def report(num, label, worst, tol, t0, limit):
    elapsed = time.time() - t0
    print(f"criterion {num:>3}: {label}: residual {worst:.3e} (tol {tol:.1e}), "
          f"{elapsed:.1f}s (limit {limit:.0f}s)")
    assert worst <= tol, f"criterion {num} failed: {worst:.3e} > {tol:.1e}"
    assert elapsed < limit, f"criterion {num} exceeded runtime limit"


def test_acceptance_01_c_family_algebra():
    t0 = time.time()
    rng = np.random.default_rng(101)
    eye = np.eye(4)
    worst = 0.0
    for _ in range(100):
        th1 = rng.uniform(0.05, 20.0)
        th2 = rng.uniform(0.05, 20.0)
        om = rng.uniform(0, 2 * math.pi)
        c1 = defect.c_operator(CParams(th1, om))
        c2 = defect.c_operator(CParams(th2, om))
        worst = max(worst, np.abs(c1 @ c1 - eye).max())
        worst = max(worst, np.abs(c1.conj().T - defect.c_operator(CParams(1 / th1, om))).max())
        worst = max(worst, np.abs(SYM.J @ c1 @ c2
                                  - defect.c_operator(CParams(th2 / th1, om))).max())
        worst = max(worst, abs(np.linalg.norm(c1, 2) - max(th1, 1 / th1)))
    report(1, "C-family algebra (100 random pairs)", worst, 1e-10, t0, 1.0)


def test_acceptance_02_hypermaximal_neutrality():
    t0 = time.time()
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(1000):
        u = decompose_u(haar_unitary(rng))
        s = defect.extension_subspace(u)
        d = s.basis_matrix()
        worst = max(worst, np.abs(d.conj().T @ SYM.gram_jz @ d).max())
        if not defect.is_hypermaximal_neutral(s, SYM.gram_jz, tol=1e-12):
            worst = max(worst, 1.0)
    report(2, "hypermaximal neutrality (1000 random U)", worst, 1e-12, t0, 1.0)


def test_acceptance_03_classification_roundtrip():
    t0 = time.time()
    worst = 0.0
    thetas = (1.05, 1.1, 2.0, 5.0, 10.0)
    omegas = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    phis = np.linspace(0.12, 2 * math.pi - 0.12, 8)
    phis = phis[np.minimum(np.abs(phis - math.pi / 2),
                           np.abs(phis - 1.5 * math.pi)) > 0.05]
    xis = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    for th in thetas:
        for om in omegas:
            can = CParams(th, om).canonical()
            for ph in phis:
                for xi in xis:
                    cl = defect.classify(u_with_c_symmetry(CParams(th, om), ph, xi))
                    if cl.kind != "c_symmetric":
                        worst = max(worst, 1.0)
                        continue
                    worst = max(worst, abs(cl.params.theta - can.theta),
                                abs(cl.params.omega - can.omega))
    # degenerate classes
    for xi in xis:
        if defect.classify(compose_u(0, 1, 0.3, 0.0, xi)).kind != "self_adjoint":
            worst = max(worst, 1.0)
        if defect.classify(compose_u(1, 0, 0.3, xi, 0.0)).kind != "non_real_spectrum":
            worst = max(worst, 1.0)
    report(3, "classification roundtrip (5x8x8x8 grid)", worst, 1e-10, t0, 5.0)


def test_acceptance_04_completeness_brute_force():
    t0 = time.time()
    rng = np.random.default_rng(104)
    thetas = np.exp(np.linspace(math.log(1 / 20), math.log(20), 100))
    omegas = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    dchi = 2 * math.log(20) / 99
    dom = 2 * math.pi / 64
    n_sym = n_no = 0
    worst = 0.0
    # rejection-sample Haar unitaries; c-symmetric draws are kept only when
    # the recovered theta is covered by the search grid (theta <= 18), which
    # is what makes the one-cell criterion well posed
    while n_sym < 200 or n_no < 200:
        u = decompose_u(haar_unitary(rng))
        cl = defect.classify(u)
        s = defect.extension_subspace(u)
        if cl.kind == "c_symmetric" and n_sym < 200 and cl.params.theta <= 18.0:
            n_sym += 1
            _, th_b, om_b = defect.best_grid_match(s, thetas, omegas)
            can = CParams(th_b, om_b).canonical()
            dch = abs(math.log(can.theta) - math.log(cl.params.theta))
            dw = min((can.omega - cl.params.omega) % (2 * math.pi),
                     (cl.params.omega - can.omega) % (2 * math.pi))
            if dch > 1.01 * dchi or dw > 1.01 * dom:
                worst = max(worst, 1.0)
        elif cl.kind == "no_c_symmetry" and n_no < 200:
            n_no += 1
            res, _, _ = defect.best_grid_match(s, thetas, omegas)
            if res < 1e-8:
                worst = max(worst, 1.0)
    report(4, "completeness brute force (200+200 draws, 100x64 grid)",
           worst, 0.0, t0, 60.0)


def test_acceptance_05_k_integral():
    t0 = time.time()
    worst = 0.0
    for z in (-0.1, -1.0, -10.0, -100.0):
        worst = max(worst, abs(sch.k_integral(z, tol=1e-12) - sch.k_closed_form(z)))
    zs = -np.logspace(3, -6, 50)
    vals = [sch.k_integral(z) for z in zs]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        worst = max(worst, 1.0)
    report(5, "k quadrature vs residue form + monotonicity", worst, 1e-10, t0, 1.0)


@pytest.mark.xfail(strict=True, reason=(
    "k approaches its z->0- limit 2 with a square-root cusp: "
    "|k(-1e-6) - 2| = 2 sqrt(2e-6) = 2.83e-3 > 1e-3; the stated tolerance "
    "is not attainable at the stated argument (see decisions ledger)"))
def test_acceptance_05b_k_limit_value():
    t0 = time.time()
    worst = abs(sch.k_integral(-1e-6) - 2.0)
    report("5b", "k(-1e-6) = 2 +- 1e-3", worst, 1e-3, t0, 1.0)


def _delta(p: CParams, phi: float, xi: float) -> float:
    rho = math.sqrt(1.0 + p.beta**2 * math.sin(phi) ** 2)
    return p.alpha * (math.cos(phi) - math.sin(phi)) + rho * (math.cos(xi) + math.sin(xi))


def test_acceptance_06_tmatrix_cross_path():
    t0 = time.time()
    rng = np.random.default_rng(106)
    worst = 0.0
    done = 0
    # admissible draws keep |Delta| away from the singular surface, where
    # entries blow up like 1/Delta and an absolute entry gate loses meaning
    while done < 200:
        p = CParams(np.exp(rng.uniform(-2.5, 2.5)), rng.uniform(0, 2 * math.pi))
        ph, xi = rng.uniform(0, 2 * math.pi, size=2)
        if abs(_delta(p, ph, xi)) < 0.05:
            continue
        t1 = sch.coupling_from_params(p, ph, xi)
        t2 = sch.coupling_from_subspace(u_with_c_symmetry(p, ph, xi))
        worst = max(worst, np.abs(t1.matrix - t2.matrix).max())
        done += 1
    report(6, "coupling matrix cross-path (200 admissible draws)", worst, 1e-10, t0, 1.0)


def _draw_schrodinger_cases(rng, count):
    """Admissible draws with nonempty spectra and discretization-friendly roots."""
    cases = []
    while len(cases) < count:
        p = CParams(np.exp(rng.uniform(-1.5, 1.5)), rng.uniform(0, 2 * math.pi))
        ph, xi = rng.uniform(0, 2 * math.pi, size=2)
        try:
            t = sch.coupling_from_params(p, ph, xi)
        except SingularConfigurationError:
            continue
        spec = sch.bound_states(p, ph, xi)
        zs = spec.eigenvalues()
        if not zs:
            continue
        if any(not (-6.25 <= z <= -0.12) for z in zs):
            continue  # kappa in [0.35, 2.5]: resolved by h = 1e-3, decayed by L = 30
        cases.append((p, ph, xi, t, spec))
    return cases


def test_acceptance_07_bound_state_triple_agreement():
    t0 = time.time()
    rng = np.random.default_rng(107)
    cases = _draw_schrodinger_cases(rng, 20)
    worst_rel = 0.0
    worst_abs = 0.0
    grid = Grid(30.0, 30000)
    for p, ph, xi, t, spec in cases:
        zs = spec.eigenvalues()
        droots = sch.determinant_roots(t)
        assert len(droots) == len(zs), "determinant root count differs"
        for a, b in zip(zs, droots):
            worst_rel = max(worst_rel, abs(a - b) / abs(b))
        op = discretize_schrodinger(t, grid)
        ev = point_spectrum(op, zs + [-0.05, -1.0, -6.5], (-np.inf, -1e-3))
        assert len(ev) == len(zs), "discretization eigenvalue count differs"
        for a, b in zip(zs, ev):
            worst_abs = max(worst_abs, abs(a - b))
    worst = max(worst_rel / 1e-8, worst_abs / 1e-3)
    print(f"criterion   7 detail: factor-vs-determinant rel {worst_rel:.2e} "
          f"(tol 1e-8), discretization abs {worst_abs:.2e} (tol 1e-3)")
    report(7, "bound-state triple agreement (20 draws, n=30000)", worst, 1.0, t0, 120.0)


def test_acceptance_08_omega_invariance():
    t0 = time.time()
    rng = np.random.default_rng(108)
    worst = 0.0
    configs = []
    while len(configs) < 10:
        th = np.exp(rng.uniform(-1.5, 1.5))
        ph, xi = rng.uniform(0, 2 * math.pi, size=2)
        try:
            for om in (0.0, math.pi / 2, math.pi, 1.5 * math.pi):
                sch.coupling_from_params(CParams(th, om), ph, xi)
        except SingularConfigurationError:
            continue
        configs.append((th, ph, xi))
    for th, ph, xi in configs:
        base_formula = None
        base_det = None
        for om in (0.0, math.pi / 2, math.pi, 1.5 * math.pi):
            p = CParams(th, om)
            roots = sch.bound_states(p, ph, xi).eigenvalues()
            droots = sch.determinant_roots(sch.coupling_from_params(p, ph, xi))
            if base_formula is None:
                base_formula, base_det = roots, droots
                continue
            if len(roots) != len(base_formula) or len(droots) != len(base_det):
                worst = max(worst, 1.0)
                continue
            for a, b in zip(roots, base_formula):
                worst = max(worst, abs(a - b))
            for a, b in zip(droots, base_det):
                worst = max(worst, abs(a - b))
    report(8, "omega-invariance of spectra (10 configs x 4 omegas)", worst, 1e-10, t0, 10.0)


def test_acceptance_09_krein_resolvent():
    t0 = time.time()
    display = Grid(30.0, 2000)
    fine = Grid(30.0, 8000)
    xs = display.nodes()
    xf = fine.nodes()
    f_disp = np.exp(-((xs - 0.3) ** 2)).astype(complex)
    f_fine = np.exp(-((xf - 0.3) ** 2)).astype(complex)
    ratio = fine.n // display.n
    idx = np.concatenate([np.arange(0, fine.n, ratio),
                          fine.n + np.arange(ratio - 1, ratio * display.n, ratio)])
    worst_rel = 0.0
    worst_bc = 0.0
    for th, om, ph, xi in ((2.0, 0.7, 0.4, 0.9), (1.3, 2.1, 5.5, 2.0),
                           (5.0, 1.0472, 1.0, 4.0)):
        p = CParams(th, om)
        op = discretize_schrodinger(sch.coupling_from_params(p, ph, xi), fine)
        for z in (1 + 1j, -5.0 + 0j):
            res = sch.krein_resolvent_apply(f_disp, display, z, p, ph, xi)
            sol = resolvent_solve(op, z, f_fine)
            rel = np.linalg.norm(res.values - sol[idx]) / np.linalg.norm(sol[idx])
            worst_rel = max(worst_rel, rel)
            worst_bc = max(worst_bc, res.bc_residual())
    worst = max(worst_rel / 1e-3, worst_bc / 1e-6)
    print(f"criterion   9 detail: field rel {worst_rel:.2e} (tol 1e-3), "
          f"boundary residual {worst_bc:.2e} (tol 1e-6)")
    report(9, "Krein resolvent vs discretized solve (3 configs x 2 z)",
           worst, 1.0, t0, 60.0)


def test_acceptance_10_dirac_gap_states():
    t0 = time.time()
    rng = np.random.default_rng(110)
    worst = 0.0
    count = 0
    for c, draws in ((0.5, 4), (1.0, 3), (2.0, 3)):
        m = dirac.dirac_model(c)
        # reference member: empty gap, exact essential edges
        ref = dirac.gap_bound_states(compose_u(0, 1, math.pi / 2, 0.0, math.pi / 2), m)
        assert ref.discrete == ()
        assert ref.essential == ((-math.inf, -c**2 / 2), (c**2 / 2, math.inf))
        done = 0
        while done < draws:
            th = np.exp(rng.uniform(-1.0, 1.0))
            om, ph, xi = rng.uniform(0, 2 * math.pi, size=3)
            u = u_with_c_symmetry(CParams(th, om), ph, xi)
            spec = dirac.gap_bound_states(u, m)
            zs = spec.eigenvalues()
            if not zs or any(abs(z) > 0.88 * m.gap_edge for z in zs):
                continue
            kmin = min(dirac.gap_kappa(z, m) for z in zs)
            box = max(30.0, 16.0 / kmin)          # decay length coverage
            npts = int(max(4000, box * c / 0.004))  # phase resolution scales with c
            op = discretize_dirac(dirac.boundary_complement_rows(u, m), c, Grid(box, npts))
            window = (-m.gap_edge * 0.999, m.gap_edge * 0.999)
            ev = point_spectrum(op, zs + [0.0], window)
            assert len(ev) == len(zs), f"count mismatch at c={c}"
            for a, b in zip(zs, ev):
                worst = max(worst, abs(a - b))
            done += 1
            count += 1
    print(f"criterion  10 detail: {count} draws over c in (0.5, 1, 2)")
    report(10, "Dirac gap determinant vs discretization", worst, 1e-3, t0, 120.0)


def test_acceptance_11_susy_structure():
    t0 = time.time()
    worst_comm = 0.0
    worst_psd = 0.0
    # Schrodinger center members: separated conditions at three c values
    grid = Grid(20.0, 400)
    n = grid.n
    par = sp.csr_matrix((np.ones(2 * n), (np.arange(2 * n), np.arange(2 * n)[::-1])),
                        shape=(2 * n, 2 * n))
    sgn = sp.diags(np.concatenate([-np.ones(n), np.ones(n)]))
    for c in (0.0, 0.7, math.inf):
        a = discretize_schrodinger_separated(c, grid).matrix
        worst_comm = max(worst_comm, abs(par @ a - a @ par).max(),
                         abs(sgn @ a - a @ sgn).max())
        ra = (sgn @ a).toarray()
        lam = np.linalg.eigvals(ra @ ra)
        worst_psd = max(worst_psd, -min(lam.real.min(), 0.0))
    # Dirac center members (reference and one more xi)
    m = dirac.dirac_model(1.0)
    nd = 300
    gridd = Grid(20.0, nd)
    idx = np.arange(4 * nd)
    pj = np.empty(4 * nd, dtype=int)
    pj[:nd] = idx[2 * nd:3 * nd]
    pj[2 * nd:3 * nd] = idx[:nd]
    pj[nd:2 * nd] = idx[3 * nd:]
    pj[3 * nd:] = idx[nd:2 * nd]
    sj = np.concatenate([np.ones(nd), -np.ones(nd), np.ones(nd), -np.ones(nd)])
    jmat = sp.csr_matrix((sj, (idx, pj)), shape=(4 * nd, 4 * nd))
    rmat = sp.diags(np.concatenate([np.ones(2 * nd), -np.ones(2 * nd)]))
    for xi in (math.pi / 2, 0.0):
        u = compose_u(0, 1, math.pi / 2, 0.0, xi)
        a = discretize_dirac(dirac.boundary_complement_rows(u, m), m.c, gridd).matrix
        worst_comm = max(worst_comm, abs(jmat @ a - a @ jmat).max(),
                         abs(rmat @ a - a @ rmat).max())
        ra = (rmat @ a).toarray()
        lam = np.linalg.eigvals(ra @ ra)
        worst_psd = max(worst_psd, -min(lam.real.min(), 0.0))
    worst = max(worst_comm / 1e-10, worst_psd / 1e-6)
    print(f"criterion  11 detail: commutators {worst_comm:.2e} (tol 1e-10), "
          f"(RA)^2 lower bound defect {worst_psd:.2e} (tol 1e-6)")
    report(11, "SUSY/center structure of discretized models", worst, 1.0, t0, 60.0)
