"""Shared numerical machinery: quadrature, root bracketing, discretizations.

The discretizations are deliberately independent of the analytic spectral
formulas elsewhere in the package; they exist to cross-validate bound states
and resolvents by brute force.  Both Hamiltonians are put on a uniform grid
over [-L, L] with the origin excluded: one-sided limits at 0 live on ghost
values that are eliminated through the boundary condition, so the assembled
matrices are ordinary (non-generalized) eigenproblems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AccuracyError, NumericalFailure, SingularConfigurationError

__all__ = [
    "Grid", "DiscreteOperator",
    "integrate_improper", "adaptive_integrate", "find_root_bracketed",
    "discretize_schrodinger", "discretize_schrodinger_separated",
    "discretize_dirac", "point_spectrum", "resolvent_solve",
]

_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(15)
_NODES_HI, _WEIGHTS_HI = np.polynomial.legendre.leggauss(31)


def _panel(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    lo = half * np.sum(_WEIGHTS_LO * f(mid + half * _NODES_LO))
    hi = half * np.sum(_WEIGHTS_HI * f(mid + half * _NODES_HI))
    return hi, abs(hi - lo)


def adaptive_integrate(f: Callable, a: float, b: float, tol: float = 1e-10,
                       max_depth: int = 48) -> tuple[complex, float]:
    """Adaptive Gauss quadrature of a (possibly complex-valued) integrand.

    Each panel is estimated with 15- and 31-point Gauss rules; panels whose
    discrepancy exceeds their share of the budget are bisected.  Returns
    (value, error estimate); raises AccuracyError when the refinement depth
    is exhausted, carrying the best estimate found.
    """
    stack = [(a, b, tol, 0)]
    total = 0.0 + 0.0j
    err_total = 0.0
    while stack:
        lo, hi, budget, depth = stack.pop()
        val, err = _panel(f, lo, hi)
        if err <= budget or err <= 1e-16 * (1.0 + abs(val)):
            total += val
            err_total += err
            continue
        if depth >= max_depth:
            raise AccuracyError(
                f"quadrature failed to converge on [{lo}, {hi}] (error {err:.3e})",
                estimate=total + val, error=err_total + err,
            )
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid, 0.5 * budget, depth + 1))
        stack.append((mid, hi, 0.5 * budget, depth + 1))
    if np.iscomplexobj(total) and abs(total.imag) == 0.0:
        return total, err_total
    return total, err_total


def integrate_improper(f: Callable, tol: float = 1e-10) -> float:
    """Integral of f over (0, inf) for integrands with an O(y^-2) tail.

    The tail is folded onto the unit interval with the algebraic substitution
    y = u/(1-u), dy = du/(1-u)^2, after which the adaptive rule applies.
    """
    def g(u):
        y = u / (1.0 - u)
        return f(y) / (1.0 - u) ** 2

    val, _ = adaptive_integrate(g, 0.0, 1.0, tol=tol)
    return val.real if isinstance(val, complex) and val.imag == 0.0 else val


def find_root_bracketed(g: Callable[[float], float], a: float, b: float,
                        tol: float = 1e-10, max_iter: int = 400) -> float:
    """Bisection on a sign-changing bracket.

    Iterates until the bracket width and the residual |g| both drop below
    tol; raises AccuracyError when floating-point resolution is exhausted
    first (steep roots near the bracket scale).
    """
    fa, fb = g(a), g(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError("invalid bracket: g(a) and g(b) have the same sign")
    best, fbest = (a, abs(fa)) if abs(fa) < abs(fb) else (b, abs(fb))
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:  # float resolution exhausted
            break
        fm = g(mid)
        if abs(fm) < fbest:
            best, fbest = mid, abs(fm)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        if (b - a) < tol and fbest < tol:
            break
    if fbest > tol or (b - a) > tol:
        raise AccuracyError(
            f"bisection stalled: width {b - a:.3e}, residual {fbest:.3e} (target {tol:.1e})",
            estimate=best, error=fbest,
        )
    return best


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid on [-L, L] with the origin excluded.

    n interior nodes per half-line at x = j h, j = 1..n, spacing h = L/n;
    the homogeneous Dirichlet wall sits one spacing beyond the last node.
    """

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0.0:
            raise ValueError("L must be positive")
        if self.n < 100:
            raise ValueError("n must be at least 100")

    @property
    def h(self) -> float:
        return self.L / self.n

    def nodes_half(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    def nodes(self) -> np.ndarray:
        xr = self.nodes_half()
        return np.concatenate([-xr[::-1], xr])


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Assembled finite-difference operator plus boundary metadata.

    matrix has dimension 2n (Schrodinger) or 4n (Dirac spinors); ghost_map
    reconstructs the eliminated one-sided boundary values from an eigen- or
    solution vector, and bc_residual evaluates the continuum boundary
    condition on it (used to filter spurious discrete modes).
    """

    matrix: sp.spmatrix
    grid: Grid
    kind: str
    ghost_map: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    bc_residual: Callable[[np.ndarray], float] = field(repr=False)


def _schrodinger_assembly(grid: Grid) -> tuple[sp.lil_matrix, float, int]:
    n, h = grid.n, grid.h
    N = 2 * n  # indices 0..n-1: x = -(n-j) h descending to -h; n..2n-1: x = h..L
    main = np.full(N, 2.0 / h**2, dtype=complex)
    off = np.full(N - 1, -1.0 / h**2, dtype=complex)
    a = sp.diags([off, main, off], [-1, 0, 1], format="lil", dtype=complex)
    a[n - 1, n] = 0.0  # the stencil never crosses the origin
    a[n, n - 1] = 0.0
    return a, h, n


def discretize_schrodinger(t, grid: Grid) -> DiscreteOperator:
    """Finite-difference model of -d^2/dx^2 with coupling T Gamma0 f = Gamma1 f.

    Three-point Laplacian on each half-line, Dirichlet at the far walls.
    The one-sided values f(0+-) are ghosts; with second-order one-sided
    derivatives the two coupling equations become a 2x2 system for the
    ghosts, which is substituted back into the Laplacian rows nearest to the
    origin (the 'coupling rows').
    """
    tmat = np.asarray(getattr(t, "matrix", t), dtype=complex)
    a, h, n = _schrodinger_assembly(grid)
    c = 1.0 / (2.0 * h)
    # f'(0+) = c (-3 g+ + 4 u1 - u2),  f'(0-) = c (3 g- - 4 um1 + um2)
    # rows: T [ (g+ + g-)/2, -(f'+ + f'-)/2 ]^T = [ f'+ - f'-, g+ - g- ]^T
    t11, t12 = tmat[0]
    t21, t22 = tmat[1]
    mg = np.array(
        [[t11 / 2 + t12 * 1.5 * c + 3 * c, t11 / 2 - t12 * 1.5 * c + 3 * c],
         [t21 / 2 + t22 * 1.5 * c - 1.0, t21 / 2 - t22 * 1.5 * c + 1.0]],
        dtype=complex,
    )
    # right-hand side coefficients for [u1, u2, um1, um2]
    bu = np.array(
        [[(t12 / 2 + 1) * 4 * c, -(t12 / 2 + 1) * c, (t12 / 2 - 1) * (-4 * c), (t12 / 2 - 1) * c],
         [t22 / 2 * 4 * c, -t22 / 2 * c, -t22 / 2 * 4 * c, t22 / 2 * c]],
        dtype=complex,
    )
    if abs(np.linalg.det(mg)) < 1e-14 * max(1.0, np.abs(mg).max()) ** 2:
        raise SingularConfigurationError("ghost elimination is singular for this coupling")
    s = np.linalg.solve(mg, bu)  # [g+, g-] = s @ [u1, u2, um1, um2]
    u_idx = [n, n + 1, n - 1, n - 2]
    for col, idx in enumerate(u_idx):
        a[n, idx] += -s[0, col] / h**2       # row at x = +h uses g+
        a[n - 1, idx] += -s[1, col] / h**2   # row at x = -h uses g-

    def ghost_map(vec: np.ndarray) -> np.ndarray:
        u = np.array([vec[n], vec[n + 1], vec[n - 1], vec[n - 2]])
        g = s @ u
        dfp = c * (-3 * g[0] + 4 * vec[n] - vec[n + 1])
        dfm = c * (3 * g[1] - 4 * vec[n - 1] + vec[n - 2])
        return np.array([g[0], g[1], dfp, dfm])

    def bc_residual(vec: np.ndarray) -> float:
        fp, fm, dfp, dfm = ghost_map(vec)
        g0 = np.array([0.5 * (fp + fm), 0.5 * (-dfp - dfm)])
        g1 = np.array([dfp - dfm, fp - fm])
        scale = max(np.linalg.norm(g1), np.linalg.norm(tmat @ g0), 1e-30)
        return float(np.linalg.norm(tmat @ g0 - g1) / scale)

    return DiscreteOperator(a.tocsc(), grid, "schrodinger", ghost_map, bc_residual)


def discretize_schrodinger_separated(c_param: float, grid: Grid) -> DiscreteOperator:
    """Same operator with the separated conditions f(0+) = c f'(0+), f(0-) = -c f'(0-).

    c = 0 is the Dirichlet reference, c = inf (math.inf) the Neumann case.
    These extensions commute with parity and with sign(x) exactly, which the
    assembly preserves: the two half-line blocks are mirror images and never
    couple.
    """
    a, h, n = _schrodinger_assembly(grid)
    cc = 1.0 / (2.0 * h)
    if np.isinf(c_param):
        # f'(0+) = 0  ->  g+ = (4 u1 - u2)/3
        coef = np.array([4.0 / 3.0, -1.0 / 3.0])
    else:
        # g+ = c f'(0+) = c cc (-3 g+ + 4 u1 - u2)
        den = 1.0 + 3.0 * c_param * cc
        coef = np.array([4.0 * c_param * cc / den, -c_param * cc / den])
    # right side row at x=+h and mirrored left row
    a[n, n] += -coef[0] / h**2
    a[n, n + 1] += -coef[1] / h**2
    a[n - 1, n - 1] += -coef[0] / h**2
    a[n - 1, n - 2] += -coef[1] / h**2

    def ghost_map(vec: np.ndarray) -> np.ndarray:
        gp = coef[0] * vec[n] + coef[1] * vec[n + 1]
        gm = coef[0] * vec[n - 1] + coef[1] * vec[n - 2]
        dfp = cc * (-3 * gp + 4 * vec[n] - vec[n + 1])
        dfm = cc * (3 * gm - 4 * vec[n - 1] + vec[n - 2])
        return np.array([gp, gm, dfp, dfm])

    def bc_residual(vec: np.ndarray) -> float:
        fp, fm, dfp, dfm = ghost_map(vec)
        scale = max(abs(fp), abs(fm), abs(dfp), abs(dfm), 1e-30)
        if np.isinf(c_param):
            return float(max(abs(dfp), abs(dfm)) / scale)
        return float(max(abs(fp - c_param * dfp), abs(fm + c_param * dfm)) / scale)

    return DiscreteOperator(a.tocsc(), grid, "schrodinger", ghost_map, bc_residual)


def discretize_dirac(boundary_rows: np.ndarray, c_light: float, grid: Grid) -> DiscreteOperator:
    """Staggered finite-difference model of -i c d/dx (x) sigma1 + (c^2/2) sigma3.

    The first spinor component lives on half-integer nodes (j - 1/2) h, the
    second on integer nodes j h, per half-line; the central first differences
    then couple the two components without spurious doubling.  boundary_rows
    is a 2x4 matrix annihilating admissible boundary values
    (f1(0+), f2(0+), f1(0-), f2(0-)); it is solved for the f2 ghosts at 0+-
    given the extrapolated f1 values, so extensions whose boundary space
    fails to determine f2(0+-) are rejected.

    Unknown ordering: [right f1 (n), right f2 (n), left f1 (n), left f2 (n)].
    """
    n, h = grid.n, grid.h
    m = c_light**2 / 2.0
    ic = -1j * c_light
    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    R1, R2, L1, L2 = 0, n, 2 * n, 3 * n  # block offsets

    # --- boundary (ghost) elimination: solve for (f2(0+), f2(0-))
    nrows = np.asarray(boundary_rows, dtype=complex)
    if nrows.shape != (2, 4):
        raise ValueError("boundary_rows must be 2x4")
    mg = nrows[:, [1, 3]]
    if abs(np.linalg.det(mg)) < 1e-12 * max(1.0, np.abs(nrows).max()) ** 2:
        raise SingularConfigurationError(
            "boundary space does not determine the second-component ghosts; "
            "this staggering cannot represent the extension"
        )
    bf1 = nrows[:, [0, 2]]
    # f1(0+) ~ (3 f1_{1/2} - f1_{3/2})/2 etc.; ghosts = -mg^{-1} bf1 @ f1(0+-)
    gcoef = -np.linalg.solve(mg, bf1)  # 2x2: [g+, g-] from [f1(0+), f1(0-)]

    # ghost contribution expressed on the four nearest f1 unknowns
    # f1(0+) = 1.5 u[R1] - 0.5 u[R1+1];  f1(0-) = 1.5 u[L1] - 0.5 u[L1+1]
    ext = np.zeros((2, 4), dtype=complex)  # columns: R1, R1+1, L1, L1+1
    ext[0, 0], ext[0, 1] = 1.5, -0.5
    ext[1, 2], ext[1, 3] = 1.5, -0.5
    gmap = gcoef @ ext  # [g+, g-] from the four unknowns

    # --- right half-line
    for j in range(n):
        # f1 equation at (j+1/2) h: ic (f2_j+1 - f2_j)/h with f2_0 = ghost g+
        i = R1 + j
        put(i, i, m)
        put(i, R2 + j, ic / h)
        if j == 0:
            for col, idx in enumerate([R1, R1 + 1, L1, L1 + 1]):
                put(i, idx, -ic / h * gmap[0, col])
        else:
            put(i, R2 + j - 1, -ic / h)
        # f2 equation at (j+1) h: ic (f1_{j+3/2} - f1_{j+1/2})/h
        i = R2 + j
        put(i, i, -m)
        if j + 1 < n:
            put(i, R1 + j + 1, ic / h)
        put(i, R1 + j, -ic / h)

    # --- left half-line (x < 0); f1 at -(j+1/2) h, f2 at -(j+1) h
    for j in range(n):
        # f1 equation at -(j+1/2) h: f2'(x) = (f2(x + h/2) - f2(x - h/2))/h
        #   = (Lf2[j-1] - Lf2[j])/h with Lf2[-1] = ghost g-
        i = L1 + j
        put(i, i, m)
        put(i, L2 + j, -ic / h)
        if j == 0:
            for col, idx in enumerate([R1, R1 + 1, L1, L1 + 1]):
                put(i, idx, ic / h * gmap[1, col])
        else:
            put(i, L2 + j - 1, ic / h)
        # f2 equation at -(j+1) h: f1'(x) = (Lf1[j] - Lf1[j+1])/h
        i = L2 + j
        put(i, i, -m)
        put(i, L1 + j, ic / h)
        if j + 1 < n:
            put(i, L1 + j + 1, -ic / h)

    a = sp.csc_matrix((vals, (rows, cols)), shape=(4 * n, 4 * n))

    def ghost_map(vec: np.ndarray) -> np.ndarray:
        u4 = np.array([vec[R1], vec[R1 + 1], vec[L1], vec[L1 + 1]])
        g = gmap @ u4
        f1p = 1.5 * vec[R1] - 0.5 * vec[R1 + 1]
        f1m = 1.5 * vec[L1] - 0.5 * vec[L1 + 1]
        return np.array([f1p, g[0], f1m, g[1]])

    def bc_residual(vec: np.ndarray) -> float:
        bd = ghost_map(vec)
        scale = max(float(np.abs(bd).max()), 1e-30)
        return float(np.abs(nrows @ bd).max() / scale)

    return DiscreteOperator(a, grid, "dirac", ghost_map, bc_residual)


def point_spectrum(
    op: DiscreteOperator,
    shifts: Sequence[float],
    window: tuple[float, float],
    k: int = 4,
    imag_tol: float = 1e-6,
    bc_tol: float = 1e-3,
    dedupe: float = 1e-6,
) -> list[float]:
    """Isolated eigenvalues inside a real window, by shift-invert scans.

    Every converged pair is kept only when the eigenvalue is essentially real,
    sits strictly inside the window, the eigenvector satisfies the continuum
    boundary condition (filters spurious modes) and decays at the far walls.
    """
    mat = op.matrix
    n_tot = mat.shape[0]
    found: list[float] = []
    for sigma in shifts:
        try:
            vals, vecs = spla.eigs(mat, k=min(k, n_tot - 2), sigma=sigma, which="LM")
        except (spla.ArpackNoConvergence, RuntimeError):
            continue
        for lam, vec in zip(vals, vecs.T):
            if abs(lam.imag) > imag_tol * max(1.0, abs(lam.real)):
                continue
            x = lam.real
            if not (window[0] < x < window[1]):
                continue
            if op.bc_residual(vec) > bc_tol:
                continue
            v = np.abs(vec)
            edge = max(v[0], v[-1]) if op.kind == "schrodinger" else _dirac_edge(v, op.grid.n)
            if edge > 1e-3 * v.max():
                continue
            found.append(x)
    found.sort()
    out: list[float] = []
    for x in found:
        if not out or abs(x - out[-1]) > dedupe * max(1.0, abs(x)):
            out.append(x)
    return out


def _dirac_edge(vabs: np.ndarray, n: int) -> float:
    # far-wall amplitudes of the four blocks
    return max(vabs[n - 1], vabs[2 * n - 1], vabs[3 * n - 1], vabs[4 * n - 1])


def resolvent_solve(op: DiscreteOperator, z: complex, f: np.ndarray) -> np.ndarray:
    """Solve (A - z) x = f on the grid; checks the solve residual."""
    f = np.asarray(f, dtype=complex)
    mat = op.matrix - z * sp.identity(op.matrix.shape[0], format="csc", dtype=complex)
    try:
        x = spla.spsolve(mat, f)
    except RuntimeError as exc:  # singular factorization
        raise NumericalFailure(f"resolvent solve failed at z={z}: {exc}") from exc
    resid = np.linalg.norm(mat @ x - f) / max(np.linalg.norm(f), 1e-300)
    if not np.isfinite(resid) or resid > 1e-8:
        raise NumericalFailure(
            f"resolvent solve ill-conditioned at z={z}: relative residual {resid:.3e}"
        )
    return x
