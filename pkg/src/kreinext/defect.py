"""Exact linear algebra on the four-dimensional defect Krein space.

Everything here lives in the fixed orthonormal basis

    (e_pp, e_pm, e_mp, e_mm)

of the defect space of a symmetric operator with deficiency indices <2,2>
that commutes with a fundamental symmetry J and anticommutes-partner R.
The first sign labels the J-eigenvalue, the second the Z-eigenvalue
(Z = +1 on the i-defect subspace, -1 on the -i one), so in this ordering

    J = diag(1,-1, 1,-1),   Z = diag(1, 1,-1,-1),   J Z = diag(1,-1,-1, 1),

and R swaps e_pp <-> e_pm and e_mm <-> e_mp.  J-self-adjoint extensions are
labelled by 2x2 unitaries U through hypermaximal neutral subspaces
M(U) = span(d1, d2) of the Krein space (M, [.,.]_{JZ}); the rotated
involutions R_omega and the two-parameter family

    C(theta, omega) = (alpha I - beta R_omega) J,
    alpha = cosh(ln theta),  beta = sinh(ln theta),

realize every C-symmetry that commutes with the underlying symmetric
operator.  Vectors are plain complex ndarrays of shape (4,), operators
complex ndarrays of shape (4,4).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import UnitarityError

__all__ = [
    "E_PP", "E_PM", "E_MP", "E_MM",
    "CParams", "UMatrix", "DeficiencySubspace", "Classification",
    "Symmetries", "standard_symmetries", "r_omega", "transition_operator",
    "c_operator", "c_generator", "projectors",
    "compose_u", "decompose_u", "extension_subspace", "indefinite_product",
    "is_hypermaximal_neutral", "classify", "u_with_c_symmetry",
    "invariance_residual", "is_invariant", "in_extension_center",
    "defect_elements", "mu_angle", "best_grid_match",
]

TWO_PI = 2.0 * math.pi

E_PP = np.array([1, 0, 0, 0], dtype=complex)
E_PM = np.array([0, 1, 0, 0], dtype=complex)
E_MP = np.array([0, 0, 1, 0], dtype=complex)
E_MM = np.array([0, 0, 0, 1], dtype=complex)

_J = np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)
_Z = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
_R = np.zeros((4, 4), dtype=complex)
_R[1, 0] = _R[0, 1] = 1.0   # e_pp <-> e_pm
_R[3, 2] = _R[2, 3] = 1.0   # e_mp <-> e_mm
_GRAM_JZ = _J @ _Z


def _wrap_angle(a: float) -> float:
    return float(a) % TWO_PI


class Symmetries(NamedTuple):
    J: np.ndarray
    Z: np.ndarray
    R: np.ndarray
    gram_jz: np.ndarray


def standard_symmetries() -> Symmetries:
    """The fundamental symmetries J, Z, R and the Gram operator JZ."""
    return Symmetries(_J.copy(), _Z.copy(), _R.copy(), _GRAM_JZ.copy())


@dataclass(frozen=True)
class CParams:
    """Parameters (theta, omega) of one member of the C family.

    theta > 0 is the hyperbolic strength (chi = ln theta), omega the rotation
    angle of R_omega.  (theta, omega) and (1/theta, omega + pi) define the
    same operator; :meth:`canonical` picks the representative with theta >= 1.
    """

    theta: float
    omega: float = 0.0

    def __post_init__(self):
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be a positive real, got {self.theta}")
        object.__setattr__(self, "omega", _wrap_angle(self.omega))

    @property
    def chi(self) -> float:
        return math.log(self.theta)

    @property
    def alpha(self) -> float:
        return math.cosh(self.chi)

    @property
    def beta(self) -> float:
        return math.sinh(self.chi)

    def canonical(self) -> "CParams":
        if self.theta >= 1.0:
            return self
        return CParams(1.0 / self.theta, self.omega + math.pi)


@dataclass(frozen=True, eq=False)
class UMatrix:
    """A 2x2 unitary in the canonical form

        U = e^{i phi} [[q e^{i gamma}, r e^{i xi}],
                       [-r e^{-i xi},  q e^{-i gamma}]],   q^2 + r^2 = 1,

    labelling one J-self-adjoint extension.  r >= 0 by convention; the
    residual (q, gamma) ~ (-q, gamma + pi) freedom is left to the caller.
    """

    q: float
    r: float
    phi: float
    gamma: float
    xi: float
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        norm = math.hypot(self.q, self.r)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("q^2 + r^2 must equal 1 after normalization")
        dev = np.abs(self.matrix.conj().T @ self.matrix - np.eye(2)).max()
        if dev > 1e-12:
            raise UnitarityError(f"stored matrix deviates from unitarity by {dev:.3e}")


@dataclass(frozen=True, eq=False)
class DeficiencySubspace:
    """Span of the two vectors d1, d2 defining an extension domain."""

    d1: np.ndarray
    d2: np.ndarray

    def basis_matrix(self) -> np.ndarray:
        return np.column_stack([self.d1, self.d2])


@dataclass(frozen=True)
class Classification:
    """Outcome of classifying one extension.

    kind is one of 'self_adjoint', 'non_real_spectrum', 'c_symmetric',
    'no_c_symmetry'; params carries the canonical (theta, omega) for the
    c_symmetric case and is None otherwise.
    """

    kind: str
    params: CParams | None = None

    _KINDS = ("self_adjoint", "non_real_spectrum", "c_symmetric", "no_c_symmetry")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown classification kind {self.kind!r}")
        if (self.kind == "c_symmetric") != (self.params is not None):
            raise ValueError("params must accompany exactly the c_symmetric kind")


def r_omega(omega: float) -> np.ndarray:
    """The rotated involution R_omega = R e^{i omega J}.

    Action: e_pp -> e^{i w} e_pm, e_pm -> e^{-i w} e_pp,
            e_mm -> e^{-i w} e_mp, e_mp -> e^{i w} e_mm.
    """
    w = complex(0.0, _wrap_angle(omega))
    out = np.zeros((4, 4), dtype=complex)
    out[1, 0] = cmath.exp(w)
    out[0, 1] = cmath.exp(-w)
    out[3, 2] = cmath.exp(w)
    out[2, 3] = cmath.exp(-w)
    return out


def transition_operator(p: CParams) -> np.ndarray:
    """Transition operator T = ((1-theta)/(1+theta)) R_omega.

    Self-adjoint, anticommutes with J, and ||T|| = |1-theta|/(1+theta) < 1,
    which is exactly the admissibility condition for an operator of
    transition between fundamental decompositions.
    """
    t = (1.0 - p.theta) / (1.0 + p.theta)
    return t * r_omega(p.omega)


def c_operator(p: CParams) -> np.ndarray:
    """C(theta, omega) = (alpha I - beta R_omega) J = (I+T)(I-T)^{-1} J."""
    return (p.alpha * np.eye(4) - p.beta * r_omega(p.omega)) @ _J


def c_generator(p: CParams) -> np.ndarray:
    """Self-adjoint generator Q with C = e^Q J; here Q = -chi R_omega.

    Because R_omega^2 = I the exponential has the closed form
    e^{-chi R_omega} = cosh(chi) I - sinh(chi) R_omega, so no general matrix
    exponential is needed.
    """
    return -p.chi * r_omega(p.omega)


def projectors(p: CParams) -> tuple[np.ndarray, np.ndarray]:
    """Complementary projectors with P+ - P- = C and P+ + P- = I.

    Their ranges are (I+T) applied to the positive/negative J-eigenspaces.
    """
    c = c_operator(p)
    eye = np.eye(4, dtype=complex)
    return 0.5 * (eye + c), 0.5 * (eye - c)


def compose_u(q: float, r: float, phi: float, gamma: float, xi: float) -> UMatrix:
    """Build the unitary from its canonical parameters.

    (q, r) is renormalized onto the unit circle; a deviation of q^2 + r^2
    from 1 beyond 1e-6 is rejected.
    """
    norm = math.hypot(q, r)
    if abs(norm * norm - 1.0) > 1e-6:
        raise ValueError(f"q^2 + r^2 = {norm * norm:.9f} deviates from 1 by more than 1e-6")
    q, r = q / norm, r / norm
    phi, gamma, xi = _wrap_angle(phi), _wrap_angle(gamma), _wrap_angle(xi)
    ph = cmath.exp(1j * phi)
    m = ph * np.array(
        [[q * cmath.exp(1j * gamma), r * cmath.exp(1j * xi)],
         [-r * cmath.exp(-1j * xi), q * cmath.exp(-1j * gamma)]],
        dtype=complex,
    )
    return UMatrix(q=q, r=r, phi=phi, gamma=gamma, xi=xi, matrix=m)


def decompose_u(m: np.ndarray) -> UMatrix:
    """Recover canonical parameters (q, r, phi, gamma, xi) from a 2x2 unitary.

    phi is half the principal argument of det(m), folded into [0, pi); the
    remaining phase freedom is absorbed into (q, gamma, xi), with r >= 0 and
    q >= 0 as the returned representative.  The reconstruction reproduces the
    input entries exactly up to roundoff.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    dev = np.abs(m.conj().T @ m - np.eye(2)).max()
    if dev > 1e-10:
        raise UnitarityError(f"matrix deviates from unitarity by {dev:.3e}")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    phi = 0.5 * cmath.phase(det)
    if phi < 0.0:
        phi += math.pi
    # e^{-i phi} m is special-unitary of the form [[x, y], [-conj(y), conj(x)]]
    a = cmath.exp(-1j * phi) * m
    x, y = a[0, 0], a[0, 1]
    q = abs(x)
    r = abs(y)
    gamma = cmath.phase(x) % TWO_PI if q > 1e-15 else 0.0
    xi = cmath.phase(y) % TWO_PI if r > 1e-15 else 0.0
    u = compose_u(q, r, phi, gamma, xi)
    if np.abs(u.matrix - m).max() > 1e-10:
        raise UnitarityError("decomposition failed to reproduce the input matrix")
    return u


def extension_subspace(u: UMatrix) -> DeficiencySubspace:
    """The hypermaximal neutral subspace M(U) = span(d1, d2).

    d1 = e_pp + q e^{i(phi+gamma)} e_pm + r e^{i(phi+xi)} e_mp,
    d2 = e_mm - r e^{i(phi-xi)} e_pm + q e^{i(phi-gamma)} e_mp.
    """
    d1 = np.array(
        [1.0,
         u.q * cmath.exp(1j * (u.phi + u.gamma)),
         u.r * cmath.exp(1j * (u.phi + u.xi)),
         0.0],
        dtype=complex,
    )
    d2 = np.array(
        [0.0,
         -u.r * cmath.exp(1j * (u.phi - u.xi)),
         u.q * cmath.exp(1j * (u.phi - u.gamma)),
         1.0],
        dtype=complex,
    )
    return DeficiencySubspace(d1=d1, d2=d2)


def indefinite_product(x: np.ndarray, y: np.ndarray, gram: np.ndarray) -> complex:
    """Indefinite inner product [x, y] = (gram x, y), linear in x.

    gram must be a self-adjoint involution on the defect space.
    """
    gram = np.asarray(gram, dtype=complex)
    if np.abs(gram - gram.conj().T).max() > 1e-10 or np.abs(gram @ gram - np.eye(4)).max() > 1e-10:
        raise ValueError("gram must be a self-adjoint involution")
    return complex(np.vdot(y, gram @ np.asarray(x, dtype=complex)))


def is_hypermaximal_neutral(s: DeficiencySubspace, gram: np.ndarray, tol: float = 1e-12) -> bool:
    """True when span(d1, d2) is gram-neutral and equals its gram-orthogonal complement.

    For a nondegenerate Gram operator of signature (2,2) a two-dimensional
    neutral subspace is automatically hypermaximal, so the test reduces to
    linear independence plus vanishing of the 2x2 pairing matrix.
    """
    gram = np.asarray(gram, dtype=complex)
    sig = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    if not (np.sum(sig > 0) == 2 and np.sum(sig < 0) == 2):
        raise ValueError("gram must have two-dimensional positive and negative parts")
    d = s.basis_matrix()
    if np.linalg.matrix_rank(d, tol=1e-10) != 2:
        return False
    pairing = d.conj().T @ gram @ d
    return bool(np.abs(pairing).max() <= tol)


def mu_angle(phi: float, theta: float) -> float:
    """The phase mu = arg(cos(phi) + i alpha_theta sin(phi)) in [0, 2 pi)."""
    if not theta > 0.0:
        raise ValueError("theta must be positive")
    alpha = math.cosh(math.log(theta))
    return math.atan2(alpha * math.sin(phi), math.cos(phi)) % TWO_PI


def classify(u: UMatrix, tol: float = 1e-10) -> Classification:
    """Classify the extension labelled by U.

    self_adjoint       iff |q| <= tol,
    non_real_spectrum  iff r <= tol (an eigenvector with eigenvalue i or -i
                       sits inside the extension domain),
    c_symmetric        iff 0 < |q| < |cos phi|, in which case omega = gamma
                       and chi = -atanh(q / cos phi); the returned parameters
                       are canonicalized to theta >= 1,
    no_c_symmetry      otherwise (boundary |q| = |cos phi| included, matching
                       the strict inequality of the admissible region).
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    if abs(u.q) <= tol:
        return Classification("self_adjoint")
    if u.r <= tol:
        return Classification("non_real_spectrum")
    cphi = math.cos(u.phi)
    if abs(u.q) < abs(cphi) - tol:
        ratio = u.q / cphi
        ratio = max(-1.0 + 1e-14, min(1.0 - 1e-14, ratio))
        chi = -math.atanh(ratio)
        params = CParams(math.exp(chi), u.gamma).canonical()
        return Classification("c_symmetric", params)
    return Classification("no_c_symmetry")


def u_with_c_symmetry(p: CParams, phi: float, xi: float) -> UMatrix:
    """The unitary whose extension carries the C(theta, omega) symmetry.

    q = -(beta/alpha) cos(phi), r = sqrt(1 + beta^2 sin^2 phi)/alpha,
    gamma = omega.  For theta = 1 or phi in {pi/2, 3pi/2} this degenerates to
    q = 0, the self-adjoint sub-family.
    """
    q = -(p.beta / p.alpha) * math.cos(phi)
    r = math.sqrt(1.0 + p.beta**2 * math.sin(phi) ** 2) / p.alpha
    return compose_u(q, r, phi, p.omega, xi)


def invariance_residual(s: DeficiencySubspace, op: np.ndarray) -> float:
    """Relative least-squares residual of op mapping span(d1,d2) into itself."""
    d = s.basis_matrix()
    qmat, _ = np.linalg.qr(d)
    res = 0.0
    for v in (op @ s.d1, op @ s.d2):
        w = v - qmat @ (qmat.conj().T @ v)
        scale = max(float(np.linalg.norm(v)), 1e-300)
        res = max(res, float(np.linalg.norm(w)) / scale)
    return res


def is_invariant(s: DeficiencySubspace, op: np.ndarray, tol: float = 1e-10) -> bool:
    """True when op maps span(d1, d2) into itself within tol."""
    return invariance_residual(s, op) <= tol


def in_extension_center(u: UMatrix, tol: float = 1e-10) -> bool:
    """Membership in the extension center: q = 0 and phi in {pi/2, 3pi/2}.

    Equivalent to J- and R-invariance of the extension subspace, i.e. to the
    supersymmetry of (A^2, J, R A) for the associated extension.
    """
    if abs(u.q) > tol:
        return False
    d1 = min(_angle_dist(u.phi, 0.5 * math.pi), _angle_dist(u.phi, 1.5 * math.pi))
    return d1 <= tol


def _angle_dist(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def defect_elements(p: CParams) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Defect vectors of the reduced half-problems, as coordinates in (M).

    Returns (g_i_plus, g_minus_i_plus, g_i_minus, g_minus_i_minus), equal to
    (I + ((1-alpha)/beta) R_omega) applied to e_pp, e_mp, e_pm, e_mm for
    theta != 1 and to the bare basis vectors for theta = 1.  Under the model
    normalization ||e||^2 = 1/2 each has squared norm alpha/(alpha+1).
    """
    if abs(p.theta - 1.0) < 1e-14:
        return E_PP.copy(), E_MP.copy(), E_PM.copy(), E_MM.copy()
    op = np.eye(4) + ((1.0 - p.alpha) / p.beta) * r_omega(p.omega)
    return op @ E_PP, op @ E_MP, op @ E_PM, op @ E_MM


def best_grid_match(
    s: DeficiencySubspace,
    thetas: np.ndarray,
    omegas: np.ndarray,
) -> tuple[float, float, float]:
    """Brute-force search of the C family for the best invariance of span(d1,d2).

    Vectorized over the whole (theta, omega) grid; returns
    (min residual, best theta, best omega) with the same relative residual
    normalization as :func:`invariance_residual`.
    """
    thetas = np.asarray(thetas, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    chis = np.log(thetas)
    al = np.cosh(chis)[:, None, None, None]
    be = np.sinh(chis)[:, None, None, None]

    ew = np.exp(1j * omegas)
    rw = np.zeros((omegas.size, 4, 4), dtype=complex)
    rw[:, 1, 0] = ew
    rw[:, 0, 1] = ew.conj()
    rw[:, 3, 2] = ew
    rw[:, 2, 3] = ew.conj()

    eye = np.eye(4, dtype=complex)
    cops = (al * eye[None, None] - be * rw[None, :]) @ _J  # (T, W, 4, 4)

    d = s.basis_matrix()
    qmat, _ = np.linalg.qr(d)
    proj = np.eye(4, dtype=complex) - qmat @ qmat.conj().T

    res = np.zeros(cops.shape[:2])
    for v in (s.d1, s.d2):
        img = cops @ v                     # (T, W, 4)
        rem = img @ proj.T                 # (I-P) img, via (proj @ img.T).T
        num = np.linalg.norm(rem, axis=-1)
        den = np.maximum(np.linalg.norm(img, axis=-1), 1e-300)
        res = np.maximum(res, num / den)

    idx = np.unravel_index(np.argmin(res), res.shape)
    return float(res[idx]), float(thetas[idx[0]]), float(omegas[idx[1]])
