"""Cubic Hermite discretization of the track beam on a uniform mesh.

The discrete space is C^1 (each node carries a value and a slope DOF), so it
conforms to the curvature term in the energy norm.  Pinned ends are imposed
by eliminating the two end displacement DOFs; the zero-moment end conditions
are natural in the weak form and need no constraint.

Unit-coefficient matrices are assembled once per mesh:

    M_hat[i, j] = integral phi_i phi_j        (mass)
    K_hat[i, j] = integral phi_i'' phi_j''    (bending)

Nonlinear and quartic integrals use a fixed 7-point Gauss rule per element,
which integrates w**3 * phi (degree 12) and w**4 (degree 12) exactly for the
cubic shape functions, so quadrature never contributes error to the
certificate checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import _kernels
from .errors import BoundaryMismatch, TooFewElements
from .params import BeamParams

__all__ = [
    "Mesh",
    "StateVec",
    "FemOperators",
    "build_mesh",
    "assemble_operators",
    "project_initial",
    "nonlinear_force",
    "load_vector",
    "energy_norm_sq",
    "quartic_integral",
    "evaluate_dofs",
    "l2_error",
]

N_QUAD = 7  # Gauss points per element; exact through polynomial degree 13

_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    """Uniform subdivision of [0, ell]."""

    ell: float
    n_el: int
    nodes: np.ndarray
    h: float


@dataclass
class StateVec:
    """Constrained (w, v) coefficient pair; layout per node is (value, slope)
    with the two end displacement values eliminated."""

    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.w.shape != self.v.shape or self.w.ndim != 1:
            raise ValueError("w and v must be 1-D arrays of identical length")

    def copy(self) -> "StateVec":
        return StateVec(self.w.copy(), self.v.copy())


def build_mesh(ell: float, n_el: int) -> Mesh:
    if n_el < 2:
        raise TooFewElements(f"need at least 2 elements, got {n_el}")
    if not ell > 0.0:
        raise ValueError(f"beam length must be positive, got {ell}")
    nodes = np.linspace(0.0, ell, n_el + 1)
    return Mesh(ell=float(ell), n_el=int(n_el), nodes=nodes, h=float(ell) / n_el)


def _hermite_values(s: np.ndarray, h: float) -> np.ndarray:
    """The four shape functions on the reference element, rows = local DOFs."""
    s = np.asarray(s, dtype=float)
    return np.stack(
        [
            1.0 - 3.0 * s**2 + 2.0 * s**3,
            h * (s - 2.0 * s**2 + s**3),
            3.0 * s**2 - 2.0 * s**3,
            h * (s**3 - s**2),
        ]
    )


def _hermite_derivs(s: np.ndarray, h: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.stack(
        [
            (-6.0 * s + 6.0 * s**2) / h,
            1.0 - 4.0 * s + 3.0 * s**2,
            (6.0 * s - 6.0 * s**2) / h,
            3.0 * s**2 - 2.0 * s,
        ]
    )


def _element_bending(h: float) -> np.ndarray:
    return (1.0 / h**3) * np.array(
        [
            [12.0, 6.0 * h, -12.0, 6.0 * h],
            [6.0 * h, 4.0 * h**2, -6.0 * h, 2.0 * h**2],
            [-12.0, -6.0 * h, 12.0, -6.0 * h],
            [6.0 * h, 2.0 * h**2, -6.0 * h, 4.0 * h**2],
        ]
    )


def _element_mass(h: float) -> np.ndarray:
    return (h / 420.0) * np.array(
        [
            [156.0, 22.0 * h, 54.0, -13.0 * h],
            [22.0 * h, 4.0 * h**2, 13.0 * h, -3.0 * h**2],
            [54.0, 13.0 * h, 156.0, -22.0 * h],
            [-13.0 * h, -3.0 * h**2, -22.0 * h, 4.0 * h**2],
        ]
    )


def _csr_to_banded(A: sp.csr_matrix, half_bandwidth: int = 3) -> np.ndarray:
    n = A.shape[0]
    ab = np.zeros((2 * half_bandwidth + 1, n))
    for d in range(-half_bandwidth, half_bandwidth + 1):
        diag = A.diagonal(d)
        if d >= 0:
            ab[half_bandwidth - d, d:] = diag
        else:
            ab[half_bandwidth - d, : n + d] = diag
    return ab


@dataclass
class FemOperators:
    """Assembled unit-coefficient matrices plus the quadrature tables the
    element kernels need.  Immutable by convention after assembly."""

    mesh: Mesh
    M_hat: sp.csr_matrix
    K_hat: sp.csr_matrix
    ab_M: np.ndarray          # banded storage of M_hat, (7, n_con)
    ab_K: np.ndarray          # banded storage of K_hat
    cho_M: np.ndarray         # banded Cholesky factor of M_hat (dual norms)
    B: np.ndarray             # shape functions at quad points, (4, nq)
    wq: np.ndarray            # physical quadrature weights, (nq,)
    xq: np.ndarray            # physical quadrature coordinates, (n_el, nq)
    edof: np.ndarray          # element -> full DOF indices, (n_el, 4)
    cdof: np.ndarray          # element -> constrained DOF indices, -1 eliminated
    keep: np.ndarray          # full indices of retained DOFs
    n_full: int
    n_con: int

    def expand(self, vec: np.ndarray) -> np.ndarray:
        """Constrained -> full coefficient vector (zeros at pinned ends)."""
        full = np.zeros(self.n_full)
        full[self.keep] = vec
        return full

    def restrict(self, vec: np.ndarray) -> np.ndarray:
        """Full -> constrained vector (drops the eliminated test functions)."""
        return vec[self.keep]

    def dual_norm(self, residual: np.ndarray) -> float:
        """L^2-representative norm of a load-type vector: sqrt(r^T M^-1 r)."""
        y = sla.cho_solve_banded((self.cho_M, False), residual)
        return float(np.sqrt(abs(residual @ y)))

    def zero_state(self) -> StateVec:
        return StateVec(np.zeros(self.n_con), np.zeros(self.n_con))


def assemble_operators(mesh: Mesh) -> FemOperators:
    """Assemble mass/bending matrices and quadrature tables for one mesh."""
    n_el, h = mesh.n_el, mesh.h
    n_full = 2 * (n_el + 1)

    edof = np.empty((n_el, 4), dtype=np.intp)
    for e in range(n_el):
        edof[e] = (2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3)

    Ke, Me = _element_bending(h), _element_mass(h)
    rows = np.repeat(edof, 4, axis=1).ravel()
    cols = np.tile(edof, (1, 4)).ravel()
    K_full = sp.coo_matrix(
        (np.tile(Ke.ravel(), n_el), (rows, cols)), shape=(n_full, n_full)
    ).tocsr()
    M_full = sp.coo_matrix(
        (np.tile(Me.ravel(), n_el), (rows, cols)), shape=(n_full, n_full)
    ).tocsr()

    # pinned ends: eliminate the two end displacement DOFs
    keep = np.setdiff1d(np.arange(n_full), [0, 2 * n_el])
    full_to_con = -np.ones(n_full, dtype=np.intp)
    full_to_con[keep] = np.arange(keep.size)
    cdof = full_to_con[edof]

    K_hat = K_full[np.ix_(keep, keep)].tocsr()
    M_hat = M_full[np.ix_(keep, keep)].tocsr()
    ab_M = _csr_to_banded(M_hat)
    ab_K = _csr_to_banded(K_hat)
    cho_M = sla.cholesky_banded(ab_M[:4], lower=False)

    gx, gw = np.polynomial.legendre.leggauss(N_QUAD)
    s = 0.5 * (gx + 1.0)
    wq = 0.5 * gw * h
    B = _hermite_values(s, h)
    xq = mesh.nodes[:-1, None] + s[None, :] * h

    return FemOperators(
        mesh=mesh, M_hat=M_hat, K_hat=K_hat, ab_M=ab_M, ab_K=ab_K, cho_M=cho_M,
        B=np.ascontiguousarray(B), wq=wq, xq=xq, edof=edof, cdof=cdof,
        keep=keep, n_full=n_full, n_con=keep.size,
    )


def _profile_pair(prof) -> tuple[Callable, Callable]:
    """Accept a SpatialProfile-like object or a (value, derivative) pair."""
    if hasattr(prof, "value") and hasattr(prof, "deriv"):
        return prof.value, prof.deriv
    if isinstance(prof, tuple) and len(prof) == 2:
        return prof
    raise TypeError(
        "initial data must provide values and first derivatives: "
        "pass a SpatialProfile or a (f, df) pair"
    )


def project_initial(w0, v0, mesh: Mesh, ops: FemOperators) -> StateVec:
    """Hermite nodal interpolant of the initial displacement and velocity.

    Requires w0(0) = w0(ell) = 0 (within 1e-12); the interpolant then
    satisfies the pinned-end constraint exactly.
    """
    w_f, dw_f = _profile_pair(w0)
    v_f, dv_f = _profile_pair(v0)

    for end in (0.0, mesh.ell):
        if abs(float(w_f(end))) > _BOUNDARY_TOL:
            raise BoundaryMismatch(
                f"w0({end:g}) = {float(w_f(end)):.3e} violates the pinned end"
            )

    def interp(f, df):
        full = np.empty(ops.n_full)
        full[0::2] = np.asarray(f(mesh.nodes), dtype=float)
        full[1::2] = np.asarray(df(mesh.nodes), dtype=float)
        return ops.restrict(full)

    return StateVec(interp(w_f, dw_f), interp(v_f, dv_f))


def nonlinear_force(w_dofs: np.ndarray, alpha: float, ops: FemOperators) -> np.ndarray:
    """Galerkin projection of the cubic foundation force, alpha * integral w^3 phi_i."""
    full = _kernels.cubic_force(ops.expand(w_dofs), ops.B, ops.wq, ops.edof)
    return alpha * ops.restrict(full)


def load_vector(u_profile: Callable, ops: FemOperators) -> np.ndarray:
    """Entries integral u(xi) phi_i(xi) d xi, by per-element quadrature."""
    uq = np.asarray(u_profile(ops.xq), dtype=float)
    full = _kernels.project_quad(uq, ops.B, ops.wq, ops.edof, ops.n_full)
    return ops.restrict(full)


def energy_norm_sq(x: StateVec, p: BeamParams, ops: FemOperators) -> float:
    """Squared energy norm: EI |w_xx|^2 + k |w|^2 + rho_a |v|^2 in L^2."""
    w, v = x.w, x.v
    return float(
        w @ (p.EI * (ops.K_hat @ w) + p.k * (ops.M_hat @ w))
        + p.rho_a * (v @ (ops.M_hat @ v))
    )


def quartic_integral(w_dofs: np.ndarray, ops: FemOperators) -> float:
    """Integral of w^4 over the beam (exact for the cubic interpolant)."""
    return _kernels.quartic(ops.expand(w_dofs), ops.B, ops.wq, ops.edof)


def evaluate_dofs(mesh: Mesh, dofs_con: np.ndarray, xi, ops: FemOperators) -> np.ndarray:
    """Evaluate the interpolated field at arbitrary coordinates in [0, ell]."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    full = ops.expand(np.asarray(dofs_con, dtype=float))
    e = np.clip((xi / mesh.h).astype(int), 0, mesh.n_el - 1)
    s = xi / mesh.h - e
    Bv = _hermite_values(s, mesh.h)  # (4, len(xi))
    coeffs = full[ops.edof[e]]       # (len(xi), 4)
    return np.einsum("xa,ax->x", coeffs, Bv)


def l2_error(ops: FemOperators, dofs_con: np.ndarray, exact: Callable) -> float:
    """L^2(0, ell) distance between the discrete field and a reference."""
    vals = _kernels.eval_quad(ops.expand(dofs_con), ops.B, ops.edof)
    diff = vals - np.asarray(exact(ops.xq), dtype=float)
    return float(np.sqrt(np.sum(ops.wq * diff**2)))
