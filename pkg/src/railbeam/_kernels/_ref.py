"""Pure NumPy quadrature kernels (fallback backend).

Every function here has a signature-identical compiled twin in ``_fast``.
Vectors named ``w`` are full (unconstrained) DOF vectors; ``B`` holds the four
Hermite shape functions evaluated at the reference quadrature points,
``wq`` the physical quadrature weights (identical on every element of a
uniform mesh), ``edof`` the element-to-full-DOF map and ``cdof`` the
element-to-constrained-DOF map with -1 marking eliminated end displacements.
"""

from __future__ import annotations

import numpy as np


def eval_quad(w, B, edof):
    """Values of the interpolated field at every quadrature point, (n_el, nq)."""
    return w[edof] @ B


def project_quad(gq, B, wq, edof, n_full):
    """Assemble the load-type vector sum_q wq[q] * g(x_q) * phi_i(x_q)."""
    out = np.zeros(n_full)
    np.add.at(out, edof, (gq * wq) @ B.T)
    return out


def cubic_force(w, B, wq, edof):
    """Assemble sum_q wq[q] * w(x_q)**3 * phi_i(x_q) (coefficient applied by caller)."""
    vals = w[edof] @ B
    out = np.zeros(w.shape[0])
    np.add.at(out, edof, (wq * vals**3) @ B.T)
    return out


def quartic(w, B, wq, edof):
    """Integral of w**4 over the whole mesh."""
    vals = w[edof] @ B
    return float(np.sum(wq * vals**4))


def cubic_jacobian_ab(w, coeff, B, wq, edof, cdof, ab):
    """Add coeff * sum_q wq[q] * w(x_q)**2 * phi_a * phi_b to banded storage.

    ``ab`` is LAPACK general-band storage with three sub- and three
    super-diagonals: ab[3 + i - j, j] accumulates entry (i, j).
    """
    vals = w[edof] @ B
    blocks = np.einsum("aq,eq,bq->eab", B, coeff * wq * vals**2, B)
    n_el = edof.shape[0]
    rows_i = np.broadcast_to(cdof[:, :, None], (n_el, 4, 4))
    cols_j = np.broadcast_to(cdof[:, None, :], (n_el, 4, 4))
    valid = (rows_i >= 0) & (cols_j >= 0)
    np.add.at(ab, (3 + rows_i[valid] - cols_j[valid], cols_j[valid]), blocks[valid])
