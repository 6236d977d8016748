"""Independent ground truth: closed-form modal solutions, finite differences,
and convergence-order fits.

For alpha = 0 and the pinned, moment-free end conditions the modes
sin(n pi xi / ell) diagonalize every operator in the model, so each modal
amplitude solves a damped scalar oscillator in closed form.  These solutions
never touch the finite element machinery and serve as the accuracy oracle
for the integrator and the spatial discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, NonlinearNotSupported
from .fem import FemOperators
from .params import BeamParams

__all__ = ["ModalSpec", "modal_solution", "fd_derivative", "convergence_order",
           "modal_amplitudes"]

_REPEATED_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class ModalSpec:
    """One beam mode with initial amplitude and rate."""

    n: int
    w_amp: float = 1.0
    v_amp: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("mode index must be >= 1")


def modal_solution(p: BeamParams, spec: ModalSpec, t):
    """Closed-form (w_amp(t), v_amp(t)) of one mode of the linear beam.

    Solves q'' + b q' + k q = 0 with b = (Cd lam + mu)/rho_a,
    k = (EI lam + k)/rho_a, lam = (n pi / ell)^4, handling distinct real,
    repeated (within 1e-12 of critical) and complex root pairs.
    """
    if p.alpha != 0.0:
        raise NonlinearNotSupported(
            "modal solutions exist only for the linear problem (alpha = 0)")
    t = np.asarray(t, dtype=float)
    lam = (spec.n * math.pi / p.ell) ** 4
    b = (p.Cd * lam + p.mu) / p.rho_a
    kk = (p.EI * lam + p.k) / p.rho_a
    w0, v0 = spec.w_amp, spec.v_amp
    disc = b * b - 4.0 * kk

    if disc > _REPEATED_ROOT_TOL:
        root = math.sqrt(disc)
        s1, s2 = 0.5 * (-b + root), 0.5 * (-b - root)
        c1 = (v0 - s2 * w0) / (s1 - s2)
        c2 = w0 - c1
        q = c1 * np.exp(s1 * t) + c2 * np.exp(s2 * t)
        dq = c1 * s1 * np.exp(s1 * t) + c2 * s2 * np.exp(s2 * t)
    elif disc < -_REPEATED_ROOT_TOL:
        sig = -0.5 * b
        om = 0.5 * math.sqrt(-disc)
        a = w0
        bb = (v0 - sig * w0) / om
        env = np.exp(sig * t)
        q = env * (a * np.cos(om * t) + bb * np.sin(om * t))
        dq = env * ((sig * a + om * bb) * np.cos(om * t)
                    + (sig * bb - om * a) * np.sin(om * t))
    else:
        s = -0.5 * b
        a, bb = w0, v0 - s * w0
        env = np.exp(s * t)
        q = env * (a + bb * t)
        dq = env * (bb + s * (a + bb * t))
    return q, dq


def fd_derivative(series, i: int, dt: float) -> float:
    """Central difference (f[i+1] - f[i-1]) / (2 dt) at an interior index."""
    series = np.asarray(series, dtype=float)
    if not 1 <= i <= series.size - 2:
        raise IndexError(
            f"index {i} is not interior for a series of length {series.size}")
    return float((series[i + 1] - series[i - 1]) / (2.0 * dt))


def convergence_order(errors) -> float:
    """Least-squares slope of log(error) against log(step)."""
    pts = [(float(h), float(e)) for h, e in errors]
    if len(pts) < 3:
        raise DegenerateData("need at least 3 refinement levels")
    if any(e <= 0.0 or h <= 0.0 for h, e in pts):
        raise DegenerateData("steps and errors must be positive")
    logh = np.log([h for h, _ in pts])
    loge = np.log([e for _, e in pts])
    slope, _ = np.polyfit(logh, loge, 1)
    return float(slope)


def modal_amplitudes(coeff_rows: np.ndarray, mode_dofs: np.ndarray,
                     ops: FemOperators) -> np.ndarray:
    """Mass-weighted projection of coefficient rows onto one mode interpolant.

    Returns the amplitude q(t_i) such that coeff_rows[i] ~ q(t_i) * mode_dofs.
    """
    ms = ops.M_hat @ mode_dofs
    return np.asarray(coeff_rows) @ ms / float(mode_dofs @ ms)
