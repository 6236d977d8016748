"""Lyapunov certificate construction and trajectory-level inequality checks.

The certificate is built around the augmented energy

    V(w, v) = integral EI w_xx^2 + k w^2 + (alpha/2) w^4 + rho_a v^2
              + 2 c w v  dxi

whose cross term extracts strict decay from the foundation damping.  For any
multiplier 0 < c < admissible_c_max(p) the module selects Young parameters
that make V sit between powers of the energy norm,

    c_l ||x||^2  <=  V(x)  <=  c_u ||x||^2 + c_h ||x||^4,

and decay along trajectories,

    dV/dt  <=  eps3 ||u(t)||^2 - omega V,

and then verifies those inequalities, the resulting exponential / a-priori /
ISS bounds, numerically along simulated trajectories.  Every check returns
margin records so forced-failure tests can tell a vacuous check from a real
one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InfeasibleMultiplier, InputClassMismatch, InvalidMultiplier
from .fem import FemOperators, Mesh, StateVec, assemble_operators, quartic_integral
from .integrator import Trajectory
from .params import BeamParams, admissible_c_max

__all__ = [
    "LyapunovCertificate",
    "ISSGains",
    "BoundCheck",
    "lyapunov_value",
    "embedding_constant",
    "select_constants",
    "record_lyapunov",
    "check_sandwich",
    "check_dissipation",
    "check_classical_decay",
    "check_mild_integral",
    "check_iss",
]

REL_TOL = 1e-9          # relative slack for algebraic (non-FD) inequality checks
FD_FLOOR = 1e-6         # relative floor for finite-difference derivative checks
EMBED_SAFETY = 1.25     # inflation of the discretely estimated embedding constant


# ---------------------------------------------------------------------------
# certificate data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LyapunovCertificate:
    """All constants realizing the sandwich and dissipation inequalities."""

    c: float        # cross-term multiplier
    eps_b: float    # Young parameter of the sandwich bounds
    eps1: float     # Young parameters of the dissipation estimate
    eps2: float
    eps3: float
    omega0: float   # raw decay coefficient
    eps_r: float    # Young parameter of the V <= r * (integral) comparison
    r: float        # comparison factor
    omega: float    # decay rate omega0 / r
    c_l: float      # lower sandwich constant
    c_u: float      # upper sandwich constant (quadratic part)
    c_h: float      # upper sandwich constant (quartic part)
    c_e: float      # discrete H^2 -> L^4 embedding constant estimate

    def validate(self, p: BeamParams) -> None:
        """Raise InfeasibleMultiplier unless every invariant holds strictly."""
        checks = {
            "0 < c < admissible_c_max": 0.0 < self.c < admissible_c_max(p),
            "c/rho_a < eps_b < k/c": self.c / p.rho_a < self.eps_b < p.k / self.c,
            "eps1 window": 0.0 < self.eps1
            < 2.0 * p.k / p.mu - self.c / (p.rho_a * self.eps3 * p.mu),
            "eps2 window": self.c / (2.0 * p.rho_a) < self.eps2
            and (p.Cd == 0.0 or self.eps2 < 2.0 * p.EI / p.Cd),
            "eps3 window": 0.0 < self.eps3
            < 2.0 * p.mu - 2.0 * self.c - p.mu * self.c / (self.eps1 * p.rho_a),
            "omega0 > 0": self.omega0 > 0.0,
            "r > 1": self.r > 1.0,
            "omega > 0": self.omega > 0.0,
            "c_l in (0, 1]": 0.0 < self.c_l <= 1.0,
            "c_u >= 1": self.c_u >= 1.0,
            "c_h >= 0": self.c_h >= 0.0,
            "c_e > 0": self.c_e > 0.0,
        }
        failed = [name for name, ok in checks.items() if not ok]
        if failed:
            raise InfeasibleMultiplier(
                "certificate invariants violated: " + ", ".join(failed))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "c", "eps_b", "eps1", "eps2", "eps3", "omega0", "eps_r", "r",
            "omega", "c_l", "c_u", "c_h", "c_e")}


@dataclass(frozen=True)
class ISSGains:
    """Realized comparison functions of the ISS estimates."""

    c_l: float
    c_u: float
    c_h: float
    omega: float
    eps3: float

    @classmethod
    def from_certificate(cls, cert: LyapunovCertificate) -> "ISSGains":
        return cls(c_l=cert.c_l, c_u=cert.c_u, c_h=cert.c_h,
                   omega=cert.omega, eps3=cert.eps3)

    def beta(self, s: float, t: float) -> float:
        """Transient bound on the squared norm; decreasing in t, increasing in s."""
        return math.exp(-self.omega * t) * (
            (self.c_u / self.c_l) * s**2 + (self.c_h / self.c_l) * s**4)

    def gamma_sq(self, s: float) -> float:
        """Squared-norm ISS input gain."""
        return (self.eps3 / self.omega) * s**2

    def psi1(self, s: float) -> float:
        return self.c_l * s**2

    def psi2(self, s: float) -> float:
        return self.c_u * s**2 + self.c_h * s**4

    def alpha_damp(self, s: float) -> float:
        return self.omega * self.c_l * s**2

    def sigma(self, s: float) -> float:
        return self.eps3 * s**2


@dataclass
class BoundCheck:
    """Outcome of one inequality scan along a trajectory."""

    name: str
    passed: bool
    worst_margin: float
    tolerance: float
    first_violation_time: float | None
    n_samples: int
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "check_name": self.name,
            "pass": self.passed,
            "worst_margin": self.worst_margin,
            "tolerance": self.tolerance,
            "first_violation_time": self.first_violation_time,
            "n_samples": self.n_samples,
            "note": self.note,
        }


def _scan(name: str, times: np.ndarray, margins: np.ndarray,
          tols: np.ndarray, note: str = "") -> BoundCheck:
    """Aggregate per-sample margins; a sample fails when margin < -tolerance."""
    deficits = margins + tols
    i_worst = int(np.argmin(deficits))
    bad = np.flatnonzero(deficits < 0.0)
    return BoundCheck(
        name=name,
        passed=bad.size == 0,
        worst_margin=float(margins[i_worst]),
        tolerance=float(tols[i_worst]),
        first_violation_time=float(times[bad[0]]) if bad.size else None,
        n_samples=int(times.size),
        note=note,
    )


# ---------------------------------------------------------------------------
# Lyapunov function and constants
# ---------------------------------------------------------------------------

def lyapunov_value(x: StateVec, c: float, p: BeamParams, ops: FemOperators) -> float:
    """V(x) for multiplier c; requires 0 < c < sqrt(rho_a * k) so V >= 0."""
    if not 0.0 < c < math.sqrt(p.rho_a * p.k):
        raise InvalidMultiplier(
            f"c = {c} outside (0, sqrt(rho_a k) = {math.sqrt(p.rho_a * p.k):g})")
    w, v = x.w, x.v
    quad_part = float(
        w @ (p.EI * (ops.K_hat @ w) + p.k * (ops.M_hat @ w))
        + p.rho_a * (v @ (ops.M_hat @ v))
        + 2.0 * c * (w @ (ops.M_hat @ v))
    )
    return quad_part + 0.5 * p.alpha * quartic_integral(w, ops)


def embedding_constant(mesh: Mesh, ops: FemOperators, n_starts: int = 10,
                       seed: int = 0, max_iter: int = 300,
                       safety: float = EMBED_SAFETY) -> float:
    """Discrete estimate of the constant in  integral w^4 <= c_e (integral w_xx^2)^2.

    Maximizes the scale-invariant ratio over the constrained space by
    projected gradient ascent from the first bending mode plus ``n_starts``
    random starts, then inflates the best ratio by ``safety``.  Deterministic
    for a fixed seed.
    """
    rng = np.random.default_rng(seed)

    def k_norm_sq(w):
        return float(w @ (ops.K_hat @ w))

    def ratio_ascent(w):
        wn = k_norm_sq(w)
        if wn <= 0.0:
            return 0.0
        w = w / math.sqrt(wn)
        q = quartic_integral(w, ops)
        eta = 0.1
        for _ in range(max_iter):
            grad = 4.0 * ops.restrict(_kernels.cubic_force(
                ops.expand(w), ops.B, ops.wq, ops.edof))
            gn = float(np.linalg.norm(grad))
            if gn == 0.0:
                break
            moved = False
            while eta > 1e-14:
                w_try = w + (eta / gn) * grad
                w_try /= math.sqrt(k_norm_sq(w_try))
                q_try = quartic_integral(w_try, ops)
                if q_try > q * (1.0 + 1e-14):
                    w, q = w_try, q_try
                    eta *= 1.3
                    moved = True
                    break
                eta *= 0.5
            if not moved:
                break
        return q  # equals the ratio because w^T K w == 1

    mode1 = np.zeros(ops.n_full)
    mode1[0::2] = np.sin(np.pi * mesh.nodes / mesh.ell)
    mode1[1::2] = (np.pi / mesh.ell) * np.cos(np.pi * mesh.nodes / mesh.ell)
    best = ratio_ascent(ops.restrict(mode1))
    for _ in range(n_starts):
        best = max(best, ratio_ascent(rng.standard_normal(ops.n_con)))
    return safety * best


def _dissipation_terms(p: BeamParams, c: float, eps1: float, eps2, eps3):
    """The four bracketed coefficients whose minimum sets the raw decay rate."""
    t1 = 1.0 - p.Cd * eps2 / (2.0 * p.EI)
    t2 = 1.0 - p.mu * eps1 / (2.0 * p.k) - c / (2.0 * p.rho_a * eps3 * p.k)
    t3 = p.mu / c - 1.0 - p.mu / (2.0 * eps1 * p.rho_a) - eps3 / (2.0 * c)
    t4 = p.rho_a / c - 1.0 / (2.0 * eps2)
    return t1, t2, t3, t4


def select_constants(p: BeamParams, c_fraction: float, mesh: Mesh,
                     ops: FemOperators | None = None,
                     c_e: float | None = None,
                     n_grid: int = 64) -> LyapunovCertificate:
    """Pick certificate constants for c = c_fraction * admissible_c_max(p).

    eps_b and eps_r take the closed-form value sqrt(k / rho_a) that equalizes
    their two Young terms, giving c_l = 1 - c/sqrt(rho_a k),
    c_u = r = 1 + c/sqrt(rho_a k).  eps2 is the geometric mean of its window
    (twice the lower bound when Cd = 0 leaves the window unbounded), and
    (eps1, eps3) maximize the raw decay rate over an n_grid x n_grid
    log-spaced scan of their coupled feasible region.
    """
    if not 0.0 < c_fraction < 1.0:
        raise ValueError(f"c_fraction must lie in (0, 1), got {c_fraction}")
    c = c_fraction * admissible_c_max(p)

    if ops is None:
        ops = assemble_operators(mesh)
    if c_e is None:
        c_e = embedding_constant(mesh, ops)

    sqrt_rak = math.sqrt(p.rho_a * p.k)
    eps_b = math.sqrt(p.k / p.rho_a)
    c_l = 1.0 - c / sqrt_rak
    c_u = 1.0 + c / sqrt_rak
    c_h = p.alpha * c_e / (2.0 * p.EI**2)

    eps2_lo = c / (2.0 * p.rho_a)
    if p.Cd > 0.0:
        eps2 = math.sqrt(eps2_lo * 2.0 * p.EI / p.Cd)
    else:
        eps2 = 2.0 * eps2_lo

    hi1 = 2.0 * p.k / p.mu
    eps1_grid = np.geomspace(hi1 * 1e-6, hi1 * (1.0 - 1e-9), n_grid)
    best = (-math.inf, math.nan, math.nan)
    for eps1 in eps1_grid:
        upper3 = 2.0 * p.mu - 2.0 * c - p.mu * c / (eps1 * p.rho_a)
        lower3 = c / (p.rho_a * (2.0 * p.k - p.mu * eps1))
        if upper3 <= lower3:
            continue
        eps3_grid = np.geomspace(lower3 * (1.0 + 1e-9),
                                 upper3 * (1.0 - 1e-9), n_grid)
        t1, t2, t3, t4 = _dissipation_terms(p, c, eps1, eps2, eps3_grid)
        omega0_grid = (2.0 * c / p.rho_a) * np.minimum(
            np.minimum(t1, t4), np.minimum(t2, t3))
        j = int(np.argmax(omega0_grid))
        if omega0_grid[j] > best[0]:
            best = (float(omega0_grid[j]), float(eps1), float(eps3_grid[j]))

    omega0, eps1, eps3 = best
    if not omega0 > 0.0:
        raise InfeasibleMultiplier(
            f"no feasible (eps1, eps3) for c = {c:g}; "
            "this cannot happen for c below admissible_c_max")

    eps_r = math.sqrt(p.k / p.rho_a)
    r = 1.0 + c / sqrt_rak
    cert = LyapunovCertificate(
        c=c, eps_b=eps_b, eps1=eps1, eps2=eps2, eps3=eps3, omega0=omega0,
        eps_r=eps_r, r=r, omega=omega0 / r, c_l=c_l, c_u=c_u, c_h=c_h, c_e=c_e)
    cert.validate(p)
    return cert


# ---------------------------------------------------------------------------
# trajectory records
# ---------------------------------------------------------------------------

def record_lyapunov(traj: Trajectory, cert: LyapunovCertificate,
                    p: BeamParams, ops: FemOperators) -> np.ndarray:
    """Fill (and return) the per-sample Lyapunov values of a trajectory."""
    if traj.lyapunov is not None:
        return traj.lyapunov
    W, V = traj.W, traj.V
    KW = ops.K_hat.dot(W.T).T
    MW = ops.M_hat.dot(W.T).T
    MV = ops.M_hat.dot(V.T).T
    vals = (
        p.EI * np.einsum("ij,ij->i", W, KW)
        + p.k * np.einsum("ij,ij->i", W, MW)
        + p.rho_a * np.einsum("ij,ij->i", V, MV)
        + 2.0 * cert.c * np.einsum("ij,ij->i", W, MV)
    )
    if p.alpha != 0.0:
        quart = np.array([quartic_integral(W[i], ops) for i in range(len(traj))])
        vals = vals + 0.5 * p.alpha * quart
    traj.lyapunov = vals
    return vals


def _require_class(traj: Trajectory, allowed: tuple[str, ...], what: str) -> None:
    if traj.input_class not in allowed:
        raise InputClassMismatch(
            f"{what} requires input class in {allowed}, got {traj.input_class!r}")


def _central_diff(series: np.ndarray, dt: float) -> np.ndarray:
    return (series[2:] - series[:-2]) / (2.0 * dt)


def _exp_convolution_trapezoid(f: np.ndarray, omega: float, dt: float) -> np.ndarray:
    """Trapezoidal integral of exp(-omega (t - s)) f(s) ds on the sample grid."""
    out = np.empty_like(f)
    out[0] = 0.0
    decay = math.exp(-omega * dt)
    for i in range(1, f.size):
        out[i] = decay * out[i - 1] + 0.5 * dt * (decay * f[i - 1] + f[i])
    return out


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------

def check_sandwich(traj: Trajectory, cert: LyapunovCertificate,
                   p: BeamParams, ops: FemOperators) -> list[BoundCheck]:
    """Per-sample margins of c_l ||x||^2 <= V <= c_u ||x||^2 + c_h ||x||^4."""
    V = record_lyapunov(traj, cert, p, ops)
    nsq = traj.energy_norm_sq

    lo_margin = V - cert.c_l * nsq
    lo_tol = REL_TOL * (1.0 + np.maximum(np.abs(V), cert.c_l * nsq))
    hi_rhs = cert.c_u * nsq + cert.c_h * nsq**2
    hi_margin = hi_rhs - V
    hi_tol = REL_TOL * (1.0 + np.maximum(np.abs(V), hi_rhs))
    return [
        _scan("sandwich_lower", traj.times, lo_margin, lo_tol),
        _scan("sandwich_upper", traj.times, hi_margin, hi_tol),
    ]


def _fd_tolerance_pair(traj: Trajectory, refined: Trajectory,
                       cert: LyapunovCertificate, p: BeamParams,
                       ops: FemOperators) -> float:
    """Richardson estimate of the O(dt^2) central-difference error bound."""
    if abs(refined.dt - 0.5 * traj.dt) > 1e-12 * traj.dt:
        raise ValueError("refined trajectory must use dt/2")
    if len(refined) != 2 * len(traj) - 1:
        raise ValueError("refined trajectory must cover the same horizon")
    V = record_lyapunov(traj, cert, p, ops)
    Vh = record_lyapunov(refined, cert, p, ops)
    fd = _central_diff(V, traj.dt)
    fd_half = (Vh[3:-1:2] - Vh[1:-3:2]) / traj.dt
    return (4.0 / 3.0) * float(np.max(np.abs(fd - fd_half)))


def check_dissipation(traj: Trajectory, cert: LyapunovCertificate,
                      p: BeamParams, ops: FemOperators,
                      refined: Trajectory) -> list[BoundCheck]:
    """Finite-difference check of dV/dt <= eps3 ||u||^2 - omega V.

    Valid for continuously differentiable inputs only.  ``refined`` is the
    same run at dt/2; the pair calibrates the finite-difference error term
    of the tolerance.
    """
    _require_class(traj, ("C1",), "dissipation check")
    V = record_lyapunov(traj, cert, p, ops)
    cfd_dt2 = _fd_tolerance_pair(traj, refined, cert, p, ops)
    fd = _central_diff(V, traj.dt)
    inner = slice(1, len(traj) - 1)
    margins = cert.eps3 * traj.input_norm_sq[inner] - cert.omega * V[inner] - fd
    tols = FD_FLOOR * (1.0 + np.abs(V[inner])) + cfd_dt2
    note = f"fd_error_bound={cfd_dt2:.3e}"
    return [_scan("dissipation", traj.times[inner], margins, tols, note=note)]


def check_classical_decay(traj: Trajectory, cert: LyapunovCertificate,
                          p: BeamParams, ops: FemOperators) -> list[BoundCheck]:
    """Exponential decay estimates for smooth inputs.

    (a) squared-norm bound with the running input sup;
    (b) the sharper convolution form
        V(t) <= exp(-omega t) V(0) + eps3 * integral exp(-omega (t-s)) ||u(s)||^2 ds.
    """
    _require_class(traj, ("C1",), "classical decay check")
    V = record_lyapunov(traj, cert, p, ops)
    t = traj.times
    nsq = traj.energy_norm_sq
    decay = np.exp(-cert.omega * t)
    ns0 = nsq[0]

    sup_u2 = np.maximum.accumulate(traj.input_norm_sq)
    rhs_a = decay * ((cert.c_u / cert.c_l) * ns0 + (cert.c_h / cert.c_l) * ns0**2) \
        + (cert.eps3 / cert.omega) * (1.0 - decay) * sup_u2
    margins_a = rhs_a - nsq
    tols_a = REL_TOL * (1.0 + np.maximum(rhs_a, nsq))

    conv = _exp_convolution_trapezoid(traj.input_norm_sq, cert.omega, traj.dt)
    rhs_b = decay * V[0] + cert.eps3 * conv
    margins_b = rhs_b - V
    tols_b = REL_TOL * (1.0 + np.maximum(np.abs(rhs_b), np.abs(V)))

    return [
        _scan("decay_norm_bound", t, margins_a, tols_a),
        _scan("decay_gronwall_bound", t, margins_b, tols_b),
    ]


def check_mild_integral(traj: Trajectory, cert: LyapunovCertificate,
                        p: BeamParams, ops: FemOperators) -> list[BoundCheck]:
    """A-priori bound on sup-norm plus weighted L^2-in-time norm.

    At every sample horizon t:
        max_{s<=t} ||x(s)||^2 + omega * integral_0^t ||x||^2
          <= (c_u/c_l) ||x0||^2 + (c_h/c_l) ||x0||^4 + (eps3/c_l) ||u||^2_{L2(0,t)}.
    Valid for every supported input class.
    """
    record_lyapunov(traj, cert, p, ops)
    t = traj.times
    nsq = traj.energy_norm_sq
    run_max = np.maximum.accumulate(nsq)

    cum_x = np.concatenate(([0.0], np.cumsum(
        0.5 * traj.dt * (nsq[1:] + nsq[:-1]))))
    cum_u = np.concatenate(([0.0], np.cumsum(
        0.5 * traj.dt * (traj.input_norm_sq[1:] + traj.input_norm_sq[:-1]))))

    lhs = run_max + cert.omega * cum_x
    rhs = ((cert.c_u / cert.c_l) * nsq[0]
           + (cert.c_h / cert.c_l) * nsq[0]**2
           + (cert.eps3 / cert.c_l) * cum_u)
    margins = rhs - lhs
    tols = REL_TOL * (1.0 + np.maximum(rhs, lhs))
    return [_scan("mild_integral", t, margins, tols)]


def check_iss(traj: Trajectory, cert: LyapunovCertificate, gains: ISSGains,
              p: BeamParams, ops: FemOperators,
              refined: Trajectory | None = None) -> list[BoundCheck]:
    """Input-to-state stability estimate for bounded inputs.

    Per-sample margin of
        ||x(t)||^2 <= beta(||x0||, t) + gamma(sup_{s<=t} ||u(s)||)
    using the running input sup.  For C^1 inputs additionally checks the
    ISS-Lyapunov inequality dV/dt <= -omega c_l ||x||^2 + eps3 sup ||u||^2
    with a finite-difference derivative.
    """
    _require_class(traj, ("C1", "PC"), "ISS check")
    V = record_lyapunov(traj, cert, p, ops)
    t = traj.times
    nsq = traj.energy_norm_sq
    s0 = math.sqrt(nsq[0])
    sup_u2 = np.maximum.accumulate(traj.input_norm_sq)

    rhs = np.array([gains.beta(s0, ti) for ti in t]) \
        + gains.gamma_sq(np.sqrt(sup_u2))
    margins = rhs - nsq
    tols = REL_TOL * (1.0 + np.maximum(rhs, nsq))
    out = [_scan("iss_bound", t, margins, tols)]

    if traj.input_class == "C1":
        if refined is not None:
            cfd_dt2 = _fd_tolerance_pair(traj, refined, cert, p, ops)
        else:
            # self-calibration: compare the dt difference with a 2dt one
            fd = _central_diff(V, traj.dt)
            fd2 = (V[4:] - V[:-4]) / (4.0 * traj.dt)
            cfd_dt2 = float(np.max(np.abs(fd2 - fd[1:-1]))) / 3.0
        fd = _central_diff(V, traj.dt)
        inner = slice(1, len(traj) - 1)
        u2_total = float(np.max(traj.input_norm_sq))
        margins_l = (gains.sigma(math.sqrt(u2_total))
                     - gains.alpha_damp(np.sqrt(nsq[inner])) - fd)
        tols_l = FD_FLOOR * (1.0 + np.abs(V[inner])) + cfd_dt2
        out.append(_scan("iss_lyapunov", t[inner], margins_l, tols_l,
                         note=f"fd_error_bound={cfd_dt2:.3e}"))
    return out
