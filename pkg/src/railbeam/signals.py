"""Declarative distributed inputs u(xi, t) with exact spatial L^2 norms.

Each signal kind carries a regularity tag that the certificate checks use to
enforce their hypotheses: smooth-in-time kinds are tagged ``C1``, piecewise
constant signals ``PC``.  Norms in space are evaluated from closed forms
where they exist (modes, Gaussians, exponential envelopes) so that recorded
input norms are independent of the mesh quadrature.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

__all__ = [
    "SpatialProfile",
    "ZeroProfile",
    "ModeProfile",
    "GaussianProfile",
    "NodalProfile",
    "ComboProfile",
    "InputSignal",
    "ZeroInput",
    "SeparableSmooth",
    "ExpDecay",
    "MovingGaussianLoad",
    "PiecewiseConstant",
    "ConstEnvelope",
    "GenericEnvelope",
    "eval_profile",
    "signal_norms",
    "random_pc_signal",
]


# ---------------------------------------------------------------------------
# spatial profiles
# ---------------------------------------------------------------------------

class SpatialProfile:
    """A function of xi on [0, ell] with derivative and exact L^2 norm."""

    ell: float

    def value(self, xi):
        raise NotImplementedError

    def deriv(self, xi):
        raise NotImplementedError

    def norm_l2_sq(self) -> float:
        raise NotImplementedError

    def __call__(self, xi):
        return self.value(xi)


@dataclass
class ZeroProfile(SpatialProfile):
    ell: float

    def value(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=float))

    deriv = value

    def norm_l2_sq(self) -> float:
        return 0.0


@dataclass
class ModeProfile(SpatialProfile):
    """amp * sin(n pi xi / ell): eigenfunction of the pinned, moment-free beam."""

    ell: float
    n: int
    amp: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("mode index must be >= 1")
        self._freq = self.n * math.pi / self.ell

    def value(self, xi):
        return self.amp * np.sin(self._freq * np.asarray(xi, dtype=float))

    def deriv(self, xi):
        return self.amp * self._freq * np.cos(self._freq * np.asarray(xi, dtype=float))

    def norm_l2_sq(self) -> float:
        return self.amp**2 * self.ell / 2.0


@dataclass
class GaussianProfile(SpatialProfile):
    """amp * exp(-(xi - center)^2 / (2 width^2)), truncated to [0, ell]."""

    ell: float
    center: float
    width: float
    amp: float = 1.0

    def value(self, xi):
        z = (np.asarray(xi, dtype=float) - self.center) / self.width
        return self.amp * np.exp(-0.5 * z**2)

    def deriv(self, xi):
        xi = np.asarray(xi, dtype=float)
        z = (xi - self.center) / self.width
        return -self.amp * z / self.width * np.exp(-0.5 * z**2)

    def norm_l2_sq(self) -> float:
        # integral of amp^2 exp(-(xi-c)^2 / width^2) over [0, ell]
        w, c = self.width, self.center
        return float(
            self.amp**2 * w * math.sqrt(math.pi) / 2.0
            * (erf((self.ell - c) / w) + erf(c / w))
        )


@dataclass
class NodalProfile(SpatialProfile):
    """Cubic Hermite interpolant of per-node (value, slope) data."""

    ell: float
    values: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.slopes = np.asarray(self.slopes, dtype=float)
        if self.values.shape != self.slopes.shape or self.values.ndim != 1:
            raise ValueError("values and slopes must be 1-D arrays of equal length")
        if self.values.size < 2:
            raise ValueError("need at least two nodes")
        self._h = self.ell / (self.values.size - 1)

    def _local(self, xi):
        xi = np.asarray(xi, dtype=float)
        e = np.clip((xi / self._h).astype(int), 0, self.values.size - 2)
        s = xi / self._h - e
        return e, s

    def value(self, xi):
        e, s = self._local(xi)
        h = self._h
        return (
            self.values[e] * (1 - 3 * s**2 + 2 * s**3)
            + self.slopes[e] * h * (s - 2 * s**2 + s**3)
            + self.values[e + 1] * (3 * s**2 - 2 * s**3)
            + self.slopes[e + 1] * h * (s**3 - s**2)
        )

    def deriv(self, xi):
        e, s = self._local(xi)
        h = self._h
        return (
            self.values[e] * (-6 * s + 6 * s**2) / h
            + self.slopes[e] * (1 - 4 * s + 3 * s**2)
            + self.values[e + 1] * (6 * s - 6 * s**2) / h
            + self.slopes[e + 1] * (3 * s**2 - 2 * s)
        )

    def norm_l2_sq(self) -> float:
        # 4-point Gauss per element is exact for the squared cubic
        gx, gw = np.polynomial.legendre.leggauss(4)
        s = 0.5 * (gx + 1.0)
        out = 0.0
        for e in range(self.values.size - 1):
            xi = (e + s) * self._h
            out += 0.5 * self._h * np.sum(gw * self.value(xi) ** 2)
        return float(out)


class ComboProfile(SpatialProfile):
    """Linear combination of profiles; norm by adaptive quadrature (cached)."""

    def __init__(self, parts: Sequence[SpatialProfile], coeffs: Sequence[float] | None = None):
        if not parts:
            raise ValueError("need at least one part")
        self.parts = list(parts)
        self.coeffs = [1.0] * len(parts) if coeffs is None else [float(c) for c in coeffs]
        if len(self.coeffs) != len(self.parts):
            raise ValueError("coeffs and parts length mismatch")
        self.ell = parts[0].ell
        self._norm_sq: float | None = None

    def value(self, xi):
        return sum(c * p.value(xi) for c, p in zip(self.coeffs, self.parts))

    def deriv(self, xi):
        return sum(c * p.deriv(xi) for c, p in zip(self.coeffs, self.parts))

    def norm_l2_sq(self) -> float:
        if self._norm_sq is None:
            val, _ = quad(lambda x: float(self.value(x)) ** 2, 0.0, self.ell,
                          limit=200, epsabs=1e-13, epsrel=1e-12)
            self._norm_sq = float(val)
        return self._norm_sq


# ---------------------------------------------------------------------------
# time envelopes for separable signals
# ---------------------------------------------------------------------------

@dataclass
class ConstEnvelope:
    """Constant envelope: a smooth 'switched-on' input of fixed magnitude."""

    u0: float

    def value(self, t: float) -> float:
        return self.u0

    def sup_to(self, t: float) -> float:
        return abs(self.u0)

    def l2sq_to(self, t: float) -> float:
        return self.u0**2 * t


class GenericEnvelope:
    """Arbitrary C^1 envelope; sup exact only when a monotone tag is given."""

    def __init__(self, fn: Callable[[float], float], monotone: str | None = None):
        if monotone not in (None, "increasing", "decreasing"):
            raise ValueError("monotone must be None, 'increasing' or 'decreasing'")
        self.fn = fn
        self.monotone = monotone

    def value(self, t: float) -> float:
        return float(self.fn(t))

    def sup_to(self, t: float) -> float:
        if self.monotone == "decreasing":
            return abs(self.value(0.0))
        if self.monotone == "increasing":
            return abs(self.value(t))
        samples = np.linspace(0.0, t, 2049)
        return float(np.max(np.abs([self.fn(s) for s in samples])))

    def l2sq_to(self, t: float) -> float:
        val, _ = quad(lambda s: self.value(s) ** 2, 0.0, t, limit=200)
        return float(val)


# ---------------------------------------------------------------------------
# signals
# ---------------------------------------------------------------------------

class InputSignal:
    """Base input u(xi, t).  ``class_tag`` is one of 'C1', 'PC', 'L2loc'."""

    class_tag: str = "C1"
    ell: float

    def profile_at(self, t: float) -> Callable:
        """Spatial slice u(., t), vectorized over xi (right-continuous in t)."""
        raise NotImplementedError

    def norm_at(self, t: float) -> float:
        """Exact spatial L^2 norm of u(., t)."""
        raise NotImplementedError

    def running_norms(self, t: float) -> tuple[float, float]:
        """(sup over [0, t] of the spatial norm, L^2-in-time norm on [0, t])."""
        raise NotImplementedError


@dataclass
class ZeroInput(InputSignal):
    ell: float = 1.0
    class_tag: str = field(default="C1", init=False)

    def profile_at(self, t: float):
        return lambda xi: np.zeros_like(np.asarray(xi, dtype=float))

    def norm_at(self, t: float) -> float:
        return 0.0

    def running_norms(self, t: float) -> tuple[float, float]:
        return 0.0, 0.0


class SeparableSmooth(InputSignal):
    """profile(xi) * envelope(t) with a smooth envelope."""

    class_tag = "C1"

    def __init__(self, profile: SpatialProfile, envelope):
        self.profile = profile
        self.envelope = envelope
        self.ell = profile.ell
        self._pn = math.sqrt(profile.norm_l2_sq())

    def profile_at(self, t: float):
        g = self.envelope.value(t)
        return lambda xi: g * self.profile.value(xi)

    def norm_at(self, t: float) -> float:
        return abs(self.envelope.value(t)) * self._pn

    def running_norms(self, t: float) -> tuple[float, float]:
        sup = self.envelope.sup_to(t) * self._pn
        l2 = math.sqrt(self.envelope.l2sq_to(t)) * self._pn
        return sup, l2


class ExpDecay(InputSignal):
    """profile(xi) * u0 * exp(-delta * t); norms in closed form."""

    class_tag = "C1"

    def __init__(self, profile: SpatialProfile, u0: float, delta: float):
        if u0 < 0:
            raise ValueError("u0 must be >= 0")
        if delta <= 0:
            raise ValueError("delta must be > 0")
        self.profile = profile
        self.u0 = float(u0)
        self.delta = float(delta)
        self.ell = profile.ell
        self._pn = math.sqrt(profile.norm_l2_sq())

    def profile_at(self, t: float):
        g = self.u0 * math.exp(-self.delta * t)
        return lambda xi: g * self.profile.value(xi)

    def norm_at(self, t: float) -> float:
        return self.u0 * math.exp(-self.delta * t) * self._pn

    def running_norms(self, t: float) -> tuple[float, float]:
        sup = self.u0 * self._pn
        l2sq = (self.u0 * self._pn) ** 2 * (1.0 - math.exp(-2.0 * self.delta * t)) / (2.0 * self.delta)
        return sup, math.sqrt(l2sq)


class MovingGaussianLoad(InputSignal):
    """Gaussian wheel load of magnitude F travelling along the beam.

    u(xi, t) = F * exp(-(xi - c(t))^2 / (2 width^2)), c(t) = speed * (t - t_enter).
    By default the centre starts 8 widths before xi = 0, so the trace on the
    beam is numerically zero at t = 0 and the signal is C^1 from rest.
    """

    class_tag = "C1"

    def __init__(self, F: float, speed: float, width: float, ell: float,
                 t_enter: float | None = None):
        if speed <= 0 or width <= 0:
            raise ValueError("speed and width must be > 0")
        self.F = float(F)
        self.speed = float(speed)
        self.width = float(width)
        self.ell = float(ell)
        self.t_enter = 8.0 * width / speed if t_enter is None else float(t_enter)

    def center(self, t: float) -> float:
        return self.speed * (t - self.t_enter)

    def profile_at(self, t: float):
        c, w, F = self.center(t), self.width, self.F
        return lambda xi: F * np.exp(-0.5 * ((np.asarray(xi, dtype=float) - c) / w) ** 2)

    def _norm_at_center(self, c: float) -> float:
        w = self.width
        val = (self.F**2 * w * math.sqrt(math.pi) / 2.0
               * (erf((self.ell - c) / w) + erf(c / w)))
        return math.sqrt(max(val, 0.0))

    def norm_at(self, t: float) -> float:
        return self._norm_at_center(self.center(t))

    def running_norms(self, t: float) -> tuple[float, float]:
        # the norm is unimodal in the centre position with peak at ell / 2
        c0, ct = self.center(0.0), self.center(t)
        c_best = min(max(self.ell / 2.0, c0), ct)
        sup = self._norm_at_center(c_best)
        l2sq, _ = quad(lambda s: self._norm_at_center(self.center(s)) ** 2,
                       0.0, t, limit=200)
        return sup, math.sqrt(max(l2sq, 0.0))


class PiecewiseConstant(InputSignal):
    """Right-continuous piecewise-constant-in-time input.

    ``segments`` is a list of (t_start, profile); starts must begin at 0 and
    increase strictly.  The running sup is attained at a segment start.
    """

    class_tag = "PC"

    def __init__(self, segments: Sequence[tuple[float, SpatialProfile]]):
        if not segments:
            raise ValueError("need at least one segment")
        starts = [float(t) for t, _ in segments]
        if starts[0] != 0.0:
            raise ValueError("first segment must start at t = 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must increase strictly")
        self.starts = starts
        self.profiles = [p for _, p in segments]
        self.ell = self.profiles[0].ell
        self._norms = [math.sqrt(p.norm_l2_sq()) for p in self.profiles]

    def segment_index(self, t: float) -> int:
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def profile_at(self, t: float):
        return self.profiles[self.segment_index(t)].value

    def norm_at(self, t: float) -> float:
        return self._norms[self.segment_index(t)]

    def running_norms(self, t: float) -> tuple[float, float]:
        idx = self.segment_index(t)
        sup = max(self._norms[: idx + 1])
        l2sq = 0.0
        for i in range(idx + 1):
            seg_end = self.starts[i + 1] if i + 1 < len(self.starts) else math.inf
            l2sq += self._norms[i] ** 2 * (min(t, seg_end) - self.starts[i])
        return sup, math.sqrt(l2sq)


# ---------------------------------------------------------------------------
# module-level operations and generators
# ---------------------------------------------------------------------------

def eval_profile(sig: InputSignal, t: float) -> Callable:
    """Spatial profile of the signal at time t (right-continuous)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return sig.profile_at(t)


def signal_norms(sig: InputSignal, t: float) -> tuple[float, float]:
    """(sup_{s <= t} ||u(s)||_L2, ||u||_{L2(0,t)}); exact per signal kind."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return sig.running_norms(t)


def random_pc_signal(rng: np.random.Generator, ell: float, t_final: float,
                     dt: float, n_switches: int, amp: float = 1.0) -> PiecewiseConstant:
    """Random piecewise-constant signal with switch times on the dt grid."""
    n_steps = int(round(t_final / dt))
    if n_switches >= n_steps:
        raise ValueError("more switches than time steps")
    picks = rng.choice(np.arange(1, n_steps), size=n_switches, replace=False)
    starts = [0.0] + sorted(float(i) * dt for i in picks)
    segments = []
    for t0 in starts:
        if rng.random() < 0.5:
            prof = ModeProfile(ell, n=int(rng.integers(1, 5)),
                               amp=amp * float(rng.uniform(-1.0, 1.0)))
        else:
            prof = GaussianProfile(
                ell,
                center=float(rng.uniform(0.2, 0.8) * ell),
                width=float(rng.uniform(0.05, 0.2) * ell),
                amp=amp * float(rng.uniform(-1.0, 1.0)),
            )
        segments.append((t0, prof))
    return PiecewiseConstant(segments)
