"""Physical parameters of the track beam and admissible multiplier range.

The model is a pinned-pinned Euler-Bernoulli beam with optional Kelvin-Voigt
material damping, resting on a viscoelastic foundation with a linear spring
``k``, a cubic hardening spring ``alpha`` and viscous damping ``mu``:

    rho_a * w_tt + (EI * w_xx + Cd * w_xxt)_xx + mu * w_t + k * w
        + alpha * w**3 = u(xi, t)

All coefficients are stored as the products that enter the equation (``EI``
for bending stiffness, ``rho_a`` for mass per unit length).  The toolkit is
unit-agnostic; a convenient nondimensionalization is EI = rho_a = k = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import NegativeDamping, NonPositiveCoefficient

__all__ = ["BeamParams", "validate_params", "admissible_c_max"]

_STRICT_POSITIVE = ("EI", "rho_a", "ell", "k", "mu")


@dataclass(frozen=True)
class BeamParams:
    """Validated coefficient set.  Immutable; safe to share between threads."""

    EI: float      # bending stiffness (force * length^2)
    rho_a: float   # mass per unit length
    ell: float     # beam length
    k: float       # linear foundation stiffness
    alpha: float   # cubic foundation coefficient; zero selects the linear model
    mu: float      # foundation damping
    Cd: float      # Kelvin-Voigt damping, zero allowed

    def __post_init__(self):
        for name in _STRICT_POSITIVE:
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise NonPositiveCoefficient(name, value)
        if self.alpha < 0.0 or not math.isfinite(self.alpha):
            raise NonPositiveCoefficient("alpha", self.alpha)
        if self.Cd < 0.0 or not math.isfinite(self.Cd):
            raise NegativeDamping(self.Cd)


def validate_params(raw: Mapping[str, float]) -> BeamParams:
    """Build a :class:`BeamParams` from a plain mapping, validating signs.

    Raises :class:`NonPositiveCoefficient` for EI, rho_a, ell, k, alpha or
    mu <= 0 and :class:`NegativeDamping` for Cd < 0.  Unknown keys raise
    ``TypeError`` so typos in configs surface early.
    """
    return BeamParams(**{k: float(v) for k, v in raw.items()})


def admissible_c_max(p: BeamParams) -> float:
    """Upper limit of the cross-term multiplier c.

    Any c in (0, admissible_c_max(p)) simultaneously keeps the Lyapunov
    function sandwiched between energy-norm powers and keeps the dissipation
    rate positive.  The limit is the minimum of four terms:

        sqrt(rho_a * k)                       (sandwich positivity)
        4 * rho_a * EI / Cd                   (Kelvin-Voigt coupling; +inf if Cd = 0)
        4 * rho_a * k * mu / (mu^2 + 4 * rho_a * k)
        4 * rho_a * k * mu / (1 + 4 * rho_a * k)

    The result never depends on alpha or ell.
    """
    rak = p.rho_a * p.k
    terms = [
        math.sqrt(rak),
        4.0 * rak * p.mu / (p.mu**2 + 4.0 * rak),
        4.0 * rak * p.mu / (1.0 + 4.0 * rak),
    ]
    if p.Cd > 0.0:
        terms.append(4.0 * p.rho_a * p.EI / p.Cd)
    return min(terms)
