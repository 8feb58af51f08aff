"""Closed-form asymptotic efficiency of locally-balanced proposals.

For a 1-d product factor pi ∝ exp(phi), the limiting behaviour of a design
(g, mu) is governed by a single constant

    theta^2 = mu6 [ A/144 + (1/4+gf)^2 B - (1/6)(1/4+gf) C ]
            + mu4 [ (1/6)(1/2+gf) C - 2 (1/4+gf)(1/2+gf) B ]
            + (1/2+gf)^2 B

with gf = g''(1), the noise moments mu4/mu6 and the target functionals
A = E[(phi''')^2], B = E[(phi' phi'')^2], C = E[phi' phi'' phi'''].  Smaller
theta^2 is better: at the optimal step scale ell* n^{-1/6}, the per-coordinate
expected squared jump distance behaves like C_h theta^{-2/3} n^{-1/3} at a
universal limiting acceptance rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.stats import norm

from .balancing import NonSmoothBalancingError
from .targets import ProductFactor

__all__ = [
    "TargetFunctionals",
    "EfficiencySummary",
    "abc_functionals",
    "theta_squared",
    "theta_squared_langevin_ibp",
    "optimal_ell",
    "optimal_gfrak_fixed_mu",
    "optimal_gfrak_joint",
    "theta_lower_bound",
    "efficiency_ratio",
    "AllBalancingEquivalentError",
]

_NEG_CLAMP = 1e-12


class AllBalancingEquivalentError(ValueError):
    """mu6 - 2 mu4 + 1 = 0 (e.g. Rademacher noise): every balancing function
    gives an equivalent algorithm, so there is no optimum to pick."""


@dataclass(frozen=True)
class TargetFunctionals:
    """A = E[(phi''')^2], B = E[(phi' phi'')^2], C = E[phi' phi'' phi''']."""

    A: float
    B: float
    C: float

    def __post_init__(self):
        if self.A < -1e-12 or self.B < -1e-12:
            raise ValueError("A and B must be non-negative")
        if self.A * self.B - self.C**2 < -1e-8 * max(1.0, self.A * self.B):
            raise ValueError("functionals violate the Cauchy inequality A*B >= C^2")


@dataclass(frozen=True)
class EfficiencySummary:
    """Optimal tuning summary for one design point.

    ``degenerate`` marks theta^2 = 0 (super-efficient designs): there the
    leading-order efficiency is unbounded and no finite ell* exists.
    """

    theta_sq: float
    s_star: float | None
    ell_star: float | None
    h_star: float | None
    limiting_acc: float | None
    degenerate: bool = False


def _expectation(factor: ProductFactor, f, lo=-60.0, hi=60.0) -> float:
    val, err = integrate.quad(
        lambda x: f(x) * np.exp(factor.phi(x)),
        lo,
        hi,
        epsabs=1e-10,
        limit=400,
        points=[-1.0, 0.0, 1.0],
    )
    if err > 1e-6 * max(abs(val), 1.0):
        raise ArithmeticError("quadrature did not converge for a target functional")
    return val / factor.normalizer


def abc_functionals(factor: ProductFactor) -> TargetFunctionals:
    """Quadrature of the three functionals against the normalized factor."""
    A = _expectation(factor, lambda x: factor.d3phi(x) ** 2)
    B = _expectation(factor, lambda x: (factor.dphi(x) * factor.d2phi(x)) ** 2)
    C = _expectation(factor, lambda x: factor.dphi(x) * factor.d2phi(x) * factor.d3phi(x))
    return TargetFunctionals(A=A, B=B, C=C)


def _check_moments(mu4: float, mu6: float) -> None:
    if not (1.0 - 1e-9 <= mu4 <= np.sqrt(mu6) + 1e-9):
        raise ValueError("moment infeasibility: need 1 <= mu4 <= sqrt(mu6)")


def theta_squared(f: TargetFunctionals, mu4: float, mu6: float, gfrak: float) -> float:
    """The efficiency constant theta^2 of a (g, mu) design on the factor f.

    Tiny negative round-off (> -1e-12) is clamped to zero; exact zeros signal
    the super-efficient regime handled by optimal_ell.
    """
    if gfrak is None:
        raise NonSmoothBalancingError("non-smooth balancing function: g''(1) undefined")
    _check_moments(mu4, mu6)
    q = 0.25 + gfrak
    h = 0.5 + gfrak
    val = (
        mu6 * (f.A / 144.0 + q * q * f.B - q * f.C / 6.0)
        + mu4 * (h * f.C / 6.0 - 2.0 * q * h * f.B)
        + h * h * f.B
    )
    if val < 0:
        if val < -_NEG_CLAMP:
            raise ArithmeticError(f"theta^2 = {val} below the feasible range")
        val = 0.0
    return float(val)


def theta_squared_langevin_ibp(factor: ProductFactor) -> float:
    """Independent route to theta^2 for g = sqrt, gaussian noise:

        theta^2 = 5/48 E[(phi''')^2] - 1/16 E[(phi'')^3]

    valid when exp(phi) phi' (phi'')^2 vanishes at infinity (checked at the
    quadrature edges).
    """
    edge = 55.0
    for x in (-edge, edge):
        boundary = np.exp(factor.phi(x)) * factor.dphi(x) * factor.d2phi(x) ** 2
        if abs(boundary) > 1e-12:
            raise ValueError("boundary term does not vanish; integration by parts invalid")
    a = _expectation(factor, lambda x: factor.d3phi(x) ** 2)
    e2 = _expectation(factor, lambda x: factor.d2phi(x) ** 3)
    return float(5.0 / 48.0 * a - e2 / 16.0)


def _stationarity(s: float) -> float:
    return s * norm.pdf(s) / norm.cdf(-s) - 2.0 / 3.0


def optimal_ell(theta_sq: float) -> EfficiencySummary:
    """Optimal scaling constant ell* and the efficiency at the optimum.

    Solves 2/3 = s phi_N(s) / Phi(-s) on [1e-6, 10] by bisection, then
    ell* = (2 s*/theta)^{1/3}, h* = 2 ell*^2 Phi(-s*), acceptance 2 Phi(-s*).
    theta_sq <= 0 returns the degenerate outcome (no finite optimum).
    """
    if theta_sq < 0:
        raise ValueError("theta_sq must be non-negative")
    if theta_sq == 0.0:
        return EfficiencySummary(0.0, None, None, None, None, degenerate=True)
    s_star = float(optimize.bisect(_stationarity, 1e-6, 10.0, xtol=1e-12))
    theta = float(np.sqrt(theta_sq))
    ell = (2.0 * s_star / theta) ** (1.0 / 3.0)
    h_star = 2.0 * ell * ell * float(norm.cdf(-s_star))
    return EfficiencySummary(
        theta_sq=float(theta_sq),
        s_star=s_star,
        ell_star=float(ell),
        h_star=float(h_star),
        limiting_acc=2.0 * float(norm.cdf(-s_star)),
    )


def optimal_gfrak_fixed_mu(f: TargetFunctionals, mu4: float, mu6: float) -> float:
    """Best g''(1) for a fixed noise law:

        gf* = [mu6 (C - 3B) + mu4 (9B - C) - 6B] / [12 B (mu6 - 2 mu4 + 1)]
    """
    if f.B <= 0:
        raise ValueError("requires B > 0")
    _check_moments(mu4, mu6)
    denom = mu6 - 2.0 * mu4 + 1.0
    if abs(denom) < 1e-12:
        raise AllBalancingEquivalentError(
            "mu6 - 2 mu4 + 1 = 0: all balancing functions give equivalent algorithms"
        )
    num = mu6 * (f.C - 3.0 * f.B) + mu4 * (9.0 * f.B - f.C) - 6.0 * f.B
    return float(num / (12.0 * f.B * denom))


def optimal_gfrak_joint(f: TargetFunctionals, mu4: float) -> float:
    """Best g''(1) when the noise is the three-point law with mu6 = mu4^2:

        gf = [mu4 (C - 3B) + 6B] / [12 B (mu4 - 1)],  mu4 > 1.

    Paired with that noise, theta^2 approaches the lower bound as mu4 -> 1+.
    """
    if f.B <= 0:
        raise ValueError("requires B > 0")
    if mu4 <= 1.0:
        raise ValueError("requires mu4 > 1")
    return float((mu4 * (f.C - 3.0 * f.B) + 6.0 * f.B) / (12.0 * f.B * (mu4 - 1.0)))


def theta_lower_bound(f: TargetFunctionals) -> float:
    """theta^2 >= (A - C^2/B)/144 over every noise law and balancing function."""
    if f.B <= 0:
        raise ValueError("requires B > 0")
    return float((f.A - f.C**2 / f.B) / 144.0)


def efficiency_ratio(theta_sq_1: float, theta_sq_2: float) -> float:
    """Predicted optimally-tuned ESJD ratio of design 1 over design 2:
    (theta_2^2 / theta_1^2)^{1/3}, from h* ∝ theta^{-2/3}."""
    if theta_sq_1 <= 0 or theta_sq_2 <= 0:
        raise ValueError("efficiency_ratio needs strictly positive theta^2 on both sides")
    return float((theta_sq_2 / theta_sq_1) ** (1.0 / 3.0))
