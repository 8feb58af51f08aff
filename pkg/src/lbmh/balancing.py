"""Balancing functions g with g(t) = t*g(1/t) and their log-space form b.

A balancing function turns the pointwise density ratio t = pi(y)/pi(x) into a
reversible proposal weight g(t).  Everything downstream consumes g through
b(x) = log g(e^x), which satisfies b(x) = x + b(-x), and through the curvature
scalar ``gfrak`` = g''(1), the only feature of g entering the asymptotic
efficiency formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "BalancingFunction",
    "make_balancing",
    "from_even_function",
    "to_even_function",
    "eval_b",
    "NonSmoothBalancingError",
]

_LOG2 = float(np.log(2.0))

# probe grid for the balancing identity, x = log t in [-5, 5]
_IDENTITY_GRID = np.linspace(-5.0, 5.0, 41)
_EVEN_TOL = 1e-10


class NonSmoothBalancingError(ValueError):
    """Raised when an asymptotics computation needs g''(1) of a non-smooth g."""


@dataclass(frozen=True)
class BalancingFunction:
    """A balancing function together with its stable log form.

    Attributes
    ----------
    kind : str
        One of ``barker``, ``sqrt``, ``min``, ``max``, ``g_gamma``,
        ``from_even``.
    gamma : float | None
        Exponent parameter, only set for ``g_gamma``.
    gfrak : float | None
        g''(1).  ``None`` for the non-smooth kinds (min, max); asymptotics
        calls must reject those.
    bounded : bool
        Whether sup g < infinity (controls normalizer stability guards).
    smooth : bool
        False exactly for the kinds with a kink at t = 1.
    """

    kind: str
    gamma: float | None = None
    gfrak: float | None = None
    bounded: bool = False
    smooth: bool = True
    _b: Callable[[np.ndarray], np.ndarray] = field(repr=False, default=None)

    def b(self, x):
        """log g(e^x), numerically stable, vectorized."""
        return self._b(np.asarray(x, dtype=float))

    def g(self, t):
        """Evaluate g(t) for t > 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("balancing functions are defined on t > 0")
        return np.exp(self._b(np.log(t)))

    def check_identity(self, rtol: float = 1e-12) -> None:
        """Verify b(x) = x + b(-x) on the probe grid."""
        x = _IDENTITY_GRID
        resid = self.b(x) - x - self.b(-x)
        scale = 1.0 + np.abs(self.b(x))
        if np.max(np.abs(resid) / scale) > rtol:
            raise ValueError(f"balancing identity violated for kind={self.kind!r}")


def _b_barker(x):
    # log(2 e^x / (1 + e^x)) = log2 + x - log1p(e^x), via logaddexp for both tails
    return _LOG2 + x - np.logaddexp(0.0, x)


def _b_sqrt(x):
    return 0.5 * x


def _b_min(x):
    return np.minimum(0.0, x)


def _b_max(x):
    return np.maximum(0.0, x)


def _b_gamma(gamma: float):
    lo, hi = 0.5 - gamma, 0.5 + gamma

    def b(x):
        return np.logaddexp(hi * x, lo * x) - _LOG2

    return b


def make_balancing(kind: str, gamma: float | None = None) -> BalancingFunction:
    """Construct one of the named balancing-function families.

    ``barker``: g(t) = 2t/(1+t), bounded, gfrak = -1/2.
    ``sqrt``: g(t) = sqrt(t), gfrak = -1/4.
    ``g_gamma``: g(t) = (t^(1/2+gamma) + t^(1/2-gamma))/2, gfrak = gamma^2 - 1/4.
    ``min`` / ``max``: min(1,t), max(1,t); non-smooth, gfrak undefined.
    """
    if kind == "barker":
        return BalancingFunction("barker", gfrak=-0.5, bounded=True, _b=_b_barker)
    if kind == "sqrt":
        return BalancingFunction("sqrt", gfrak=-0.25, _b=_b_sqrt)
    if kind == "min":
        return BalancingFunction("min", bounded=True, smooth=False, _b=_b_min)
    if kind == "max":
        return BalancingFunction("max", smooth=False, _b=_b_max)
    if kind == "g_gamma":
        if gamma is None or gamma < 0:
            raise ValueError("g_gamma requires gamma >= 0")
        gamma = float(gamma)
        if gamma == 0.0:
            # collapses to sqrt; keep the tag so callers see what they asked for
            return BalancingFunction("g_gamma", gamma=0.0, gfrak=-0.25, _b=_b_sqrt)
        return BalancingFunction(
            "g_gamma", gamma=gamma, gfrak=gamma * gamma - 0.25, _b=_b_gamma(gamma)
        )
    raise ValueError(f"unknown balancing kind {kind!r}")


def from_even_function(h: Callable[[np.ndarray], np.ndarray]) -> BalancingFunction:
    """Build the balancing function g(t) = sqrt(t) h(log t) from an even h >= 0.

    h is validated for evenness and positivity on the probe grid and the result
    is rescaled so that g(1) = 1.  gfrak is estimated by a central second
    difference at t = 1.
    """
    x = _IDENTITY_GRID
    hx = np.asarray(h(x), dtype=float)
    hmx = np.asarray(h(-x), dtype=float)
    if np.any(hx < 0):
        raise ValueError("h must be non-negative")
    if np.max(np.abs(hx - hmx)) > _EVEN_TOL * np.max(1.0 + np.abs(hx)):
        raise ValueError("h is not even on the probe grid")
    h0 = float(h(np.array(0.0)))
    if h0 <= 0:
        raise ValueError("h(0) must be positive so that g(1) = 1 after rescaling")
    log_h0 = np.log(h0)

    def b(x):
        return 0.5 * x + np.log(h(x)) - log_h0

    g = lambda t: np.exp(b(np.log(t)))
    step = 1e-4
    gfrak = float((g(1.0 + step) - 2.0 * g(1.0) + g(1.0 - step)) / step**2)
    bf = BalancingFunction("from_even", gfrak=gfrak, _b=b)
    bf.check_identity()
    return bf


def to_even_function(g: BalancingFunction) -> Callable[[np.ndarray], np.ndarray]:
    """The even function h_g(x) = e^{-x/2} g(e^x); inverse of from_even_function."""

    def h(x):
        x = np.asarray(x, dtype=float)
        return np.exp(g.b(x) - 0.5 * x)

    return h


def eval_b(g: BalancingFunction, x) -> np.ndarray:
    """Stable evaluation of b(x) = log g(e^x)."""
    return g.b(x)
