"""Symmetric unit-variance increment distributions for the proposal noise.

Efficiency formulas see a noise law only through its fourth and sixth moments,
so each constructor stores exact ``mu4``/``mu6`` alongside a sampler.  Discrete
laws carry their atom list; mixtures carry their components, which keeps
log-density and quadrature cross-checks exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

__all__ = [
    "NoiseDistribution",
    "make_gaussian_noise",
    "make_rademacher",
    "make_bimodal",
    "make_three_point",
    "log_density",
]


@dataclass(frozen=True)
class NoiseDistribution:
    """Symmetric, zero-mean, unit-variance increment law.

    ``atoms`` is a tuple of (value, probability) pairs for discrete kinds,
    ``components`` a tuple of (weight, mean, sd) for Gaussian mixtures.
    """

    kind: str
    mu4: float
    mu6: float
    atoms: tuple[tuple[float, float], ...] | None = None
    components: tuple[tuple[float, float, float], ...] | None = None

    @property
    def discrete(self) -> bool:
        return self.atoms is not None

    def sample(self, rng: np.random.Generator, size=None, dtype=np.float64) -> np.ndarray:
        dtype = np.dtype(dtype).type
        if self.kind == "gaussian":
            return rng.standard_normal(size, dtype=dtype)
        if self.kind == "rademacher":
            return np.where(rng.random(size, dtype=dtype) < 0.5, dtype(1.0), dtype(-1.0))
        if self.kind == "bimodal":
            m = self.components[0][1]
            sd = self.components[0][2]
            center = np.where(rng.random(size, dtype=dtype) < 0.5, dtype(m), dtype(-m))
            return center + dtype(sd) * rng.standard_normal(size, dtype=dtype)
        if self.discrete:
            values = np.array([a[0] for a in self.atoms], dtype=dtype)
            cum = np.cumsum([a[1] for a in self.atoms])
            idx = np.searchsorted(cum, rng.random(size), side="right")
            return values[np.minimum(idx, len(values) - 1)]
        weights = np.array([c[0] for c in self.components])
        means = np.array([c[1] for c in self.components])
        sds = np.array([c[2] for c in self.components])
        idx = rng.choice(len(weights), size=size, p=weights)
        out = means[idx] + sds[idx] * rng.standard_normal(size)
        return out.astype(dtype, copy=False)


def make_gaussian_noise() -> NoiseDistribution:
    """Standard normal increments; mu4 = 3, mu6 = 15."""
    return NoiseDistribution("gaussian", mu4=3.0, mu6=15.0)


def make_rademacher() -> NoiseDistribution:
    """Atoms +-1 with probability 1/2 each; mu4 = mu6 = 1 (the Jensen minimum)."""
    return NoiseDistribution(
        "rademacher", mu4=1.0, mu6=1.0, atoms=((1.0, 0.5), (-1.0, 0.5))
    )


def make_bimodal(sigma_b: float) -> NoiseDistribution:
    """Evenly-weighted mixture of N(+-sqrt(1-sigma_b^2), sigma_b^2).

    Total variance is exactly 1.  Moments (validated against quadrature of the
    mixture density in the test suite):

        mu4 = 1 + 4 sigma_b^2 - 2 sigma_b^4
        mu6 = 1 + 12 sigma_b^2 + 18 sigma_b^4 - 16 sigma_b^6
    """
    if not 0.0 < sigma_b < 1.0:
        raise ValueError("sigma_b must lie in (0, 1)")
    s2 = sigma_b * sigma_b
    m = float(np.sqrt(1.0 - s2))
    mu4 = 1.0 + 4.0 * s2 - 2.0 * s2 * s2
    mu6 = 1.0 + 12.0 * s2 + 18.0 * s2 * s2 - 16.0 * s2 * s2 * s2
    return NoiseDistribution(
        "bimodal",
        mu4=mu4,
        mu6=mu6,
        components=((0.5, m, float(sigma_b)), (0.5, -m, float(sigma_b))),
    )


def make_three_point(a: float) -> NoiseDistribution:
    """Atoms -sqrt(a), 0, +sqrt(a) with probabilities 1/(2a), 1-1/a, 1/(2a).

    The unique symmetric law with mu2 = 1, mu4 = a and mu6 = a^2; requires
    a > 1 so the zero atom has positive mass.
    """
    if a <= 1.0:
        raise ValueError("three-point noise requires a > 1")
    a = float(a)
    root = float(np.sqrt(a))
    p = 1.0 / (2.0 * a)
    return NoiseDistribution(
        "three_point",
        mu4=a,
        mu6=a * a,
        atoms=((-root, p), (0.0, 1.0 - 2.0 * p), (root, p)),
    )


def log_density(noise: NoiseDistribution, z) -> np.ndarray:
    """Log density at z for continuous kinds; log atom probability for discrete.

    For discrete kinds, z must match an atom exactly (the proposal mechanics
    never produce off-atom values); a non-atom z raises.
    """
    z = np.asarray(z, dtype=float)
    if noise.kind == "gaussian":
        return norm.logpdf(z)
    if noise.discrete:
        out = np.full(z.shape, -np.inf)
        matched = np.zeros(z.shape, dtype=bool)
        for value, prob in noise.atoms:
            hit = z == value
            out = np.where(hit, np.log(prob), out)
            matched |= hit
        if not matched.all():
            raise ValueError("z does not match any atom of the discrete noise law")
        return out
    # mixture: logsumexp over component log pdfs
    parts = [
        np.log(w) + norm.logpdf(z, loc=m, scale=s) for w, m, s in noise.components
    ]
    stacked = np.stack(parts, axis=0)
    peak = np.max(stacked, axis=0)
    return peak + np.log(np.sum(np.exp(stacked - peak), axis=0))
