"""First-order locally-balanced proposal kernels.

Each coordinate is proposed independently from a density proportional to
g(e^{beta_i w}) mu(w / s_i) / s_i, with beta_i the coordinate gradient of
log pi at the current point and s_i = sigma * d_i the effective scale.  Four
sampling paths cover the tractable cases: the Barker sign-flip, the
two-Gaussian mixture for the g_gamma family, direct atom sampling for
discrete noise, and a plain random walk baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.special import expit, logsumexp, roots_hermite

from .balancing import BalancingFunction, make_balancing
from .noise import (
    NoiseDistribution,
    make_bimodal,
    make_gaussian_noise,
    make_rademacher,
    make_three_point,
)
from .targets import TargetModel

__all__ = [
    "LBProposal",
    "ProposalDraw",
    "log_normalizer",
    "propose",
    "barker_flip_prob",
    "make_preset",
    "preset_names",
    "NormalizerUnstableError",
    "GradientError",
]

_PATHS = ("barker_flip", "gamma_gaussian", "discrete_atoms", "rwm")
_LOG2 = float(np.log(2.0))


class NormalizerUnstableError(ArithmeticError):
    """The quadrature normalizer branch cannot be trusted at this argument."""


class GradientError(ValueError):
    """A NaN gradient was encountered; carries the offending coordinate."""

    def __init__(self, coord: int):
        self.coord = coord
        super().__init__(f"NaN gradient at coordinate {coord}")


@dataclass(frozen=True)
class LBProposal:
    """A locally-balanced proposal: balancing function, noise, scale, path.

    ``precond`` is an optional vector of positive per-coordinate scales d_i;
    the effective scale of coordinate i is sigma * d_i.
    """

    g: BalancingFunction | None
    mu: NoiseDistribution | None
    sigma: float
    path: str
    precond: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.path not in _PATHS:
            raise ValueError(f"unknown path {self.path!r}")
        if self.path == "rwm":
            return
        if self.g is None or self.mu is None:
            raise ValueError("gradient-based paths need both g and mu")
        if self.path == "barker_flip" and self.g.kind != "barker":
            raise ValueError("barker_flip requires the barker balancing function")
        if self.path == "gamma_gaussian":
            if self.g.kind not in ("sqrt", "g_gamma"):
                raise ValueError("gamma_gaussian requires g in the g_gamma family")
            if self.mu.kind != "gaussian":
                raise ValueError("gamma_gaussian requires gaussian noise")
        if self.path == "discrete_atoms" and not self.mu.discrete:
            raise ValueError("discrete_atoms requires a discrete noise law")
        if not self.g.smooth and self.path != "discrete_atoms":
            raise ValueError("min/max balancing functions are sampleable only via discrete_atoms")

    def scales(self, dim: int) -> np.ndarray:
        if self.precond is None:
            return np.full(dim, self.sigma)
        d = np.asarray(self.precond, dtype=float)
        if d.shape != (dim,) or np.any(d <= 0):
            raise ValueError("precond must be a positive vector of length dim")
        return self.sigma * d

    def with_scale(self, sigma: float, precond=None) -> "LBProposal":
        return replace(self, sigma=float(sigma), precond=precond if precond is not None else self.precond)


@dataclass(frozen=True)
class ProposalDraw:
    """A proposed point with the gradients at both endpoints cached."""

    y: np.ndarray
    grad_x: np.ndarray
    grad_y: np.ndarray


def barker_flip_prob(beta_z) -> np.ndarray:
    """F(t) = e^t / (1 + e^t), the sign-keep probability of the Barker flip."""
    return expit(np.asarray(beta_z, dtype=float))


_GH_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_hermite(order: int):
    if order not in _GH_CACHE:
        nodes, weights = roots_hermite(order)
        _GH_CACHE[order] = (nodes * np.sqrt(2.0), np.log(weights / np.sqrt(np.pi)))
    return _GH_CACHE[order]


def _log_normalizer_gh(g: BalancingFunction, mu: NoiseDistribution, c: np.ndarray, order: int):
    nodes, log_w = _gauss_hermite(order)
    if mu.kind == "gaussian":
        comps = ((1.0, 0.0, 1.0),)
    elif mu.components is not None:
        comps = mu.components
    else:
        raise ValueError("Gauss-Hermite branch needs a (mixture of) Gaussian noise")
    parts = []
    for w, m, s in comps:
        z = m + s * nodes  # (order,)
        parts.append(np.log(w) + logsumexp(g.b(c[..., None] * z) + log_w, axis=-1))
    return logsumexp(np.stack(parts, axis=0), axis=0)


def log_normalizer(g: BalancingFunction, mu: NoiseDistribution, beta_sigma) -> np.ndarray:
    """log Z(c) = log of the integral of g(e^{c z}) mu(dz), c = beta * sigma * d.

    Exact branches: barker with any symmetric mu gives 0 identically; discrete
    mu reduces to a finite log-sum-exp over atoms; the g_gamma family with
    gaussian noise has a closed form through the Gaussian moment generating
    function.  Anything else falls back to 64-point Gauss-Hermite with a
    96-point self-check.
    """
    c = np.asarray(beta_sigma, dtype=float)
    if g.kind == "barker":
        return np.zeros(c.shape)
    if mu.discrete:
        values = np.array([a[0] for a in mu.atoms])
        log_probs = np.log([a[1] for a in mu.atoms])
        return logsumexp(g.b(c[..., None] * values) + log_probs, axis=-1)
    if g.kind in ("sqrt", "g_gamma") and mu.kind == "gaussian":
        gamma = g.gamma or 0.0
        if gamma == 0.0:
            return 0.125 * c * c
        hi = ((0.5 + gamma) * c) ** 2 / 2.0
        lo = ((0.5 - gamma) * c) ** 2 / 2.0
        return np.logaddexp(hi, lo) - _LOG2
    if not g.bounded and np.any(np.abs(c) > 20.0):
        raise NormalizerUnstableError("|beta*sigma| > 20 with an unbounded balancing function")
    val64 = _log_normalizer_gh(g, mu, c, 64)
    val96 = _log_normalizer_gh(g, mu, c, 96)
    if np.max(np.abs(val64 - val96)) > 1e-6:
        raise NormalizerUnstableError("Gauss-Hermite orders 64 and 96 disagree")
    return val64


def _check_grad(grad: np.ndarray) -> None:
    if np.isnan(grad).any():
        coord = int(np.argwhere(np.isnan(grad))[0][-1])
        raise GradientError(coord)


def propose(prop: LBProposal, model: TargetModel, x: np.ndarray, rng: np.random.Generator) -> ProposalDraw:
    """Draw y coordinate-wise from the locally-balanced kernel at x.

    x may be a single state (n,) or a batch (S, n).  Gradients at x and y are
    returned alongside y so the acceptance ratio can reuse them.
    """
    x = np.asarray(x, dtype=float)
    s = prop.scales(model.dim)

    if prop.path == "rwm":
        y = x + s * rng.standard_normal(x.shape)
        grad_x = np.zeros_like(x)
        return ProposalDraw(y=y, grad_x=grad_x, grad_y=np.zeros_like(x))

    grad_x = model.grad_logpi(x)
    _check_grad(grad_x)

    if prop.path == "barker_flip":
        z = prop.mu.sample(rng, x.shape)
        keep = rng.random(x.shape) < barker_flip_prob(grad_x * s * z)
        y = x + s * z * np.where(keep, 1.0, -1.0)
    elif prop.path == "gamma_gaussian":
        gamma = prop.g.gamma or 0.0
        drift = s * s * grad_x
        if gamma == 0.0:
            y = x + 0.5 * drift + s * rng.standard_normal(x.shape)
        else:
            p_plus = expit(gamma * s * s * grad_x * grad_x)
            b_x = np.where(rng.random(x.shape) < p_plus, 1.0, -1.0)
            y = x + (0.5 + b_x * gamma) * drift + s * rng.standard_normal(x.shape)
    elif prop.path == "discrete_atoms":
        values = np.array([a[0] for a in prop.mu.atoms])
        log_probs = np.log([a[1] for a in prop.mu.atoms])
        logits = prop.g.b(grad_x[..., None] * s[..., None] * values) + log_probs
        logits -= logits.max(axis=-1, keepdims=True)
        weights = np.exp(logits)
        cum = np.cumsum(weights, axis=-1)
        u = rng.random(x.shape)[..., None] * cum[..., -1:]
        idx = np.sum(u > cum, axis=-1)
        y = x + s * values[idx]
    else:  # pragma: no cover - exhaustive over _PATHS
        raise AssertionError(prop.path)

    grad_y = model.grad_logpi(y)
    _check_grad(grad_y)
    return ProposalDraw(y=y, grad_x=grad_x, grad_y=grad_y)


# ---------------------------------------------------------------------------
# named presets


def _parse_args(name: str) -> tuple[str, list[float]]:
    if "(" not in name:
        return name, []
    if not name.endswith(")"):
        raise ValueError(f"malformed preset {name!r}")
    head, rest = name.split("(", 1)
    args = [float(tok) for tok in rest[:-1].split(",") if tok.strip()]
    return head, args


def preset_names() -> list[str]:
    return ["mala", "barker", "barker-rademacher", "barker-bimodal", "three-point", "rwm"]


def make_preset(name: str, sigma: float, precond=None) -> LBProposal:
    """Build a named proposal.

    Recognized names: ``mala``, ``barker``, ``barker-rademacher``,
    ``barker-bimodal(sigma_b)`` (default sigma_b = 0.1),
    ``three-point(a, gfrak)`` (g_gamma with gamma = sqrt(gfrak + 1/4) over the
    three-point noise with mu4 = a), and ``rwm``.
    """
    head, args = _parse_args(name.strip())
    if head == "mala":
        return LBProposal(make_balancing("sqrt"), make_gaussian_noise(), sigma, "gamma_gaussian", precond, name)
    if head == "barker":
        return LBProposal(make_balancing("barker"), make_gaussian_noise(), sigma, "barker_flip", precond, name)
    if head == "barker-rademacher":
        return LBProposal(make_balancing("barker"), make_rademacher(), sigma, "barker_flip", precond, name)
    if head == "barker-bimodal":
        sigma_b = args[0] if args else 0.1
        return LBProposal(make_balancing("barker"), make_bimodal(sigma_b), sigma, "barker_flip", precond, name)
    if head == "three-point":
        if len(args) != 2:
            raise ValueError("three-point preset needs (a, gfrak)")
        a, gfrak = args
        if gfrak < -0.25:
            raise ValueError("three-point preset needs gfrak >= -1/4 to realize g_gamma")
        gamma = float(np.sqrt(gfrak + 0.25))
        return LBProposal(
            make_balancing("g_gamma", gamma=gamma), make_three_point(a), sigma, "discrete_atoms", precond, name
        )
    if head == "rwm":
        return LBProposal(None, None, sigma, "rwm", precond, name)
    raise ValueError(f"unknown preset {name!r}")
