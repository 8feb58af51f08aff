"""Metropolis-Hastings accept/reject, chain execution, adaptation, ESS.

The exact log-ratio for a locally-balanced proposal with symmetric noise is

    rho = log pi(y) - log pi(x)
        + sum_i [ b(beta_i(y) (x_i - y_i)) - b(beta_i(x) (y_i - x_i))
                  + log Z_i(x) - log Z_i(y) ]

with Z_i(x) the per-coordinate normalizer at scale sigma * d_i; the noise
densities cancel by symmetry.  rho is antisymmetric under swapping x and y.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .proposal import LBProposal, ProposalDraw, log_normalizer, propose
from .targets import TargetModel

__all__ = [
    "MHLogRatio",
    "AdaptState",
    "ChainOutput",
    "log_mh_rho",
    "mh_step",
    "run_chain",
    "ess",
    "ChainDivergenceError",
]

DIVERGENCE_BOUND = 1e8
WARM_START_ITERS = 100


class ChainDivergenceError(RuntimeError):
    """A chain coordinate exceeded the divergence guard."""


@dataclass(frozen=True)
class MHLogRatio:
    """Log Metropolis-Hastings ratio, with optional per-coordinate terms."""

    rho: np.ndarray
    per_coord_terms: np.ndarray | None = None


def _rho_terms(prop: LBProposal, x, y, grad_x, grad_y):
    """Per-coordinate b and log-Z contributions (everything except delta logpi)."""
    delta = y - x
    terms = prop.g.b(grad_y * (-delta))
    terms -= prop.g.b(grad_x * delta)
    if prop.g.kind != "barker":  # the Barker normalizer is identically 1
        s = prop.scales(x.shape[-1])
        terms += log_normalizer(prop.g, prop.mu, grad_x * s)
        terms -= log_normalizer(prop.g, prop.mu, grad_y * s)
    return terms


def log_mh_rho(prop: LBProposal, model: TargetModel, x: np.ndarray, draw: ProposalDraw,
               keep_per_coord: bool = False) -> MHLogRatio:
    """Exact log MH ratio for the proposal x -> draw.y (batched along axis 0)."""
    x = np.asarray(x, dtype=float)
    delta_logpi = model.logpi(draw.y) - model.logpi(x)
    if prop.path == "rwm":
        rho = delta_logpi
        return MHLogRatio(rho=rho)
    terms = _rho_terms(prop, x, draw.y, draw.grad_x, draw.grad_y)
    rho = delta_logpi + terms.sum(axis=-1)
    return MHLogRatio(rho=rho, per_coord_terms=terms if keep_per_coord else None)


def mh_step(prop: LBProposal, model: TargetModel, x: np.ndarray, rng: np.random.Generator):
    """One MH transition: returns (next_x, accepted, rho).

    Acceptance is decided as log(u) < min(0, rho); a non-finite rho rejects.
    """
    draw = propose(prop, model, x, rng)
    rho = log_mh_rho(prop, model, x, draw).rho
    log_u = np.log(rng.random(np.shape(rho)) if np.ndim(rho) else rng.random())
    accept = log_u < np.minimum(0.0, rho)
    accept = np.asarray(accept) & np.isfinite(np.asarray(rho))
    if np.ndim(rho) == 0:
        next_x = draw.y if accept else x
        return next_x, bool(accept), float(rho)
    next_x = np.where(accept[..., None], draw.y, x)
    return next_x, accept, rho


@dataclass
class AdaptState:
    """Robbins-Monro state for the global scale and diagonal preconditioner.

    The learning rate is t^-decay; the first WARM_START_ITERS iterations adapt
    only the global scale (variance estimates from fewer samples destabilize
    the preconditioner).
    """

    log_scale: float
    target_acc: float = 0.574
    decay: float = 0.6
    t: int = 0
    running_mean: np.ndarray | None = None
    running_var: np.ndarray | None = None

    def __post_init__(self):
        if not 0.5 < self.decay <= 1.0:
            raise ValueError("decay must lie in (0.5, 1]")

    def precond(self) -> np.ndarray | None:
        if self.running_var is None or self.t <= WARM_START_ITERS:
            return None
        return np.sqrt(self.running_var)

    def update(self, x: np.ndarray, alpha: float) -> None:
        self.t += 1
        gamma_t = self.t ** (-self.decay)
        self.log_scale += gamma_t * (alpha - self.target_acc)
        if self.running_mean is None:
            self.running_mean = x.copy()
            self.running_var = np.ones_like(x)
        else:
            self.running_mean += gamma_t * (x - self.running_mean)
            self.running_var += gamma_t * ((x - self.running_mean) ** 2 - self.running_var)
            np.maximum(self.running_var, 1e-12, out=self.running_var)


@dataclass(frozen=True)
class ChainOutput:
    """Samples and diagnostics of one chain."""

    samples: np.ndarray
    acc_rate: float
    esjd_per_coord: float
    ess: np.ndarray
    rhos: np.ndarray = field(repr=False, default=None)
    accepted: np.ndarray = field(repr=False, default=None)


def run_chain(prop: LBProposal, model: TargetModel, n_iters: int, init: np.ndarray,
              rng: np.random.Generator, adapt: AdaptState | None = None,
              freeze_frac: float = 0.5, ess_window: str = "post_freeze") -> ChainOutput:
    """Iterate mh_step for n_iters steps from init.

    With ``adapt`` present, the global scale follows a Robbins-Monro recursion
    on the acceptance probability and the preconditioner tracks running
    per-coordinate standard deviations; adaptation freezes after
    ``freeze_frac * n_iters`` iterations so the tail of the chain has a fixed
    kernel.  ESS is computed over that fixed-kernel tail (or the full chain
    when not adapting).
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    x = np.asarray(init, dtype=float).copy()
    if x.shape != (model.dim,):
        raise ValueError("init must have shape (dim,)")
    if prop.mu is not None and prop.mu.discrete:
        warnings.warn(
            "discrete noise gives a non-irreducible chain on R^n; fine for "
            "ESJD/CLT studies, unsuitable for generic sampling",
            stacklevel=2,
        )

    samples = np.empty((n_iters, model.dim))
    rhos = np.empty(n_iters)
    accepted = np.empty(n_iters, dtype=bool)
    alphas = np.empty(n_iters)
    jumps0 = np.empty(n_iters)

    freeze_at = int(freeze_frac * n_iters) if adapt is not None else 0
    cur = prop if adapt is None else prop.with_scale(np.exp(adapt.log_scale), adapt.precond())
    grad_x = None
    logpi_x = model.logpi(x)

    for t in range(n_iters):
        draw = propose(cur, model, x, rng)
        logpi_y = model.logpi(draw.y)
        if cur.path == "rwm":
            rho = logpi_y - logpi_x
        else:
            rho = logpi_y - logpi_x + _rho_terms(cur, x, draw.y, draw.grad_x, draw.grad_y).sum()
        rho = float(rho)
        alpha = float(np.exp(min(0.0, rho))) if np.isfinite(rho) else 0.0
        acc = np.log(rng.random()) < min(0.0, rho) if np.isfinite(rho) else False
        jumps0[t] = (draw.y[0] - x[0]) ** 2 if acc else 0.0
        if acc:
            x = draw.y
            logpi_x = logpi_y
        samples[t] = x
        rhos[t] = rho
        accepted[t] = acc
        alphas[t] = alpha
        if np.max(np.abs(x)) > DIVERGENCE_BOUND:
            raise ChainDivergenceError(f"|x| exceeded {DIVERGENCE_BOUND:g} at iteration {t}")
        if adapt is not None and t < freeze_at:
            adapt.update(x, alpha)
            cur = prop.with_scale(np.exp(adapt.log_scale), adapt.precond())

    start = freeze_at if (adapt is not None and ess_window == "post_freeze") else 0
    tail = samples[start:]
    ess_vals = np.array([ess(tail[:, j]) for j in range(model.dim)]) if len(tail) >= 100 else np.ones(model.dim)
    return ChainOutput(
        samples=samples,
        acc_rate=float(np.mean(alphas)),
        esjd_per_coord=float(np.mean(jumps0)),
        ess=ess_vals,
        rhos=rhos,
        accepted=accepted,
    )


def _autocorr_fft(x: np.ndarray) -> np.ndarray:
    n = len(x)
    xc = x - x.mean()
    m = 1
    while m < 2 * n:
        m <<= 1
    f = np.fft.rfft(xc, n=m)
    acov = np.fft.irfft(f * np.conj(f), n=m)[:n].real
    if acov[0] <= 0:
        return None
    return acov / acov[0]


def ess(series: np.ndarray) -> float:
    """Effective sample size N / (1 + 2 sum rho_k) with Geyer's initial
    monotone positive-pair truncation of the autocorrelations."""
    series = np.asarray(series, dtype=float)
    n = len(series)
    if n < 100:
        raise ValueError("series too short for ESS (need >= 100 points)")
    rho = _autocorr_fft(series)
    if rho is None:  # constant series: degenerate chain
        return 1.0
    n_pairs = (len(rho) - 1) // 2
    pairs = rho[1 : 2 * n_pairs + 1 : 2] + rho[2 : 2 * n_pairs + 1 : 2]
    neg = np.nonzero(pairs <= 0)[0]
    cutoff = neg[0] if len(neg) else len(pairs)
    kept = np.minimum.accumulate(pairs[:cutoff]) if cutoff else np.empty(0)
    tau = 1.0 + 2.0 * float(kept.sum())
    return float(np.clip(n / max(tau, 1.0 / n), 1.0, n))
