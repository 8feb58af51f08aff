"""Experiment harness: ESJD estimation, step-size search, dimension scans,
CLT verification, the Poisson random-effects ESS study, and CSV output.

ESJD is estimated from i.i.d. stationary starts with a single proposal each
(the quantity IS a stationary one-step expectation, so no chain is needed);
this is unbiased and embarrassingly parallel.  Grid points get independent
seed streams derived from (master_seed, preset, n), and result rows are sorted
before writing, so output files are bit-identical for any worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import kstest, norm

from .asymptotics import (
    TargetFunctionals,
    abc_functionals,
    optimal_ell,
    optimal_gfrak_joint,
    theta_squared,
)
from .engine import AdaptState, ChainDivergenceError, run_chain
from .proposal import LBProposal, make_preset, propose
from .engine import log_mh_rho
from .targets import (
    TargetModel,
    correlated_model,
    make_cov_spec,
    poisson_generate,
    poisson_model,
    product_model,
    sample_target,
)

__all__ = [
    "EsjdEstimate",
    "ScanRow",
    "CltCheck",
    "esjd_direct",
    "optimize_sigma",
    "esjd_scan",
    "clt_check",
    "poisson_experiment",
    "correlated_scan",
    "mu4_sweep",
    "batch_chains",
    "resolve_preset",
    "slope_fits",
    "write_scan_csv",
    "write_clt_csv",
    "write_poisson_csv",
    "write_sweep_csv",
    "NonUnimodalError",
    "DegenerateDesignError",
]

try:
    from . import _kernels

    HAVE_KERNELS = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _kernels = None
    HAVE_KERNELS = False

_CHUNK_ELEMS = 2_000_000
_GOLD = (np.sqrt(5.0) - 1.0) / 2.0

SCAN_HEADER = "n,preset,sigma_opt,esjd,acc,esjd_n13"
CLT_HEADER = "n,ell,emp_mean,emp_var,pred_mean,pred_var,ks"
POISSON_HEADER = "scenario,rep,preset,median_ess,min_ess,acc"
SWEEP_HEADER = "n,mu4,esjd,acc"


class NonUnimodalError(RuntimeError):
    """The step-size search kept its optimum on the bracket edge."""


class DegenerateDesignError(ArithmeticError, ValueError):
    """theta^2 = 0: the design has no non-trivial distributional limit."""


@dataclass(frozen=True)
class EsjdEstimate:
    esjd: float
    std_err: float
    acc_rate: float
    n_samples: int


@dataclass(frozen=True)
class ScanRow:
    n: int
    preset: str
    sigma_opt: float
    esjd: float
    acc: float

    @property
    def esjd_n13(self) -> float:
        return self.n ** (1.0 / 3.0) * self.esjd


@dataclass(frozen=True)
class CltCheck:
    n: int
    ell: float
    theta_sq: float
    n_samples: int
    emp_mean: float
    emp_var: float
    ks_stat: float

    @property
    def pred_mean(self) -> float:
        return -0.5 * self.ell**6 * self.theta_sq

    @property
    def pred_var(self) -> float:
        return self.ell**6 * self.theta_sq


def _point_seed(master_seed: int, *parts) -> np.random.SeedSequence:
    entropy = [int(master_seed) & 0xFFFFFFFF]
    for p in parts:
        if isinstance(p, str):
            entropy.append(zlib.crc32(p.encode()))
        else:
            entropy.append(int(p) & 0xFFFFFFFF)
    return np.random.SeedSequence(entropy)


def _kernel_support(prop: LBProposal, model: TargetModel) -> str | None:
    if not HAVE_KERNELS:
        return None
    fused = model.kind == "product" and model.factor.name in ("gaussian", "hyperbolic")
    if prop.path == "rwm":
        return "fused" if fused else None
    if prop.path == "discrete_atoms":
        ok = prop.mu.kind == "three_point" and prop.g.kind in ("sqrt", "g_gamma")
        if not ok:
            return None
    if fused:
        return "fused"
    if model.kind == "correlated_gaussian":
        return "split"
    return None


def _fast_rho(prop: LBProposal, model: TargetModel, x, rng, mode: str):
    """Kernel-evaluated full log-MH ratio for one batch of starts x.

    "fused" inlines the product factor's phi/phi' in the kernel; "split" takes
    gradients and log-densities from the model's closed forms and fuses only
    the per-coordinate transcendentals.  Randoms are drawn from the caller's
    Generator in the same order as proposal.propose, and the kernels reproduce
    the reference arithmetic (pinned by the test suite).
    """
    dtype = x.dtype
    s = prop.scales(model.dim).astype(dtype)
    y = np.empty_like(x)
    rho = np.empty(x.shape[0], dtype=dtype)
    g, mu = prop.g, prop.mu
    gamma = 0.0 if g is None else (g.gamma or 0.0)

    if mode == "fused":
        kind = 0 if model.factor.name == "gaussian" else 1
        d2 = dtype.type(model.factor.params.get("delta_sq", 0.0))
        if prop.path == "rwm":
            z = rng.standard_normal(x.shape, dtype=dtype)
            _kernels.rho_rwm_product(x, z, s, kind, d2, y, rho)
        elif prop.path == "barker_flip":
            z = mu.sample(rng, x.shape, dtype=dtype)
            u = rng.random(x.shape, dtype=dtype)
            _kernels.rho_barker_product(x, z, u, s, kind, d2, y, rho)
        elif prop.path == "gamma_gaussian" and gamma == 0.0:
            z = rng.standard_normal(x.shape, dtype=dtype)
            _kernels.rho_mala_product(x, z, s, kind, d2, y, rho)
        elif prop.path == "gamma_gaussian":
            u = rng.random(x.shape, dtype=dtype)
            z = rng.standard_normal(x.shape, dtype=dtype)
            _kernels.rho_gamma_product(x, u, z, s, gamma, kind, d2, y, rho)
        else:
            root = dtype.type(mu.atoms[2][0])
            p0 = dtype.type(mu.atoms[0][1])
            u = rng.random(x.shape, dtype=dtype)
            _kernels.rho_three_point_product(x, u, s, root, p0, dtype.type(gamma), kind, d2, y, rho)
        return y, rho

    grad_x = model.grad_logpi(x)
    terms = np.empty(x.shape[0], dtype=dtype)
    if prop.path == "barker_flip":
        z = mu.sample(rng, x.shape, dtype=dtype)
        u = rng.random(x.shape, dtype=dtype)
        _kernels.propose_barker(x, grad_x, z, u, s, y)
        grad_y = model.grad_logpi(y)
        _kernels.terms_barker(x, y, grad_x, grad_y, terms)
    elif prop.path == "gamma_gaussian" and gamma == 0.0:
        z = rng.standard_normal(x.shape, dtype=dtype)
        _kernels.propose_mala(x, grad_x, z, s, y)
        grad_y = model.grad_logpi(y)
        _kernels.terms_mala(x, y, grad_x, grad_y, s, terms)
    elif prop.path == "gamma_gaussian":
        u = rng.random(x.shape, dtype=dtype)
        z = rng.standard_normal(x.shape, dtype=dtype)
        _kernels.propose_gamma_gauss(x, grad_x, u, z, s, gamma, y)
        grad_y = model.grad_logpi(y)
        _kernels.terms_gamma_gauss(x, y, grad_x, grad_y, s, gamma, terms)
    else:
        root = dtype.type(mu.atoms[2][0])
        p0 = dtype.type(mu.atoms[0][1])
        u = rng.random(x.shape, dtype=dtype)
        _kernels.propose_three_point(x, grad_x, u, s, root, p0, 0.5 + gamma, 0.5 - gamma, y)
        grad_y = model.grad_logpi(y)
        _kernels.terms_three_point(x, y, grad_x, grad_y, s, root, p0, 0.5 + gamma, 0.5 - gamma, terms)
    rho[:] = model.logpi(y) - model.logpi(x) + terms
    return y, rho


def _rho_and_jump(prop: LBProposal, model: TargetModel, m: int, rng, dtype=np.float64):
    """One batch of stationary starts -> (rho, squared jump of coordinate 1)."""
    x = sample_target(model, rng, size=m, dtype=dtype)
    mode = _kernel_support(prop, model)
    if mode is not None:
        y, rho = _fast_rho(prop, model, x, rng, mode)
        return rho, (y[:, 0] - x[:, 0]) ** 2
    draw = propose(prop, model, x, rng)
    rho = log_mh_rho(prop, model, x, draw).rho
    return rho, (draw.y[:, 0] - x[:, 0]) ** 2


def esjd_direct(prop: LBProposal, model: TargetModel, n_samples: int, rng,
                dtype=np.float64) -> EsjdEstimate:
    """Unbiased ESJD of coordinate 1: mean of (y_1 - x_1)^2 min(1, e^rho)
    over i.i.d. draws x ~ pi with one proposal each.

    ``dtype=float32`` runs the whole batch in single precision (the step-size
    search uses this; statistical noise dwarfs the rounding).
    """
    if isinstance(rng, (int, np.random.SeedSequence)):
        rng = np.random.default_rng(rng)
    dtype = np.dtype(dtype).type
    chunk = max(1, min(n_samples, _CHUNK_ELEMS // model.dim))
    total = 0.0
    total_sq = 0.0
    total_alpha = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        rho, jump_sq = _rho_and_jump(prop, model, m, rng, dtype=dtype)
        with np.errstate(invalid="ignore", over="ignore"):
            alpha = np.exp(np.minimum(dtype(0.0), rho))
            np.nan_to_num(alpha, copy=False, nan=0.0)
            vals = jump_sq * alpha
        np.nan_to_num(vals, copy=False, nan=0.0)  # inf jump * underflowed alpha
        total += float(vals.sum(dtype=np.float64))
        total_sq += float((vals * vals).sum(dtype=np.float64))
        total_alpha += float(alpha.sum(dtype=np.float64))
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return EsjdEstimate(
        esjd=mean,
        std_err=float(np.sqrt(var / n_samples)),
        acc_rate=total_alpha / n_samples,
        n_samples=n_samples,
    )


def _suggest_sigma0(prop: LBProposal, model: TargetModel, functionals: TargetFunctionals | None) -> float:
    n = model.dim
    if prop.path == "rwm":
        return 2.38 / np.sqrt(n)
    if functionals is not None and prop.g.gfrak is not None:
        t2 = theta_squared(functionals, prop.mu.mu4, prop.mu.mu6, prop.g.gfrak)
        summary = optimal_ell(t2)
        if not summary.degenerate:
            return summary.ell_star * n ** (-1.0 / 6.0)
    return n ** (-1.0 / 6.0)


def optimize_sigma(
    prop_family,
    model: TargetModel,
    seed: int | np.random.SeedSequence,
    search_samples: int = 20_000,
    final_samples: int = 200_000,
    sigma0: float | None = None,
    iters: int = 30,
    half_width: float = 3.0,
):
    """Golden-section search of ESJD over log sigma with common random numbers.

    ``prop_family`` maps sigma -> LBProposal.  Each evaluation rebuilds the
    same RNG stream, so the objective is a fixed smooth function of sigma and
    the search is deterministic.  If the optimum lands on a bracket edge the
    bracket is widened once on that side; a second hit raises.
    Returns (sigma_opt, EsjdEstimate at sigma_opt with final_samples).
    """
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    search_seq, final_seq = seq.spawn(2)

    def objective(log_sigma: float) -> float:
        est = esjd_direct(prop_family(float(np.exp(log_sigma))), model, search_samples,
                          np.random.default_rng(search_seq), dtype=np.float32)
        return est.esjd

    center = float(np.log(sigma0 if sigma0 is not None else 1.0))
    lo, hi = center - half_width, center + half_width
    edge_tol = 0.05 * (hi - lo)

    for attempt in range(2):
        a, b = lo, hi
        c = b - _GOLD * (b - a)
        d = a + _GOLD * (b - a)
        fc, fd = objective(c), objective(d)
        for _ in range(iters):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - _GOLD * (b - a)
                fc = objective(c)
            else:
                a, c, fc = c, d, fd
                d = a + _GOLD * (b - a)
                fd = objective(d)
        log_opt = 0.5 * (a + b)
        if log_opt - lo < edge_tol:
            lo -= 2.0 * half_width
        elif hi - log_opt < edge_tol:
            hi += 2.0 * half_width
        else:
            break
        if attempt == 1:
            raise NonUnimodalError("ESJD(sigma) optimum stayed on the bracket edge after widening")
    sigma_opt = float(np.exp(log_opt))
    final = esjd_direct(prop_family(sigma_opt), model, final_samples, np.random.default_rng(final_seq))
    return sigma_opt, final


def resolve_preset(name: str, model: TargetModel, functionals: TargetFunctionals | None = None):
    """Map a preset name to a sigma -> LBProposal factory for this target.

    ``three-point(a)`` with a single argument gets its balancing curvature from
    the joint-optimum formula: the target's own functionals for product
    targets, and the product-Gaussian values (A=0, B=1, C=0) for correlated
    Gaussian targets (the proposal axes carry no correlation information).
    """
    head = name.split("(")[0].strip()
    if head == "three-point" and name.count(",") == 0:
        a = float(name[name.index("(") + 1 : name.index(")")])
        if model.kind == "product":
            f = functionals if functionals is not None else abc_functionals(model.factor)
        else:
            f = TargetFunctionals(0.0, 1.0, 0.0)
        gfrak = optimal_gfrak_joint(f, a)
        full = f"three-point({a},{gfrak})"
        return lambda sigma: make_preset(full, sigma)
    return lambda sigma: make_preset(name, sigma)


def _scan_point(preset: str, model: TargetModel, functionals, seed_seq, search_samples, final_samples) -> ScanRow:
    family = resolve_preset(preset, model, functionals)
    sigma0 = _suggest_sigma0(family(1.0), model, functionals if model.kind == "product" else None)
    sigma_opt, est = optimize_sigma(
        family, model, seed_seq, search_samples=search_samples, final_samples=final_samples, sigma0=sigma0
    )
    return ScanRow(n=model.dim, preset=preset, sigma_opt=sigma_opt, esjd=est.esjd, acc=est.acc_rate)


def _run_grid(jobs, threads: int):
    if threads <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda j: j(), jobs))


def esjd_scan(
    presets: list[str],
    factor,
    n_grid: list[int],
    master_seed: int,
    search_samples: int = 20_000,
    final_samples: int = 200_000,
    threads: int = 1,
) -> list[ScanRow]:
    """Optimal-ESJD scan over dimensions for a product target."""
    if list(n_grid) != sorted(n_grid):
        raise ValueError("n_grid must be ascending")
    functionals = abc_functionals(factor)
    jobs = []
    for preset in presets:
        for n in n_grid:
            model = product_model(factor, n)
            seed_seq = _point_seed(master_seed, preset, n)
            jobs.append(
                lambda p=preset, m=model, s=seed_seq: _scan_point(
                    p, m, functionals, s, search_samples, final_samples
                )
            )
    rows = _run_grid(jobs, threads)
    return sorted(rows, key=lambda r: (r.preset, r.n))


def slope_fits(rows: list[ScanRow]) -> dict[str, float]:
    """Log-log slope of ESJD vs n per preset, fitted over the top half of the
    dimension grid."""
    out = {}
    presets = sorted({r.preset for r in rows})
    for preset in presets:
        pts = sorted((r.n, r.esjd) for r in rows if r.preset == preset)
        top = pts[len(pts) // 2 :] if len(pts) >= 4 else pts
        if len(top) < 2:
            out[preset] = float("nan")
            continue
        logn = np.log([p[0] for p in top])
        loge = np.log([p[1] for p in top])
        out[preset] = float(np.polyfit(logn, loge, 1)[0])
    return out


def clt_check(
    preset: str,
    factor,
    n: int,
    ell: float,
    n_samples: int,
    seed: int | np.random.SeedSequence,
) -> CltCheck:
    """Distributional check of sum_i rho_i at sigma = ell * n^{-1/6} against
    the predicted normal N(-ell^6 theta^2 / 2, ell^6 theta^2)."""
    functionals = abc_functionals(factor)
    family = resolve_preset(preset, product_model(factor, 1), functionals)
    prop = family(float(ell) * n ** (-1.0 / 6.0))
    if prop.path == "rwm":
        raise ValueError("the CLT check needs a gradient-based design")
    theta_sq = theta_squared(functionals, prop.mu.mu4, prop.mu.mu6, prop.g.gfrak)
    if theta_sq <= 0:
        raise DegenerateDesignError("theta^2 = 0: no non-trivial limit at this scaling")
    model = product_model(factor, n)
    rng = np.random.default_rng(seed)
    chunk = max(1, min(n_samples, _CHUNK_ELEMS // n))
    rhos = np.empty(n_samples)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        rho, _ = _rho_and_jump(prop, model, m, rng)
        rhos[done : done + m] = rho
        done += m
    pred_var = ell**6 * theta_sq
    pred_sd = float(np.sqrt(pred_var))
    ks = kstest(rhos, lambda q: norm.cdf(q, loc=-0.5 * pred_var, scale=pred_sd)).statistic
    return CltCheck(
        n=n,
        ell=float(ell),
        theta_sq=theta_sq,
        n_samples=n_samples,
        emp_mean=float(rhos.mean()),
        emp_var=float(rhos.var()),
        ks_stat=float(ks),
    )


def batch_chains(
    prop: LBProposal,
    model: TargetModel,
    x0: np.ndarray,
    n_steps: int,
    rng: np.random.Generator,
    keep_from: int = 0,
):
    """Run R independent chains in lock-step (vectorized across chains).

    Returns (samples[R, kept, dim], accept_fraction).  Used for the
    invariant-distribution checks, where many short stationary-start chains
    give the same iteration budget as one long chain.
    """
    x = np.array(x0, dtype=float)
    r = x.shape[0]
    kept = []
    n_acc = 0
    for t in range(n_steps):
        draw = propose(prop, model, x, rng)
        rho = log_mh_rho(prop, model, x, draw).rho
        accept = np.log(rng.random(r)) < np.minimum(0.0, rho)
        accept &= np.isfinite(rho)
        x = np.where(accept[:, None], draw.y, x)
        n_acc += int(accept.sum())
        if t >= keep_from:
            kept.append(x.copy())
    samples = np.stack(kept, axis=1)
    return samples, n_acc / (r * n_steps)


def poisson_experiment(
    scenarios=(1.0, 3.0),
    presets=("barker", "barker-bimodal(0.1)", "mala", "rwm"),
    reps: int = 20,
    n_iters: int = 20_000,
    master_seed: int = 0,
    regenerate_data: bool = True,
    threads: int = 1,
    sigma_init: float = 0.02,
) -> list[dict]:
    """Median/min ESS per adaptive run on the 51-dim Poisson posterior.

    Each repetition draws fresh data shared by all presets (or one fixed
    dataset per scenario with ``regenerate_data=False``), initializes the
    chain from the prior, adapts scale and preconditioner toward the target
    acceptance, and reports ESS over the post-freeze half.  Diverged runs are
    recorded as ESS = 1 with acc = nan.
    """

    def one_run(sigma_eta: float, rep: int, preset: str) -> dict:
        data_seed = _point_seed(master_seed, "data", int(sigma_eta * 1000), rep if regenerate_data else 0)
        data = poisson_generate(int(data_seed.generate_state(1)[0]), sigma_eta)
        model = poisson_model(data)
        run_seq = _point_seed(master_seed, "chain", int(sigma_eta * 1000), rep, preset)
        rng = np.random.default_rng(run_seq)
        mu0 = 10.0 * rng.standard_normal()
        eta0 = mu0 + sigma_eta * rng.standard_normal(50)
        init = np.concatenate([[mu0], eta0])
        target = 0.234 if preset == "rwm" else 0.574
        adapt = AdaptState(log_scale=float(np.log(sigma_init)), target_acc=target)
        prop = make_preset(preset, sigma_init)
        try:
            out = run_chain(prop, model, n_iters, init, rng, adapt=adapt)
            ess_vals = out.ess
            acc = out.acc_rate
        except ChainDivergenceError:
            ess_vals = np.ones(model.dim)
            acc = float("nan")
        return {
            "scenario": sigma_eta,
            "rep": rep,
            "preset": preset,
            "median_ess": float(np.median(ess_vals)),
            "min_ess": float(np.min(ess_vals)),
            "acc": acc,
        }

    jobs = [
        lambda s=s, r=r, p=p: one_run(s, r, p)
        for s in scenarios
        for r in range(reps)
        for p in presets
    ]
    rows = _run_grid(jobs, threads)
    return sorted(rows, key=lambda d: (d["scenario"], d["rep"], d["preset"]))


def correlated_scan(
    presets: list[str],
    structure: str,
    rho: float,
    n_grid: list[int],
    master_seed: int,
    search_samples: int = 20_000,
    final_samples: int = 200_000,
    threads: int = 1,
) -> list[ScanRow]:
    """ESJD scan on correlated Gaussian targets with isotropic proposals."""
    if list(n_grid) != sorted(n_grid):
        raise ValueError("n_grid must be ascending")
    jobs = []
    for preset in presets:
        for n in n_grid:
            model = correlated_model(make_cov_spec(n, structure, rho))
            seed_seq = _point_seed(master_seed, preset, n, structure)
            jobs.append(
                lambda p=preset, m=model, s=seed_seq: _scan_point(
                    p, m, None, s, search_samples, final_samples
                )
            )
    rows = _run_grid(jobs, threads)
    return sorted(rows, key=lambda r: (r.preset, r.n))


def mu4_sweep(
    factor,
    mu4_list: list[float],
    n_grid: list[int],
    master_seed: int,
    search_samples: int = 20_000,
    final_samples: int = 200_000,
    threads: int = 1,
) -> list[dict]:
    """Three-point designs across mu4 values, each with its joint-optimal
    balancing curvature for this factor."""
    if any(m <= 1.0 for m in mu4_list):
        raise ValueError("mu4 values must exceed 1")
    functionals = abc_functionals(factor)
    jobs = []
    for mu4 in mu4_list:
        preset = f"three-point({mu4},{optimal_gfrak_joint(functionals, mu4)})"
        for n in n_grid:
            model = product_model(factor, n)
            seed_seq = _point_seed(master_seed, f"mu4:{mu4}", n)
            jobs.append(
                lambda p=preset, m=model, s=seed_seq, v=mu4: {
                    "mu4": v,
                    "row": _scan_point(p, m, functionals, s, search_samples, final_samples),
                }
            )
    results = _run_grid(jobs, threads)
    rows = [
        {"n": r["row"].n, "mu4": r["mu4"], "esjd": r["row"].esjd, "acc": r["row"].acc}
        for r in results
    ]
    return sorted(rows, key=lambda d: (d["mu4"], d["n"]))


# ---------------------------------------------------------------------------
# CSV output (headers are part of the external interface; keep them exact)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path, header: str, rows) -> None:
    lines = [header]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scan_csv(rows: list[ScanRow], path) -> None:
    _write_csv(path, SCAN_HEADER, ((r.n, r.preset, r.sigma_opt, r.esjd, r.acc, r.esjd_n13) for r in rows))


def write_clt_csv(checks: list[CltCheck], path) -> None:
    _write_csv(
        path,
        CLT_HEADER,
        ((c.n, c.ell, c.emp_mean, c.emp_var, c.pred_mean, c.pred_var, c.ks_stat) for c in checks),
    )


def write_poisson_csv(rows: list[dict], path) -> None:
    _write_csv(
        path,
        POISSON_HEADER,
        ((r["scenario"], r["rep"], r["preset"], r["median_ess"], r["min_ess"], r["acc"]) for r in rows),
    )


def write_sweep_csv(rows: list[dict], path) -> None:
    _write_csv(path, SWEEP_HEADER, ((r["n"], r["mu4"], r["esjd"], r["acc"]) for r in rows))
