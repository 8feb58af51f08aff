"""Command-line entry point.

Subcommands: design, esjd-scan, clt-check, poisson, correlated, mu4-sweep,
chain.  Every run requires an explicit --seed (there is no wall-clock
default); outputs are CSV/JSON files in --out (env LBMH_OUT wins) and are
byte-identical across reruns with the same seed at any --threads value.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments as xp
from .asymptotics import (
    abc_functionals,
    efficiency_ratio,
    optimal_ell,
    theta_squared,
)
from .engine import AdaptState, ChainDivergenceError, run_chain
from .proposal import NormalizerUnstableError, make_preset
from .targets import (
    make_gaussian_factor,
    make_hyperbolic_factor,
    correlated_model,
    make_cov_spec,
    poisson_generate,
    poisson_model,
    product_model,
    sample_target,
    target_from_config,
)

DEFAULT_N_GRID = [32, 64, 128, 256, 512, 1024, 2048, 4096]


class ConfigError(ValueError):
    pass


def _parse_target(spec: str):
    """'gaussian' | 'hyperbolic[:d2]' | 'equicorrelated:rho' | 'ar1:rho' |
    'poisson:sigma_eta' | a JSON target config block."""
    spec = spec.strip()
    if spec.startswith("{"):
        return json.loads(spec)
    head, _, arg = spec.partition(":")
    if head == "gaussian":
        return {"kind": "product", "factor": "gaussian"}
    if head == "hyperbolic":
        return {"kind": "product", "factor": "hyperbolic", "delta_sq": float(arg) if arg else 0.1}
    if head in ("equicorrelated", "ar1"):
        if not arg:
            raise ConfigError(f"target {head} needs a correlation, e.g. {head}:0.99")
        return {"kind": "correlated_gaussian", "structure": head, "rho": float(arg)}
    if head == "poisson":
        return {"kind": "poisson_re", "sigma_eta": float(arg) if arg else 1.0}
    raise ConfigError(f"unknown target spec {spec!r}")


def _factor_from(target_cfg: dict):
    if target_cfg.get("kind") != "product":
        raise ConfigError("this subcommand needs a product target")
    if target_cfg["factor"] == "gaussian":
        return make_gaussian_factor()
    return make_hyperbolic_factor(target_cfg.get("delta_sq", 0.1))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lbmh", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, required=True, help="master seed (required)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--config", help="JSON config file; flags override its values")

    p = sub.add_parser("design", help="closed-form efficiency summary and pairwise ratios")
    common(p)
    p.add_argument("--target", default="gaussian")
    p.add_argument("--presets", default="mala,barker")

    p = sub.add_parser("esjd-scan", help="optimal ESJD against dimension on a product target")
    common(p)
    p.add_argument("--target", default="gaussian")
    p.add_argument("--presets", default="mala,barker")
    p.add_argument("--n-grid", default=None)
    p.add_argument("--samples", type=int, default=200_000)

    p = sub.add_parser("clt-check", help="limiting law of the summed log-MH ratio")
    common(p)
    p.add_argument("--target", default="gaussian")
    p.add_argument("--presets", default="barker")
    p.add_argument("--n-grid", default="4096")
    p.add_argument("--ell", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=20_000)

    p = sub.add_parser("poisson", help="adaptive ESS study on the random-effects posterior")
    common(p)
    p.add_argument("--presets", default="barker,barker-bimodal(0.1),mala,rwm")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--iters", type=int, default=20_000)
    p.add_argument("--full", action="store_true", help="paper-scale: 100 reps of 5e4 iterations")
    p.add_argument("--fixed-data", action="store_true", help="one dataset per scenario instead of per repetition")

    p = sub.add_parser("correlated", help="ESJD scan on correlated Gaussian targets")
    common(p)
    p.add_argument("--target", default="ar1:0.99")
    p.add_argument("--presets", default="mala,barker")
    p.add_argument("--n-grid", default="32,64,128,256,512,1024")
    p.add_argument("--samples", type=int, default=200_000)

    p = sub.add_parser("mu4-sweep", help="three-point designs across mu4 values")
    common(p)
    p.add_argument("--target", default="hyperbolic:0.1")
    p.add_argument("--mu4", default="1.1,1.25,1.5,2")
    p.add_argument("--n-grid", default=None)
    p.add_argument("--samples", type=int, default=200_000)

    p = sub.add_parser("chain", help="run one Metropolis-Hastings chain, stream to CSV")
    common(p)
    p.add_argument("--target", default="gaussian")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--presets", default="barker")
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--adapt", action="store_true")
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--coords", type=int, default=8, help="number of leading coordinates to record")
    return parser


def _apply_config_file(args, argv):
    if not args.config:
        return args
    with open(args.config) as fh:
        cfg = json.load(fh)
    given = set(argv)
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        # explicit flags win over file values
        if f"--{key}" not in given and f"--{attr}" not in given:
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            setattr(args, attr, value)
    return args


def _n_grid(args, default):
    if args.n_grid is None:
        return list(default)
    if isinstance(args.n_grid, str):
        return [int(tok) for tok in args.n_grid.split(",") if tok.strip()]
    return [int(v) for v in args.n_grid]


def _presets(args) -> list[str]:
    raw = args.presets
    if isinstance(raw, str):
        # split on commas not inside parentheses
        out, depth, cur = [], 0, []
        for ch in raw:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == "," and depth == 0:
                out.append("".join(cur).strip())
                cur = []
            else:
                cur.append(ch)
        if cur:
            out.append("".join(cur).strip())
        return [p for p in out if p]
    return list(raw)


def _out_dir(args) -> str:
    out = os.environ.get("LBMH_OUT") or args.out
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_design(args) -> str:
    target_cfg = _parse_target(args.target)
    factor = _factor_from(target_cfg)
    f = abc_functionals(factor)
    presets = _presets(args)
    designs = {}
    thetas = {}
    for name in presets:
        prop = xp.resolve_preset(name, product_model(factor, 1), f)(1.0)
        if prop.path == "rwm":
            raise ConfigError("design compares gradient-based presets only")
        t2 = theta_squared(f, prop.mu.mu4, prop.mu.mu6, prop.g.gfrak)
        s = optimal_ell(t2)
        thetas[name] = t2
        designs[name] = {
            "theta_sq": t2,
            "ell_star": s.ell_star,
            "h_star": s.h_star,
            "limiting_acc": s.limiting_acc,
            "degenerate": s.degenerate,
        }
    ratios = {}
    for a in presets:
        for b in presets:
            if a != b and thetas[a] > 0 and thetas[b] > 0:
                ratios[f"{a}/{b}"] = efficiency_ratio(thetas[a], thetas[b])
    doc = {
        "target": args.target,
        "functionals": {"A": f.A, "B": f.B, "C": f.C},
        "designs": designs,
        "ratios": ratios,
    }
    path = os.path.join(_out_dir(args), "design.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(doc, sort_keys=True))
    return f"design: {len(designs)} designs, {len(ratios)} ratios -> {path}"


def _cmd_esjd_scan(args) -> str:
    factor = _factor_from(_parse_target(args.target))
    rows = xp.esjd_scan(
        _presets(args),
        factor,
        _n_grid(args, DEFAULT_N_GRID),
        master_seed=args.seed,
        search_samples=max(1000, args.samples // 10),
        final_samples=args.samples,
        threads=args.threads,
    )
    path = os.path.join(_out_dir(args), "scan.csv")
    xp.write_scan_csv(rows, path)
    slopes = xp.slope_fits(rows)
    return f"esjd-scan: {len(rows)} rows -> {path}; slopes {json.dumps(slopes, sort_keys=True)}"


def _cmd_clt(args) -> str:
    factor = _factor_from(_parse_target(args.target))
    checks = []
    for preset in _presets(args):
        for n in _n_grid(args, [4096]):
            seq = xp._point_seed(args.seed, "clt", preset, n)
            checks.append(xp.clt_check(preset, factor, n, args.ell, args.samples, seq))
    path = os.path.join(_out_dir(args), "clt.csv")
    xp.write_clt_csv(checks, path)
    worst = max(c.ks_stat for c in checks)
    return f"clt-check: {len(checks)} rows -> {path}; worst KS {worst:.4f}"


def _cmd_poisson(args) -> str:
    reps = 100 if args.full else args.reps
    iters = 50_000 if args.full else args.iters
    rows = xp.poisson_experiment(
        presets=tuple(_presets(args)),
        reps=reps,
        n_iters=iters,
        master_seed=args.seed,
        regenerate_data=not args.fixed_data,
        threads=args.threads,
    )
    path = os.path.join(_out_dir(args), "poisson.csv")
    xp.write_poisson_csv(rows, path)
    return f"poisson: {len(rows)} rows -> {path}"


def _cmd_correlated(args) -> str:
    cfg = _parse_target(args.target)
    if cfg.get("kind") != "correlated_gaussian":
        raise ConfigError("correlated needs an equicorrelated:rho or ar1:rho target")
    rows = xp.correlated_scan(
        _presets(args),
        cfg["structure"],
        cfg["rho"],
        _n_grid(args, [32, 64, 128, 256, 512, 1024]),
        master_seed=args.seed,
        search_samples=max(1000, args.samples // 10),
        final_samples=args.samples,
        threads=args.threads,
    )
    path = os.path.join(_out_dir(args), "correlated.csv")
    xp.write_scan_csv(rows, path)
    return f"correlated: {len(rows)} rows -> {path}"


def _cmd_mu4_sweep(args) -> str:
    factor = _factor_from(_parse_target(args.target))
    mu4_list = [float(tok) for tok in str(args.mu4).split(",") if tok.strip()]
    rows = xp.mu4_sweep(
        factor,
        mu4_list,
        _n_grid(args, [8, 16, 32, 64, 128, 256, 512, 1024]),
        master_seed=args.seed,
        search_samples=max(1000, args.samples // 10),
        final_samples=args.samples,
        threads=args.threads,
    )
    path = os.path.join(_out_dir(args), "sweep.csv")
    xp.write_sweep_csv(rows, path)
    return f"mu4-sweep: {len(rows)} rows -> {path}"


def _cmd_chain(args) -> str:
    cfg = _parse_target(args.target)
    if cfg.get("kind") == "product":
        cfg = dict(cfg, n=args.n)
    elif cfg.get("kind") == "correlated_gaussian":
        cfg = dict(cfg, n=args.n)
    else:
        cfg = dict(cfg, seed=args.seed)
    model = target_from_config(cfg)
    preset = _presets(args)[0]
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0x1C]))
    sigma = args.sigma if args.sigma is not None else model.dim ** (-1.0 / 6.0)
    prop = xp.resolve_preset(preset, model)(sigma)
    adapt = None
    if args.adapt:
        target = 0.234 if preset == "rwm" else 0.574
        adapt = AdaptState(log_scale=float(np.log(sigma)), target_acc=target)
    try:
        init = sample_target(model, rng)
    except Exception:
        init = np.zeros(model.dim)
    out = run_chain(prop, model, args.iters, init, rng, adapt=adapt)
    k = min(args.coords, model.dim)
    path = os.path.join(_out_dir(args), "chain.csv")
    header = "iter," + ",".join(f"coord_{j}" for j in range(k)) + ",accepted,rho"
    lines = [header]
    for t in range(args.iters):
        coords = ",".join(f"{v:.12g}" for v in out.samples[t, :k])
        lines.append(f"{t},{coords},{int(out.accepted[t])},{out.rhos[t]:.12g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return f"chain: {args.iters} iterations, acc {out.acc_rate:.3f} -> {path}"


_COMMANDS = {
    "design": _cmd_design,
    "esjd-scan": _cmd_esjd_scan,
    "clt-check": _cmd_clt,
    "poisson": _cmd_poisson,
    "correlated": _cmd_correlated,
    "mu4-sweep": _cmd_mu4_sweep,
    "chain": _cmd_chain,
}


def parse_and_dispatch(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        args = _apply_config_file(args, list(argv) if argv is not None else sys.argv[1:])
        summary = _COMMANDS[args.subcommand](args)
    except (ArithmeticError, ChainDivergenceError, NormalizerUnstableError, xp.NonUnimodalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
