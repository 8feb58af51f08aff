"""Locally-balanced Metropolis-Hastings: proposals, theory, experiments."""

from .balancing import (
    BalancingFunction,
    NonSmoothBalancingError,
    eval_b,
    from_even_function,
    make_balancing,
    to_even_function,
)
from .noise import (
    NoiseDistribution,
    log_density,
    make_bimodal,
    make_gaussian_noise,
    make_rademacher,
    make_three_point,
)
from .targets import (
    CovSpec,
    NoExactSamplerError,
    PoissonREData,
    ProductFactor,
    TargetModel,
    correlated_model,
    make_cov_spec,
    make_gaussian_factor,
    make_hyperbolic_factor,
    poisson_generate,
    poisson_logpost_grad,
    poisson_model,
    product_model,
    sample_target,
    target_from_config,
)
from .proposal import (
    GradientError,
    LBProposal,
    NormalizerUnstableError,
    ProposalDraw,
    barker_flip_prob,
    log_normalizer,
    make_preset,
    propose,
)
from .engine import (
    AdaptState,
    ChainDivergenceError,
    ChainOutput,
    MHLogRatio,
    ess,
    log_mh_rho,
    mh_step,
    run_chain,
)
from .asymptotics import (
    AllBalancingEquivalentError,
    EfficiencySummary,
    TargetFunctionals,
    abc_functionals,
    efficiency_ratio,
    optimal_ell,
    optimal_gfrak_fixed_mu,
    optimal_gfrak_joint,
    theta_lower_bound,
    theta_squared,
    theta_squared_langevin_ibp,
)

__version__ = "0.1.0"
