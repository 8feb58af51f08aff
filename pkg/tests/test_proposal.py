import numpy as np
import pytest
from scipy import integrate

from conftest import ks_statistic
from lbmh.balancing import make_balancing
from lbmh.noise import (
    make_bimodal,
    make_gaussian_noise,
    make_rademacher,
    make_three_point,
)
from lbmh.proposal import (
    GradientError,
    LBProposal,
    NormalizerUnstableError,
    barker_flip_prob,
    log_normalizer,
    make_preset,
    propose,
)
from lbmh.proposal import _log_normalizer_gh
from lbmh.targets import TargetModel, make_gaussian_factor, product_model


def constant_grad_model(beta: float, dim: int = 1) -> TargetModel:
    """Target stub with a constant gradient; propose() only reads the grad."""
    return TargetModel(
        dim=dim,
        kind="product",
        logpi=lambda x: np.zeros(np.shape(x)[:-1]),
        grad_logpi=lambda x: np.full(np.shape(x), beta),
    )


# ---------------------------------------------------------------- normalizer


def test_normalizer_barker_is_zero_for_any_noise():
    g = make_balancing("barker")
    for mu in (make_gaussian_noise(), make_rademacher(), make_bimodal(0.1), make_three_point(2)):
        c = np.array([-7.0, -0.3, 0.0, 2.0, 40.0])
        assert np.all(log_normalizer(g, mu, c) == 0.0)


def test_normalizer_sqrt_gaussian_closed_form():
    val = log_normalizer(make_balancing("sqrt"), make_gaussian_noise(), 1.0)
    assert val == pytest.approx(0.125, abs=1e-15)


def test_normalizer_sqrt_rademacher_is_log_cosh():
    val = log_normalizer(make_balancing("sqrt"), make_rademacher(), 1.0)
    assert val == pytest.approx(np.log(np.cosh(0.5)), abs=1e-14)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 0.9])
def test_normalizer_gamma_gaussian_matches_gauss_hermite(gamma):
    g = make_balancing("g_gamma", gamma=gamma)
    mu = make_gaussian_noise()
    c = np.linspace(-3.0, 3.0, 13)
    exact = log_normalizer(g, mu, c)
    gh = _log_normalizer_gh(g, mu, c, 64)
    assert np.max(np.abs(exact - gh)) < 1e-8


def test_normalizer_atoms_match_direct_sum():
    g = make_balancing("g_gamma", gamma=0.5)
    mu = make_three_point(2.0)
    c = np.linspace(-4.0, 4.0, 9)
    got = log_normalizer(g, mu, c)
    direct = np.log(
        sum(p * g.g(np.exp(c * v)) for v, p in mu.atoms)
    )
    assert np.allclose(got, direct, atol=1e-12)


def test_normalizer_quadrature_branch_and_instability_guard():
    g = make_balancing("sqrt")
    mu = make_bimodal(0.1)
    got = log_normalizer(g, mu, 0.7)
    ref = integrate.quad(
        lambda z: np.sqrt(np.exp(0.7 * z))
        * 0.5
        * (
            np.exp(-0.5 * ((z - np.sqrt(0.99)) / 0.1) ** 2)
            + np.exp(-0.5 * ((z + np.sqrt(0.99)) / 0.1) ** 2)
        )
        / (0.1 * np.sqrt(2 * np.pi)),
        -15,
        15,
        limit=200,
    )[0]
    assert got == pytest.approx(np.log(ref), abs=1e-8)
    with pytest.raises(NormalizerUnstableError):
        log_normalizer(g, mu, 25.0)


# ---------------------------------------------------------------- flip prob


def test_barker_flip_prob_values():
    assert barker_flip_prob(0.0) == 0.5
    assert barker_flip_prob(1.0) == pytest.approx(0.7310585786300049, abs=1e-14)
    assert barker_flip_prob(3.7) + barker_flip_prob(-3.7) == pytest.approx(1.0, abs=1e-14)


# ---------------------------------------------------------------- validation


def test_path_compatibility_rules():
    barker, sqrt = make_balancing("barker"), make_balancing("sqrt")
    gauss, rade = make_gaussian_noise(), make_rademacher()
    with pytest.raises(ValueError):
        LBProposal(sqrt, gauss, 1.0, "barker_flip")
    with pytest.raises(ValueError):
        LBProposal(sqrt, make_bimodal(0.1), 1.0, "gamma_gaussian")
    with pytest.raises(ValueError):
        LBProposal(barker, gauss, 1.0, "discrete_atoms")
    with pytest.raises(ValueError):
        LBProposal(make_balancing("min"), gauss, 1.0, "gamma_gaussian")
    with pytest.raises(ValueError):
        LBProposal(barker, gauss, -1.0, "barker_flip")
    # min/max are fine over atoms
    LBProposal(make_balancing("min"), rade, 1.0, "discrete_atoms")


def test_preset_parsing():
    assert make_preset("barker-bimodal", 0.5).mu.kind == "bimodal"
    assert make_preset("barker-bimodal(0.2)", 0.5).mu.components[0][2] == 0.2
    tp = make_preset("three-point(2,0.5)", 0.5)
    assert tp.mu.mu4 == 2.0 and tp.g.gamma == pytest.approx(np.sqrt(0.75))
    with pytest.raises(ValueError):
        make_preset("three-point(2)", 0.5)
    with pytest.raises(ValueError):
        make_preset("three-point(2,-0.5)", 0.5)
    with pytest.raises(ValueError):
        make_preset("hmc", 0.5)


def test_nan_gradient_carries_coordinate():
    def bad_grad(x):
        g = np.ones(np.shape(x))
        g[..., 2] = np.nan
        return g

    model = TargetModel(dim=4, kind="product", logpi=lambda x: np.zeros(np.shape(x)[:-1]), grad_logpi=bad_grad)
    with pytest.raises(GradientError) as err:
        propose(make_preset("barker", 0.5), model, np.zeros(4), np.random.default_rng(0))
    assert err.value.coord == 2


# ---------------------------------------------------------------- mala form


def test_gamma_zero_is_exact_mala_update():
    model = product_model(make_gaussian_factor(), 1)
    prop = make_preset("mala", 0.5)
    rng = np.random.default_rng(0)
    x = np.full((50_000, 1), 1.3)
    draw = propose(prop, model, x, rng)
    resid = draw.y - x - 0.5 * 0.5**2 * draw.grad_x
    assert resid.mean() == pytest.approx(0.0, abs=0.01)
    assert resid.var() == pytest.approx(0.25, rel=0.02)


# ---------------------------------------------------------------- law checks


def proposal_law_case(prop: LBProposal, beta: float, n_draws: int = 100_000, seed: int = 0):
    """Empirical law of y - x at constant gradient beta vs the exact density
    q(w) ∝ g(e^{beta w}) mu(w/sigma)/sigma.  Returns (KS, None) for continuous
    noise and (None, TV) for discrete noise."""
    model = constant_grad_model(beta)
    rng = np.random.default_rng(seed)
    x = np.zeros((n_draws, 1))
    w = propose(prop, model, x, rng).y[:, 0]
    sigma = prop.sigma
    if prop.mu is None or prop.mu.kind == "gaussian" or prop.mu.components is not None:
        from lbmh.noise import log_density

        if prop.g is None:  # rwm ignores the gradient
            logq = lambda v: log_density(make_gaussian_noise(), v / sigma)
        else:
            logq = lambda v: prop.g.b(beta * v) + log_density(prop.mu, v / sigma)
        span = 12.0 * sigma + 3.0
        xs = np.linspace(-span, span, 8193)
        pdf = np.exp(logq(xs))
        cum = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * (xs[1] - xs[0]))])
        cum /= cum[-1]
        return ks_statistic(w, lambda q: np.interp(q, xs, cum)), None
    values = np.array([v for v, _ in prop.mu.atoms]) * sigma
    probs = np.array([p for _, p in prop.mu.atoms])
    weights = probs * np.exp(prop.g.b(beta * values))
    weights /= weights.sum()
    emp = np.array([(np.abs(w - v) < 1e-9).mean() for v in values])
    return None, 0.5 * np.abs(emp - weights).sum()


LAW_PRESETS = [
    "barker",
    "barker-rademacher",
    "barker-bimodal(0.1)",
    "mala",
    "three-point(2,0.5)",
    "rwm",
]


@pytest.mark.parametrize("name", LAW_PRESETS)
@pytest.mark.parametrize("beta", [-2.0, 0.0, 2.0])
def test_proposal_law_matches_density(name, beta):
    prop = make_preset(name, 0.8)
    ks, tv = proposal_law_case(prop, beta)
    if ks is not None:
        assert ks < 0.01
    else:
        assert tv < 0.005


def test_algorithm2_matches_mixture_density():
    # gamma = 0.3, sigma = 0.8, beta = 1: the two-sided Gaussian mixture draw
    # must follow q(w) ∝ g_gamma(e^{w}) N(w; 0, sigma^2)
    g = make_balancing("g_gamma", gamma=0.3)
    prop = LBProposal(g, make_gaussian_noise(), 0.8, "gamma_gaussian")
    ks, _ = proposal_law_case(prop, 1.0)
    assert ks < 0.01


def test_barker_flip_and_atom_paths_agree():
    flip = make_preset("barker-rademacher", 0.7)
    atoms = LBProposal(make_balancing("barker"), make_rademacher(), 0.7, "discrete_atoms")
    model = constant_grad_model(1.5)
    rng = np.random.default_rng(1)
    x = np.zeros((100_000, 1))
    w1 = propose(flip, model, x, rng).y[:, 0]
    w2 = propose(atoms, model, x, rng).y[:, 0]
    for v in (-0.7, 0.7):
        p1 = (np.abs(w1 - v) < 1e-12).mean()
        p2 = (np.abs(w2 - v) < 1e-12).mean()
        assert abs(p1 - p2) < 0.005
