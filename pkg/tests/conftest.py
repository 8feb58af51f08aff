import re

import numpy as np
import pytest

from lbmh.targets import ProductFactor, _log_normalizer


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion, keyed by test name."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    match = re.search(r"test_c(\d+)[a-z]?_(\w+)", report.nodeid)
    if not match:
        return
    verdict = "PASS" if report.passed else ("FAIL" if report.failed else "SKIP")
    label = match.group(2)
    print(f"\n[acceptance criterion {int(match.group(1))}] {label}: {verdict}", flush=True)


def make_mixture_factor() -> ProductFactor:
    """Even two-component Gaussian mixture at +-1 with unit component sd.

    phi(x) = -x^2/2 - 1/2 + log cosh(x) up to the mixture constant, which
    gives closed-form derivatives:

        phi'   = -x + tanh x
        phi''  = -1 + sech^2 x
        phi''' = -2 sech^2 x tanh x
    """

    def phi(x):
        x = np.asarray(x, dtype=float)
        return -0.5 * x * x - 0.5 + np.log(np.cosh(x))

    def dphi(x):
        x = np.asarray(x, dtype=float)
        return -x + np.tanh(x)

    def d2phi(x):
        x = np.asarray(x, dtype=float)
        return -1.0 + np.cosh(x) ** -2

    def d3phi(x):
        x = np.asarray(x, dtype=float)
        return -2.0 * np.tanh(x) * np.cosh(x) ** -2

    def sampler(rng, size=None, dtype=np.float64):
        sign = np.where(rng.random(size) < 0.5, 1.0, -1.0)
        return (sign + rng.standard_normal(size)).astype(dtype, copy=False)

    return ProductFactor(
        name="gaussian_mixture_pm1",
        phi=phi,
        dphi=dphi,
        d2phi=d2phi,
        d3phi=d3phi,
        exact_sampler=sampler,
        normalizer=_log_normalizer(phi),
    )


@pytest.fixture(scope="session")
def mixture_factor():
    return make_mixture_factor()


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """Two-sided KS statistic of samples against a vectorized CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = cdf(x)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


def numeric_cdf(logpdf, lo: float, hi: float, m: int = 8193):
    """Normalized CDF of exp(logpdf) on [lo, hi] by composite Simpson, returned
    as an interpolating callable (independent of any sampler internals)."""
    xs = np.linspace(lo, hi, m)
    pdf = np.exp(logpdf(xs))
    h = xs[1] - xs[0]
    cum = np.zeros(m)
    # Simpson on consecutive pairs of intervals, refined with trapezoid fallback
    mids = 0.5 * (xs[1:] + xs[:-1])
    pdf_mid = np.exp(logpdf(mids))
    seg = (pdf[:-1] + 4.0 * pdf_mid + pdf[1:]) * (h / 6.0)
    cum[1:] = np.cumsum(seg)
    cum /= cum[-1]

    def cdf(q):
        return np.interp(q, xs, cum)

    return cdf
