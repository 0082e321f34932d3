"""Shared fixtures: parameter sets, a smooth rate bundle for operator-accuracy
tests, and dense brute-force oracles for the integral operators."""
import numpy as np
import pytest

from flocsolve.rates import ModelRates, ParamSet, beta22_density, build_rates

XBAR = 1.0


@pytest.fixture(scope="session")
def ref_params():
    """Operating point used for reproduction runs: gamma_dot = 1, c_g = 1."""
    return ParamSet()


@pytest.fixture(scope="session")
def ref_rates(ref_params):
    return build_rates(ref_params)


def smooth_ka_base(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (XBAR - x - y) ** 2 * (1.0 + x + y)


def smooth_ka(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.where(x + y >= XBAR, 0.0, smooth_ka_base(x, y))


def smooth_kf(x):
    return np.asarray(x, dtype=float) ** 2


def smooth_growth(x):
    return 1.0 + 0.5 * np.asarray(x, dtype=float)


def smooth_removal(x):
    return 0.25 * np.asarray(x, dtype=float)


def make_smooth_rates(ka=smooth_ka, ka_base=smooth_ka_base, kf=smooth_kf,
                      growth=smooth_growth, removal=smooth_removal,
                      gamma=beta22_density):
    """Polynomial-kernel rate bundle: every discrete quadrature sees a smooth
    integrand, so the operators are accurate to near machine precision and
    the brute-force oracles are meaningful at tight tolerance."""
    return ModelRates(
        growth=growth, removal=removal, agg_kernel=ka, agg_kernel_base=ka_base,
        frag_kernel=kf, daughter_density=gamma,
        renewal_shape=lambda x: np.cbrt(np.asarray(x, dtype=float)) ** 2,
        max_size=XBAR)


@pytest.fixture(scope="session")
def smooth_rates():
    return make_smooth_rates()


def contraction_rates():
    """Rates engineered so the fixed-point operator is a strong contraction:
    fast growth (g = 100), kf = x, no removal, aggregation kernel bounded by
    one.  Mirrors the worked constants c = 0.03, r = 100."""
    def ka_base(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (XBAR - x - y) ** 2

    def ka(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.where(x + y >= XBAR, 0.0, ka_base(x, y))

    return ModelRates(
        growth=lambda x: 100.0 * np.ones(np.shape(x)),
        removal=lambda x: np.zeros(np.shape(x)),
        agg_kernel=ka, agg_kernel_base=ka_base,
        frag_kernel=lambda x: np.asarray(x, dtype=float),
        daughter_density=beta22_density,
        renewal_shape=lambda x: np.cbrt(np.asarray(x, dtype=float)) ** 2,
        max_size=XBAR)


# ---------------------------------------------------------------------------
# dense brute-force oracles (trapezoid rule / central differences)
# ---------------------------------------------------------------------------

def oracle_aggregation(rates, ufun, x_eval, npts=10_000):
    """Trapezoid-rule discretisation of the aggregation gain and loss at the
    points x_eval, with the density given as a function.

    The gain convolution samples the smooth base kernel (its arguments sum to
    the evaluation point, so base and physical kernel agree below the maximal
    size); the loss integral runs over [0, xbar - x], which is where the
    cutoff acts.
    """
    xbar = rates.max_size
    out = np.empty(len(x_eval))
    for idx, xk in enumerate(x_eval):
        gain = 0.0
        if xk > 0:
            y = np.linspace(0.0, xk, npts)
            gain = 0.5 * np.trapezoid(
                np.asarray(rates.agg_base(xk - y, y)) * ufun(xk - y) * ufun(y), y)
        loss = 0.0
        if xbar - xk > 0:
            y = np.linspace(0.0, xbar - xk, npts)
            loss = ufun(xk) * np.trapezoid(np.asarray(rates.agg_base(xk, y)) * ufun(y), y)
        out[idx] = gain - loss
    return out


def oracle_breakage(rates, ufun, x_eval, npts=10_000):
    xbar = rates.max_size
    out = np.empty(len(x_eval))
    for idx, xk in enumerate(x_eval):
        if xbar - xk > 0:
            y = np.linspace(xk, xbar, npts)
            gain = np.trapezoid(
                np.asarray(rates.daughter_density(xk, y))
                * np.asarray(rates.frag_kernel(y)) * ufun(y), y)
        else:
            gain = 0.0
        out[idx] = gain - 0.5 * float(np.asarray(rates.frag_kernel(xk))) * ufun(xk)
    return out


def oracle_growth_removal(rates, ufun, x_eval, npts=10_000):
    """Central differences of (g u)' (second-order one-sided at the ends)."""
    xbar = rates.max_size
    h = xbar / npts

    def gu(y):
        return np.asarray(rates.growth(y), dtype=float) * ufun(y)

    x = np.asarray(x_eval, dtype=float)
    d = np.empty(len(x))
    inner = (x > h) & (x < xbar - h)
    d[inner] = (gu(x[inner] + h) - gu(x[inner] - h)) / (2 * h)
    lo = ~inner & (x <= h)
    d[lo] = (-3 * gu(x[lo]) + 4 * gu(x[lo] + h) - gu(x[lo] + 2 * h)) / (2 * h)
    hi = ~inner & (x >= xbar - h)
    d[hi] = (3 * gu(x[hi]) - 4 * gu(x[hi] - h) + gu(x[hi] - 2 * h)) / (2 * h)
    return -d - np.asarray(rates.removal(x), dtype=float) * ufun(x)
