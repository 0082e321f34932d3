"""Model rate functions: growth, removal, aggregation, fragmentation, renewal.

The concrete kernel family describes shear-driven (orthokinetic) aggregation
in laminar flow, shear-induced fragmentation with a power-law rate
coefficient, a Beta(2,2) daughter-size density, removal proportional to floc
volume and renewal proportional to floc surface area.

All rate functions are pure and vectorised over numpy arrays; a bundle keeps
its generating parameters so runs can be serialised into manifests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

CONVENTIONS = ("exp_decay", "reciprocal")

# JSON configuration keys and their defaults (None means required-with-fallback
# to 1.0, the reference operating point).
_CONFIG_DEFAULTS = {
    "gamma_dot": 1.0,
    "nu": 1e-6,
    "a": 7e-4,
    "b": 1.6,
    "c_g": 1.0,
    "c_mu_convention": "exp_decay",
    "xbar": 1.0,
}


def removal_coefficient(gamma_dot: float, convention: str = "exp_decay") -> float:
    """Removal coefficient as a function of shear rate.

    Two conventions are in circulation for how sedimentation slows down with
    stirring: an exponential decay exp(-gamma_dot) and a reciprocal
    1/gamma_dot.  Both are kept; exp_decay is the default.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    if gamma_dot < 0:
        raise ValueError("gamma_dot must be non-negative")
    if convention == "reciprocal":
        if gamma_dot == 0:
            raise ValueError("reciprocal convention undefined at gamma_dot = 0")
        return 1.0 / gamma_dot
    return float(np.exp(-gamma_dot))


@dataclass(frozen=True)
class ParamSet:
    """Physical parameters of the shear-flow kernel family.

    shear_rate    gamma_dot, 1/s
    viscosity     kinematic viscosity nu, m^2/s (kept for manifests; the
                  aggregation kernel already takes the shear rate directly)
    frag_coeff    fragmentation fit coefficient a
    frag_exp      fragmentation fit exponent b
    growth_coeff  growth coefficient c_g
    removal_coeff removal coefficient c_mu
    max_size      maximal floc size xbar (dimensionless volume; 1 by default)
    """

    shear_rate: float = 1.0
    viscosity: float = 1e-6
    frag_coeff: float = 7e-4
    frag_exp: float = 1.6
    growth_coeff: float = 1.0
    removal_coeff: float = removal_coefficient(1.0)
    max_size: float = 1.0

    def __post_init__(self):
        if self.shear_rate < 0:
            raise ValueError("shear_rate must be non-negative")
        if not self.viscosity > 0:
            raise ValueError("viscosity must be positive")
        if not self.growth_coeff > 0:
            raise ValueError("growth_coeff must be positive")
        if self.removal_coeff < 0:
            raise ValueError("removal_coeff must be non-negative")
        if not self.max_size > 0:
            raise ValueError("max_size must be positive")
        if self.frag_coeff < 0:
            raise ValueError("frag_coeff must be non-negative")

    @classmethod
    def from_config(cls, config: dict) -> "ParamSet":
        """Build from a JSON configuration object.

        Accepted keys (exactly): gamma_dot, nu, a, b, c_g, c_mu_convention,
        xbar.  Missing keys take the defaults above; unknown keys are
        rejected.
        """
        unknown = set(config) - set(_CONFIG_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        merged = {**_CONFIG_DEFAULTS, **config}
        gamma_dot = float(merged["gamma_dot"])
        return cls(
            shear_rate=gamma_dot,
            viscosity=float(merged["nu"]),
            frag_coeff=float(merged["a"]),
            frag_exp=float(merged["b"]),
            growth_coeff=float(merged["c_g"]),
            removal_coeff=removal_coefficient(gamma_dot, merged["c_mu_convention"]),
            max_size=float(merged["xbar"]),
        )

    def to_dict(self) -> dict:
        return {
            "gamma_dot": self.shear_rate,
            "nu": self.viscosity,
            "a": self.frag_coeff,
            "b": self.frag_exp,
            "c_g": self.growth_coeff,
            "c_mu": self.removal_coeff,
            "xbar": self.max_size,
        }


@dataclass(frozen=True)
class ModelRates:
    """Bundle of the six model rate functions.

    agg_kernel is the physical aggregation kernel, zero whenever the combined
    size reaches max_size.  agg_kernel_base is its smooth continuation
    without the cutoff; the discrete operators sample the base form where the
    cutoff would only touch a set of measure zero (see assembly), so the two
    must agree below the cutoff line.
    """

    growth: Callable
    removal: Callable
    agg_kernel: Callable
    frag_kernel: Callable
    daughter_density: Callable
    renewal_shape: Callable
    max_size: float
    agg_kernel_base: Callable | None = None
    params: ParamSet | None = field(default=None, repr=False)

    def agg_base(self, x, y):
        fn = self.agg_kernel_base if self.agg_kernel_base is not None else self.agg_kernel
        return fn(x, y)


def beta22_density(x, y):
    """Beta(2,2) daughter-size density 6 x (y - x) / y^3 on [0, y], else zero.

    A parent of size zero is assigned the (immaterial but finite) value 0 to
    avoid 0/0; it is always multiplied by frag_kernel(0) = 0 downstream.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    ok = (y > 0) & (x >= 0) & (x <= y)
    xs = np.broadcast_to(x, out.shape)[ok]
    ys = np.broadcast_to(y, out.shape)[ok]
    out[ok] = 6.0 * xs * (ys - xs) / ys**3
    if out.ndim == 0 or (np.ndim(x) == 0 and np.ndim(y) == 0):
        return float(out.reshape(-1)[0])
    return out


def build_rates(params: ParamSet) -> ModelRates:
    """Shear-flow rate family:

    growth            g(x)  = c_g (x + 1)
    removal           mu(x) = c_mu x
    aggregation       ka(x, y) = 1.3 gamma_dot (x^(1/3) + y^(1/3))^3,
                      cut to zero for x + y >= max_size
    fragmentation     kf(x) = a gamma_dot^b x^(1/3)
    daughter density  Beta(2,2): 6 x (y - x) / y^3
    renewal shape     q(x) = x^(2/3)  (before scaling by the renewal constant)
    """
    gd = params.shear_rate
    cg = params.growth_coeff
    cmu = params.removal_coeff
    cf = params.frag_coeff * gd**params.frag_exp
    xbar = params.max_size

    def growth(x):
        return cg * (np.asarray(x, dtype=float) + 1.0)

    def removal(x):
        return cmu * np.asarray(x, dtype=float)

    def agg_base(x, y):
        return 1.3 * gd * (np.cbrt(x) + np.cbrt(y)) ** 3

    def agg_kernel(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.where(x + y >= xbar, 0.0, agg_base(x, y))

    def frag_kernel(x):
        return cf * np.cbrt(x)

    def renewal_shape(x):
        return np.cbrt(np.asarray(x, dtype=float)) ** 2

    return ModelRates(
        growth=growth,
        removal=removal,
        agg_kernel=agg_kernel,
        agg_kernel_base=agg_base,
        frag_kernel=frag_kernel,
        daughter_density=beta22_density,
        renewal_shape=renewal_shape,
        max_size=xbar,
        params=params,
    )


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    worst: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: {c.detail} (worst {c.worst:.3e})")
        return "\n".join(lines)


def validate_rates(rates: ModelRates, n_samples: int = 128, tol: float = 1e-9) -> ValidationReport:
    """Sampled check of the structural assumptions on the model rates.

    Positivity of growth, symmetry and cutoff of the aggregation kernel,
    non-negativity of removal/renewal/fragmentation, frag_kernel(0) = 0, and
    non-negativity plus unit normalisation of the daughter density (the
    latter by 64-point Gauss-Legendre quadrature per sampled parent size).
    Violations are reported, never raised.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    xbar = rates.max_size
    xs = np.linspace(0.0, xbar, n_samples)
    checks = []

    gmin = float(np.min(rates.growth(xs)))
    checks.append(AssumptionCheck(
        "growth positive", gmin > 0.0, gmin, f"min g over sample = {gmin:.6g}"))

    X, Y = np.meshgrid(xs, xs, indexing="ij")
    KA = np.asarray(rates.agg_kernel(X, Y), dtype=float)
    asym = float(np.max(np.abs(KA - KA.T)))
    checks.append(AssumptionCheck(
        "aggregation kernel symmetric", asym <= tol, asym, f"max |ka(x,y)-ka(y,x)| = {asym:.3e}"))
    over = X + Y >= xbar
    cut = float(np.max(np.abs(KA[over]))) if over.any() else 0.0
    checks.append(AssumptionCheck(
        "aggregation kernel cut at max size", cut <= tol, cut,
        f"max |ka| where x+y >= xbar = {cut:.3e}"))

    mumin = float(np.min(rates.removal(xs)))
    checks.append(AssumptionCheck(
        "removal non-negative", mumin >= -tol, mumin, f"min mu = {mumin:.6g}"))

    qmin = float(np.min(rates.renewal_shape(xs)))
    checks.append(AssumptionCheck(
        "renewal shape non-negative", qmin >= -tol, qmin, f"min q = {qmin:.6g}"))

    kfv = np.asarray(rates.frag_kernel(xs), dtype=float)
    kfmin = float(np.min(kfv))
    kf0 = float(abs(rates.frag_kernel(0.0)))
    checks.append(AssumptionCheck(
        "fragmentation non-negative", kfmin >= -tol, kfmin, f"min kf = {kfmin:.6g}"))
    checks.append(AssumptionCheck(
        "fragmentation vanishes at zero", kf0 <= tol, kf0, f"|kf(0)| = {kf0:.3e}"))

    # daughter density: non-negativity and unit mass per parent size
    t, gw = leggauss(64)
    ys = np.linspace(xbar / n_samples, xbar, n_samples)
    worst_norm = 0.0
    worst_neg = 0.0
    for y in ys:
        pts = 0.5 * y * (t + 1.0)
        vals = np.asarray(rates.daughter_density(pts, y), dtype=float)
        worst_neg = min(worst_neg, float(vals.min()))
        mass = 0.5 * y * float(gw @ vals)
        worst_norm = max(worst_norm, abs(mass - 1.0))
    checks.append(AssumptionCheck(
        "daughter density non-negative", worst_neg >= -tol, worst_neg,
        f"min density = {worst_neg:.6g}"))
    checks.append(AssumptionCheck(
        "daughter density normalised", worst_norm <= tol, worst_norm,
        f"max |integral - 1| = {worst_norm:.3e}"))

    return ValidationReport(checks=tuple(checks))
