"""Convergence studies and parameter sweeps over shear and growth rates.

Sweep rows are solved independently (optionally in parallel) on a shared
spectral workspace and emitted in deterministic order with full-precision
decimal serialisation, so identical specs produce byte-identical CSV.
"""
from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .assembly import DiscreteModel, SpectralWorkspace
from .rates import ParamSet, build_rates, removal_coefficient
from .solver import SolverConfig, SteadyState, compute_cq, solve_newton
from .spectral import evaluation_matrix, quad_weights
from .theory import linear_exact

SWEEP_CSV_HEADER = "gamma_dot,c_g,converged,avg_size,c_q,residual_norm,iterations"


def average_floc_size(state: SteadyState, weighting: str = "number") -> float:
    """Mean floc size of a stationary density.

    The number-weighted mean int(x u) / int(u) is the reported quantity (u is
    a number density); a mass-weighted variant int(x^2 u) / int(x u) is
    available for comparison.
    """
    if not state.converged:
        raise ValueError("average size requires a converged state")
    w = quad_weights(state.grid)
    x = state.grid.nodes
    if weighting == "number":
        num, den = (w * x) @ state.u, w @ state.u
    elif weighting == "mass":
        num, den = (w * x * x) @ state.u, (w * x) @ state.u
    else:
        raise ValueError("weighting must be 'number' or 'mass'")
    if den <= 0:
        raise ValueError("total density is not positive")
    return float(num / den)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    error: float
    converged: bool


def run_convergence_study(mode: str, n_values: list[int], params: ParamSet,
                          reference_n: int = 200,
                          config: SolverConfig | None = None) -> list[ConvergenceRow]:
    """Error of the computed steady state against the study oracle.

    linear mode: aggregation and fragmentation are switched off and the error
    is the sup norm against the analytic stationary density at the nodes.
    nonlinear mode: full rates; the error is the relative sup norm against
    the reference-degree solution, with coarse solutions interpolated to the
    reference grid barycentrically.

    Non-converged solves mark their row failed instead of aborting the study.
    """
    if mode not in ("linear", "nonlinear"):
        raise ValueError("mode must be 'linear' or 'nonlinear'")
    if list(n_values) != sorted(n_values):
        raise ValueError("n_values must be ascending")
    # residual rounding floor grows like n^2 through the differentiation
    # matrix; 1e-10 keeps reference-scale grids convergent
    config = config or SolverConfig(tol=1e-10)
    rates = build_rates(params)
    if mode == "linear":
        rates = replace(rates, agg_kernel=_zero2, agg_kernel_base=_zero2, frag_kernel=_zero1)

    rows: list[ConvergenceRow] = []
    if mode == "linear":
        for n in n_values:
            state = solve_newton(DiscreteModel(rates, SpectralWorkspace(n, params.max_size)),
                                 config)
            err = np.nan
            if state.converged:
                exact = linear_exact(rates, state.grid.nodes)
                err = float(np.abs(state.u - exact).max())
            rows.append(ConvergenceRow(n=n, error=err, converged=state.converged))
        return rows

    ref_ws = SpectralWorkspace(reference_n, params.max_size)
    ref_state = solve_newton(DiscreteModel(rates, ref_ws), config)
    if not ref_state.converged:
        raise RuntimeError(f"reference solve at n={reference_n} did not converge")
    ref_scale = float(np.abs(ref_state.u).max())
    for n in n_values:
        state = solve_newton(DiscreteModel(rates, SpectralWorkspace(n, params.max_size)),
                             config)
        err = np.nan
        if state.converged:
            onto_ref = evaluation_matrix(state.grid, ref_ws.grid.nodes) @ state.u
            err = float(np.abs(onto_ref - ref_state.u).max() / ref_scale)
        rows.append(ConvergenceRow(n=n, error=err, converged=state.converged))
    return rows


def _zero2(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def _zero1(x):
    return np.zeros(np.shape(x))


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep over shear rate and growth coefficient.

    Rows are ordered with the growth coefficient outermost, matching the
    emission order.  Remaining physical parameters come from ``base``.
    """

    gamma_dot_values: tuple[float, ...]
    c_g_values: tuple[float, ...]
    n: int = 50
    mode: str = "ivp"
    c_q: float | None = None
    base: ParamSet = field(default_factory=ParamSet)
    convention: str = "exp_decay"
    config: SolverConfig = field(default_factory=lambda: SolverConfig(tol=1e-11))

    def __post_init__(self):
        if not self.gamma_dot_values or not self.c_g_values:
            raise ValueError("sweep value lists must be non-empty")

    def param_sets(self) -> list[ParamSet]:
        out = []
        for cg in self.c_g_values:
            for gd in self.gamma_dot_values:
                out.append(replace(
                    self.base, shear_rate=float(gd), growth_coeff=float(cg),
                    removal_coeff=removal_coefficient(float(gd), self.convention)))
        return out


@dataclass(frozen=True)
class SweepRow:
    gamma_dot: float
    c_g: float
    converged: bool
    avg_size: float
    c_q: float
    residual_norm: float
    iterations: int


def _solve_point(params: ParamSet, ws: SpectralWorkspace, spec: SweepSpec) -> SweepRow:
    model = DiscreteModel(build_rates(params), ws)
    state = solve_newton(model, spec.config, mode=spec.mode, c_q=spec.c_q)
    avg = np.nan
    if state.converged:
        avg = average_floc_size(state)
    return SweepRow(
        gamma_dot=params.shear_rate, c_g=params.growth_coeff, converged=state.converged,
        avg_size=avg, c_q=state.c_q, residual_norm=state.residual_norm,
        iterations=state.iterations)


def run_sweep(spec: SweepSpec, parallel: int = 1) -> list[SweepRow]:
    """One steady-state solve per (gamma_dot, c_g) pair.

    All points share one immutable spectral workspace; failures are recorded
    in the converged column.  Output order follows the spec regardless of
    completion order.
    """
    points = spec.param_sets()
    ws = SpectralWorkspace(spec.n, spec.base.max_size)
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(lambda p: _solve_point(p, ws, spec), points))
    else:
        rows = [_solve_point(p, ws, spec) for p in points]
    return rows


def _fmt(x: float) -> str:
    return format(x, ".17g")


def sweep_to_csv(rows: list[SweepRow]) -> str:
    """Fixed-schema CSV with LF endings and 17-significant-digit floats,
    which round-trip bit-exactly."""
    buf = io.StringIO()
    buf.write(SWEEP_CSV_HEADER + "\n")
    for r in rows:
        buf.write(",".join([
            _fmt(r.gamma_dot), _fmt(r.c_g), str(r.converged).lower(),
            _fmt(r.avg_size), _fmt(r.c_q), _fmt(r.residual_norm), str(r.iterations),
        ]) + "\n")
    return buf.getvalue()


def sweep_from_csv(text: str) -> list[SweepRow]:
    lines = [ln for ln in text.split("\n") if ln]
    if lines[0] != SWEEP_CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = []
    for ln in lines[1:]:
        gd, cg, conv, avg, cq, rn, its = ln.split(",")
        rows.append(SweepRow(
            gamma_dot=float(gd), c_g=float(cg), converged=conv == "true",
            avg_size=float(avg), c_q=float(cq), residual_norm=float(rn),
            iterations=int(its)))
    return rows


def convergence_to_csv(rows: list[ConvergenceRow]) -> str:
    buf = io.StringIO()
    buf.write("n,error,converged\n")
    for r in rows:
        buf.write(f"{r.n},{_fmt(r.error)},{str(r.converged).lower()}\n")
    return buf.getvalue()


def linear_distance(params: ParamSet, n: int = 50,
                    config: SolverConfig | None = None) -> float:
    """Sup-norm distance between the nonlinear steady state and the linear
    analytic stationary density on the same grid (trend diagnostic)."""
    config = config or SolverConfig(tol=1e-11)
    rates = build_rates(params)
    model = DiscreteModel(rates, SpectralWorkspace(n, params.max_size))
    state = solve_newton(model, config)
    if not state.converged:
        raise RuntimeError("nonlinear solve did not converge")
    return float(np.abs(state.u - linear_exact(rates, state.grid.nodes)).max())
