"""Steady-state solvers: damped Newton, Picard fixed-point iteration, the
renewal constant, and an explicit time-marching verification utility.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import assembly
from .assembly import DiscreteModel
from .theory import linear_exact

NEWTON_MAX_ITER = 100
PICARD_MAX_ITER = 10000
_WARMSTART_ITERS = 50


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int | None = None          # method default if None
    damping: float = 1.0                 # initial Newton step factor, halved on failure
    jacobian: str = "analytic"           # or "finite_difference"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.jacobian not in ("analytic", "finite_difference"):
            raise ValueError("jacobian must be 'analytic' or 'finite_difference'")


@dataclass(frozen=True)
class SteadyState:
    """Converged (or failed) stationary density with solver diagnostics.

    residual_norm is always the sup norm of the steady-state residual at u;
    Picard declares convergence on the fixed-point increment, so its
    residual_norm can sit slightly above the increment tolerance.
    """

    grid: object
    u: np.ndarray = field(repr=False)
    c_q: float
    residual_norm: float
    iterations: int
    method: str
    converged: bool
    reason: str | None = None
    residual_history: tuple = field(default=(), repr=False)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.grid.n,
            "xbar": self.grid.xbar,
            "nodes": self.grid.nodes.tolist(),
            "u": self.u.tolist(),
            "c_q": self.c_q,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "method": self.method,
            "converged": self.converged,
        })


def _sup(v: np.ndarray) -> float:
    return float(np.abs(v).max())


def compute_cq(state_or_u, model: DiscreteModel) -> float:
    """Renewal constant making the boundary condition hold at the given state:

        C_q = g(0) u_0 / sum_j w_j q(x_j) u_j

    With the inflow normalisation g(0) u_0 = 1 this is the reciprocal of the
    renewal-shape-weighted total density.
    """
    if isinstance(state_or_u, SteadyState):
        if not state_or_u.converged:
            raise ValueError("C_q requires a converged state")
        u = state_or_u.u
    else:
        u = np.asarray(state_or_u, float)
    denom = float((model.ops.weights * model.q_nodes) @ u)
    if denom == 0.0:
        raise ZeroDivisionError("renewal-shape-weighted density vanishes; C_q undefined")
    return float(model.g_nodes[0] * u[0] / denom)


def _finish(model, u, rn, iters, method, converged, mode, c_q, reason=None, history=()):
    if converged and float(u.min()) < -1e-10:
        converged = False
        reason = "negative density"
    cq_val = np.nan
    if mode == "bvp":
        cq_val = c_q
    else:
        try:
            cq_val = compute_cq(u, model)
        except ZeroDivisionError:
            cq_val = np.nan
    return SteadyState(grid=model.grid, u=u, c_q=float(cq_val), residual_norm=rn,
                       iterations=iters, method=method, converged=converged,
                       reason=reason, residual_history=tuple(history))


def solve_newton(model: DiscreteModel, config: SolverConfig | None = None,
                 init: np.ndarray | None = None, mode: str = "ivp",
                 c_q: float | None = None) -> SteadyState:
    """Damped Newton iteration on the collocation residual.

    The default initial guess is the linear-model analytic solution at the
    nodes (the nonlinear stationary state approaches it in two parameter
    limits, which makes it a good basin).  If the first attempt fails to
    converge and no explicit guess was supplied, a Picard warm start is tried
    once before giving up.  Non-convergence is reported, not raised; a
    singular Jacobian is reported distinctly.
    """
    config = config or SolverConfig()
    if init is None:
        u0 = np.asarray(linear_exact(model.rates, model.grid.nodes), dtype=float)
        allow_warmstart = True
    else:
        u0 = np.asarray(init, dtype=float).copy()
        allow_warmstart = False

    state = _newton_attempt(model, u0, config, mode, c_q)
    if not state.converged and allow_warmstart and state.reason != "singular jacobian":
        f_warm = _picard_iterate(model, max_iter=_WARMSTART_ITERS, tol=0.0)
        retry = _newton_attempt(model, f_warm / model.g_nodes, config, mode, c_q)
        if retry.converged:
            return replace(retry, iterations=retry.iterations + state.iterations
                           + _WARMSTART_ITERS)
    return state


def _newton_attempt(model, u0, config, mode, c_q) -> SteadyState:
    max_iter = config.max_iter or NEWTON_MAX_ITER
    jac_fn = assembly.jacobian if config.jacobian == "analytic" else assembly.jacobian_fd
    u = u0.copy()
    r = assembly.residual(model, u, mode, c_q)
    rn = _sup(r)
    history = [rn]
    for it in range(1, max_iter + 1):
        if rn <= config.tol:
            return _finish(model, u, rn, it - 1, "newton", True, mode, c_q, history=history)
        J = jac_fn(model, u, mode, c_q)
        try:
            du = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return _finish(model, u, rn, it - 1, "newton", False, mode, c_q,
                           reason="singular jacobian", history=history)
        step = config.damping
        while True:
            u_new = u + step * du
            r_new = assembly.residual(model, u_new, mode, c_q)
            rn_new = _sup(r_new)
            if rn_new < rn or step < 1e-8:
                break
            step *= 0.5
        if rn_new >= rn:
            return _finish(model, u, rn, it, "newton", rn <= config.tol, mode, c_q,
                           reason="line search stalled", history=history)
        u, r, rn = u_new, r_new, rn_new
        history.append(rn)
    return _finish(model, u, rn, max_iter, "newton", rn <= config.tol, mode, c_q,
                   reason=None if rn <= config.tol else "max iterations reached",
                   history=history)


def picard_operator(model: DiscreteModel, f: np.ndarray) -> np.ndarray:
    """One application of the integrated fixed-point operator.

    Writing the stationary flux as f = g u, integrating the collocated
    stationary equation from 0 to each node gives

        f_new = 1 + Q (aggregation(u) + breakage(u) - mu u),   u = f / g,

    which is the discrete form of the contraction operator whose fixed point
    is the inflow-normalised steady state.
    """
    u = np.asarray(f, dtype=float) / model.g_nodes
    interior = (assembly.apply_aggregation(model, u) + model.brk_matrix @ u
                - model.mu_nodes * u)
    return 1.0 + model.ops.cumulative @ interior


def _picard_iterate(model, max_iter: int, tol: float) -> np.ndarray:
    f = np.ones(model.grid.n + 1)
    for _ in range(max_iter):
        f_new = picard_operator(model, f)
        if tol > 0 and _sup(f_new - f) <= tol:
            return f_new
        f = f_new
    return f


def solve_picard(model: DiscreteModel, config: SolverConfig | None = None) -> SteadyState:
    """Picard iteration f <- Phi[f] from f = 1, stopping on the sup-norm
    increment; returns u = f / g.  Convergence is guaranteed whenever the
    contraction constant reported by check_theorem1 is below one.
    """
    config = config or SolverConfig()
    max_iter = config.max_iter or PICARD_MAX_ITER
    f = np.ones(model.grid.n + 1)
    converged = False
    iters = max_iter
    for it in range(1, max_iter + 1):
        f_new = picard_operator(model, f)
        diff = _sup(f_new - f)
        f = f_new
        if diff <= config.tol:
            converged = True
            iters = it
            break
    u = f / model.g_nodes
    rn = _sup(assembly.residual(model, u, "ivp"))
    return _finish(model, u, rn, iters, "picard", converged, "ivp", None,
                   reason=None if converged else "max iterations reached")


class BlowUpError(RuntimeError):
    """Time integration produced a non-finite state."""

    def __init__(self, t: float):
        super().__init__(f"time integration blew up at t = {t:.6g}")
        self.time = t


def evolve(model: DiscreteModel, u0: np.ndarray, t_end: float, dt: float,
           mode: str = "ivp", c_q: float | None = None) -> np.ndarray:
    """March du/dt = F(u) with classical RK4 at fixed step, as a verification
    utility for steady states.  The boundary row is excluded from the flow
    and re-enforced algebraically after every step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be at least dt")
    u = np.asarray(u0, dtype=float).copy()
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-12 * max(1.0, t_end):
        n_steps = int(np.ceil(t_end / dt))

    row, const = assembly._boundary_row(model, mode, c_q)

    def enforce(v):
        # row is e_0-scaled plus (bvp) a weighted sum over all nodes; solve
        # the row equation for v_0
        rest = row[1:] @ v[1:]
        v[0] = (const - rest) / row[0]

    def rhs(v):
        r = model.lin_matrix @ v + assembly.apply_aggregation(model, v)
        r[0] = 0.0
        return r

    enforce(u)
    t = 0.0
    for k in range(n_steps):
        h = min(dt, t_end - t)
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        enforce(u)
        t += h
        if not np.all(np.isfinite(u)):
            raise BlowUpError(t)
    return u
