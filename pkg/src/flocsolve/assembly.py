"""Discrete growth, aggregation and breakage operators at collocation nodes.

Integral realisations (all exact for polynomial integrands up to the grid
degree, and chosen so that every quadrature sees a smooth integrand):

* aggregation gain at x_k: the convolution over [0, x_k] is mapped to t in
  [0, 1] and integrated with an interpolatory rule on a Gauss-Lobatto t-grid,
  so the quadrature points cluster at both convolution endpoints where the
  kernel has cube-root behaviour.  The density is evaluated off-grid through
  barycentric rows of the nodal interpolant.
* aggregation loss at x_k: the upper limit xbar - x_k is exactly the
  mirrored node x_{n-k}, so the integral is a cumulative-matrix row applied
  to kernel values times the density.  The kernel is sampled in its smooth
  base form; the cutoff line only meets the closed interval at its endpoint,
  a set of measure zero.
* breakage gain at x_k: the integral over [x_k, xbar] is mapped to the same
  t-grid per row and contracted into a single matrix once per model.

Sampling the smooth base kernel rather than the cut kernel on the boundary
row keeps the collocation consistent with the one-sided limit the stationary
solution satisfies at the maximal size; the cut form there injects an O(1)
defect that degrades convergence to second order.
"""
from __future__ import annotations

import numpy as np

from . import _backend
from .rates import ModelRates
from .spectral import (Grid, SpectralOperators, build_grid, build_operators,
                       evaluation_matrix, quad_weights)


class SpectralWorkspace:
    """Rate-independent discrete structure for one (degree, xbar) pair.

    Holds the spectral operators plus the barycentric evaluation tensors for
    the mapped aggregation and breakage integrals.  Reusable across all rate
    bundles on the same grid (parameter sweeps build it once).
    """

    def __init__(self, n: int, xbar: float = 1.0, nq: int | None = None):
        self.grid: Grid = build_grid(n, xbar)
        self.ops: SpectralOperators = build_operators(self.grid)
        self.nq = n if nq is None else nq
        tgrid = build_grid(self.nq, 1.0)
        self.tq = tgrid.nodes                      # mapped quadrature nodes on [0, 1]
        self.wq = quad_weights(tgrid)
        x = self.grid.nodes
        K, Q = n + 1, self.nq + 1
        # gain_rows[k, q, :] interpolates a nodal vector at x_k * t_q
        pts = (x[:, None] * self.tq[None, :]).ravel()
        self.gain_rows = np.ascontiguousarray(
            evaluation_matrix(self.grid, pts).reshape(K, Q, K))
        # brk_rows[k, q, :] interpolates at x_k + (xbar - x_k) * t_q
        ypts = (x[:, None] + (xbar - x)[:, None] * self.tq[None, :]).ravel()
        self.brk_rows = np.ascontiguousarray(
            evaluation_matrix(self.grid, ypts).reshape(K, Q, K))


class DiscreteModel:
    """Rates tabulated on a workspace; immutable after construction.

    Residual evaluation is free of transcendental calls: the kernels are
    folded into the gain coefficients, the loss matrix and the (linear)
    breakage and growth-removal matrices here.
    """

    def __init__(self, rates: ModelRates, workspace: SpectralWorkspace):
        if abs(rates.max_size - workspace.grid.xbar) > 0:
            raise ValueError("rates.max_size and grid xbar disagree")
        self.workspace = workspace
        self.rates = rates
        grid = workspace.grid
        x = grid.nodes
        xbar = grid.xbar
        n = grid.n
        ops = workspace.ops

        self.g_nodes = np.asarray(rates.growth(x), dtype=float)
        if np.any(self.g_nodes <= 0):
            raise ValueError("growth rate must be positive on the grid")
        self.mu_nodes = np.asarray(rates.removal(x), dtype=float)
        self.kf_nodes = np.asarray(rates.frag_kernel(x), dtype=float)
        self.q_nodes = np.asarray(rates.renewal_shape(x), dtype=float)

        tq, wq = workspace.tq, workspace.wq
        # gain coefficients: 0.5 x_k wq[q] ka(x_k (1 - t_q), x_k t_q); the two
        # kernel arguments sum to x_k, so the base form equals the physical
        # kernel for every interior row
        XA = x[:, None] * (1.0 - tq)[None, :]
        XB = x[:, None] * tq[None, :]
        self.gain_coef = 0.5 * x[:, None] * wq[None, :] * np.asarray(
            rates.agg_base(XA, XB), dtype=float)

        # loss matrix: rows of the cumulative matrix mirrored to integrate
        # over [0, xbar - x_k], times base kernel values at node pairs
        self.loss_matrix = ops.cumulative[::-1] * np.asarray(
            rates.agg_base(x[:, None], x[None, :]), dtype=float)

        # breakage: gain rows contracted against Gamma(x_k; y) kf(y) on the
        # mapped grid, minus the half-rate diagonal
        Y = x[:, None] + (xbar - x)[:, None] * tq[None, :]
        coef = (xbar - x)[:, None] * wq[None, :] * np.asarray(
            rates.daughter_density(x[:, None], Y), dtype=float) * np.asarray(
            rates.frag_kernel(Y), dtype=float)
        gain_mat = _backend.contract_rows(coef, workspace.brk_rows)
        self.brk_matrix = gain_mat - 0.5 * np.diag(self.kf_nodes)

        self.growth_matrix = -ops.d_matrix * self.g_nodes[None, :] - np.diag(self.mu_nodes)
        self.lin_matrix = self.growth_matrix + self.brk_matrix

    @property
    def grid(self) -> Grid:
        return self.workspace.grid

    @property
    def ops(self) -> SpectralOperators:
        return self.workspace.ops


def build_model(rates: ModelRates, n: int, nq: int | None = None) -> DiscreteModel:
    return DiscreteModel(rates, SpectralWorkspace(n, rates.max_size, nq=nq))


def _check_state(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (model.grid.n + 1,):
        raise ValueError(f"state must have length {model.grid.n + 1}")
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite entries in state vector")
    return u


def apply_aggregation(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    """Gain minus loss of the aggregation operator at the nodes."""
    u = _check_state(model, u)
    ua = _backend.contract_vec(model.workspace.gain_rows, u)   # u at x_k t_q
    gain = (model.gain_coef * ua * ua[:, ::-1]).sum(axis=1)
    loss = u * (model.loss_matrix @ u)
    return gain - loss


def aggregation_jacobian(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    u = _check_state(model, u)
    ua = _backend.contract_vec(model.workspace.gain_rows, u)
    ub = ua[:, ::-1]
    w = model.gain_coef * ub + (model.gain_coef * ua)[:, ::-1]
    J = _backend.contract_rows(np.ascontiguousarray(w), model.workspace.gain_rows)
    lu = model.loss_matrix @ u
    J -= np.diag(lu)
    J -= u[:, None] * model.loss_matrix
    return J


def apply_breakage(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    """Daughter-production gain minus half-rate loss of the breakage operator."""
    u = _check_state(model, u)
    return model.brk_matrix @ u


def apply_growth_removal(model: DiscreteModel, u: np.ndarray) -> np.ndarray:
    """-d/dx (g u) - mu u at the nodes."""
    u = _check_state(model, u)
    return model.growth_matrix @ u


def _boundary_row(model: DiscreteModel, mode: str, c_q: float | None) -> tuple[np.ndarray, float]:
    """Coefficient row and constant of the boundary equation row(u) = row @ u - const."""
    n = model.grid.n
    row = np.zeros(n + 1)
    if mode == "ivp":
        row[0] = 1.0
        return row, 1.0 / model.g_nodes[0]
    if mode == "bvp":
        if c_q is None or not c_q > 0:
            raise ValueError("bvp mode requires c_q > 0")
        row[0] = model.g_nodes[0]
        row -= c_q * model.ops.weights * model.q_nodes
        return row, 0.0
    raise ValueError(f"unknown boundary mode {mode!r}")


def residual(model: DiscreteModel, u: np.ndarray, mode: str = "ivp",
             c_q: float | None = None) -> np.ndarray:
    """Steady-state residual; rows 1..n collocate the stationary equation,
    row 0 carries the boundary condition."""
    u = _check_state(model, u)
    r = model.lin_matrix @ u + apply_aggregation(model, u)
    row, const = _boundary_row(model, mode, c_q)
    r[0] = row @ u - const
    return r


def jacobian(model: DiscreteModel, u: np.ndarray, mode: str = "ivp",
             c_q: float | None = None) -> np.ndarray:
    """Analytic Jacobian of the residual."""
    u = _check_state(model, u)
    J = model.lin_matrix + aggregation_jacobian(model, u)
    row, _ = _boundary_row(model, mode, c_q)
    J[0] = row
    return J


def jacobian_fd(model: DiscreteModel, u: np.ndarray, mode: str = "ivp",
                c_q: float | None = None) -> np.ndarray:
    """Finite-difference Jacobian, column-wise with step 1e-7 (1 + |u_j|).

    Kept as an independent oracle for the analytic Jacobian.
    """
    u = _check_state(model, u)
    r0 = residual(model, u, mode, c_q)
    J = np.empty((u.size, u.size))
    for j in range(u.size):
        h = 1e-7 * (1.0 + abs(u[j]))
        up = u.copy()
        up[j] += h
        J[:, j] = (residual(model, up, mode, c_q) - r0) / h
    return J
