"""Collocation grid and spectral operators on [0, xbar].

Nodes are shifted Chebyshev-Gauss-Lobatto points, clustered quadratically
at both endpoints.  All operators act on vectors of nodal values of the
degree-n interpolating polynomial: differentiation matrix, interpolatory
quadrature weights, cumulative (subinterval) integration matrix, and the
rank-3 tensor of cardinal-function values at node differences.

Interpolation is evaluated in barycentric form throughout; the raw product
formula for cardinal polynomials overflows for n beyond a few dozen.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Collocation grid of degree ``n`` on [0, xbar]."""

    n: int
    xbar: float
    nodes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid degree must be >= 1")
        if not self.xbar > 0:
            raise ValueError("xbar must be positive")


def build_grid(n: int, xbar: float = 1.0) -> Grid:
    """Shifted Chebyshev-Gauss-Lobatto nodes x_j = (1 - cos(j pi / n)) * xbar / 2.

    The upper half of the grid is constructed by mirroring the lower half so
    that nodes[j] + nodes[n - j] == xbar holds exactly in floating point.
    """
    if n < 1:
        raise ValueError("grid degree must be >= 1")
    if not xbar > 0:
        raise ValueError("xbar must be positive")
    j = np.arange(n + 1)
    # sin^2 form of (1 - cos)/2, accurate near the left endpoint
    nodes = xbar * np.sin(j * np.pi / (2 * n)) ** 2
    for i in range((n + 1) // 2):
        nodes[i], nodes[n - i] = _mirror_pair(nodes[i], xbar)
    if n % 2 == 0:
        nodes[n // 2] = xbar / 2
    nodes.setflags(write=False)
    return Grid(n=int(n), xbar=float(xbar), nodes=nodes)


def _mirror_pair(a: float, xbar: float) -> tuple[float, float]:
    """Pair (a', b') within one ulp of (a, xbar - a) with a' + b' == xbar
    exactly.  The plain difference can miss by one ulp when xbar is not a
    power of two, and round-to-even ties can require moving both operands."""
    for a2 in (a, np.nextafter(a, np.inf), np.nextafter(a, -np.inf)):
        b = xbar - a2
        for b2 in (b, np.nextafter(b, np.inf), np.nextafter(b, -np.inf)):
            if a2 + b2 == xbar:
                return float(a2), float(b2)
    return float(a), float(xbar - a)


def barycentric_lambda(n: int) -> np.ndarray:
    """Barycentric weights for Gauss-Lobatto nodes: alternating signs, halved ends.

    Any common scale factor cancels in the barycentric formula, so the affine
    map to [0, xbar] needs no adjustment.
    """
    lam = np.ones(n + 1)
    lam[1::2] = -1.0
    lam[0] *= 0.5
    lam[n] *= 0.5
    return lam


def evaluation_matrix(grid: Grid, points: np.ndarray) -> np.ndarray:
    """Rows of cardinal-function values: out[t, j] = phi_j(points[t]).

    ``values @ out[t]`` evaluates the interpolant of ``values`` at
    ``points[t]``.  Points that coincide exactly with a node return the
    corresponding unit row, so nodal values are reproduced exactly.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    lam = barycentric_lambda(grid.n)
    d = pts[:, None] - grid.nodes[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = lam[None, :] / d
        out = r / r.sum(axis=1)[:, None]
    hits = d == 0.0
    for t in np.nonzero(hits.any(axis=1))[0]:
        row = np.zeros(grid.n + 1)
        row[np.nonzero(hits[t])[0][0]] = 1.0
        out[t] = row
    return out


def interpolate(grid: Grid, values: np.ndarray, x) -> float | np.ndarray:
    """Evaluate the degree-n interpolant of nodal ``values`` at ``x`` in [0, xbar]."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n + 1,):
        raise ValueError(f"values must have length {grid.n + 1}")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0.0) or np.any(xa > grid.xbar):
        raise ValueError(f"evaluation point outside [0, {grid.xbar}]")
    rows = evaluation_matrix(grid, xa)
    res = rows @ values
    return float(res[0]) if np.isscalar(x) or np.ndim(x) == 0 else res


def diff_matrix(grid: Grid) -> np.ndarray:
    """Differentiation matrix D[i, j] = phi_j'(x_i), exact for degree <= n.

    Off-diagonal entries come from the barycentric weight ratios; diagonal
    entries use the negative-sum trick, which makes every row sum exactly
    zero (the derivative of the constant function).
    """
    lam = barycentric_lambda(grid.n)
    dx = grid.nodes[:, None] - grid.nodes[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (lam[None, :] / lam[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _integrate_cardinals(grid: Grid, upper: float) -> np.ndarray:
    """w_j = integral of phi_j over [0, upper], exact for all degree-n polynomials.

    Gauss-Legendre with n//2 + 2 points integrates degree n + 3 exactly, so
    the cardinal polynomials (degree n) are integrated without error.
    """
    if upper == 0.0:
        return np.zeros(grid.n + 1)
    m = grid.n // 2 + 2
    t, gw = np.polynomial.legendre.leggauss(m)
    pts = 0.5 * upper * (t + 1.0)
    rows = evaluation_matrix(grid, pts)
    return 0.5 * upper * (gw[:, None] * rows).sum(axis=0)


def quad_weights(grid: Grid) -> np.ndarray:
    """Interpolatory quadrature weights w_j = integral of phi_j over [0, xbar]."""
    return _integrate_cardinals(grid, grid.xbar)


def cumulative_matrix(grid: Grid) -> np.ndarray:
    """Matrix Q[k, j] = integral of phi_j over [0, x_k].

    Row 0 is zero, row n equals the full quadrature weights.  Integrals over
    [x_k, xbar] follow as quad_weights - Q[k].
    """
    n = grid.n
    Q = np.zeros((n + 1, n + 1))
    for k in range(1, n + 1):
        Q[k] = _integrate_cardinals(grid, grid.nodes[k])
    return Q


def interp_tensor(grid: Grid) -> np.ndarray:
    """Rank-3 tensor P[k, i, j] = phi_j(x_k - x_i) for k >= i, zero otherwise.

    Contracting over j evaluates the interpolant of a nodal vector at the
    node difference x_k - x_i.
    """
    n = grid.n
    P = np.zeros((n + 1, n + 1, n + 1))
    ks, is_ = np.tril_indices(n + 1)
    rows = evaluation_matrix(grid, grid.nodes[ks] - grid.nodes[is_])
    P[ks, is_] = rows
    return P


class SpectralOperators:
    """Bundle of the discrete operators for one grid.

    The interpolation tensor is large ((n+1)^3) and only needed by a subset
    of consumers, so it is built on first access.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.d_matrix = diff_matrix(grid)
        self.cumulative = cumulative_matrix(grid)
        self.weights = self.cumulative[grid.n].copy()
        self._interp_tensor: np.ndarray | None = None

    @property
    def interp_tensor(self) -> np.ndarray:
        if self._interp_tensor is None:
            self._interp_tensor = interp_tensor(self.grid)
        return self._interp_tensor


def build_operators(grid: Grid) -> SpectralOperators:
    return SpectralOperators(grid)
