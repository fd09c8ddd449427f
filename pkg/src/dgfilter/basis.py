"""Gauss-Lobatto nodes and Lagrange interpolation on the reference interval [-1, 1].

All higher-dimensional operators are tensor products of the one-dimensional
objects built here: collocation nodes, quadrature weights, the nodal
differentiation matrix, and the interpolation/restriction matrices used when
cells are split in half.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_NEWTON_TOL = 1e-14
_NEWTON_MAX_ITER = 100


def _legendre_pair(k: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P_k and P_k' by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if k == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for m in range(2, k + 1):
        p, p_prev = ((2 * m - 1) * x * p - (m - 1) * p_prev) / m, p
    denom = x * x - 1.0
    end = denom == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        dp = k * (x * p - p_prev) / denom
    if np.any(end):
        # P_k'(+-1) = (+-1)^(k-1) k (k+1) / 2
        dp = np.where(end, np.sign(x) ** (k - 1) * k * (k + 1) / 2.0, dp)
    return p, dp


def lobatto_nodes(k: int) -> np.ndarray:
    """Nodes of the (k+1)-point Gauss-Lobatto rule, ascending in [-1, 1].

    Interior nodes are the roots of P_k', found by Newton iteration from
    Chebyshev-Lobatto seeds. For k = 0 the rule degenerates to the single
    midpoint node.
    """
    if k < 0:
        raise ValueError(f"polynomial degree must be >= 0, got {k}")
    if k == 0:
        return np.array([0.0])
    if k == 1:
        return np.array([-1.0, 1.0])
    j = np.arange(1, k)
    x = -np.cos(np.pi * j / k)
    for _ in range(_NEWTON_MAX_ITER):
        p, dp = _legendre_pair(k, x)
        # (1-x^2) P_k'' = 2x P_k' - k(k+1) P_k makes the Newton update exact
        dx = (1.0 - x * x) * dp / (k * (k + 1) * p)
        x = x + dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    else:
        raise RuntimeError(f"Lobatto node iteration did not converge for k={k}")
    x = 0.5 * (x - x[::-1])  # enforce the exact odd symmetry of the root set
    return np.concatenate(([-1.0], x, [1.0]))


def lobatto_weights(k: int, nodes: np.ndarray | None = None) -> np.ndarray:
    """Quadrature weights matching :func:`lobatto_nodes`; they sum to 2."""
    if k == 0:
        return np.array([2.0])
    if nodes is None:
        nodes = lobatto_nodes(k)
    p, _ = _legendre_pair(k, nodes)
    return 2.0 / (k * (k + 1) * p * p)


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def diff_matrix(nodes_or_basis) -> np.ndarray:
    """Nodal differentiation matrix D with D[i, j] = l_j'(x_i).

    Rows sum to zero exactly (the derivative of a constant). A single-node
    rule carries no derivative information, so degree 0 is rejected.
    """
    if isinstance(nodes_or_basis, LobattoBasis1D):
        nodes = nodes_or_basis.nodes
    else:
        nodes = np.asarray(nodes_or_basis, dtype=float)
    n = nodes.size
    if n < 2:
        raise ValueError("differentiation needs degree >= 1")
    lam = _barycentric_weights(nodes)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = (lam[j] / lam[i]) / (nodes[i] - nodes[j])
        d[i, i] = -np.sum(d[i, :])
    return d


@dataclass(frozen=True)
class LobattoBasis1D:
    """Degree-k Lagrange basis collocated at Gauss-Lobatto points."""

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    diff: np.ndarray | None
    bary: np.ndarray


def lobatto_basis(k: int) -> LobattoBasis1D:
    nodes = lobatto_nodes(k)
    weights = lobatto_weights(k, nodes)
    diff = diff_matrix(nodes) if k >= 1 else None
    return LobattoBasis1D(k, nodes, weights, diff, _barycentric_weights(nodes))


def lagrange_matrix(basis: LobattoBasis1D, points) -> np.ndarray:
    """Evaluate all cardinal polynomials at ``points``: M[q, j] = l_j(x_q)."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    nodes, lam = basis.nodes, basis.bary
    diff = pts[:, None] - nodes[None, :]
    exact = diff == 0.0
    on_node = exact.any(axis=1)
    safe = np.where(exact, 1.0, diff)
    terms = lam[None, :] / safe
    mat = terms / np.sum(terms, axis=1, keepdims=True)
    mat[on_node] = exact[on_node].astype(float)
    return mat


def eval_lagrange(basis: LobattoBasis1D, j: int, x: float) -> float:
    """Value of the j-th cardinal polynomial at a point of [-1, 1]."""
    if not 0 <= j <= basis.degree:
        raise ValueError(f"basis index {j} out of range for degree {basis.degree}")
    return float(lagrange_matrix(basis, [x])[0, j])


def half_interp_matrices(basis: LobattoBasis1D) -> tuple[np.ndarray, np.ndarray]:
    """Interpolation from a parent interval onto its two halves.

    P_lo maps parent nodal values to the child covering [-1, 0] evaluated at
    the child's own nodes, P_hi to the child covering [0, 1]. Exact for
    polynomials up to the basis degree.
    """
    xi = basis.nodes
    p_lo = lagrange_matrix(basis, 0.5 * (xi - 1.0))
    p_hi = lagrange_matrix(basis, 0.5 * (xi + 1.0))
    return p_lo, p_hi


def half_restriction_matrices(basis: LobattoBasis1D) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares restriction from two half-interval children to the parent.

    Adjoint construction in the children's quadrature inner product, so
    restriction after interpolation is the identity and the integral of the
    restricted polynomial equals the summed child integrals.
    """
    p_lo, p_hi = half_interp_matrices(basis)
    w = basis.weights
    m1 = 0.5 * (p_lo.T @ (w[:, None] * p_lo) + p_hi.T @ (w[:, None] * p_hi))
    m1_inv = np.linalg.inv(m1)
    r_lo = 0.5 * m1_inv @ (p_lo.T * w[None, :])
    r_hi = 0.5 * m1_inv @ (p_hi.T * w[None, :])
    return r_lo, r_hi


def subcell_mean_matrices(basis: LobattoBasis1D) -> tuple[np.ndarray, np.ndarray]:
    """Exact maps between nodal values and subcell means.

    The reference interval splits into k+1 subcells whose widths are the
    quadrature weights. P[i, j] is the mean of cardinal polynomial j over
    subcell i; its inverse R reconstructs nodal values from means. Both are
    exact for the cell polynomial, and P preserves the quadrature integral:
    sum_i w_i P[i, :] u = sum_j w_j u_j.
    """
    k = basis.degree
    bounds = np.concatenate([[-1.0], -1.0 + np.cumsum(basis.weights)])
    gx, gw = np.polynomial.legendre.leggauss(k + 1)
    p = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        lo, hi = bounds[i], bounds[i + 1]
        pts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
        vals = lagrange_matrix(basis, pts)
        p[i, :] = 0.5 * gw @ vals
    return p, np.linalg.inv(p)


@dataclass(frozen=True)
class TensorBasis2D:
    """Tensor-product basis on the reference square [-1, 1]^2.

    Local node (i, j) sits at (nodes[i], nodes[j]); shape function (a, b) is
    l_a(x) l_b(y).
    """

    line: LobattoBasis1D

    @property
    def degree(self) -> int:
        return self.line.degree

    @property
    def n_nodes(self) -> int:
        return (self.line.degree + 1) ** 2

    def shape_value(self, a: int, b: int, x: float, y: float) -> float:
        return eval_lagrange(self.line, a, x) * eval_lagrange(self.line, b, y)

    def node_points(self) -> tuple[np.ndarray, np.ndarray]:
        xi = self.line.nodes
        return np.meshgrid(xi, xi, indexing="ij")

    def weights_2d(self) -> np.ndarray:
        w = self.line.weights
        return np.outer(w, w)
