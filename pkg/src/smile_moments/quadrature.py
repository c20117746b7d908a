"""Gaussian quadrature against the standard normal weight.

Rules integrate functions against phi(z) = exp(-z^2/2)/sqrt(2*pi), i.e. they
approximate E[h(Z)] for Z ~ N(0, 1). Nodes and weights come from the
Golub-Welsch eigenproblem for the probabilists' Hermite recurrence, which is
the physicists' Gauss-Hermite rule rescaled by sqrt(2) in the nodes and
1/sqrt(pi) in the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NonFiniteIntegrand, OrderOutOfRange

MAX_ORDER = 512


@dataclass(frozen=True, eq=False)
class GaussianRule:
    """Nodes/weights for integrals of the form integral h(z) phi(z) dz."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int


def _hermite_norm_and_deriv(x: np.ndarray, n: int):
    """Orthonormal He polynomial p_n and p_n' at x, with sum of p_j^2.

    The three-term recurrence p_{j+1} = (x p_j - sqrt(j) p_{j-1})/sqrt(j+1)
    is run with periodic rescaling so intermediate values never overflow;
    the running sum of squares (the reciprocal Christoffel weight) is kept
    in the same scale, tracked by ``log_scale``.
    """
    p_prev = np.ones_like(x)
    p_cur = x.copy()
    sum_sq = p_prev ** 2 + p_cur ** 2
    log_scale = np.zeros_like(x)
    for j in range(1, n):
        p_next = (x * p_cur - np.sqrt(j) * p_prev) / np.sqrt(j + 1.0)
        p_prev, p_cur = p_cur, p_next
        sum_sq += p_cur ** 2
        big = np.abs(p_cur) > 1e140
        if np.any(big):
            c = np.where(big, 1e-140, 1.0)
            p_prev *= c
            p_cur *= c
            sum_sq *= c * c
            log_scale += np.where(big, np.log(1e140), 0.0)
    deriv = np.sqrt(n) * p_prev  # p_n'(x) = sqrt(n) p_{n-1}(x)
    return p_cur, deriv, sum_sq, log_scale


def gauss_hermite_rule(n: int) -> GaussianRule:
    """Build the order-n rule for the standard normal weight.

    Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
    matrix of the probabilists' Hermite recurrence, polished by one Newton
    step; weights come from the Christoffel identity w = 1/sum_j p_j(x)^2,
    which keeps full relative accuracy at extreme nodes where eigenvector
    components underflow. Nodes are symmetric about 0 and weights sum to 1.

    Raises:
        OrderOutOfRange: unless 1 <= n <= 512.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise OrderOutOfRange(f"order must be an integer, got {n!r}")
    if not 1 <= n <= MAX_ORDER:
        raise OrderOutOfRange(f"order must be in [1, {MAX_ORDER}], got {n}")
    if n == 1:
        return GaussianRule(np.zeros(1), np.ones(1), 1)
    off = np.sqrt(np.arange(1.0, n))
    nodes = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    for _ in range(2):
        value, deriv, _, _ = _hermite_norm_and_deriv(nodes, n)
        nodes = nodes - value / deriv
    # Enforce exact symmetry (eigensolver output is symmetric only to rounding).
    nodes = 0.5 * (nodes - nodes[::-1])
    if n % 2 == 1:
        nodes[n // 2] = 0.0
    _, _, sum_sq, log_scale = _hermite_norm_and_deriv(nodes, n)
    weights = np.exp(-np.log(sum_sq) - 2.0 * log_scale)
    weights = 0.5 * (weights + weights[::-1])
    weights /= weights.sum()
    return GaussianRule(nodes, weights, n)


def integrate_gaussian(h: Callable, rule: GaussianRule):
    """Return sum_i w_i h(z_i), approximating integral h(z) phi(z) dz.

    ``h`` may return real or complex values and should accept an ndarray of
    nodes (a per-node fallback is used otherwise).

    Raises:
        NonFiniteIntegrand: if h is NaN or infinite at any node.
    """
    try:
        values = np.asarray(h(rule.nodes))
        if values.shape != rule.nodes.shape:
            raise ValueError
    except Exception:
        values = np.asarray([h(z) for z in rule.nodes])
    if not np.all(np.isfinite(values)):
        bad = rule.nodes[~np.isfinite(values)]
        raise NonFiniteIntegrand(f"integrand not finite at nodes {bad[:3]}")
    total = np.sum(rule.weights * values)
    return complex(total) if np.iscomplexobj(values) else float(total)


@dataclass(frozen=True)
class ConvergenceTable:
    """Integral values per order plus successive absolute differences."""

    orders: tuple
    values: tuple
    diffs: tuple
    flagged: bool


def richardson_convergence(h: Callable, orders: Sequence[int],
                           atol: float = 1e-12,
                           rel_tol: float = 1e-9) -> ConvergenceTable:
    """Integrate ``h`` at each order and tabulate successive differences.

    ``flagged`` is True when the differences fail to behave like a
    converging refinement: either a successive difference grows (above the
    ``atol`` floor, which masks machine-noise fluctuation at converged
    orders), or the final difference is still large relative to the final
    value. A raised flag is the expected signature of moment orders near
    the explosion thresholds.
    """
    orders = tuple(int(n) for n in orders)
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValueError("orders must be strictly increasing")
    values = tuple(integrate_gaussian(h, gauss_hermite_rule(n)) for n in orders)
    diffs = tuple(abs(b - a) for a, b in zip(values, values[1:]))
    flagged = any(b > max(a, atol) for a, b in zip(diffs, diffs[1:]))
    if diffs:
        flagged = flagged or diffs[-1] > rel_tol * max(abs(values[-1]), 1.0)
    return ConvergenceTable(orders, values, diffs, flagged)
