"""Quadrature rules for log-singular boundary integrals."""
import warnings
from functools import lru_cache

import numpy as np
from scipy.integrate import quad


def kress_weights(n):
    """Circulant matrix R[i, j] with

        int_0^{2 pi} log(4 sin^2((t_i - s) / 2)) phi(s) ds ~ sum_j R[i, j] phi(t_j)

    for the n = 2N equispaced nodes t_j = 2 pi j / n (exact for trig
    polynomials of degree < N).
    """
    if n % 2:
        raise ValueError("n must be even")
    N = n // 2
    d = 2 * np.pi * np.arange(n) / n
    m = np.arange(1, N)
    row = -(2 * np.pi / N) * (np.cos(np.outer(d, m)) / m).sum(axis=1) - (np.pi / N**2) * np.cos(N * d)
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def _log_moment(tau, k):
    # int_{-1}^{1} log|tau - s| P_k(s) ds
    pk = np.polynomial.legendre.Legendre.basis(k)
    if -1 < tau < 1:
        left = quad(pk, -1, tau, weight="alg-logb", wvar=(0, 0))[0] if tau > -1 else 0.0
        right = quad(pk, tau, 1, weight="alg-loga", wvar=(0, 0))[0] if tau < 1 else 0.0
        return left + right
    with warnings.catch_warnings():
        # roundoff warnings at the requested 1e-14 are harmless here
        warnings.simplefilter("ignore")
        return quad(lambda s: np.log(abs(tau - s)) * pk(s), -1, 1,
                    limit=200, epsabs=1e-15, epsrel=1e-14)[0]


@lru_cache(maxsize=None)
def panel_log_weights(order):
    """Product weights for log|tau - s| on the reference panel [-1, 1].

    Returns (nodes, gl_weights, W) with W of shape (3, order, order):
    W[k, i, j] integrates log|tau_i - s| phi(s) over the source panel from
    the samples phi(s_j), where tau_i = s_i + 2 (1 - k) is the target node i
    of a neighbouring panel in the source panel's coordinates.  The source
    panel is the target's left neighbour (k = 0), the target's own panel
    (k = 1) or its right neighbour (k = 2).
    """
    s, w = np.polynomial.legendre.leggauss(order)
    P = np.polynomial.legendre.legvander(s, order - 1)      # P[j, k] = P_k(s_j)
    W = np.empty((3, order, order))
    for shift in range(3):
        for i, t in enumerate(s):
            tau = t + 2.0 * (1 - shift)
            mom = np.array([_log_moment(tau, k) for k in range(order)])
            W[shift, i] = np.linalg.solve(P.T, mom)
    return s, w, W


def legendre_interp_matrix(order, targets):
    """Matrix mapping values at Gauss-Legendre nodes to values at ``targets`` in [-1, 1]."""
    s, _ = np.polynomial.legendre.leggauss(order)
    Vs = np.polynomial.legendre.legvander(s, order - 1)
    Vt = np.polynomial.legendre.legvander(np.asarray(targets, dtype=float), order - 1)
    return np.linalg.solve(Vs.T, Vt.T).T


def trig_interp_matrix(n, targets):
    """Matrix mapping samples at 2 pi j / n to the trigonometric interpolant at ``targets``."""
    N = n // 2
    d = np.asarray(targets, dtype=float)[:, None] - 2 * np.pi * np.arange(n)[None, :] / n
    k = np.arange(1, N)
    D = 1.0 + 2.0 * np.cos(d[..., None] * k).sum(axis=-1) + np.cos(N * d)
    return D / n


def graded_intervals(center, lo, hi, delta, ratio=2.0):
    """Break points on [lo, hi] refining geometrically toward ``center``."""
    pts = [center]
    d = delta
    while center + d < hi:
        pts.append(center + d)
        d *= ratio
    pts.append(hi)
    right = np.array(pts)
    pts = [center]
    d = delta
    while center - d > lo:
        pts.append(center - d)
        d *= ratio
    pts.append(lo)
    left = np.array(pts[::-1])
    return np.concatenate([left[:-1], right])


def composite_gauss(breaks, order=16):
    t, w = np.polynomial.legendre.leggauss(order)
    a = breaks[:-1]
    b = breaks[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()
