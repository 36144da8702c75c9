"""Green kernel E of Delta + V on the cylinder and its gradient.

Separation of variables gives

    E(p, q) = sum_k phi_k(theta) conj(phi_k(theta')) exp(-sqrt(mu_k) |x - x'|) / (2 sqrt(mu_k)),

which converges exponentially once |x - x'| is bounded below.  For
|x - x'| < X_SWITCH the kernel is evaluated as the periodized planar
kernel of -Laplace + mean(V),

    (1 / 2 pi) sum_n K0(lam0 |p - q - n c e_theta|),

plus the Galerkin remainder h(A) - h(A0), which is absent for constant V.
"""
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints
from .special import EULER_GAMMA, i0, i1_over_x, k0k1

X_SWITCH = 0.5
_EXP_CUT = 40.0
_CHUNK = 20000


@dataclass(frozen=True)
class GreenKernel:
    spec: object

    @property
    def circumference(self):
        return self.spec.circumference

    @property
    def lam0(self):
        """Decay constant of the constant-potential comparison kernel."""
        return float(np.sqrt(self.spec.mean_potential))

    @property
    def tail_bound_rate(self):
        return float(np.sqrt(self.spec.mu0))

    @property
    def mode_cutoff(self):
        return (self.spec.n_retained - 1) // 2

    @property
    def n_images(self):
        c = self.circumference
        return int(np.ceil(_EXP_CUT / (self.lam0 * c) + 0.5))


def _wrap(dth, c):
    return (dth + 0.5 * c) % c - 0.5 * c


def _split(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p, q = np.broadcast_arrays(p, q)
    shape = p.shape[:-1]
    return p.reshape(-1, 2), q.reshape(-1, 2), shape


def _images(gk, dx, dth, grad):
    c = gk.circumference
    lam = gk.lam0
    val = np.zeros_like(dx)
    gx = np.zeros_like(dx)
    gth = np.zeros_like(dx)
    for n in range(-gk.n_images, gk.n_images + 1):
        dthn = dth + n * c
        r = np.hypot(dx, dthn)
        kk0, kk1 = k0k1(lam * r)
        val += kk0
        if grad:
            f = -lam * kk1 / r
            gx += f * dx
            gth += f * dthn
    s = 1.0 / (2 * np.pi)
    return val * s, gx * s, gth * s


def _regular_images(gk, dx, dth, grad):
    # images n != 0 only: smooth at coincidence
    c = gk.circumference
    lam = gk.lam0
    val = np.zeros_like(dx)
    gx = np.zeros_like(dx)
    gth = np.zeros_like(dx)
    for n in range(-gk.n_images, gk.n_images + 1):
        if n == 0:
            continue
        dthn = dth + n * c
        r = np.hypot(dx, dthn)
        kk0, kk1 = k0k1(lam * r)
        val += kk0
        if grad:
            f = -lam * kk1 / r
            gx += f * dx
            gth += f * dthn
    s = 1.0 / (2 * np.pi)
    return val * s, gx * s, gth * s


def _modal(gk, p, q, grad, remainder):
    """Mode sum (remainder=False) or Galerkin remainder h(A) - h(A0)."""
    spec = gk.spec
    a = np.abs(p[:, 0] - q[:, 0])
    sgn = np.sign(q[:, 0] - p[:, 0])
    val = np.zeros(a.size)
    gx = np.zeros(a.size)
    gth = np.zeros(a.size)
    if spec.constant_potential and not remainder:
        return _modal_constant(gk, a, sgn, _wrap(p[:, 1] - q[:, 1], gk.circumference), grad)
    sq = np.sqrt(spec.eigenvalues)
    sq0 = np.sqrt(spec.free_eigenvalues)
    amin = a.min() if a.size else 0.0
    keep = sq * amin < _EXP_CUT
    keep[0] = True
    keep0 = sq0 * amin < _EXP_CUT
    U = spec.vectors[:, keep]
    sq = sq[keep]
    sq0k = sq0[keep0]
    modes0 = np.nonzero(keep0)[0]
    for lo in range(0, a.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        bp = spec.basis(p[sl, 1])
        bq = spec.basis(q[sl, 1])
        fp = bp @ U
        fq = (bq @ U).conj()
        e = np.exp(-np.outer(a[sl], sq))
        val[sl] = np.real(np.sum(fp * fq * e / (2 * sq), axis=1))
        if remainder:
            e0 = np.exp(-np.outer(a[sl], sq0k))
            prod0 = bp[:, modes0] * bq[:, modes0].conj()
            val[sl] -= np.real(np.sum(prod0 * e0 / (2 * sq0k), axis=1))
        if grad:
            gx[sl] = -sgn[sl] * np.real(np.sum(fp * fq * e, axis=1)) / 2
            dq = (spec.basis_deriv(q[sl, 1]) @ U).conj()
            gth[sl] = np.real(np.sum(fp * dq * e / (2 * sq), axis=1))
            if remainder:
                gx[sl] += sgn[sl] * np.real(np.sum(prod0 * e0, axis=1)) / 2
                dq0 = (spec.basis_deriv(q[sl, 1])[:, modes0]).conj()
                gth[sl] -= np.real(np.sum(bp[:, modes0] * dq0 * e0 / (2 * sq0k), axis=1))
    return val, gx, gth


def _modal_constant(gk, a, sgn, dth, grad):
    # real form: (1/c)[e^{-lam a}/(2 lam) + sum_j cos(j w dth) e^{-s_j a}/s_j]
    c = gk.circumference
    w = 2 * np.pi / c
    lam = gk.lam0
    amin = a.min() if a.size else 1.0
    jmax = int(np.ceil(_EXP_CUT / (w * max(amin, 1e-3)))) + 1
    e = np.exp(-lam * a)
    val = e / (2 * lam)
    gx = -sgn * e / 2
    gth = np.zeros_like(a)
    c1 = np.cos(w * dth)
    s1 = np.sin(w * dth)
    cprev, cj = np.ones_like(a), c1
    sprev, sj = np.zeros_like(a), s1
    for j in range(1, jmax + 1):
        s = np.sqrt((j * w) ** 2 + lam * lam)
        ej = np.exp(-s * a)
        val += cj * ej / s
        if grad:
            gx -= sgn * cj * ej
            # d/dtheta' cos(j w (theta - theta')) = j w sin(...)
            gth += j * w * sj * ej / s
        cprev, cj = cj, 2 * c1 * cj - cprev
        sprev, sj = sj, 2 * c1 * sj - sprev
    return val / c, gx / c, gth / c


def _evaluate(gk, p, q, grad):
    p, q, shape = _split(p, q)
    c = gk.circumference
    dx = q[:, 0] - p[:, 0]
    dth = _wrap(q[:, 1] - p[:, 1], c)
    if np.any(np.hypot(dx, dth) < 1e-10):
        raise CoincidentPoints("E is singular at coincident points")
    val = np.zeros(dx.size)
    gx = np.zeros(dx.size)
    gth = np.zeros(dx.size)
    near = np.abs(dx) < X_SWITCH
    if np.any(near):
        v, a, b = _images(gk, dx[near], dth[near], grad)
        if not gk.spec.constant_potential:
            v2, a2, b2 = _modal(gk, p[near], q[near], grad, remainder=True)
            v, a, b = v + v2, a + a2, b + b2
        val[near], gx[near], gth[near] = v, a, b
    # far pairs: the mode count needed shrinks like 1/|x - x'|, so bin dyadically
    a = np.abs(dx)
    lo = X_SWITCH
    while np.any(a >= lo):
        b = (a >= lo) & (a < 2 * lo)
        if np.any(b):
            val[b], gx[b], gth[b] = _modal(gk, p[b], q[b], grad, remainder=False)
        lo *= 2
    if grad:
        return val.reshape(shape), np.stack([gx, gth], axis=-1).reshape(shape + (2,))
    return val.reshape(shape)


def kernel_E(gk, p, q):
    """E(p, q) for points p != q given as (..., 2) arrays of (x, theta)."""
    return _evaluate(gk, p, q, grad=False)


def kernel_gradE(gk, p, q):
    """(E, grad_q E) with grad_q E = (d/dx', d/dtheta')."""
    return _evaluate(gk, p, q, grad=True)


def kernel_dE(gk, p, q, direction):
    """Directional derivative of E(p, .) at q along unit vectors ``direction``."""
    _, g = kernel_gradE(gk, p, q)
    return np.sum(g * direction, axis=-1)


def regular_part(gk, p, q, grad=False):
    """E(p, q) - K0(lam0 |p - q|) / (2 pi): smooth across p == q.

    Only valid for |x - x'| < X_SWITCH (the image-sum branch).
    """
    p, q, shape = _split(p, q)
    dx = q[:, 0] - p[:, 0]
    if np.any(np.abs(dx) >= X_SWITCH):
        raise ValueError("regular_part is defined on the near branch only")
    dth = _wrap(q[:, 1] - p[:, 1], gk.circumference)
    v, a, b = _regular_images(gk, dx, dth, grad)
    if not gk.spec.constant_potential:
        v2, a2, b2 = _modal(gk, p, q, grad, remainder=True)
        v, a, b = v + v2, a + a2, b + b2
    if grad:
        return v.reshape(shape), np.stack([a, b], axis=-1).reshape(shape + (2,))
    return v.reshape(shape)


def log_coefficient(gk, r):
    """E = log_coefficient(r) * log(r) + smooth near the diagonal."""
    return -i0(gk.lam0 * r) / (2 * np.pi)


def grad_log_coefficient(gk, r):
    """grad_q E = grad_log_coefficient(r) * (q - p) * log(r) + smooth."""
    lam = gk.lam0
    return -lam * lam * i1_over_x(lam * r) / (2 * np.pi)


def diagonal_constant(gk):
    """lim_{q -> p} [E(p, q) + log|p - q| / (2 pi)] minus the regular part."""
    return -(np.log(gk.lam0 / 2) + EULER_GAMMA) / (2 * np.pi)


# Independent oracles --------------------------------------------------------

def image_sum_oracle(lam, circumference, p, q, n_images=30, grad=False):
    """(1/2pi) sum_{|n|<=n_images} K0(lam r_n) using scipy's Bessel functions."""
    from scipy.special import k0 as sk0, k1 as sk1
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dx = q[..., 0] - p[..., 0]
    dth = q[..., 1] - p[..., 1]
    val = 0.0
    gx = 0.0
    gth = 0.0
    for n in range(-n_images, n_images + 1):
        dthn = dth + n * circumference
        r = np.hypot(dx, dthn)
        val = val + sk0(lam * r)
        if grad:
            f = -lam * sk1(lam * r) / r
            gx = gx + f * dx
            gth = gth + f * dthn
    if grad:
        return val / (2 * np.pi), np.stack([gx, gth], axis=-1) / (2 * np.pi)
    return val / (2 * np.pi)


def kummer_mode_sum(lam, circumference, p, q, n_terms=100000):
    """Constant-potential mode sum with its 1/k and a/k^2 tails summed in closed form.

    Independent of any Bessel function; valid at every |x - x'| including 0.
    """
    from scipy.special import spence
    p = np.atleast_2d(np.asarray(p, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    c = circumference
    w = 2 * np.pi / c
    a = np.abs(q[:, 0] - p[:, 0])
    dth = q[:, 1] - p[:, 1]
    z = np.exp(-w * a + 1j * w * dth)
    li1 = -np.log(1 - z)
    li2 = spence(1 - z)
    total = np.exp(-lam * a) / (2 * lam)
    total = total + np.real(li1) / w - 0.5 * lam * lam * a / w**2 * np.real(li2)
    k = np.arange(1, n_terms + 1, dtype=float)
    s = np.sqrt((k * w) ** 2 + lam * lam)
    for lo in range(0, a.size, 64):
        sl = slice(lo, lo + 64)
        A = a[sl, None]
        ek = np.exp(-k * w * A)
        r = np.exp(-s * A) / s - ek / (k * w) + 0.5 * lam * lam * A * ek / (k * w) ** 2
        total[sl] += np.sum(np.cos(np.outer(dth[sl], k * w)) * r, axis=1)
    return total / c


# Fundamental-solution check --------------------------------------------------

def smooth_bump(center, radius, amplitude=1.0):
    """psi(q) = amplitude * exp(1 - 1/(1 - (r/radius)^2)) and (Delta + V) psi pieces."""
    center = np.asarray(center, dtype=float)

    def psi(q, circumference=None):
        d = np.asarray(q, dtype=float) - center
        if circumference is not None:
            d[..., 1] = _wrap(d[..., 1], circumference)
        u2 = (d ** 2).sum(axis=-1) / radius**2
        out = np.zeros(u2.shape)
        m = u2 < 1
        out[m] = amplitude * np.exp(1 - 1 / (1 - u2[m]))
        return out

    def neg_laplacian(q, circumference=None):
        d = np.asarray(q, dtype=float) - center
        if circumference is not None:
            d[..., 1] = _wrap(d[..., 1], circumference)
        u2 = (d ** 2).sum(axis=-1) / radius**2
        out = np.zeros(u2.shape)
        m = u2 < 1
        s = u2[m]
        one = 1 - s
        b = amplitude * np.exp(1 - 1 / one)
        # radial profile B(s) with s = r^2/R^2: Laplacian = (4/R^2)(s B'' + B')
        b1 = -b / one**2
        b2 = b / one**4 - 2 * b / one**3
        out[m] = -(4.0 / radius**2) * (s * b2 + b1)
        return out

    return psi, neg_laplacian


def verify_fundamental(gk, model, p, center, radius, h, x_order=4):
    """|int E(p, q) ((Delta + V) psi)(q) dq - psi(p)| by naive tensor quadrature.

    Trapezoid rule in theta (spacing ~h over the full circle), Gauss-Legendre
    panels of the same width in x covering the bump support. The grid is placed so
    that p sits at the centre of a cell, which makes the convergence in h
    monotone instead of depending on where p happens to fall.
    """
    c = model.circumference
    p = np.asarray(p, dtype=float)
    psi, nlap = smooth_bump(center, radius)
    nth = int(np.ceil(c / h))
    hc = c / nth
    th = p[1] + (np.arange(nth) + 0.5) * hc
    j0 = int(np.floor((center[0] - radius - p[0]) / hc - 0.5))
    j1 = int(np.ceil((center[0] + radius - p[0]) / hc + 0.5))
    edges = p[0] + hc * (np.arange(j0, j1 + 1) - 0.5)
    t, w = np.polynomial.legendre.leggauss(x_order)
    half = 0.5 * np.diff(edges)
    xs = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * t).ravel()
    wx = (half[:, None] * w).ravel()
    X, TH = np.meshgrid(xs, th, indexing="ij")
    q = np.stack([X.ravel(), TH.ravel()], axis=-1)
    W = (wx[:, None] * np.full(nth, c / nth)[None, :]).ravel()
    src = nlap(q, c) + model.potential(q[:, 1]) * psi(q, c)
    m = src != 0
    val = np.sum(kernel_E(gk, p[None, :], q[m]) * src[m] * W[m])
    return float(abs(val - psi(p[None, :], c)[0]))
