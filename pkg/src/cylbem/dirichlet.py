"""Dirichlet problem for Delta + V in N, the Dirichlet-to-Neumann map and source terms.

Interior solution by the double layer, g = (-1/2 I + K)^-1 f and u = D g,
or by the single layer, u = S(S^-1 f).  The Dirichlet-to-Neumann map is
(1/2 I + K*) S^-1, and Green's representation in N reads

    u = S(d_nu u) - D(u|_Z).
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import IllConditioned, SourceTooClose
from .greens import kernel_E
from .layerops import as_boundary, layer_potentials
from .quadrature import composite_gauss
from .spectrum import circle_green
from .taufamily import ArcDomain, tau_layer_matrices

COND_LIMIT = 1e10


def _factor(A, cond_limit, what):
    lu = sla.lu_factor(A, check_finite=True)
    rcond, info = sla.lapack.dgecon(lu[0], np.linalg.norm(A, 1), norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if not cond < cond_limit:
        raise IllConditioned(f"{what}: condition number {cond:.3g} exceeds {cond_limit:.3g}")
    return lu, cond


@dataclass
class DirichletSolution:
    """Layer-potential representation of the solution in N."""

    density: np.ndarray
    kind: str                  # "double" or "single"
    ops: object
    boundary_data: np.ndarray
    condition: float
    residual: float
    volume: object = None      # callable p -> volume-potential values (source term)
    info: dict = field(default_factory=dict)

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        key = "D" if self.kind == "double" else "S"
        u = layer_potentials(self.ops.gk, self.ops.boundary, self.density, pts, (key,))[key]
        if self.volume is not None:
            u = u + self.volume(pts)
        return u

    evaluate = __call__


def solve_dirichlet(ops, f, cond_limit=COND_LIMIT):
    """g = (-1/2 I + K)^-1 f; the solution is u = D g."""
    f = np.asarray(f, dtype=float)
    A = -0.5 * np.eye(ops.n) + ops.K
    lu, cond = _factor(A, cond_limit, "-1/2 I + K")
    g = sla.lu_solve(lu, f)
    res = float(np.linalg.norm(A @ g - f) / max(np.linalg.norm(f), 1e-300))
    return DirichletSolution(density=g, kind="double", ops=ops, boundary_data=f,
                             condition=cond, residual=res)


def ssinv_solve(ops, f, cond_limit=COND_LIMIT):
    """u = S(S^-1 f): single-layer representation of the same solution."""
    f = np.asarray(f, dtype=float)
    lu, cond = _factor(ops.S, cond_limit, "S")
    g = sla.lu_solve(lu, f)
    res = float(np.linalg.norm(ops.S @ g - f) / max(np.linalg.norm(f), 1e-300))
    return DirichletSolution(density=g, kind="single", ops=ops, boundary_data=f,
                             condition=cond, residual=res)


# Dirichlet-to-Neumann -------------------------------------------------------

@dataclass
class DtNReport:
    matrix: np.ndarray
    weights: np.ndarray
    condition_S: float

    @property
    def symmetry_residual(self):
        """Relative asymmetry of N in the weighted inner product."""
        A = self.weights[:, None] * self.matrix
        return float(np.linalg.norm(A - A.T) / np.linalg.norm(A))

    def quadratic_form(self, f):
        """<N f, f> in the boundary L^2 inner product."""
        f = np.asarray(f, dtype=float)
        return float(np.sum(self.weights * f * (self.matrix @ f)))

    def min_quadratic_ratio(self):
        """Minimum of <N f, f> / ||f||^2 over real f (weighted Rayleigh quotient)."""
        w = np.sqrt(self.weights)
        A = w[:, None] * self.matrix / w[None, :]
        return float(np.min(np.linalg.eigvalsh(0.5 * (A + A.T))))

    def __call__(self, f):
        return self.matrix @ np.asarray(f, dtype=float)


def dtn(ops, cond_limit=COND_LIMIT):
    """N = (1/2 I + K*) S^-1 as a dense matrix."""
    lu, cond = _factor(ops.S, cond_limit, "S")
    B = 0.5 * np.eye(ops.n) + ops.Kstar
    # N = B S^-1  <=>  N^T = S^-T B^T
    N = sla.lu_solve(lu, B.T, trans=1).T
    return DtNReport(matrix=N, weights=ops.weights.copy(), condition_S=cond)


def normal_derivative_by_extrapolation(sol, step=0.02, levels=6):
    """Outward normal derivative of a solution at the boundary nodes.

    u is sampled at p - k * step * nu (k = 1..levels, inside N) together with
    the boundary value u(p) = f, and the interpolating polynomial in the
    offset is differentiated at 0.
    """
    bd = sol.ops.boundary
    t = step * np.arange(levels + 1)
    vals = np.empty((levels + 1, bd.n))
    vals[0] = sol.boundary_data
    for k in range(1, levels + 1):
        vals[k] = sol(bd.nodes - t[k] * bd.normals)
    # derivative at t = 0 of the Lagrange interpolant
    V = np.vander(t, levels + 1, increasing=True)
    coef = np.linalg.solve(V, vals)
    return -coef[1]


def green_representation(ops, f, neumann, pts):
    """S(d_nu u) - D(u|_Z) at points of N."""
    vals = layer_potentials(ops.gk, ops.boundary, np.asarray(neumann, dtype=float), pts, ("S",))["S"]
    vals -= layer_potentials(ops.gk, ops.boundary, np.asarray(f, dtype=float), pts, ("D",))["D"]
    return vals


# Translation-invariant strip ----------------------------------------------------

def cross_section_domain(model, curves):
    """Arcs of the cross-section of N at infinity, from straight graph curves.

    The arc runs from a curve with N above it to the next curve with N below.
    Returns the ArcDomain and, per endpoint, the index of the curve it belongs to.
    """
    graphs = sorted((c.level % model.circumference, i, c.side)
                    for i, c in enumerate(curves) if c.kind == "graph")
    arcs, owners = [], []
    for k, (lev, i, side) in enumerate(graphs):
        if side != "above":
            continue
        nxt = graphs[(k + 1) % len(graphs)]
        if nxt[2] != "below":
            raise ValueError("graph curves must alternate above/below")
        top = nxt[0] if nxt[0] > lev else nxt[0] + model.circumference
        arcs.append((lev, top))
        owners.extend([i, nxt[1]])
    return ArcDomain(tuple(arcs), model.circumference, model.potential), owners


@dataclass
class StripFourierSolution:
    """u(x, theta) = sum_m w_m exp(i xi_m x) U_m(theta), U_m the 1-D double layer of ghat_m."""

    domain: ArcDomain
    spec: object
    xis: np.ndarray
    weights: np.ndarray
    fhat: np.ndarray
    ghat: np.ndarray

    def density(self, x):
        """Boundary density g(x) on each endpoint line, shape (len(x), n_points)."""
        ph = np.exp(1j * np.outer(np.asarray(x, dtype=float), self.xis)) * self.weights
        return ph @ self.ghat

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        th = self.domain.points
        nu = self.domain.normals
        U = np.empty((self.xis.size, pts.shape[0]), dtype=complex)
        for m, xi in enumerate(self.xis):
            dg = circle_green(self.spec, xi, pts[:, 1][:, None], th[None, :], deriv=True) * nu
            U[m] = dg @ self.ghat[m]
        ph = np.exp(1j * np.outer(pts[:, 0], self.xis)) * self.weights
        return np.sum(ph * U.T, axis=1)

    def neumann_hat(self):
        """Mode-wise normal derivative (1/2 I + K*_xi) S_xi^-1 fhat."""
        out = np.empty_like(self.fhat)
        for m, xi in enumerate(self.xis):
            M = tau_layer_matrices(self.domain, self.spec, xi)
            out[m] = (0.5 * np.eye(self.domain.n_points) + M["Kstar"]) @ np.linalg.solve(M["S"], self.fhat[m])
        return out


def solve_strip_fourier(domain, spec, xis, fhat, weights=None):
    """Mode-wise solve ghat(xi) = (-1/2 I + K_xi)^-1 fhat(xi) on the cross-section arcs.

    ``fhat`` has shape (len(xis), n_points).  ``weights`` are the synthesis
    weights (quadrature weights / 2 pi for an inverse transform, ones for a
    finite sum of modes).
    """
    xis = np.asarray(xis, dtype=float)
    fhat = np.asarray(fhat, dtype=complex).reshape(xis.size, domain.n_points)
    eye = np.eye(domain.n_points)
    ghat = np.empty_like(fhat)
    for m, xi in enumerate(xis):
        K = tau_layer_matrices(domain, spec, xi)["K"]
        ghat[m] = np.linalg.solve(-0.5 * eye + K, fhat[m])
    w = np.ones(xis.size) if weights is None else np.asarray(weights, dtype=float)
    return StripFourierSolution(domain=domain, spec=spec, xis=xis, weights=w, fhat=fhat, ghat=ghat)


def strip_dtn_symbol(domain, spec, xi):
    """2 x 2 (per arc) DtN matrix of the strip at axial frequency xi."""
    M = tau_layer_matrices(domain, spec, xi)
    return (0.5 * np.eye(domain.n_points) + M["Kstar"]) @ np.linalg.inv(M["S"])


# Interior source ------------------------------------------------------------------

@dataclass(frozen=True)
class DiskSource:
    """Smooth source supported in the disk |q - center| < radius (chart coordinates)."""

    func: object
    center: tuple
    radius: float

    def __call__(self, q):
        return self.func(q)


def volume_potential(gk, src, pts, h=1 / 64, near=None):
    """int E(p, q) src(q) dq over the source disk.

    Points within ``near`` of the support use polar coordinates about p
    (radial Gauss-Legendre panels graded toward p, trapezoid in angle), which
    absorbs the logarithmic singularity; other points use the same kind of
    rule centred on the source disk.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    c = np.asarray(src.center, dtype=float)
    R = src.radius
    near = 0.25 if near is None else near
    d = np.hypot(pts[:, 0] - c[0], (pts[:, 1] - c[1] + 0.5 * gk.circumference)
                 % gk.circumference - 0.5 * gk.circumference)
    out = np.zeros(pts.shape[0])
    far = d > R + near
    if np.any(far):
        # polar rule about the source centre: the support is a disk
        r, wr = composite_gauss(np.linspace(0.0, R, max(4, int(np.ceil(R / (2 * h)))) + 1), 8)
        nphi = int(np.ceil(2 * np.pi * R / h))
        phi = 2 * np.pi * np.arange(nphi) / nphi
        q = c + np.stack([np.outer(r, np.cos(phi)), np.outer(r, np.sin(phi))], axis=-1).reshape(-1, 2)
        wq = np.outer(wr * r, np.full(nphi, 2 * np.pi / nphi)).ravel() * src(q)
        m = wq != 0
        q, wq = q[m], wq[m]
        for i in np.nonzero(far)[0]:
            out[i] = kernel_E(gk, pts[i][None, :], q) @ wq
    for i in np.nonzero(~far)[0]:
        p = pts[i]
        rmax = d[i] + R
        breaks = [0.0, h / 16, h / 4, h]
        while breaks[-1] < rmax:
            breaks.append(min(breaks[-1] + 2 * h, rmax))
        r, wr = composite_gauss(np.array(breaks), 8)
        nphi = int(np.ceil(2 * np.pi * rmax / h))
        phi = 2 * np.pi * np.arange(nphi) / nphi
        q = p + np.stack([np.outer(r, np.cos(phi)), np.outer(r, np.sin(phi))], axis=-1).reshape(-1, 2)
        wq = (np.outer(wr * r, np.full(nphi, 2 * np.pi / nphi))).ravel() * src(q)
        m = wq != 0
        out[i] = kernel_E(gk, p[None, :], q[m]) @ wq[m]
    return out


def wellposedness_solve(ops, src, f, h=1 / 64, standoff=0.5, cond_limit=COND_LIMIT):
    """u = u1 + u2 with u1 the volume potential of ``src`` and u2 the Dirichlet
    solution for f - u1|_Z, so that (Delta + V) u = src in N and u|_Z = f.
    """
    bd = as_boundary(ops.boundary)
    c = np.asarray(src.center, dtype=float)
    circ = ops.gk.circumference
    dth = (bd.nodes[:, 1] - c[1] + 0.5 * circ) % circ - 0.5 * circ
    gap = np.min(np.hypot(bd.nodes[:, 0] - c[0], dth)) - src.radius
    if gap < standoff:
        raise SourceTooClose(f"source support is {gap:.3g} from the boundary (< {standoff})")
    u1_bd = volume_potential(ops.gk, src, bd.nodes, h)
    sol = solve_dirichlet(ops, np.asarray(f, dtype=float) - u1_bd, cond_limit)
    sol.volume = lambda pts: volume_potential(ops.gk, src, pts, h)
    sol.boundary_data = np.asarray(f, dtype=float)
    sol.info["volume_on_boundary"] = u1_bd
    return sol
