"""Parameter-dependent layer potentials on arcs of the cross-section circle.

The boundary of a union of arcs is a finite point set with counting measure,
so the layer "integrals" are finite sums:

    S_tau[p, q] = g_tau(p, q),    K_tau[p, q] = nu_q d_theta' g_tau(p, q),

with g_tau the kernel of (A + tau^2)^-1, A = -d_theta^2 + V.  The diagonal
of K_tau is the mean of the two one-sided limits.  The H^1_tau norm on a
point set is (1 + |tau|) times the l^2 norm.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as C
from scipy.fft import dct

from .errors import SingularFamily, SolveFailure
from .spectrum import circle_green

N_CHEB = 256
N_QUAD = 256
SINGULAR_COND = 1e12


@dataclass(frozen=True)
class ArcDomain:
    """Disjoint open arcs (a, b) of the circle, a < b < a + circumference.

    ``potential`` is the function W on the circle used by the ODE oracle.
    """

    arcs: tuple
    circumference: float = 2 * np.pi
    potential: object = None

    def __post_init__(self):
        c = self.circumference
        arcs = tuple((float(a), float(b)) for a, b in self.arcs)
        for a, b in arcs:
            if not a < b < a + c:
                raise ValueError(f"invalid arc ({a}, {b})")
        # disjointness on the circle
        marks = sorted((a % c, (a % c) + (b - a)) for a, b in arcs)
        for (a0, b0), (a1, b1) in zip(marks, marks[1:] + [(marks[0][0] + c, 0)]):
            if b0 > a1 + 1e-14:
                raise ValueError("arcs overlap")
        object.__setattr__(self, "arcs", arcs)

    @property
    def points(self):
        return np.array([t for a, b in self.arcs for t in (a, b)])

    @property
    def normals(self):
        """Outward normals of the arcs at their endpoints (-1 at a, +1 at b)."""
        return np.array([s for _ in self.arcs for s in (-1.0, 1.0)])

    @property
    def n_points(self):
        return 2 * len(self.arcs)

    def W(self, theta):
        if self.potential is None:
            return np.zeros_like(np.asarray(theta, dtype=float))
        return np.asarray(self.potential(theta), dtype=float)


def domain_from_model(model, arcs):
    return ArcDomain(tuple(arcs), model.circumference, model.potential)


def tau_layer_matrices(domain, spec, tau):
    """S_tau, K_tau, K*_tau on the endpoint set of ``domain``."""
    th = domain.points
    nu = domain.normals
    P, Q = np.meshgrid(th, th, indexing="ij")
    S = circle_green(spec, tau, P, Q)
    K = circle_green(spec, tau, P, Q, deriv=True) * nu[None, :]
    return {"S": S, "K": K, "Kstar": K.T.copy()}


# ODE oracle -------------------------------------------------------------------

def _cheb(n):
    # Chebyshev points x_j = cos(pi j / n) and differentiation matrix on [-1, 1]
    j = np.arange(n + 1)
    x = np.cos(np.pi * j / n)
    c = np.where((j == 0) | (j == n), 2.0, 1.0) * (-1.0) ** j
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (X + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def _cheb_coef(values):
    # interpolation coefficients from values at x_j = cos(pi j / n)
    n = values.size - 1
    coef = dct(values, type=1) / n
    coef[0] /= 2
    coef[-1] /= 2
    return coef


@dataclass
class ArcSolution:
    arc: tuple
    tau: float
    nodes: np.ndarray
    u: np.ndarray
    du: np.ndarray
    boundary_values: np.ndarray
    normal_derivative: np.ndarray   # outward d_nu u at (a, b)
    residual: float
    coef: np.ndarray = field(repr=False, default=None)
    dcoef: np.ndarray = field(repr=False, default=None)

    def __call__(self, theta, deriv=False):
        a, b = self.arc
        t = (2 * np.asarray(theta, dtype=float) - a - b) / (b - a)
        return C.chebval(t, self.dcoef if deriv else self.coef)


def solve_arc_dirichlet_oracle(domain, tau, boundary_values, n=N_CHEB):
    """Solve -u'' + (tau^2 + W) u = 0 on a single arc with u(a), u(b) given.

    Chebyshev collocation with n + 1 points; returns values, derivatives and
    the outward normal derivatives (-u'(a), u'(b)).
    """
    if len(domain.arcs) != 1:
        raise ValueError("the oracle handles a single arc")
    a, b = domain.arcs[0]
    x, D = _cheb(n)
    scale = 2.0 / (b - a)
    theta = 0.5 * (a + b) + 0.5 * (b - a) * x
    D1 = scale * D
    L = -D1 @ D1 + np.diag(tau * tau + domain.W(theta))
    fa, fb = np.asarray(boundary_values, dtype=complex).ravel()
    rhs = np.zeros(n + 1, dtype=complex)
    # x[0] = 1 is theta = b, x[n] = -1 is theta = a
    L[0] = 0.0
    L[0, 0] = 1.0
    L[n] = 0.0
    L[n, n] = 1.0
    rhs[0] = fb
    rhs[n] = fa
    lu = sla.lu_factor(L)
    rcond, _ = sla.lapack.dgecon(lu[0], np.linalg.norm(L, 1), norm="1")
    if rcond < 1e-14:
        raise SolveFailure("collocation matrix is numerically singular")
    u = sla.lu_solve(lu, rhs)
    du = D1 @ u
    if np.all(np.isreal(u)):
        u, du = u.real, du.real
    coef = _cheb_coef(u)
    dcoef = C.chebder(coef) * scale
    # residual of the interior equations
    Lint = -D1 @ D1 + np.diag(tau * tau + domain.W(theta))
    res = float(np.max(np.abs((Lint @ u)[1:-1]))) / max(1.0, float(np.max(np.abs(u))))
    return ArcSolution(arc=(a, b), tau=float(tau), nodes=theta, u=u, du=du,
                       boundary_values=np.array([fa, fb]),
                       normal_derivative=np.array([-du[n], du[0]]), residual=res,
                       coef=coef, dcoef=dcoef)


def dtn_oracle(domain, tau):
    """Dirichlet-to-Neumann matrix of the arc domain from oracle solves."""
    blocks = []
    for arc in domain.arcs:
        sub = ArcDomain((arc,), domain.circumference, domain.potential)
        cols = [solve_arc_dirichlet_oracle(sub, tau, e).normal_derivative.real
                for e in ((1.0, 0.0), (0.0, 1.0))]
        blocks.append(np.column_stack(cols))
    n = domain.n_points
    out = np.zeros((n, n))
    for i, B in enumerate(blocks):
        out[2 * i:2 * i + 2, 2 * i:2 * i + 2] = B
    return out


# Integral identities --------------------------------------------------------------

@lru_cache(maxsize=8)
def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def _arc_quadrature(a, b, n=N_QUAD):
    t, w = _gauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * t, 0.5 * (b - a) * w


def _series(coef, a, b):
    return np.polynomial.Chebyshev(np.asarray(coef), domain=[a, b])


def rellich_check(domain, u_coef, w_coef):
    """Both sides of the Rellich and divergence identities on a single arc.

    ``u_coef`` (complex) and ``w_coef`` (real) are Chebyshev coefficients on
    the arc.  With the positive Laplacian, nu = -1 at a and +1 at b, and
    tangential gradients vanishing on the endpoint set, the identities read

        sum_dOmega <nu, w> (|grad_tan u|^2 - |d_nu u|^2)
            = 2 Re sum_dOmega <w_tan, grad u> d_nu conj(u)
              + 2 Re int <grad conj(u), w> Delta u
              + Re int (div w |grad u|^2 - (L_w g)(grad u, grad conj(u)))

        sum_dOmega |u|^2 <w, nu> = Re int (2 u <grad conj(u), w> + div w |u|^2)

    where (L_w g)(d, d) = 2 w'.  Boundary sides are point evaluations and
    interior sides are Gauss-Legendre quadratures, computed independently.
    """
    if len(domain.arcs) != 1:
        raise ValueError("rellich_check works on a single arc")
    a, b = domain.arcs[0]
    u = _series(u_coef, a, b)
    w = _series(w_coef, a, b)
    du, d2u, dw = u.deriv(), u.deriv(2), w.deriv()
    ends = np.array([a, b])
    nu = np.array([-1.0, 1.0])
    x, qw = _arc_quadrature(a, b)

    # on an arc the tangential gradient and w_tan vanish at the endpoints
    lhs = float(-np.sum(nu * w(ends) * np.abs(du(ends)) ** 2))
    lap_u = -d2u(x)
    lie = 2 * dw(x)
    grad2 = np.abs(du(x)) ** 2
    rhs = float(2 * np.real(np.sum(qw * np.conj(du(x)) * w(x) * lap_u))
                + np.sum(qw * (dw(x) - lie) * grad2))

    dlhs = float(np.sum(np.abs(u(ends)) ** 2 * w(ends) * nu))
    drhs = float(np.real(np.sum(qw * (2 * u(x) * np.conj(du(x)) * w(x) + dw(x) * np.abs(u(x)) ** 2))))
    return {"rellich": {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)},
            "divergence": {"lhs": dlhs, "rhs": drhs, "residual": abs(dlhs - drhs)}}


# Estimates for solutions ----------------------------------------------------------

ESTIMATES = ("neumann_by_dirichlet", "dirichlet_by_neumann_eps", "dirichlet_by_neumann",
             "energy", "poincare")


def estimate_suite(domain, tau, sol, eps=0.1, bounds=None):
    """Realized constants of the boundary and interior estimates for one oracle solution.

    neumann_by_dirichlet:     sum |d_nu u|^2 <= C sum (1 + tau^2) |u|^2
    dirichlet_by_neumann_eps: sum tau^2 |u|^2 <= C sum |d_nu u|^2 + eps sum |u|^2
    dirichlet_by_neumann:     sum (1 + tau^2) |u|^2 <= C sum |d_nu u|^2
    energy:                   int |u'|^2 + (tau^2 + W)|u|^2 <= sum |u| |d_nu u|  (slack reported)
    poincare:                 int |u|^2 <= C int |u'|^2 + W |u|^2

    A ratio 0/0 is reported as the string "degenerate".  With ``bounds``
    (name -> C) each realized constant is compared and ``violations`` lists
    those exceeding their bound.
    """
    t2 = float(tau) ** 2
    fb = np.abs(sol.boundary_values) ** 2
    nb = np.abs(sol.normal_derivative) ** 2
    a, b = sol.arc
    x, qw = _arc_quadrature(a, b)
    u = sol(x)
    du = sol(x, deriv=True)
    W = domain.W(x)
    grad2 = float(np.sum(qw * np.abs(du) ** 2))
    mass = float(np.sum(qw * np.abs(u) ** 2))
    pot = float(np.sum(qw * W * np.abs(u) ** 2))

    def ratio(num, den):
        if den <= 1e-300:
            return "degenerate" if num <= 1e-300 else np.inf
        return num / den

    out = {
        "neumann_by_dirichlet": ratio(nb.sum(), (1 + t2) * fb.sum()),
        "dirichlet_by_neumann_eps": ratio(max(t2 * fb.sum() - eps * fb.sum(), 0.0), nb.sum()),
        "dirichlet_by_neumann": ratio((1 + t2) * fb.sum(), nb.sum()),
        "energy": float(np.sum(np.abs(sol.boundary_values) * np.abs(sol.normal_derivative))
                        - (grad2 + t2 * mass + pot)),
        "poincare": ratio(mass, grad2 + pot),
    }
    if out["energy"] == 0.0 and fb.sum() == 0.0:
        out["energy"] = "degenerate"
    violations = []
    if isinstance(out["energy"], float) and out["energy"] < -1e-10:
        violations.append("energy")
    for name, bound in (bounds or {}).items():
        val = out.get(name)
        if isinstance(val, float) and val > bound * (1 + 1e-9):
            violations.append(name)
    out["violations"] = violations
    return out


def exact_bounds(domain, tau):
    """Sharp constants over all boundary data for the boundary estimates at this tau."""
    N = dtn_oracle(domain, tau)
    sv = np.linalg.svd(N, compute_uv=False)
    t2 = float(tau) ** 2
    return {"neumann_by_dirichlet": sv[0] ** 2 / (1 + t2),
            "dirichlet_by_neumann": (1 + t2) / sv[-1] ** 2}


# Uniform bounds -------------------------------------------------------------------

@dataclass
class TauFamilyReport:
    taus: np.ndarray
    norm_S_inv: np.ndarray
    norm_halfK_inv: np.ndarray
    cond_S: np.ndarray
    cond_halfK: np.ndarray
    matrices: dict = field(default_factory=dict, repr=False)

    @property
    def sup_S_inv(self):
        return float(np.max(self.norm_S_inv))

    @property
    def sup_halfK_inv(self):
        return float(np.max(self.norm_halfK_inv))

    def rows(self):
        return [{"tau": float(t), "norm_S_inv": float(a), "norm_halfK_inv": float(b),
                 "cond_S": float(c), "cond_halfK": float(d)}
                for t, a, b, c, d in zip(self.taus, self.norm_S_inv, self.norm_halfK_inv,
                                         self.cond_S, self.cond_halfK)]


def uniform_bound_sweep(domain, spec, taus, keep_matrices=False):
    """Norms of S_tau^-1 (H^1_tau -> L^2) and (1/2 I + K_tau)^-1 over a tau grid."""
    taus = np.asarray(taus, dtype=float)
    out = {k: np.empty(taus.size) for k in ("nS", "nK", "cS", "cK")}
    mats = {}
    eye = np.eye(domain.n_points)
    for i, tau in enumerate(taus):
        m = tau_layer_matrices(domain, spec, tau)
        H = 0.5 * eye + m["K"]
        sS = np.linalg.svd(m["S"], compute_uv=False)
        sK = np.linalg.svd(H, compute_uv=False)
        cK = sK[0] / sK[-1]
        if not np.isfinite(cK) or cK > SINGULAR_COND:
            raise SingularFamily(f"1/2 I + K_tau singular at tau = {tau} (cond {cK:.3g})")
        out["nS"][i] = 1.0 / sS[-1] / (1 + abs(tau))
        out["nK"][i] = 1.0 / sK[-1]
        out["cS"][i] = sS[0] / sS[-1]
        out["cK"][i] = cK
        if keep_matrices:
            mats[float(tau)] = m
    return TauFamilyReport(taus=taus, norm_S_inv=out["nS"], norm_halfK_inv=out["nK"],
                           cond_S=out["cS"], cond_halfK=out["cK"], matrices=mats)


def tau_grid(tmax=20.0, step=0.5):
    n = int(round(tmax / step))
    return step * np.arange(-n, n + 1)
