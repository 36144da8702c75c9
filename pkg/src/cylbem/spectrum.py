"""Cross-section operator A = -d_theta^2 + V(theta) and its resolvents.

Galerkin basis e_j(theta) = exp(i j w theta) / sqrt(c), |j| <= M, in which
A has the exact matrix (j w)^2 delta_jk + Vhat_{j-k}.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveGroundState


@dataclass(frozen=True)
class CrossSectionSpectrum:
    circumference: float
    modes: np.ndarray           # Fourier indices j, ascending, |j| <= M
    eigenvalues: np.ndarray     # all Galerkin eigenvalues, ascending
    vectors: np.ndarray         # columns: Fourier coefficients of phi_k
    n_retained: int
    residuals: np.ndarray       # for the retained eigenpairs
    mean_potential: float
    constant_potential: bool

    @property
    def omega(self):
        return 2 * np.pi / self.circumference

    @property
    def galerkin_dim(self):
        return self.modes.size

    @property
    def mu(self):
        return self.eigenvalues[:self.n_retained]

    @property
    def phi(self):
        return self.vectors[:, :self.n_retained]

    @property
    def mu0(self):
        return float(self.eigenvalues[0])

    @property
    def free_eigenvalues(self):
        """Spectrum of -d^2 + mean(V): the constant-potential comparison operator."""
        return (self.modes * self.omega) ** 2 + self.mean_potential

    def basis(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(1j * self.omega * np.multiply.outer(theta, self.modes)) / np.sqrt(self.circumference)

    def basis_deriv(self, theta):
        return self.basis(theta) * (1j * self.omega * self.modes)

    def eigenfunctions(self, theta, deriv=False):
        """phi_k(theta) for all Galerkin eigenpairs, shape theta.shape + (N,)."""
        b = self.basis_deriv(theta) if deriv else self.basis(theta)
        return b @ self.vectors

    def apply_function(self, h, h_free):
        """Fourier-space matrix h(A) - h(A0), with A0 = -d^2 + mean(V)."""
        mat = (self.vectors * h) @ self.vectors.conj().T
        mat[np.diag_indices_from(mat)] -= h_free
        return mat


def galerkin_matrix(model, M):
    j = np.arange(-M, M + 1)
    vhat = model.potential_hat()
    nv = (vhat.size - 1) // 2
    A = np.diag((j * model.omega) ** 2).astype(complex)
    for n in range(-nv, nv + 1):
        if n == 0:
            A += np.eye(j.size) * vhat[nv]
        elif abs(n) <= 2 * M:
            A += np.eye(j.size, k=-n) * vhat[nv + n]
    return j, A


def eigensystem(model, galerkin_dim=None):
    """Eigenpairs of the Fourier-Galerkin matrix of -d^2 + V.

    The Galerkin problem is solved with M = 2 * mode_cutoff (or
    galerkin_dim // 2) and the lowest 2 * mode_cutoff + 1 pairs are retained
    as the reported spectrum; kernels use all pairs.
    """
    M = 2 * model.mode_cutoff if galerkin_dim is None else galerkin_dim // 2
    j, A = galerkin_matrix(model, M)
    mu, U = np.linalg.eigh(A)
    if mu[0] <= 1e-10:
        raise NonPositiveGroundState(f"mu_0 = {mu[0]:.3g} <= 1e-10")
    n_ret = min(2 * model.mode_cutoff + 1, j.size)
    # residual at doubled resolution: ||A_2M phi - mu phi||
    j2, A2 = galerkin_matrix(model, 2 * M)
    emb = np.zeros((j2.size, n_ret), dtype=complex)
    emb[M:M + j.size] = U[:, :n_ret]
    res = np.linalg.norm(A2 @ emb - emb * mu[:n_ret], axis=0)
    return CrossSectionSpectrum(
        circumference=model.circumference, modes=j, eigenvalues=mu, vectors=U,
        n_retained=n_ret, residuals=res, mean_potential=model.mean_potential,
        constant_potential=model.is_constant_potential)


def indicial_resolvent_norm(spec, tau):
    """Norms of (A + tau^2)^-1 on L^2 and of (A + 1)(A + tau^2)^-1."""
    t2 = float(tau) ** 2
    mu = spec.mu
    return {"l2_norm": 1.0 / (mu[0] + t2),
            "l2_to_h2_norm": float(np.max((1.0 + mu) / (mu + t2)))}


def _free_circle_green(lam, c, d, deriv):
    # resolvent kernel of -d^2 + lam^2 on a circle of length c, d in [0, c)
    den = 1.0 - np.exp(-lam * c)
    a = np.exp(-lam * d)
    b = np.exp(-lam * (c - d))
    if not deriv:
        return (a + b) / (2 * lam * den)
    # derivative in the second argument; the principal value 0 at d == 0
    return np.where(d == 0, 0.0, (a - b) / (2 * den))


def circle_green(spec, tau, theta, theta_p, deriv=False):
    """Kernel g_tau(theta, theta') of (A + tau^2)^-1 (or its d/dtheta').

    Split as the closed-form kernel for the mean potential plus the smooth
    Galerkin remainder, which vanishes identically for constant V.
    At theta == theta' the derivative returns the average of the one-sided
    limits.
    """
    c = spec.circumference
    t2 = float(tau) ** 2
    lam = np.sqrt(spec.mean_potential + t2)
    theta = np.asarray(theta, dtype=float)
    theta_p = np.asarray(theta_p, dtype=float)
    d = np.mod(theta - theta_p, c)
    out = _free_circle_green(lam, c, d, deriv)
    if not spec.constant_potential:
        G = spec.apply_function(1.0 / (spec.eigenvalues + t2), 1.0 / (spec.free_eigenvalues + t2))
        left = spec.basis(theta)
        right = spec.basis_deriv(theta_p) if deriv else spec.basis(theta_p)
        out = out + np.real(np.einsum("...j,jk,...k->...", left, G, right.conj()))
    return out
