"""Periodic 1D discontinuous Galerkin infrastructure.

Cells carry an L2-orthonormal Legendre basis of degree <= order, so the mass
matrix is the identity and cell means / L2 norms read off the coefficients.
The module provides the transport weak form with centered / global
Lax-Friedrichs fluxes and the LDG Poisson solver with a zero-mean potential.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import CompatibilityError

__all__ = [
    "DGMesh",
    "DGSpace",
    "DGFunction",
    "FieldSolution",
    "numerical_flux",
    "assemble_transport",
    "solve_poisson_ldg",
]


@dataclass(frozen=True)
class DGMesh:
    """Uniform periodic partition of (0, length) into n_cells cells of degree `order`."""

    n_cells: int
    length: float
    order: int = 2

    def __post_init__(self):
        if self.n_cells < 1 or self.length <= 0 or self.order < 0:
            raise ValueError("mesh requires n_cells >= 1, length > 0, order >= 0")

    @property
    def h(self) -> float:
        return self.length / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        """Cell interfaces x_{i+1/2}, i = 0..n_cells."""
        return np.linspace(0.0, self.length, self.n_cells + 1)

    @property
    def n_dof(self) -> int:
        return self.n_cells * (self.order + 1)


def _orthonormal_legendre_vandermonde(xi, order, derivative=False):
    """Rows: points xi in [-1,1]; columns: sqrt(m+1/2) P_m(xi) (or d/dxi)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    V = np.empty((xi.size, order + 1))
    for m in range(order + 1):
        c = np.zeros(m + 1)
        c[m] = 1.0
        if derivative:
            c = legendre.legder(c)
        V[:, m] = np.sqrt(m + 0.5) * legendre.legval(xi, c)
    return V


def _shift(n, off):
    """Periodic shift matrix: (S u)_j = u_{j+off}."""
    return sparse.csr_matrix(np.roll(np.eye(n), off, axis=1))


class DGSpace:
    """Precomputed operators and quadrature for one mesh.

    Quadrature per cell is Gauss-Legendre with order+2 nodes, exact through
    degree 2*order+3, which covers every polynomial integrand assembled here.
    """

    def __init__(self, mesh: DGMesh):
        self.mesh = mesh
        l = mesh.order
        h = mesh.h
        self.n_quad = l + 2
        xi, w = np.polynomial.legendre.leggauss(self.n_quad)
        self.quad_xi = xi
        self.quad_w = w
        # shape (n_cells, n_quad): physical quadrature nodes
        centers = (np.arange(mesh.n_cells) + 0.5) * h
        self.quad_x = centers[:, None] + 0.5 * h * xi[None, :]
        # physical basis phi_m(x) = sqrt(2/h) sqrt(m+1/2) P_m(xi(x)), orthonormal on I_j
        scale = np.sqrt(2.0 / h)
        self.V = scale * _orthonormal_legendre_vandermonde(xi, l)            # (n_quad, l+1)
        self.Vd = scale * (2.0 / h) * _orthonormal_legendre_vandermonde(xi, l, True)
        one = np.ones(1)
        self.trace_right = scale * _orthonormal_legendre_vandermonde(one, l)[0]
        self.trace_left = scale * _orthonormal_legendre_vandermonde(-one, l)[0]
        # S[m, n] = int_I phi_m' phi_n dx
        self.S_phys = 0.5 * h * (self.Vd * w[:, None]).T @ self.V

        tp = self.trace_right
        tm = self.trace_left
        Tpp = np.outer(tp, tp)
        Tmm = np.outer(tm, tm)
        Tpm = np.outer(tp, tm)
        Tmp = np.outer(tm, tp)
        N = mesh.n_cells

        def assemble(b0, bp, bm):
            return (sparse.kron(_shift(N, 0), b0)
                    + sparse.kron(_shift(N, 1), bp)
                    + sparse.kron(_shift(N, -1), bm)).tocsr()

        # weak x-derivative with centered interface values:
        # (D u)_{jm} = -int_I u phi_jm' dx + {u}_{j+1/2} phi^-_jm - {u}_{j-1/2} phi^+_jm
        self.deriv_centered = assemble(
            -self.S_phys + 0.5 * (Tpp - Tmm), 0.5 * Tpm, -0.5 * Tmp)
        # jump penalty with unit viscosity:
        # (P u)_{jm} = -(1/2)[u]_{j+1/2} phi^-_jm + (1/2)[u]_{j-1/2} phi^+_jm
        self.jump_penalty = assemble(
            0.5 * (Tpp + Tmm), -0.5 * Tpm, -0.5 * Tmp)
        # E-equation of the LDG pair: A1 phi gives the dofs of E = -d(phi)/dx
        self.grad_op = assemble(
            self.S_phys - 0.5 * Tpp + 0.5 * Tmm, -0.5 * Tpm, 0.5 * Tmp)

        self.beta = 1.0 / h
        # LDG Laplacian: A2 A1 + 2 beta P  approximates  -d2/dx2
        self.laplacian = (self.deriv_centered @ self.grad_op
                          + 2.0 * self.beta * self.jump_penalty).tocsr()
        # mean-extraction vector: integral of u = mean_vec . coeffs
        mv = np.zeros(mesh.n_dof)
        mv[:: l + 1] = np.sqrt(h)
        self.mean_vec = mv
        self._poisson_lu = None

    # ------------------------------------------------------------------
    # function handling

    def project(self, f) -> "DGFunction":
        """Cell-wise L2 projection of a callable or of values at quad_x."""
        vals = f(self.quad_x) if callable(f) else np.asarray(f, dtype=float)
        return self.project_values(vals)

    def project_values(self, vals) -> "DGFunction":
        return DGFunction(self, self.coeffs_from_quad_values(vals))

    def values_at_quad(self, coeffs) -> np.ndarray:
        """Evaluate dof array (..., n_cells, order+1) at the cell quadrature nodes."""
        return np.einsum("...jm,qm->...jq", coeffs, self.V)

    def coeffs_from_quad_values(self, vals) -> np.ndarray:
        return 0.5 * self.mesh.h * np.einsum(
            "...jq,q,qm->...jm", vals, self.quad_w, self.V)

    def integrate_quad_values(self, vals) -> float:
        """Integral over (0, L) of values sampled at quad_x."""
        return 0.5 * self.mesh.h * float(np.einsum("jq,q->", vals, self.quad_w))

    def mult_blocks(self, field_at_quad) -> np.ndarray:
        """Per-cell Gram blocks of multiplication by a field: (n_cells, l+1, l+1)."""
        return 0.5 * self.mesh.h * np.einsum(
            "jq,q,qm,qn->jmn", field_at_quad, self.quad_w, self.V, self.V)

    def mult_operator(self, field_at_quad) -> sparse.csr_matrix:
        blocks = self.mult_blocks(field_at_quad)
        return sparse.block_diag(blocks, format="csr")

    def evaluate(self, coeffs, x) -> np.ndarray:
        """Point evaluation of a dof array (n_cells, order+1) at arbitrary x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = self.mesh.h
        x = np.mod(x, self.mesh.length)
        j = np.clip((x // h).astype(int), 0, self.mesh.n_cells - 1)
        xi = 2.0 * (x - (j + 0.5) * h) / h
        V = np.sqrt(2.0 / h) * _orthonormal_legendre_vandermonde(xi, self.mesh.order)
        return np.einsum("pm,pm->p", coeffs[j], V)

    # ------------------------------------------------------------------
    # Poisson

    def poisson_lu(self):
        """LU factorization of the zero-mean-constrained LDG Laplacian (cached)."""
        if self._poisson_lu is None:
            n = self.mesh.n_dof
            K = sparse.bmat(
                [[self.laplacian, self.mean_vec[:, None]],
                 [self.mean_vec[None, :], None]], format="csc")
            self._poisson_lu = splu(K)
        return self._poisson_lu

    def solve_poisson_dofs(self, rhs_dofs, check_compat=True):
        """Solve the LDG Poisson problem for (phi, E) dof arrays from rhs dofs."""
        rhs_flat = np.asarray(rhs_dofs, dtype=float).ravel()
        if check_compat:
            mean = abs(self.mean_vec @ rhs_flat)
            scale = np.linalg.norm(rhs_flat) * np.sqrt(self.mesh.length)
            # absolute floor keeps an identically-zero rhs admissible
            if mean > 1e-10 * max(scale, 1.0):
                raise CompatibilityError(
                    f"Poisson rhs mean {mean:.3e} exceeds tolerance "
                    f"(relative to {scale:.3e})")
        aug = np.concatenate([rhs_flat, [0.0]])
        sol = self.poisson_lu().solve(aug)
        phi = sol[:-1]
        efield = self.grad_op @ phi
        shape = (self.mesh.n_cells, self.mesh.order + 1)
        return phi.reshape(shape), efield.reshape(shape)


@dataclass
class DGFunction:
    """Piecewise polynomial with per-cell coefficients in the orthonormal basis."""

    space: DGSpace
    coeffs: np.ndarray  # (n_cells, order+1)

    def __call__(self, x):
        return self.space.evaluate(self.coeffs, x)

    @property
    def cell_means(self) -> np.ndarray:
        return self.coeffs[:, 0] / np.sqrt(self.space.mesh.h)

    def integral(self) -> float:
        return float(self.space.mean_vec @ self.coeffs.ravel())

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def values_at_quad(self) -> np.ndarray:
        return self.space.values_at_quad(self.coeffs)

    def traces(self):
        """Interface traces (u_minus, u_plus) at x_{j+1/2}, j = 0..n_cells-1."""
        um = self.coeffs @ self.space.trace_right
        up = np.roll(self.coeffs, -1, axis=0) @ self.space.trace_left
        return um, up


@dataclass
class FieldSolution:
    """Electrostatic potential and field as DG functions."""

    phi: DGFunction
    efield: DGFunction

    @property
    def potential_energy(self) -> float:
        return 0.5 * self.efield.l2_norm() ** 2


def numerical_flux(g_minus, g_plus, a_minus, a_plus, k, delta):
    """Interface flux 0.5 (g- + g+) - 0.5 delta_k (a+ - a-), with delta_0 = 0."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    delta_k = 0.0 if k == 0 else delta
    return 0.5 * (g_minus + g_plus) - 0.5 * delta_k * (a_plus - a_minus)


def assemble_transport(space: DGSpace, coeffs, vth, k, delta):
    """Weak transport term a_k for Hermite mode k.

    coeffs has shape (n_modes, n_cells, order+1); the flux function of mode k
    is g_k = vth (sqrt(k+1) alpha_{k+1} + sqrt(k) alpha_{k-1}) with the
    truncation closure alpha_{n_modes} = 0.  Returns per-dof contributions of
    - int g phi' dx + ghat phi^- - ghat phi^+ with the centered (k = 0) or
    global Lax-Friedrichs flux.
    """
    n_modes = coeffs.shape[0]
    g = np.zeros_like(coeffs[0])
    if k + 1 < n_modes:
        g += np.sqrt(k + 1.0) * coeffs[k + 1]
    if k >= 1:
        g += np.sqrt(float(k)) * coeffs[k - 1]
    g = vth * g
    out = (space.deriv_centered @ g.ravel())
    if k > 0 and delta != 0.0:
        out = out + delta * (space.jump_penalty @ coeffs[k].ravel())
    return out.reshape(g.shape)


def solve_poisson_ldg(space: DGSpace, rhs: DGFunction, beta=None) -> FieldSolution:
    """Solve -phi'' = rhs with periodic BC, zero-mean phi, and E = -phi'.

    The discrete problem is the mixed LDG system with fluxes {phi} and
    {E} - beta [phi]; the one-dimensional null space is removed with a
    Lagrange multiplier enforcing int phi dx = 0.  beta defaults to 1/h and
    is baked into the cached factorization; pass beta only to rebuild.
    """
    if beta is not None and beta != space.beta:
        if beta <= 0:
            raise ValueError("beta must be positive")
        space.beta = beta
        space.laplacian = (space.deriv_centered @ space.grad_op
                           + 2.0 * beta * space.jump_penalty).tocsr()
        space._poisson_lu = None
    phi, efield = space.solve_poisson_dofs(rhs.coeffs)
    return FieldSolution(DGFunction(space, phi), DGFunction(space, efield))
