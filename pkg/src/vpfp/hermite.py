"""Scaled Hermite velocity basis.

The basis functions are Gaussian-weighted probabilist Hermite polynomials,
psi_k(v) = J_k(v / vth) M(v / vth) / vth, orthonormal against the inverse of
the Maxwellian weight M_vth.  Mode 0 is exactly the Maxwellian of thermal
width vth, so a thermalized distribution collapses onto a single coefficient.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

from .dg import DGSpace
from .errors import QuadratureOverflowError

__all__ = [
    "HermiteBasis",
    "HermiteCoefficients",
    "eval_probabilist_hermite",
    "eval_basis_function",
    "basis_function_table",
    "project_initial_data",
    "reconstruct_distribution",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class HermiteBasis:
    """Truncation size and thermal scaling of the velocity basis."""

    n_modes: int
    vth: float

    def __post_init__(self):
        if self.n_modes < 3:
            raise ValueError("need n_modes >= 3 so density, momentum and "
                             "energy moments are representable")
        if self.vth <= 0:
            raise ValueError("vth must be positive")

    def maxwellian(self, v):
        v = np.asarray(v, dtype=float)
        return np.exp(-0.5 * (v / self.vth) ** 2) / (_SQRT_2PI * self.vth)


def eval_probabilist_hermite(k, x):
    """J_k(x) by the three-term recurrence, J_0 = 1, J_1 = x.

    sqrt(k+1) J_{k+1} = x J_k - sqrt(k) J_{k-1}; the J_k are orthonormal
    against the unit Gaussian.
    """
    x = np.asarray(x, dtype=float)
    jm, j = np.zeros_like(x), np.ones_like(x)
    for i in range(k):
        jm, j = j, (x * j - np.sqrt(float(i)) * jm) / np.sqrt(i + 1.0)
    return j if x.ndim else float(j)


def basis_function_table(basis: HermiteBasis, v, n_modes=None):
    """psi_k(v) for k = 0..n_modes-1, shape (n_modes,) + shape(v).

    The recurrence is run with the Gaussian factor folded in, starting from
    psi_0 = M_vth, which keeps every entry bounded at large k.
    """
    if n_modes is None:
        n_modes = basis.n_modes
    v = np.atleast_1d(np.asarray(v, dtype=float))
    xi = v / basis.vth
    psi = np.empty((n_modes,) + v.shape)
    psi[0] = basis.maxwellian(v)
    if n_modes > 1:
        psi[1] = xi * psi[0]
    for k in range(1, n_modes - 1):
        psi[k + 1] = (xi * psi[k] - np.sqrt(float(k)) * psi[k - 1]) / np.sqrt(k + 1.0)
    return psi


def eval_basis_function(basis: HermiteBasis, k, v):
    """psi_k(v) = J_k(v/vth) M(v/vth) / vth."""
    if not 0 <= k < basis.n_modes:
        raise ValueError(f"mode {k} outside basis of size {basis.n_modes}")
    out = basis_function_table(basis, v, n_modes=k + 1)[k]
    return float(out[0]) if np.isscalar(v) or np.ndim(v) == 0 else out


@dataclass
class HermiteCoefficients:
    """Hermite coefficient stack: coeffs[k] is the DG dof array of alpha_k."""

    coeffs: np.ndarray          # (n_modes, n_cells, order+1)
    active: np.ndarray = None   # (n_modes,) bool, adaptive activity mask

    def __post_init__(self):
        if self.active is None:
            self.active = np.ones(self.coeffs.shape[0], dtype=bool)

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[0]

    def copy(self) -> "HermiteCoefficients":
        return HermiteCoefficients(self.coeffs.copy(), self.active.copy())

    def apply_mask(self):
        self.coeffs[~self.active] = 0.0

    def mode_l2_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coeffs.reshape(self.n_modes, -1), axis=1)


def gauss_hermite_rule(n_nodes, vth):
    """Nodes/weights integrating smooth Gaussian-decaying f: int f dv ~ sum w f(v).

    Built from the physicist rule by v = sqrt(2) vth x; the recombined weights
    w exp(x^2) are O(1), so they are formed in log space to survive large rules.
    """
    x, w = roots_hermite(n_nodes)
    good = w > 0.0
    lw = np.full(n_nodes, -np.inf)
    lw[good] = np.log(w[good]) + x[good] ** 2
    weights = np.sqrt(2.0) * vth * np.exp(lw)
    return np.sqrt(2.0) * vth * x, weights


def project_initial_data(basis: HermiteBasis, f0, space: DGSpace,
                         n_hermite_nodes=None) -> HermiteCoefficients:
    """Expand f0(x, v) in the scaled basis, cell-projected onto the DG space.

    alpha_k(x) = int f0(x, v) J_k(v / vth) dv, because psi_k / M_vth = J_k.
    Gauss-Hermite in v (nodes scaled by vth, at least 2 n_modes of them) and
    the space's Gauss-Legendre rule in x make this exact for polynomial-times-
    Gaussian data at the basis temperature.
    """
    if n_hermite_nodes is None:
        n_hermite_nodes = max(2 * basis.n_modes, 64)
    v, w = gauss_hermite_rule(n_hermite_nodes, basis.vth)
    xq = space.quad_x                            # (n_cells, n_quad)
    fvals = f0(xq[..., None], v)                 # (n_cells, n_quad, n_v)
    fvals = np.broadcast_to(fvals, xq.shape + v.shape)
    if not np.all(np.isfinite(fvals)):
        bad = int(np.size(fvals) - np.isfinite(fvals).sum())
        raise QuadratureOverflowError(
            f"initial data non-finite at {bad} quadrature points")
    J = np.empty((basis.n_modes, v.size))
    xi = v / basis.vth
    J[0] = 1.0
    if basis.n_modes > 1:
        J[1] = xi
    for k in range(1, basis.n_modes - 1):
        J[k + 1] = (xi * J[k] - np.sqrt(float(k)) * J[k - 1]) / np.sqrt(k + 1.0)
    alpha_at_quad = np.einsum("jqv,v,kv->kjq", fvals, w, J)
    coeffs = space.coeffs_from_quad_values(alpha_at_quad)
    return HermiteCoefficients(coeffs)


def reconstruct_distribution(basis: HermiteBasis, coeffs: HermiteCoefficients,
                             space: DGSpace, x, v):
    """f(x, v) = sum over active modes of alpha_k(x) psi_k(v).

    x and v may be scalars or 1D arrays; the result is broadcast over the
    (x, v) tensor grid with shape (len(x), len(v)).
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    psi = basis_function_table(basis, v_arr)
    act = coeffs.active
    alpha_x = np.stack([space.evaluate(coeffs.coeffs[k], x_arr)
                        for k in range(coeffs.n_modes)])
    f = np.einsum("kp,kv->pv", alpha_x[act], psi[act])
    if np.ndim(x) == 0 and np.ndim(v) == 0:
        return float(f[0, 0])
    return f
