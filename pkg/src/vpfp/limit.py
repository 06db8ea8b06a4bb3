"""Adiabatic-limit solver.

For a frozen ion state, the limit electron density is the Maxwell-Boltzmann
profile n_e = c exp(phi / T) with a spatially uniform temperature T.  The
potential solves the nonlinear Poisson-Boltzmann equation with zero mean and
a particle-number normalization for c; T itself is pinned by matching the
total-energy budget through the strictly increasing map

    E(T) = N T / 2 + (1/2) int |phi_T'|^2 dx + int w_i dx.

Root finding is bracketed bisection refined by secant steps; the inner
nonlinear solves are damped Newton on the LDG discretization.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .dg import DGFunction, DGSpace
from .errors import BracketError, NewtonConvergenceError

__all__ = [
    "LimitState",
    "EnergyBudget",
    "solve_poisson_boltzmann",
    "energy_of_temperature",
    "find_limit_temperature",
    "vth_update",
]

logger = logging.getLogger(__name__)


@dataclass
class EnergyBudget:
    """Conserved totals fixing the limit problem."""

    total_energy: float     # script-E, set by the initial data
    particle_number: float  # script-N, electrons
    ion_energy: float       # current int w_i dx


@dataclass
class LimitState:
    """Solution of the energy-constrained Poisson-Boltzmann system."""

    phi_bar: DGFunction
    T_bar: float
    c: float
    n_e_bar: DGFunction
    efield_bar: DGFunction = None

    @property
    def vth(self) -> float:
        return float(np.sqrt(self.T_bar))


def _boltzmann_density(space: DGSpace, phi_dofs, T, N):
    """Pointwise c exp(phi/T) at quadrature nodes, with max-subtraction guard.

    Normalized so the integral is exactly N; returns (values, log_c).
    """
    a = space.values_at_quad(phi_dofs) / T
    amax = float(a.max())
    g = np.exp(a - amax)
    S = space.integrate_quad_values(g)
    return N * g / S, np.log(N / S) - amax


def solve_poisson_boltzmann(space: DGSpace, n_i: DGFunction, T, N,
                            phi0=None, tol=1e-12, max_iters=100):
    """Solve -phi'' + c exp(phi/T) = n_i with int phi = 0, int c exp(phi/T) = N.

    c is eliminated through the normalization at every iterate, which makes
    the residual invariant under constant shifts of phi; the Newton system is
    therefore solved with the same zero-mean Lagrange constraint as the
    linear Poisson problem.  Steps are halved until the residual decreases.

    Returns (phi: DGFunction, c: float).
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    mass = n_i.integral()
    if abs(mass - N) > 1e-10 * max(abs(N), 1.0):
        raise ValueError(f"int n_i dx = {mass!r} incompatible with N = {N!r}")
    mesh = space.mesh
    shape = (mesh.n_cells, mesh.order + 1)
    b = n_i.coeffs.ravel()
    scale = max(1.0, float(np.linalg.norm(b)))
    tol_eff = tol * scale
    stall_tol = 1e-10 * scale  # contract: residual below 1e-10 in L2
    L = space.laplacian
    mv = space.mean_vec

    phi = np.zeros(mesh.n_dof) if phi0 is None else np.asarray(phi0, dtype=float).ravel().copy()
    phi -= (mv @ phi) / mesh.length * _mean_shift(space)

    def residual(p):
        r_vals, log_c = _boltzmann_density(space, p.reshape(shape), T, N)
        r = L @ p + space.coeffs_from_quad_values(r_vals).ravel() - b
        return r, r_vals, log_c

    r, r_vals, log_c = residual(phi)
    rnorm = np.linalg.norm(r)
    for it in range(max_iters):
        if rnorm < tol_eff:
            break
        W = space.mult_operator(r_vals) / T
        g = space.coeffs_from_quad_values(r_vals).ravel()
        J = L + W - sparse.csr_matrix(np.outer(g, g) / (T * N))
        K = sparse.bmat([[J, mv[:, None]], [mv[None, :], None]], format="csc")
        step = splu(K).solve(np.concatenate([-r, [0.0]]))[:-1]
        s = 1.0
        for _ in range(30):
            cand = phi + s * step
            cand = cand - (mv @ cand) / mesh.length * _mean_shift(space)
            r_new, rv_new, lc_new = residual(cand)
            n_new = np.linalg.norm(r_new)
            if n_new < rnorm:
                break
            s *= 0.5
        else:
            if rnorm < stall_tol:
                break  # at the round-off floor but within the contract
            raise NewtonConvergenceError(
                "Poisson-Boltzmann Newton stalled: no damped step decreased "
                f"the residual {rnorm:.3e}", residual=rnorm, iterations=it)
        phi, r, r_vals, log_c, rnorm = cand, r_new, rv_new, lc_new, n_new
    else:
        raise NewtonConvergenceError(
            f"Poisson-Boltzmann Newton did not reach tol={tol:.1e} in "
            f"{max_iters} iterations (residual {rnorm:.3e})",
            residual=rnorm, iterations=max_iters)
    return DGFunction(space, phi.reshape(shape)), float(np.exp(log_c))


def _mean_shift(space: DGSpace):
    """Dof vector of the constant function 1."""
    out = np.zeros(space.mesh.n_dof)
    out[:: space.mesh.order + 1] = np.sqrt(space.mesh.h)
    return out


def energy_of_temperature(space: DGSpace, n_i: DGFunction,
                          budget: EnergyBudget, T, phi0=None):
    """E(T) = N T / 2 + field energy of phi_T + ion energy.

    Strictly increasing in T; used to bracket the limit temperature.
    """
    phi, _ = solve_poisson_boltzmann(space, n_i, T, budget.particle_number, phi0=phi0)
    efield = space.grad_op @ phi.coeffs.ravel()
    return (0.5 * budget.particle_number * T
            + 0.5 * float(efield @ efield)
            + budget.ion_energy), phi


def find_limit_temperature(space: DGSpace, n_i: DGFunction, budget: EnergyBudget,
                           T_init=1.0, tol_rel=1e-10, T_min=1e-12, T_max=1e8):
    """Find T_bar with E(T_bar) = total energy; returns the full LimitState.

    The bracket grows/shrinks geometrically from T_init, then bisection with
    secant acceleration refines to |E(T) - budget| < tol_rel * budget and an
    absolute bracket width of 1e-12.
    """
    target = budget.total_energy
    if not np.isfinite(target) or target <= budget.ion_energy:
        raise BracketError(
            f"energy budget {target!r} not above ion energy {budget.ion_energy!r}")

    phi_warm = None

    def E(T):
        nonlocal phi_warm
        val, phi = energy_of_temperature(space, n_i, budget, T, phi0=(
            None if phi_warm is None else phi_warm.coeffs))
        phi_warm = phi
        return val, phi

    T_lo = T_hi = float(T_init)
    e_lo, phi_lo = E(T_lo)
    e_hi, phi_hi = e_lo, phi_lo
    while e_lo > target:
        T_lo /= 4.0
        if T_lo < T_min:
            raise BracketError(
                f"E({T_lo * 4.0:.3e}) = {e_lo:.6e} still above budget {target:.6e}; "
                "inconsistent energy budget")
        e_lo, phi_lo = E(T_lo)
    while e_hi < target:
        T_hi *= 4.0
        if T_hi > T_max:
            raise BracketError(
                f"E({T_hi / 4.0:.3e}) = {e_hi:.6e} still below budget {target:.6e}; "
                "inconsistent energy budget")
        e_hi, phi_hi = E(T_hi)

    T, e_val, phi = T_lo, e_lo, phi_lo
    for _ in range(200):
        if abs(e_val - target) < tol_rel * abs(target) or (T_hi - T_lo) < 1e-12:
            break
        # secant candidate, fall back to bisection when outside the bracket
        denom = e_hi - e_lo
        T_sec = T_lo + (target - e_lo) * (T_hi - T_lo) / denom if denom != 0 else 0.0
        T = T_sec if T_lo < T_sec < T_hi else 0.5 * (T_lo + T_hi)
        e_val, phi = E(T)
        if e_val < target:
            T_lo, e_lo = T, e_val
        else:
            T_hi, e_hi = T, e_val

    phi_bar, c = solve_poisson_boltzmann(space, n_i, T, budget.particle_number,
                                         phi0=phi.coeffs)
    ne_vals, _ = _boltzmann_density(space, phi_bar.coeffs, T, budget.particle_number)
    n_e_bar = space.project_values(ne_vals)
    efield = DGFunction(space, (space.grad_op @ phi_bar.coeffs.ravel()).reshape(
        phi_bar.coeffs.shape))
    return LimitState(phi_bar=phi_bar, T_bar=float(T), c=c, n_e_bar=n_e_bar,
                      efield_bar=efield)


def vth_update(space: DGSpace, n_i: DGFunction, budget: EnergyBudget,
               prev_vth=None, dt=None):
    """Hermite scaling velocity from the limit model with the current ion energy.

    vth = sqrt(T_bar); the logarithmic rate vth'/vth is a backward difference
    against the previous step (zero at the first step or for a static limit).

    Returns (vth, vth_dot_over_vth, LimitState).
    """
    state = find_limit_temperature(space, n_i, budget)
    vth = state.vth
    rate = 0.0
    if prev_vth is not None and dt:
        rate = (vth - prev_vth) / (dt * vth)
    return vth, rate, state


class LimitTracker:
    """Tracks the limit temperature across time steps.

    The budget's electron part changes by a tiny amount per step, so a secant
    update from the previous solution converges in one or two inner solves;
    the full bracketed search is the fallback for the first call and for any
    step where tracking fails.
    """

    def __init__(self, space: DGSpace, tol_rel=1e-10):
        self.space = space
        self.tol_rel = tol_rel
        self.T = None
        self.E_elec = None          # N T/2 + field part at self.T
        self.dEdT = None
        self.phi = None

    def solve(self, n_i: DGFunction, budget: EnergyBudget) -> LimitState:
        target_elec = budget.total_energy - budget.ion_energy
        if self.T is None:
            state = find_limit_temperature(self.space, n_i, budget)
            self.T = state.T_bar
            self.E_elec = target_elec
            self.dEdT = max(0.5 * budget.particle_number, 1e-30)
            self.phi = state.phi_bar
            return state
        T = self.T + (target_elec - self.E_elec) / self.dEdT
        for _ in range(25):
            if T <= 0:
                break
            e, phi = energy_of_temperature(
                self.space, n_i,
                EnergyBudget(budget.total_energy, budget.particle_number, 0.0),
                T, phi0=self.phi.coeffs)
            self.phi = phi
            err = e - target_elec
            if T != self.T and e != self.E_elec:
                self.dEdT = (e - self.E_elec) / (T - self.T)
            self.T, self.E_elec = T, e
            if abs(err) < self.tol_rel * abs(budget.total_energy):
                phi_bar, c = solve_poisson_boltzmann(
                    self.space, n_i, T, budget.particle_number, phi0=phi.coeffs)
                ne_vals, _ = _boltzmann_density(self.space, phi_bar.coeffs, T,
                                                budget.particle_number)
                efield = DGFunction(self.space, (self.space.grad_op
                                                 @ phi_bar.coeffs.ravel()
                                                 ).reshape(phi_bar.coeffs.shape))
                return LimitState(phi_bar=phi_bar, T_bar=float(T), c=c,
                                  n_e_bar=self.space.project_values(ne_vals),
                                  efield_bar=efield)
            T = T - err / self.dEdT
        state = find_limit_temperature(self.space, n_i, budget, T_init=self.T)
        self.T, self.E_elec = state.T_bar, target_elec
        self.phi = state.phi_bar
        return state
