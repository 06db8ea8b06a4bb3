"""Crank-Nicolson time stepping of the coupled Hermite-DG system.

One step solves the midpoint-implicit system by Picard iteration: the moment-
dependent coefficients (u, T, u_ei, T_ei, E and, in the two-species case, the
ion temperature) are frozen at the previous iterate's midpoint values, the
linear block system over the active Hermite modes is solved, the Poisson
equation is re-solved from the midpoint density, and the moments are
recomputed, until the relative coefficient increment drops below tolerance.

The frozen linear systems are solved through one cached LU factorization used
as a preconditioned residual correction; the factorization is rebuilt only
when the iteration notices that the operator has drifted (slow contraction),
so the expensive sparse assembly and factorization amortize over many steps.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .dg import DGFunction, DGMesh, DGSpace, FieldSolution
from .errors import PicardDivergenceError
from .hermite import (HermiteBasis, HermiteCoefficients, gauss_hermite_rule,
                      project_initial_data)
from .limit import EnergyBudget, LimitState, LimitTracker, find_limit_temperature
from .scenarios import (ScenarioConfig, initial_electron_distribution,
                        ion_background, momentum_admissibility_check)

__all__ = [
    "TimeStepperConfig",
    "SimulationState",
    "KineticStepper",
    "crank_nicolson_step",
    "adaptive_mask_update",
    "initialize_state",
    "run",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeStepperConfig:
    dt: float
    t_end: float
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    adaptive_enabled: bool = False
    adaptive_threshold: float = 1e-6
    adaptive_min_mode: int = 3

    @classmethod
    def from_scenario(cls, cfg: ScenarioConfig) -> "TimeStepperConfig":
        return cls(dt=cfg.dt, t_end=cfg.t_end, picard_tol=cfg.picard_tol,
                   picard_max_iters=cfg.picard_max_iters,
                   adaptive_enabled=cfg.adaptive_enabled,
                   adaptive_threshold=cfg.adaptive_threshold,
                   adaptive_min_mode=cfg.adaptive_min_mode)


@dataclass
class SimulationState:
    """Everything the stepper advances, plus cached limit-model data."""

    time: float
    basis: HermiteBasis
    coeffs: HermiteCoefficients
    field: FieldSolution
    budget: EnergyBudget
    n_i_eff: DGFunction            # neutralized static ion density
    Ti: float = None               # ion temperature (two-species only)
    limit: LimitState = None
    vth_rate: float = 0.0          # vth'/vth used by the inertial term
    step_index: int = 0
    picard_iterations: int = 0
    negative_T_steps: int = 0


def adaptive_mask_update(coeffs: HermiteCoefficients,
                         cfg: TimeStepperConfig,
                         sup_norms=None) -> HermiteCoefficients:
    """Activity mask: drop mode k >= adaptive_min_mode when it and both
    neighbours are below threshold in the sup norm (the truncated neighbour
    counts as zero).  Dropped coefficients are zeroed; re-entering modes
    start from zero and are evolved at the next step."""
    n = coeffs.n_modes
    if sup_norms is None:
        sup_norms = np.abs(coeffs.coeffs.reshape(n, -1)).max(axis=1)
    padded = np.append(sup_norms, 0.0)
    active = np.ones(n, dtype=bool)
    for k in range(cfg.adaptive_min_mode, n):
        active[k] = not (padded[k] <= cfg.adaptive_threshold
                         and padded[k + 1] <= cfg.adaptive_threshold
                         and padded[k - 1] <= cfg.adaptive_threshold)
    out = HermiteCoefficients(coeffs.coeffs.copy(), active)
    out.apply_mask()
    return out


class KineticStepper:
    """Assembles and advances the Hermite-DG system for one scenario."""

    def __init__(self, space: DGSpace, cfg: ScenarioConfig,
                 tcfg: TimeStepperConfig = None, n_e_total=None):
        self.space = space
        self.cfg = cfg
        self.tcfg = tcfg or TimeStepperConfig.from_scenario(cfg)
        self.n_modes = cfg.N_H
        k = np.arange(cfg.N_H, dtype=float)
        self.sqrt_k = np.sqrt(k)
        self.sqrt_km2 = np.sqrt(np.maximum(k - 1.0, 0.0) * k)
        self.k_arr = k
        self.n_e_total = n_e_total   # script-N, set after initialization
        self._lu = None
        self._lu_key = None
        self._limit_tracker = LimitTracker(space)

    # -- viscosity ---------------------------------------------------------

    def delta_lf(self, vth):
        """Global Lax-Friedrichs viscosity.

        The truncated transport system has characteristic speeds vth times
        the Hermite-polynomial roots, of order vth sqrt(N_H); the config
        override wins when set.
        """
        if self.cfg.delta_override is not None:
            return self.cfg.delta_override
        return vth * np.sqrt(self.n_modes)

    # -- matrix-free operator applications ---------------------------------

    def apply_transport(self, y, vth):
        """Transport rows a_k(g_k) for the full mode stack y (modes, Nx, l+1)."""
        g = np.zeros_like(y)
        sk = self.sqrt_k
        g[:-1] = sk[1:, None, None] * y[1:]
        g[1:] += sk[1:, None, None] * y[:-1]
        g *= vth
        flat = (self.space.deriv_centered @ g.reshape(self.n_modes, -1).T).T
        out = flat.reshape(y.shape)
        delta = self.delta_lf(vth)
        if delta != 0.0 and self.n_modes > 1:
            pen = (self.space.jump_penalty @ y[1:].reshape(self.n_modes - 1, -1).T).T
            out[1:] += delta * pen.reshape(y[1:].shape)
        return out

    def apply_source(self, y, vth, vth_rate, eps, blocks_w1, blocks_c2, nu_sum):
        """Collision + field + inertial rows for the full mode stack."""
        out = (eps * vth_rate + nu_sum) * self.k_arr[:, None, None] * y
        out[1:] += self.sqrt_k[1:, None, None] * np.einsum(
            "jmn,kjn->kjm", blocks_w1, y[:-1])
        out[2:] += self.sqrt_km2[2:, None, None] * (
            np.einsum("jmn,kjn->kjm", blocks_c2, y[:-2])
            + eps * vth_rate * y[:-2])
        return out

    # -- frozen-coefficient matrix (for the preconditioner) ----------------

    def _restricted_ladder(self, act, offset, values):
        """Mode-coupling matrix on the active sublist: row k, column k-offset."""
        pos = -np.ones(self.n_modes, dtype=int)
        pos[act] = np.arange(len(act))
        rows, cols, data = [], [], []
        for i, k in enumerate(act):
            k2 = k - offset
            if 0 <= k2 < self.n_modes and pos[k2] >= 0:
                rows.append(i)
                cols.append(pos[k2])
                data.append(values[k])
        return sparse.coo_matrix((data, (rows, cols)),
                                 shape=(len(act), len(act))).tocsr()

    def assemble_matrix(self, act, vth, vth_rate, eps, blocks_w1, blocks_c2,
                        nu_sum, c0):
        """Sparse c0 I + (A + B)/2 on the active modes, for factorization."""
        space = self.space
        n_act = len(act)
        Dc, P = space.deriv_centered, space.jump_penalty
        eye = sparse.identity(space.mesh.n_dof, format="csr")
        M_w1 = sparse.block_diag(blocks_w1, format="csr")
        M_c2 = sparse.block_diag(blocks_c2, format="csr")

        # row k couples alpha_{k+1} with vth sqrt(k+1): values indexed by row k
        vals_up = np.zeros(self.n_modes)
        vals_up[:-1] = vth * self.sqrt_k[1:]
        lad_up = self._restricted_ladder(act, -1, vals_up)
        lad_dn = self._restricted_ladder(act, 1, vth * self.sqrt_k)
        delta = self.delta_lf(vth)
        pen_diag = self._restricted_ladder(
            act, 0, delta * (self.k_arr > 0).astype(float))
        diag_scal = self._restricted_ladder(
            act, 0, (eps * vth_rate + nu_sum) * self.k_arr)
        sub1 = self._restricted_ladder(act, 1, self.sqrt_k)
        sub2 = self._restricted_ladder(act, 2, self.sqrt_km2)

        L = (sparse.kron(lad_up + lad_dn, Dc)
             + sparse.kron(pen_diag, P)
             + sparse.kron(diag_scal, eye)
             + sparse.kron(sub1, M_w1)
             + sparse.kron(sub2, M_c2 + eps * vth_rate * eye))
        n = n_act * space.mesh.n_dof
        return (c0 * sparse.identity(n, format="csr") + 0.5 * L).tocsr()

    # -- fields and moments --------------------------------------------------

    def fields_at_quad(self, basis, n_i_eff_dofs, coeffs_arr, Ti, eps):
        """Poisson solve + pointwise moments from a coefficient stack."""
        space = self.space
        rhs = n_i_eff_dofs - coeffs_arr[0]
        phi_dofs, e_dofs = space.solve_poisson_dofs(rhs, check_compat=False)
        efield_q = space.values_at_quad(e_dofs)
        a_q = space.values_at_quad(coeffs_arr[:3])
        a0, a1, a2 = a_q[0], a_q[1], a_q[2]
        vth = basis.vth
        u_q = vth * a1 / a0
        T_q = vth ** 2 * (1.0 + np.sqrt(2.0) * a2 / a0 - (a1 / a0) ** 2)
        if self.cfg.scenario == "two_species_simplified":
            u_ei_q = 0.5 * u_q
            T_ei_q = (T_q + eps ** 2 * Ti + 0.5 * u_q ** 2) / (1.0 + eps ** 2)
        else:
            u_ei_q = np.zeros_like(u_q)
            T_ei_q = np.zeros_like(T_q)
        return phi_dofs, e_dofs, efield_q, a0, u_q, T_q, u_ei_q, T_ei_q

    def _ion_heating(self, a0_q, u_q, T_q, T_ei_q, eps):
        """dTi/dt from the energy-exchange integral at frozen midpoint moments."""
        integrand = a0_q * ((T_q - T_ei_q) + 0.5 * u_q * u_q)
        total = self.space.integrate_quad_values(integrand)
        return 2.0 * self.cfg.nu_ei * total / (eps * self.n_e_total)

    # -- the step ------------------------------------------------------------

    def step(self, state: SimulationState) -> SimulationState:
        cfg = self.cfg
        tcfg = self.tcfg
        eps = cfg.eps
        dt = tcfg.dt
        space = self.space
        vth = state.basis.vth
        nu_sum = cfg.nu_ee + cfg.nu_ei
        c0 = eps / dt

        coeffs = state.coeffs
        if tcfg.adaptive_enabled:
            coeffs = adaptive_mask_update(coeffs, tcfg)
        act = np.flatnonzero(coeffs.active)

        alpha_old = coeffs.coeffs
        alpha_new = alpha_old.copy()
        Ti_old = state.Ti
        Ti_new = Ti_old
        scale_ref = max(float(np.abs(alpha_old).max()), 1e-30)
        tol_abs = tcfg.picard_tol * scale_ref

        def residual_parts():
            """Residual of the CN system at the current iterate, on active rows."""
            alpha_mid = 0.5 * (alpha_old + alpha_new)
            Ti_mid = 0.5 * (Ti_old + Ti_new) if Ti_old is not None else None
            fields = self.fields_at_quad(state.basis, state.n_i_eff.coeffs,
                                         alpha_mid, Ti_mid, eps)
            _, _, efield_q, a0_q, u_q, T_q, u_ei_q, T_ei_q = fields
            if np.any(T_q < 0.0):
                state.negative_T_steps += 1
                if state.negative_T_steps <= 3:
                    logger.warning("negative local temperature at t=%.6g (min %.3e)",
                                   state.time, float(T_q.min()))
            w1 = (efield_q - cfg.nu_ee * u_q - cfg.nu_ei * u_ei_q) / vth
            c2 = (cfg.nu_ee * (1.0 - T_q / vth ** 2)
                  + cfg.nu_ei * (1.0 - T_ei_q / vth ** 2))
            blocks_w1 = space.mult_blocks(w1)
            blocks_c2 = space.mult_blocks(c2)
            L_mid = (self.apply_transport(alpha_mid, vth)
                     + self.apply_source(alpha_mid, vth, state.vth_rate, eps,
                                         blocks_w1, blocks_c2, nu_sum))
            res = c0 * (alpha_new - alpha_old) + L_mid
            heat = (self._ion_heating(a0_q, u_q, T_q, T_ei_q, eps)
                    if Ti_old is not None else 0.0)
            return res[act].ravel(), blocks_w1, blocks_c2, heat

        def refactor(blocks_w1, blocks_c2):
            K = self.assemble_matrix(act, vth, state.vth_rate, eps,
                                     blocks_w1, blocks_c2, nu_sum, c0)
            self._lu = splu(K.tocsc())
            self._lu_key = tuple(act)

        n_iter = 0
        prev_inc = np.inf
        refactored = False
        increment = np.inf
        for n_iter in range(1, tcfg.picard_max_iters + 1):
            res, blocks_w1, blocks_c2, heat = residual_parts()
            if self._lu is None or self._lu_key != tuple(act):
                refactor(blocks_w1, blocks_c2)
                refactored = True
            update = self._lu.solve(res)
            increment = float(np.abs(update).max())
            if Ti_old is not None:
                Ti_new = Ti_old + dt * heat
            if increment > 0.5 * prev_inc and increment > tol_abs:
                if not refactored:
                    # operator drift stalls the cached factorization
                    refactor(blocks_w1, blocks_c2)
                    refactored = True
                    update = self._lu.solve(res)
                    increment = float(np.abs(update).max())
                elif increment > 1e6 * scale_ref:
                    raise PicardDivergenceError(
                        f"Picard iteration diverging at t={state.time:.6g} "
                        f"(increment {increment:.3e})",
                        last_increment=increment, iterations=n_iter)
            alpha_new.reshape(self.n_modes, -1)[act] -= update.reshape(len(act), -1)
            prev_inc = increment
            if increment <= tol_abs:
                break
        else:
            raise PicardDivergenceError(
                f"Picard iteration cap {tcfg.picard_max_iters} hit at "
                f"t={state.time:.6g} (last increment {increment:.3e})",
                last_increment=increment, iterations=tcfg.picard_max_iters)

        new_coeffs = HermiteCoefficients(alpha_new, coeffs.active.copy())
        new_coeffs.apply_mask()
        phi_dofs, e_dofs = space.solve_poisson_dofs(
            state.n_i_eff.coeffs - alpha_new[0], check_compat=False)
        field = FieldSolution(DGFunction(space, phi_dofs),
                              DGFunction(space, e_dofs))
        return replace(
            state, time=state.time + dt, coeffs=new_coeffs, field=field,
            Ti=Ti_new, step_index=state.step_index + 1,
            picard_iterations=n_iter)

    def update_scaling(self, state: SimulationState) -> SimulationState:
        """Refresh vth from the limit model with the current ion energy.

        Two-species only: the coefficients are reinterpreted in the new
        basis without re-projection; the inertial term carries the basis
        time-dependence through vth_rate = (vth - vth_prev) / (dt vth)."""
        if self.cfg.scenario != "two_species_simplified":
            return state
        ion_energy = 0.5 * self.n_e_total * state.Ti
        budget = replace(state.budget, ion_energy=ion_energy)
        limit = self._limit_tracker.solve(state.n_i_eff, budget)
        vth_new = limit.vth
        rate = (vth_new - state.basis.vth) / (self.tcfg.dt * vth_new)
        basis = HermiteBasis(state.basis.n_modes, vth_new)
        return replace(state, basis=basis, vth_rate=rate, limit=limit,
                       budget=budget)


def crank_nicolson_step(state: SimulationState, stepper: KineticStepper,
                        update_scaling: bool = True) -> SimulationState:
    """Advance one step: scaling refresh (two-species), then the CN solve."""
    if update_scaling:
        state = stepper.update_scaling(state)
    return stepper.step(state)


# ----------------------------------------------------------------------
# initialization

def _quadrature_electron_density(cfg, f0, space, n_nodes=256):
    v, w = gauss_hermite_rule(n_nodes, 1.0)
    fv = f0(space.quad_x[..., None], v)
    fv = np.broadcast_to(fv, space.quad_x.shape + v.shape)
    dens = np.einsum("jqv,v->jq", fv, w)
    kinetic = 0.5 * space.integrate_quad_values(
        np.einsum("jqv,v,v->jq", fv, v ** 2, w))
    return dens, kinetic


def _neutralize(space, ion, target_number):
    """Static ion dofs shifted by a constant so int n_i dx = target exactly.

    The printed one-species background is not globally neutral against the
    two-stream electron density; a uniform shift restores the solvability of
    the periodic Poisson problem, which is also what a spectral solver that
    drops the zero mode does implicitly.
    """
    raw = space.project(ion.density)
    shift = (target_number - raw.integral()) / space.mesh.length
    coeffs = raw.coeffs.copy()
    coeffs[:, 0] += shift * np.sqrt(space.mesh.h)
    return DGFunction(space, coeffs), shift


def initialize_state(cfg: ScenarioConfig):
    """Project the initial data and set up the energy-consistent scaling.

    Order matters: the limit model needs the energy budget, the budget needs
    the projected data, and the projection needs vth from the limit model.
    A quadrature-accurate provisional budget breaks the cycle; the discrete
    budget is then recomputed from the projected coefficients so that the
    conservation diagnostics are exactly self-consistent.

    Returns (state, space).
    """
    mesh = DGMesh(cfg.N_x, cfg.L, cfg.l)
    space = DGSpace(mesh)
    f0 = initial_electron_distribution(cfg)
    ion = ion_background(cfg)

    dens_q, kinetic = _quadrature_electron_density(cfg, f0, space)
    number = space.integrate_quad_values(dens_q)
    n_i_eff, shift = _neutralize(space, ion, number)
    if abs(shift) > 1e-12:
        logger.info("ion background shifted by %.6e for global neutrality", shift)

    ion_energy = 0.5 * number * cfg.Ti0 if ion.maxwellian else 0.0
    ne_dofs = space.project_values(dens_q)
    _, e_dofs = space.solve_poisson_dofs(n_i_eff.coeffs - ne_dofs.coeffs)
    field_energy = 0.5 * float(np.vdot(e_dofs, e_dofs))
    budget = EnergyBudget(total_energy=kinetic + field_energy + ion_energy,
                          particle_number=number, ion_energy=ion_energy)

    limit = find_limit_temperature(space, n_i_eff, budget)
    basis = HermiteBasis(cfg.N_H, limit.vth)
    coeffs = project_initial_data(basis, f0, space)

    # self-consistent discrete budget from the projected data
    number_d = float(space.mean_vec @ coeffs.coeffs[0].ravel())
    n_i_eff, _ = _neutralize(space, ion, number_d)
    phi_dofs, e_dofs = space.solve_poisson_dofs(
        n_i_eff.coeffs - coeffs.coeffs[0], check_compat=False)
    kinetic_d = 0.5 * basis.vth ** 2 * float(
        space.mean_vec @ (coeffs.coeffs[0] + np.sqrt(2.0) * coeffs.coeffs[2]).ravel())
    field_energy_d = 0.5 * float(np.vdot(e_dofs, e_dofs))
    budget = EnergyBudget(
        total_energy=kinetic_d + field_energy_d + ion_energy,
        particle_number=number_d, ion_energy=ion_energy)
    limit = find_limit_temperature(space, n_i_eff, budget, T_init=limit.T_bar)

    momentum_admissibility_check(cfg, basis, coeffs, space)

    field = FieldSolution(DGFunction(space, phi_dofs),
                          DGFunction(space, e_dofs))
    state = SimulationState(
        time=0.0, basis=basis, coeffs=coeffs, field=field, budget=budget,
        n_i_eff=n_i_eff, Ti=(cfg.Ti0 if ion.maxwellian else None),
        limit=limit, vth_rate=0.0)
    return state, space


def run(cfg: ScenarioConfig, writer=None, progress_every=0):
    """Initialize and advance to t_end, emitting diagnostics at the cadence.

    `writer`, when given, must provide record(state, space) and
    snapshot(state, space) callables (see diagnostics.SeriesWriter); partial
    output is flushed even when a step fails.  Returns the final state.
    """
    state, space = initialize_state(cfg)
    stepper = KineticStepper(space, cfg, n_e_total=state.budget.particle_number)
    n_steps = int(round(cfg.t_end / cfg.dt))
    snap_steps = sorted({int(round(t / cfg.dt)) for t in cfg.snapshot_times
                         if 0 <= t <= cfg.t_end + 0.5 * cfg.dt})
    try:
        if writer is not None:
            writer.record(state, space)
            if 0 in snap_steps:
                writer.snapshot(state, space)
        for m in range(1, n_steps + 1):
            state = crank_nicolson_step(state, stepper)
            if writer is not None:
                if m % cfg.output_every == 0 or m == n_steps:
                    writer.record(state, space)
                if m in snap_steps:
                    writer.snapshot(state, space)
            if progress_every and m % progress_every == 0:
                logger.info("t=%.6g step %d/%d picard=%d active=%d",
                            state.time, m, n_steps, state.picard_iterations,
                            int(state.coeffs.active.sum()))
    finally:
        if writer is not None:
            writer.flush()
    return state
