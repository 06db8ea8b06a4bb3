"""Monitored quantities and output files.

Deviations are relative to the t = 0 record.  The CSV layout is fixed per
run: one row per cadence tick with the columns listed in CSV_COLUMNS (the
l2_alpha block holds k = 1..min(6, N_H - 1) norms).  Snapshots are plain-text
matrices (rows: x, columns: v) with a commented metadata header.
"""

import os
from dataclasses import dataclass, fields

import numpy as np

from .collisions import entropy_dissipation_diagnostic
from .hermite import basis_function_table

__all__ = [
    "DiagnosticRecord",
    "compute_record",
    "snapshot_distribution",
    "SeriesWriter",
]


@dataclass
class DiagnosticRecord:
    time: float
    mass_dev: float
    momentum_dev: float
    energy_dev: float
    potential_energy: float
    Te_mean: float
    Ti: float
    l2_alpha: np.ndarray
    u_l2: float
    T_dev_l2: float
    phi_dev: float
    entropy: float
    entropy_dissipation: float
    entropy_exchange_rhs: float
    active_modes: int
    excluded_fraction: float
    mass: float = 0.0
    momentum: float = 0.0
    energy: float = 0.0


def _raw_invariants(state, space):
    """Mass, momentum and total energy of the current state."""
    c = state.coeffs.coeffs
    vth = state.basis.vth
    mass = float(space.mean_vec @ c[0].ravel())
    momentum = vth * float(space.mean_vec @ c[1].ravel())
    kinetic = 0.5 * vth ** 2 * float(
        space.mean_vec @ (c[0] + np.sqrt(2.0) * c[2]).ravel())
    energy = kinetic + state.field.potential_energy
    if state.Ti is not None:
        energy += 0.5 * state.budget.particle_number * state.Ti
    return mass, momentum, energy


def _entropy(state, space, v_window, n_v):
    """int f log f over the reconstruction grid; f <= 0 points excluded."""
    basis = state.basis
    v = np.linspace(-v_window * basis.vth, v_window * basis.vth, n_v)
    psi = basis_function_table(basis, v)
    act = state.coeffs.active
    alpha_q = space.values_at_quad(state.coeffs.coeffs)
    f = np.einsum("kjq,kv->jqv", alpha_q[act], psi[act])
    good = f > 0.0
    flogf = np.where(good, f * np.log(np.where(good, f, 1.0)), 0.0)
    dens = np.trapezoid(flogf, v, axis=-1)
    return space.integrate_quad_values(dens), 1.0 - good.mean()


def compute_record(state, space, cfg, baseline=None) -> DiagnosticRecord:
    """All monitored quantities for one state.

    `baseline` is the t = 0 record; deviations are relative to it, divided by
    max(|initial|, 1) so identically-zero invariants stay meaningful.
    """
    c = state.coeffs.coeffs
    vth = state.basis.vth
    mass, momentum, energy = _raw_invariants(state, space)

    n_alpha = min(6, state.coeffs.n_modes - 1)
    l2_alpha = np.linalg.norm(
        c[1:n_alpha + 1].reshape(n_alpha, -1), axis=1)

    a_q = space.values_at_quad(c[:3])
    a0, a1, a2 = a_q[0], a_q[1], a_q[2]
    u_q = vth * a1 / a0
    T_q = vth ** 2 * (1.0 + np.sqrt(2.0) * a2 / a0 - (a1 / a0) ** 2)
    u_l2 = float(np.sqrt(max(space.integrate_quad_values(u_q ** 2), 0.0)))
    T_dev_l2 = float(np.sqrt(max(
        space.integrate_quad_values((T_q - vth ** 2) ** 2), 0.0)))
    Te_mean = space.integrate_quad_values(a0 * T_q) / mass

    phi_dev = float(np.linalg.norm(
        state.field.phi.coeffs - state.limit.phi_bar.coeffs))

    entropy, excluded = _entropy(state, space, cfg.entropy_v_window, cfg.entropy_nv)
    diss, _ = entropy_dissipation_diagnostic(
        state.basis, state.coeffs, space, cfg.nu_ee, cfg.nu_ei, cfg.eps,
        ion_u=0.0, ion_T=(state.Ti or 0.0),
        v_window=cfg.entropy_v_window, n_v=cfg.entropy_nv)

    # right side of the two-species entropy balance (zero when nu_ei = 0):
    # -(1-eps^2)/(1+eps^2) int nu_ei n |u|^2/(4 T_ei) dx
    #  + eps^2/(1+eps^2) int nu_ei n (T_e - T_i)/T_ei dx
    exchange = 0.0
    if cfg.nu_ei > 0.0 and state.Ti is not None:
        eps = cfg.eps
        T_ei_q = (T_q + eps ** 2 * state.Ti + 0.5 * u_q ** 2) / (1.0 + eps ** 2)
        term1 = space.integrate_quad_values(a0 * u_q ** 2 / (4.0 * T_ei_q))
        term2 = space.integrate_quad_values(a0 * (T_q - state.Ti) / T_ei_q)
        exchange = cfg.nu_ei * (
            -(1.0 - eps ** 2) / (1.0 + eps ** 2) * term1
            + eps ** 2 / (1.0 + eps ** 2) * term2)

    def dev(value, base):
        return value - base if baseline is None else (
            (value - base) / max(abs(base), 1.0))

    if baseline is None:
        mass_dev = momentum_dev = energy_dev = 0.0
    else:
        mass_dev = (mass - baseline.mass) / max(abs(baseline.mass), 1.0)
        momentum_dev = (momentum - baseline.momentum) / max(
            abs(baseline.momentum), 1.0)
        energy_dev = (energy - baseline.energy) / max(abs(baseline.energy), 1.0)

    return DiagnosticRecord(
        time=state.time, mass_dev=mass_dev, momentum_dev=momentum_dev,
        energy_dev=energy_dev,
        potential_energy=state.field.potential_energy,
        Te_mean=float(Te_mean), Ti=(state.Ti if state.Ti is not None else 0.0),
        l2_alpha=l2_alpha, u_l2=u_l2, T_dev_l2=T_dev_l2, phi_dev=phi_dev,
        entropy=float(entropy), entropy_dissipation=float(diss),
        entropy_exchange_rhs=float(exchange),
        active_modes=int(state.coeffs.active.sum()),
        excluded_fraction=float(excluded),
        mass=mass, momentum=momentum, energy=energy)


def snapshot_distribution(state, space, x_resolution, v_window, v_resolution):
    """Tensor-grid reconstruction of f; returns (x, v, f[x, v]) row-major in x."""
    L = space.mesh.length
    x = np.arange(x_resolution) * (L / x_resolution)
    v = np.linspace(-v_window * state.basis.vth, v_window * state.basis.vth,
                    v_resolution)
    psi = basis_function_table(state.basis, v)
    act = state.coeffs.active
    alpha_x = np.stack([space.evaluate(state.coeffs.coeffs[k], x)
                        for k in range(state.coeffs.n_modes)])
    f = np.einsum("kp,kv->pv", alpha_x[act], psi[act])
    return x, v, f


def _fmt(x):
    return f"{x:.17g}"


class SeriesWriter:
    """CSV time series plus snapshot files under one run directory."""

    def __init__(self, out_dir, cfg):
        self.out_dir = out_dir
        self.cfg = cfg
        self.baseline = None
        self.records = []
        self._rows = []
        self.snapshot_files = []
        os.makedirs(out_dir, exist_ok=True)
        os.makedirs(os.path.join(out_dir, "snapshots"), exist_ok=True)
        n_alpha = min(6, cfg.N_H - 1)
        self.columns = (["time", "mass_dev", "momentum_dev", "energy_dev",
                         "potential_energy", "Te_mean", "Ti"]
                        + [f"l2_alpha_{k}" for k in range(1, n_alpha + 1)]
                        + ["u_l2", "T_dev_l2", "phi_dev", "entropy",
                           "entropy_dissipation", "entropy_exchange_rhs",
                           "active_modes", "excluded_fraction"])

    def record(self, state, space):
        rec = compute_record(state, space, self.cfg, baseline=self.baseline)
        if self.baseline is None:
            self.baseline = rec
        self.records.append(rec)
        row = ([_fmt(rec.time), _fmt(rec.mass_dev), _fmt(rec.momentum_dev),
                _fmt(rec.energy_dev), _fmt(rec.potential_energy),
                _fmt(rec.Te_mean), _fmt(rec.Ti)]
               + [_fmt(v) for v in rec.l2_alpha]
               + [_fmt(rec.u_l2), _fmt(rec.T_dev_l2), _fmt(rec.phi_dev),
                  _fmt(rec.entropy), _fmt(rec.entropy_dissipation),
                  _fmt(rec.entropy_exchange_rhs), str(rec.active_modes),
                  _fmt(rec.excluded_fraction)])
        self._rows.append(",".join(row))
        return rec

    def snapshot(self, state, space):
        x, v, f = snapshot_distribution(state, space, self.cfg.snapshot_nx,
                                        self.cfg.snapshot_v_window,
                                        self.cfg.snapshot_nv)
        name = f"f_t{state.time:.6f}.txt"
        path = os.path.join(self.out_dir, "snapshots", name)
        header = (f"time = {_fmt(state.time)}\n"
                  f"v_window = {_fmt(v[-1])}\n"
                  f"shape = {f.shape[0]} {f.shape[1]}\n"
                  "layout = rows are x samples (row-major), columns are v samples\n"
                  f"x: {' '.join(_fmt(xi) for xi in x)}\n"
                  f"v: {' '.join(_fmt(vi) for vi in v)}")
        np.savetxt(path, f, header=header, fmt="%.17g")
        self.snapshot_files.append(os.path.join("snapshots", name))

    def flush(self):
        path = os.path.join(self.out_dir, "series.csv")
        with open(path, "w") as fh:
            fh.write(",".join(self.columns) + "\n")
            fh.write("\n".join(self._rows))
            if self._rows:
                fh.write("\n")
