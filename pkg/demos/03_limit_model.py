"""The adiabatic limit model: Poisson-Boltzmann potential and the
energy-constrained temperature.

The electron equilibrium is n_e = c exp(phi / T) with phi solving the
nonlinear Poisson-Boltzmann equation against a given ion profile.  The
temperature is not free: the strictly increasing map E(T) is inverted on the
conserved energy budget, which is exactly how the kinetic solver picks its
Hermite scaling velocity vth = sqrt(T_bar).

Run:  python demos/03_limit_model.py [--plot]
"""

import argparse

import numpy as np

from vpfp.dg import DGMesh, DGSpace
from vpfp.limit import (EnergyBudget, energy_of_temperature,
                        find_limit_temperature, solve_poisson_boltzmann)

parser = argparse.ArgumentParser()
parser.add_argument("--plot", action="store_true", help="save limit.png")
args = parser.parse_args()

L, N = 12.0, 12.0
K = 2 * np.pi / L
space = DGSpace(DGMesh(64, L, 2))
n_i = space.project(lambda x: 1.0 + 0.2 * np.cos(K * x))

print("Poisson-Boltzmann solve at a few temperatures (n_i = 1 + 0.2 cos kx):")
print("   T        c          max|phi|    Newton-ok")
for T in (0.1, 1.0, 10.0, 1e3):
    phi, c = solve_poisson_boltzmann(space, n_i, T, N)
    vals = space.values_at_quad(phi.coeffs)
    print(f"{T:7.1f} {c:10.6f}  {np.abs(vals).max():.4e}    yes")
print("(hot electrons barely screen; cold electrons pin n_e to n_i)")

print("\nthe energy map E(T) = N T/2 + field energy + ion energy:")
budget = EnergyBudget(total_energy=20.0, particle_number=N, ion_energy=0.0)
Ts = np.logspace(-2, 2, 9)
values = []
warm = None
for T in Ts:
    e, warm = energy_of_temperature(space, n_i, budget, T,
                                    phi0=None if warm is None else warm.coeffs)
    values.append(e)
    print(f"  T = {T:8.3f}   E(T) = {e:12.6f}")
print(f"strictly increasing: {bool(np.all(np.diff(values) > 0))}")

state = find_limit_temperature(space, n_i, budget)
print(f"\nroot at the budget 20.0: T_bar = {state.T_bar:.9f}")
print(f"vth = sqrt(T_bar) = {state.vth:.9f},  c = {state.c:.9f}")
print(f"particle number of n_e_bar: {state.n_e_bar.integral():.12f}")

if args.plot:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    xs = np.linspace(0, L, 400)
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.6))
    axes[0].semilogx(Ts, values, "o-")
    axes[0].axhline(20.0, ls="--", c="k")
    axes[0].set_xlabel("T")
    axes[0].set_ylabel("E(T)")
    axes[1].plot(xs, state.phi_bar(xs), label="phi_bar")
    axes[1].plot(xs, state.n_e_bar(xs), label="n_e_bar")
    axes[1].set_xlabel("x")
    axes[1].legend()
    fig.tight_layout()
    fig.savefig("limit.png", dpi=120)
    print("wrote limit.png")
