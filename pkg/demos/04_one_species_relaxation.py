"""One-species relaxation: two-stream electrons over a fixed ion background.

A scaled-down version of the headline experiment: the two-stream
distribution drives a violent electrostatic transient, collisions and phase
mixing damp it, and the state settles onto the Maxwell-Boltzmann profile of
the limit model.  Mass and energy stay conserved to a few 1e-8 while the
mean velocity and temperature deviation fall exponentially.

Run:  python demos/04_one_species_relaxation.py        (about a minute)
      python demos/04_one_species_relaxation.py --fast (coarser, seconds)
"""

import argparse
from dataclasses import replace

from vpfp.diagnostics import compute_record
from vpfp.integrator import KineticStepper, crank_nicolson_step, initialize_state
from vpfp.scenarios import preset_config

parser = argparse.ArgumentParser()
parser.add_argument("--fast", action="store_true", help="16x16 grid, t_end=2")
args = parser.parse_args()

cfg = preset_config("one_species_5_1")
if args.fast:
    cfg = replace(cfg, N_x=16, N_H=16, t_end=2.0)
else:
    cfg = replace(cfg, t_end=5.0)

state, space = initialize_state(cfg)
print(f"scenario: {cfg.scenario}, grid {cfg.N_x} x {cfg.N_H}, dt = {cfg.dt}")
print(f"energy budget: N = {state.budget.particle_number:.4f}, "
      f"E = {state.budget.total_energy:.6f}")
print(f"limit model: T_bar = {state.limit.T_bar:.6f} -> vth = {state.basis.vth:.6f}")
print()

stepper = KineticStepper(space, cfg, n_e_total=state.budget.particle_number)
rec0 = compute_record(state, space, cfg)
n_steps = int(round(cfg.t_end / cfg.dt))
report = max(n_steps // 10, 1)

print("   t     mass_dev   energy_dev   ||u||     ||T-vth^2||  U(t)      entropy")
print(f"{state.time:6.2f}  {rec0.mass_dev:+.1e}  {rec0.energy_dev:+.1e}  "
      f"{rec0.u_l2:.3e}  {rec0.T_dev_l2:.3e}  {rec0.potential_energy:.3e}  {rec0.entropy:+.5f}")
for m in range(1, n_steps + 1):
    state = crank_nicolson_step(state, stepper)
    if m % report == 0:
        rec = compute_record(state, space, cfg, baseline=rec0)
        print(f"{state.time:6.2f}  {rec.mass_dev:+.1e}  {rec.energy_dev:+.1e}  "
              f"{rec.u_l2:.3e}  {rec.T_dev_l2:.3e}  {rec.potential_energy:.3e}  "
              f"{rec.entropy:+.5f}")

print("\nthe full experiment (t_end = 25 with snapshots) is the CLI preset:")
print("  vpfp run --preset one_species_5_1 --out run_5_1")
