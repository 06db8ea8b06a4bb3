"""1D1V Vlasov-Poisson-Fokker-Planck solver with an asymptotics-adapted
Hermite velocity basis, discontinuous Galerkin space discretization, and the
nonlinear Poisson-Boltzmann limit model that fixes the Hermite scaling."""

__version__ = "0.1.0"

from .dg import DGMesh, DGSpace, DGFunction, FieldSolution, solve_poisson_ldg
from .hermite import (HermiteBasis, HermiteCoefficients,
                      eval_probabilist_hermite, eval_basis_function,
                      project_initial_data, reconstruct_distribution)
from .collisions import (MomentSet, MixedQuantities, moments_from_coefficients,
                         mixed_quantities, collision_source, inertial_source)
from .limit import (LimitState, EnergyBudget, solve_poisson_boltzmann,
                    energy_of_temperature, find_limit_temperature, vth_update)
from .scenarios import (ScenarioConfig, preset_config, preset_names,
                        initial_electron_distribution, ion_background)
from .integrator import (TimeStepperConfig, SimulationState, KineticStepper,
                         crank_nicolson_step, adaptive_mask_update,
                         initialize_state, run)
from .diagnostics import DiagnosticRecord, compute_record, snapshot_distribution
