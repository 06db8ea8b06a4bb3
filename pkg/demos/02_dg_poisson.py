"""DG infrastructure: transport weak form and the LDG Poisson solver.

Shows the convergence orders behind the space discretization: the weak
derivative with the centered flux and the zero-mean LDG Poisson solve both
converge at order l + 1 = 3 on manufactured periodic solutions.

Run:  python demos/02_dg_poisson.py
"""

import numpy as np

from vpfp.dg import DGMesh, DGSpace, assemble_transport, solve_poisson_ldg

L = 12.0
K = 2 * np.pi / L
KAPPA = 0.1

print("LDG Poisson, manufactured solution -phi'' = kappa cos(2 pi x / L)")
print(" N_x    phi L2 error   E L2 error    order(phi)")
prev = None
for n in (8, 16, 32, 64, 128):
    space = DGSpace(DGMesh(n, L, 2))
    sol = solve_poisson_ldg(space, space.project(lambda x: KAPPA * np.cos(K * x)))
    xs = np.linspace(0, L, 6000, endpoint=False)
    err_phi = np.sqrt(np.mean((sol.phi(xs) - KAPPA / K ** 2 * np.cos(K * xs)) ** 2) * L)
    err_e = np.sqrt(np.mean((sol.efield(xs) - KAPPA / K * np.sin(K * xs)) ** 2) * L)
    order = "" if prev is None else f"{np.log2(prev / err_phi):10.2f}"
    prev = err_phi
    print(f"{n:4d}    {err_phi:.3e}     {err_e:.3e}  {order}")

print("\ntransport weak form: residual of d/dx sin vs the analytic derivative")
print(" N_x    L2 error     order")
prev = None
for n in (8, 16, 32, 64):
    space = DGSpace(DGMesh(n, L, 2))
    coeffs = np.zeros((3, n, 3))
    coeffs[1] = space.project(lambda x: np.sin(K * x)).coeffs
    res = assemble_transport(space, coeffs, 1.0, 0, 0.0)
    xs = np.linspace(0, L, 6000, endpoint=False)
    err = np.sqrt(np.mean((space.evaluate(res, xs) - K * np.cos(K * xs)) ** 2) * L)
    order = "" if prev is None else f"{np.log2(prev / err):7.2f}"
    prev = err
    print(f"{n:4d}    {err:.3e} {order}")

print("\nconservation: total integral of the transport residual (any mode)")
space = DGSpace(DGMesh(16, L, 2))
rng = np.random.default_rng(1)
coeffs = rng.normal(size=(5, 16, 3))
for k in range(4):
    res = assemble_transport(space, coeffs, 1.3, k, 7.0)
    print(f"  mode {k}: {space.mean_vec @ res.ravel():+.2e}")
print("(interface fluxes telescope over the periodic mesh)")
