"""Moments, mixed inter-species quantities, and Fokker-Planck source terms.

Everything here is pointwise in x: moments come from the first three Hermite
coefficients, and the collision / inertial sources are the Hermite-space
images of the drift-diffusion operators acting on the coefficient ladder.
Dimension is fixed to d = 1 throughout.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveDensityError
from .hermite import HermiteBasis, basis_function_table

__all__ = [
    "MomentSet",
    "MixedQuantities",
    "moments_from_coefficients",
    "mixed_quantities",
    "collision_source",
    "inertial_source",
    "energy_exchange_density",
    "entropy_dissipation_diagnostic",
]

logger = logging.getLogger(__name__)


@dataclass
class MomentSet:
    """Density, mean velocity, temperature and energy density of one species."""

    n: float
    u: float
    T: float
    w: float


@dataclass
class MixedQuantities:
    """Inter-species drift and temperature of the cross collision operator.

    u_ei = (u_e + eps u_i) / 2 and
    T_ei = (T_e + eps^2 T_i + |u_e - eps u_i|^2 / 2) / (1 + eps^2), in d = 1.
    The companion constraint nu_ei n_e = nu_ie n_i fixes the ion-side
    frequency; it is not used here because kinetic ions are out of scope.
    """

    u_ei: float
    T_ei: float
    eps: float
    nu_ee: float
    nu_ei: float


def moments_from_coefficients(basis: HermiteBasis, a0, a1, a2):
    """Moments (n, u, T, w) from the first three Hermite coefficients.

    n = a0, n u = vth a1, T = vth^2 (1 + sqrt(2) a2/a0 - (a1/a0)^2) and
    w = vth^2 (a0 + sqrt(2) a2) / 2.  Negative T is reported, not clamped,
    since clamping would silently break the conservation identities.
    """
    a0 = np.asarray(a0, dtype=float)
    if np.any(a0 <= 0.0):
        raise NonpositiveDensityError(
            f"alpha_0 must be positive for moment evaluation (min {a0.min():.3e})")
    vth = basis.vth
    u = vth * a1 / a0
    T = vth ** 2 * (1.0 + np.sqrt(2.0) * a2 / a0 - (a1 / a0) ** 2)
    w = 0.5 * vth ** 2 * (a0 + np.sqrt(2.0) * a2)
    if np.any(T < 0.0):
        logger.warning("negative local temperature (min %.3e); proceeding with raw value",
                       float(np.min(T)))
    if np.ndim(a0) == 0:
        return MomentSet(float(a0), float(u), float(T), float(w))
    return MomentSet(a0, u, T, w)


def mixed_quantities(e: MomentSet, i: MomentSet, eps, nu_ee=0.0, nu_ei=0.0):
    """Mixed velocity and temperature of the electron-ion operator (d = 1)."""
    u_ei = 0.5 * (e.u + eps * i.u)
    T_ei = (e.T + eps ** 2 * i.T + 0.5 * (e.u - eps * i.u) ** 2) / (1.0 + eps ** 2)
    return MixedQuantities(u_ei=u_ei, T_ei=T_ei, eps=eps, nu_ee=nu_ee, nu_ei=nu_ei)


def collision_source(basis: HermiteBasis, alpha, mix: MixedQuantities,
                     moments: MomentSet, k: int):
    """Hermite-space Fokker-Planck source Q_k at one point.

    Q_k = (nu_ee + nu_ei) k a_k
          - sqrt(k) (nu_ee u + nu_ei u_ei) / vth a_{k-1}
          + (nu_ee [1 - T/vth^2] + nu_ei [1 - T_ei/vth^2]) sqrt((k-1)k) a_{k-2}
    with a_l = 0 for l < 0.  Q_0 vanishes identically (mass conservation).
    """
    vth = basis.vth
    am1 = alpha[k - 1] if k >= 1 else 0.0
    am2 = alpha[k - 2] if k >= 2 else 0.0
    drag = (mix.nu_ee * moments.u + mix.nu_ei * mix.u_ei) / vth
    diff = (mix.nu_ee * (1.0 - moments.T / vth ** 2)
            + mix.nu_ei * (1.0 - mix.T_ei / vth ** 2))
    return ((mix.nu_ee + mix.nu_ei) * k * alpha[k]
            - np.sqrt(float(k)) * drag * am1
            + diff * np.sqrt((k - 1.0) * k) * am2)


def inertial_source(basis: HermiteBasis, vth_dot_over_vth, alpha, k: int):
    """Basis time-dependence term I_k = (vth'/vth)(k a_k + sqrt((k-1)k) a_{k-2})."""
    am2 = alpha[k - 2] if k >= 2 else 0.0
    return vth_dot_over_vth * (k * alpha[k] + np.sqrt((k - 1.0) * k) * am2)


def energy_exchange_density(moments: MomentSet, mix: MixedQuantities, ion_u=0.0):
    """Pointwise electron-ion energy exchange S_ei (d = 1).

    S_ei = -nu_ei n_e [ (T_e - T_ei) + u_e (u_e - eps u_i) / 2 ]; twice its
    space integral is the v^2-moment of the cross collision operator, which
    drives the ion temperature in the simplified two-species model.
    """
    return -mix.nu_ei * moments.n * (
        (moments.T - mix.T_ei) + 0.5 * moments.u * (moments.u - mix.eps * ion_u))


def entropy_dissipation_diagnostic(basis: HermiteBasis, coeffs, space,
                                   nu_ee, nu_ei, eps, ion_u=0.0, ion_T=0.0,
                                   moments: MomentSet = None,
                                   mix: MixedQuantities = None,
                                   v_window=6.0, n_v=256):
    """Electron part of the inter/intra-species entropy dissipation.

    Evaluates integral of nu_ee T M_e/h_e |dv h_e|^2 + nu_ei T_ei M_ei/h_ei
    |dv h_ei|^2 over the reconstruction grid, using the identity
    T M/h |dv h|^2 = T (dv f + (v - u) f / T)^2 / f for a Maxwellian M with
    the same (u, T).  Reference moments default to the self-consistent ones
    of the reconstructed f; pass `moments` / `mix` to evaluate the functional
    against external parameters.  Grid points with f <= 0 are excluded and
    counted.

    Returns (value, excluded_fraction).
    """
    v = np.linspace(-v_window * basis.vth, v_window * basis.vth, n_v)
    psi = basis_function_table(basis, v, n_modes=coeffs.n_modes + 1)
    act = coeffs.active
    alpha_q = space.values_at_quad(coeffs.coeffs)        # (n_modes, n_cells, n_quad)
    f = np.einsum("kjq,kv->jqv", alpha_q[act], psi[:-1][act])
    ladder = -np.sqrt(np.arange(1, coeffs.n_modes + 1)) / basis.vth
    dfdv = np.einsum("kjq,kv->jqv", alpha_q[act], (ladder[:, None] * psi[1:])[act])

    if moments is None:
        moments = moments_from_coefficients(basis, alpha_q[0], alpha_q[1], alpha_q[2])
    if mix is None and nu_ei > 0.0:
        i_mom = MomentSet(n=1.0, u=ion_u, T=ion_T, w=0.0)
        mix = mixed_quantities(moments, i_mom, eps)
    good = f > 0.0
    excluded = 1.0 - good.mean()
    fs = np.where(good, f, 1.0)
    shape = f.shape[:-1]

    def part(u_loc, T_loc):
        u_loc = np.broadcast_to(np.asarray(u_loc, dtype=float), shape)
        T_loc = np.broadcast_to(np.asarray(T_loc, dtype=float), shape)
        grad_h_scaled = dfdv + (v[None, None, :] - u_loc[..., None]) * f / T_loc[..., None]
        integrand = np.where(good, T_loc[..., None] * grad_h_scaled ** 2 / fs, 0.0)
        return np.trapezoid(integrand, v, axis=-1)

    dens = nu_ee * part(moments.u, moments.T)
    if nu_ei > 0.0:
        dens = dens + nu_ei * part(mix.u_ei, mix.T_ei)
    total = space.integrate_quad_values(dens)
    return float(total), float(excluded)
