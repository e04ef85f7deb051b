"""
Phonon-dressed photon relaxation integrals T_k and the drive-dependent photon
scattering rates Γ', N', M', K'.
"""
import logging

import numpy as np

from qdmollow.models.physics import DressedState, PhotonRates
from qdmollow.services.phonon_bath import PhononBath
from qdmollow.services.photon_reservoir import PhotonReservoir
from qdmollow.utils.errors import DegenerateDressedStateError

logger = logging.getLogger(__name__)


def t_k(omega_k: float, res: PhotonReservoir, bath: PhononBath) -> complex:
    """
    T_k = ∫₀^∞ dτ C_pn(τ) J^k_ph(τ) in μeV.

    Split as ⟨B⟩²·(Markov value) + sideband residual, both exact for C_pn → ⟨B⟩².
    """
    markov = res.markov_integral(omega_k)
    if not bath.enabled:
        return markov
    b2 = bath.displacement_average() ** 2
    return b2 * markov + res.sideband_integral(omega_k, bath)


def effective_se_rate(res: PhotonReservoir, bath: PhononBath, omega: float) -> float:
    """Weak-drive phonon-dressed spontaneous emission rate γ̃ = 2Re[T_D] (μeV)"""
    return 2.0 * t_k(omega, res, bath).real


def sampling_frequencies(ds: DressedState, sampling: str = "rabi"):
    """(ω_D, ω_U, ω_L) where T_D, T_U, T_L are sampled"""
    if sampling == "rabi":
        return ds.omega_D, ds.omega_U, ds.omega_Lw
    if sampling == "generalized":
        return ds.omega_D, ds.omega_D + ds.eta, ds.omega_D - ds.eta
    raise ValueError(f"Unknown sideband sampling: {sampling}")


def photon_rates(ds: DressedState, Delta_Lx: float, res: PhotonReservoir, bath: PhononBath,
                 sampling: str = "rabi") -> PhotonRates:
    """
    Drive-dependent photon scattering rates.

    Args:
        ds: Dressed state
        Delta_Lx: Laser-exciton detuning ω_L − ω_x (meV)
        res: Photon reservoir
        bath: Phonon bath (a disabled bath gives the pure photon rates)
        sampling: "rabi" samples T_U/T_L at ω_L ± Ω_R, "generalized" at ω_L ± η

    Returns:
        PhotonRates in μeV

    Raises:
        DegenerateDressedStateError: if the dressed-state coefficients are not finite
    """
    omega_d, omega_u, omega_l = sampling_frequencies(ds, sampling)
    T_D = t_k(omega_d, res, bath)

    if ds.eta == 0.0:
        # Undriven and resonant: only the laser frequency is sampled
        half = T_D
        return PhotonRates(Gamma_p=2.0 * half.real, N_p=1j * half.imag, T_D=T_D, T_U=T_D, T_L=T_D)

    T_U = t_k(omega_u, res, bath)
    T_L = t_k(omega_l, res, bath)

    with np.errstate(over="raise", divide="raise", invalid="raise"):
        try:
            c = ds.Omega_R ** 2 / (2.0 * ds.eta ** 2)
            r = Delta_Lx / ds.eta
            s = ds.Omega_R / (2.0 * ds.eta)
        except FloatingPointError as exc:
            raise DegenerateDressedStateError(f"eta={ds.eta:.3e} meV is too small: {exc}") from exc
    if not all(np.isfinite(v) for v in (c, r, s)):
        raise DegenerateDressedStateError(f"non-finite dressed-state coefficients at eta={ds.eta:.3e} meV")

    mixed = c * T_D + 0.5 * (1.0 - c - r) * T_U + 0.5 * (1.0 - c + r) * T_L
    rates = PhotonRates(
        Gamma_p=2.0 * mixed.real,
        N_p=1j * mixed.imag,
        M_p=s * (r * T_D + 0.5 * (1.0 - r) * T_U - 0.5 * (1.0 + r) * T_L),
        K_p=c * (T_D - 0.5 * (T_U + T_L)),
        T_D=T_D,
        T_U=T_U,
        T_L=T_L,
    )
    logger.debug(f"Photon rates at Ω_R={ds.Omega_R:.4f}, Δ_Lx={Delta_Lx:+.4f}: {rates}")
    return rates
