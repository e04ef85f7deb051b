"""
Dressed-state arithmetic and the polaron-frame system Hamiltonian.
"""
import numpy as np

from qdmollow.models.physics import DressedState, SystemParams

# Two-level operators in the basis {|g⟩ = 0, |e⟩ = 1}
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
NUMBER = SIGMA_PLUS @ SIGMA_MINUS
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)


def dressed_states(params: SystemParams, B_avg: float) -> DressedState:
    """
    Polaron-renormalized Rabi frequency and the dressed-state frequencies.

    Args:
        params: System parameters
        B_avg: Thermal average of the phonon displacement operator, in (0, 1]

    Returns:
        DressedState with Ω_R = ⟨B⟩Ω and η = √(Ω_R² + Δ²)
    """
    if not 0.0 < B_avg <= 1.0:
        raise ValueError(f"B_avg must lie in (0, 1], got {B_avg}")

    omega_r = B_avg * params.Omega
    eta = float(np.hypot(omega_r, params.Delta_xL))
    return DressedState(
        Omega_R=omega_r,
        eta=eta,
        Delta_xL=params.Delta_xL,
        omega_D=params.omega_L,
        omega_U=params.omega_L + omega_r,
        omega_Lw=params.omega_L - omega_r,
    )


def coherent_hamiltonian(ds: DressedState, params: SystemParams) -> np.ndarray:
    """H'_S = (Ω_R/2)(σ⁺ + σ⁻) + Δ_xL σ⁺σ⁻ in meV."""
    h = np.zeros((2, 2), dtype=complex)
    h[0, 1] = h[1, 0] = 0.5 * ds.Omega_R
    h[1, 1] = params.Delta_xL
    return h
