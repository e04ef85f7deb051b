"""
Immutable physical value types shared by every service.

Unit system: energies in meV, times in ps, rates in μeV. Angular frequencies
are E / ħ in 1/ps.
"""
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class PhysicalConstants(BaseModel):
    """The two constants every unit conversion goes through"""
    model_config = ConfigDict(frozen=True)

    hbar: float = 0.658212  # meV·ps
    kB: float = 0.086173  # meV/K

    def angular(self, energy):
        """meV -> 1/ps"""
        return energy / self.hbar

    def rate_per_ps(self, rate_uev):
        """μeV -> 1/ps"""
        return rate_uev * 1e-3 / self.hbar

    def rate_uev(self, rate_per_ps):
        """1/ps -> μeV"""
        return rate_per_ps * self.hbar * 1e3


CONSTANTS = PhysicalConstants()


class SystemParams(BaseModel):
    """Quantum dot, drive and background parameters in the laser frame"""
    model_config = ConfigDict(frozen=True)

    omega_x: float = Field(description="Exciton frequency (meV)")
    omega_L: float = Field(description="Laser frequency (meV)")
    Omega: float = Field(ge=0.0, description="Bare Rabi drive (meV)")
    d: float = Field(default=50.0, gt=0.0, description="Dipole moment (Debye)")
    gamma_b: float = Field(gt=0.0, description="Background spontaneous emission (μeV)")
    gamma_d: float = Field(default=0.0, ge=0.0, description="Pure dephasing (μeV)")

    @computed_field
    @property
    def Delta_xL(self) -> float:
        """ω_x − ω_L (meV); the polaron shift is absorbed into ω_x"""
        return self.omega_x - self.omega_L

    @property
    def Delta_Lx(self) -> float:
        return self.omega_L - self.omega_x

    @classmethod
    def from_detuning(cls, omega_L: float, Delta_xL: float, **kwargs) -> "SystemParams":
        return cls(omega_x=omega_L + Delta_xL, omega_L=omega_L, **kwargs)


class DressedState(BaseModel):
    """Polaron-renormalized drive and the three dressed-state frequencies"""
    model_config = ConfigDict(frozen=True)

    Omega_R: float
    eta: float
    Delta_xL: float = 0.0
    omega_D: float
    omega_U: float
    omega_Lw: float

    @model_validator(mode="after")
    def _check_ordering(self) -> "DressedState":
        if self.Omega_R < 0:
            raise ValueError("Omega_R must be non-negative")
        if self.eta < self.Omega_R * (1.0 - 1e-12):
            raise ValueError("eta must be at least Omega_R")
        if self.eta < abs(self.Delta_xL) * (1.0 - 1e-12):
            raise ValueError("eta must be at least |Delta_xL|")
        return self


class PhononRates(BaseModel):
    """Drive-dependent phonon scattering rates (μeV)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gamma_sig_plus: complex = 0j
    gamma_sig_minus: complex = 0j
    gamma_cd: complex = 0j
    gamma_u: complex = 0j

    @field_validator("*", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return complex(value)

    @classmethod
    def zero(cls) -> "PhononRates":
        return cls()


class PhotonRates(BaseModel):
    """Drive-dependent photon scattering rates and the sampled half-rates (μeV)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    Gamma_p: float
    N_p: complex = 0j
    M_p: complex = 0j
    K_p: complex = 0j
    T_D: complex = 0j
    T_U: complex = 0j
    T_L: complex = 0j

    @field_validator("N_p", "M_p", "K_p", "T_D", "T_U", "T_L", mode="before")
    @classmethod
    def _as_complex(cls, value):
        return complex(value)


class Liouvillian(BaseModel):
    """4×4 generator (1/ps) on column-stacked 2×2 density matrices"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    generator: np.ndarray
    parts: Dict[str, np.ndarray]

    @field_validator("generator")
    @classmethod
    def _check_shape(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=complex)
        if value.shape != (4, 4):
            raise ValueError(f"generator must be 4x4, got {value.shape}")
        value.flags.writeable = False
        return value


class DensityMatrix(BaseModel):
    """Two-level density matrix in the basis {|g⟩, |e⟩}"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix")
    @classmethod
    def _check_state(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=complex)
        if value.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got {value.shape}")
        if not np.allclose(value, value.conj().T, atol=1e-8):
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(value) - 1.0) > 1e-8:
            raise ValueError("density matrix must have unit trace")
        value.flags.writeable = False
        return value

    @property
    def excited_population(self) -> float:
        return float(self.matrix[1, 1].real)

    @property
    def coherence(self) -> complex:
        """⟨σ⁻⟩ = ρ_eg"""
        return complex(self.matrix[1, 0])

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def is_physical(self, tol: float = 1e-10) -> bool:
        return self.min_eigenvalue >= -tol

    @classmethod
    def ground(cls) -> "DensityMatrix":
        return cls(matrix=np.diag([1.0, 0.0]))


class Peak(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega: float
    height: float
    is_sideband: bool = False


class SpectrumSeries(BaseModel):
    """Detector-frequency grid with polarization and projected spectra"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega_grid: np.ndarray
    S0: np.ndarray
    SP: np.ndarray
    peaks: List[Peak] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_grid(self) -> "SpectrumSeries":
        if self.omega_grid.ndim != 1 or self.omega_grid.size < 2:
            raise ValueError("omega_grid must be a 1D array with at least two points")
        if np.any(np.diff(self.omega_grid) <= 0):
            raise ValueError("omega_grid must be strictly increasing")
        if self.S0.shape != self.omega_grid.shape or self.SP.shape != self.omega_grid.shape:
            raise ValueError("spectra must match omega_grid")
        return self
