"""
Pydantic schemas for run configuration and run manifests.
"""
import math
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator


class StrictModel(BaseModel):
    """Config section: unknown keys rejected"""
    model_config = ConfigDict(extra="forbid", frozen=True)


LaserPlacement = Literal[
    "explicit", "band_center", "lower_edge", "upper_edge", "lower_resonance", "upper_resonance", "ldos_max"
]


class SystemConfig(StrictModel):
    """Quantum dot and drive; ω_x = ω_L + Δ_xL"""
    omega_L: Optional[float] = Field(default=None, description="Laser frequency (meV); required for explicit placement")
    laser_placement: LaserPlacement = "explicit"
    Delta_xL: float = Field(default=0.0, description="Exciton-laser detuning ω_x − ω_L (meV)")
    Omega: Optional[float] = Field(default=1.0, ge=0.0, description="Bare Rabi drive (meV)")
    drive_from_resonances: bool = Field(
        default=False, description="Choose Ω so that ⟨B⟩Ω matches the separation of the two LDOS resonances"
    )
    d: float = Field(default=50.0, gt=0.0, description="Dipole moment (Debye)")
    gamma_b: float = Field(default=1.5, gt=0.0, description="Background spontaneous emission (μeV)")
    gamma_d: float = Field(default=7.8, ge=0.0, description="Pure dephasing (μeV)")

    @model_validator(mode="after")
    def _check_laser(self) -> "SystemConfig":
        if self.laser_placement == "explicit" and self.omega_L is None:
            raise ValueError("omega_L is required when laser_placement is 'explicit'")
        if self.Omega is None and not self.drive_from_resonances:
            raise ValueError("Omega is required unless drive_from_resonances is set")
        return self


class PhononConfig(StrictModel):
    """Acoustic phonon bath J(ω) = α_p ω³ exp(−ω²/2ω_b²)"""
    alpha_p: float = Field(default=0.06, ge=0.0, description="Coupling strength (ps²)")
    omega_b: float = Field(default=1.0, gt=0.0, description="Cutoff energy (meV)")
    T: float = Field(default=4.0, ge=0.0, description="Temperature (K)")
    enabled: bool = True


class FlatReservoirConfig(StrictModel):
    kind: Literal["flat"] = "flat"
    gamma: float = Field(default=1.5, ge=0.0, description="Radiative rate into the reservoir (μeV)")


class LorentzianReservoirConfig(StrictModel):
    kind: Literal["lorentzian"] = "lorentzian"
    omega_c: float = Field(description="Cavity frequency (meV)")
    kappa: float = Field(gt=0.0, description="Cavity linewidth (μeV)")
    g: float = Field(ge=0.0, description="QD-cavity coupling (μeV)")


class CoupledCavityReservoirConfig(StrictModel):
    kind: Literal["coupled_cavity"] = "coupled_cavity"
    omega_0: float = Field(default=800.0, gt=0.0, description="Band center (meV)")
    half_bandwidth: float = Field(default=4.0, gt=0.0, description="Distance of each band edge from omega_0 (meV)")
    Q: float = Field(default=52000.0, gt=0.0, description="Quality factor of the individual cavities")
    kappa_u: Optional[float] = Field(default=None, gt=0.0, description="Upper-edge loss (μeV); default ω0/2Q")
    kappa_l: Optional[float] = Field(default=None, gt=0.0, description="Lower-edge loss (μeV); default ω0/2Q")
    V_eff: float = Field(default=1.0, gt=0.0, description="Effective mode volume in units of (λ/n_b)³")
    n_b: float = Field(default=3.17, gt=0.0, description="Background refractive index")
    d: float = Field(default=50.0, gt=0.0, description="Dipole moment (Debye)")
    pf_mid_band: Optional[float] = Field(
        default=10.0, gt=0.0, description="Mid-band Purcell factor used to calibrate J_ph; null uses d, n_b, V_eff"
    )


class TabulatedReservoirConfig(StrictModel):
    kind: Literal["tabulated"] = "tabulated"
    path: Path


ReservoirConfig = Annotated[
    Union[FlatReservoirConfig, LorentzianReservoirConfig, CoupledCavityReservoirConfig, TabulatedReservoirConfig],
    Field(discriminator="kind"),
]


class SweepConfig(StrictModel):
    variable: Literal["Delta_Lx", "Omega", "T"] = "Delta_Lx"
    values: List[float] = Field(default_factory=lambda: [0.0])

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: List[float], info: ValidationInfo) -> List[float]:
        if not values:
            raise ValueError("sweep values must be non-empty")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("sweep values must be finite")
        variable = info.data.get("variable")
        if variable in ("Omega", "T") and any(v < 0 for v in values):
            raise ValueError(f"{variable} sweep values must be non-negative")
        return values


class OutputConfig(StrictModel):
    directory: Optional[Path] = Field(default=None, description="Defaults to QDMOLLOW_OUTPUT_DIR")
    format: Literal["csv", "json"] = "csv"
    normalize: bool = True
    dB: bool = True
    workers: Optional[int] = Field(default=None, ge=1, description="Defaults to QDMOLLOW_WORKERS")


class SpectrumConfig(StrictModel):
    points: int = Field(default=2001, ge=3)
    half_width: Optional[float] = Field(default=None, gt=0.0, description="Default 2.5·max(Ω, 1 meV)")
    window: Literal["mollow", "wide"] = "mollow"
    wide_margin: float = Field(default=1.0, ge=0.0, description="Extra span beyond the band edges (meV)")
    peak_threshold: float = Field(default=0.01, gt=0.0, lt=1.0)


class NumericsConfig(StrictModel):
    """Quadrature grids and tolerances"""
    omega_cutoff_factor: float = Field(default=8.0, gt=0.0)
    tau_max: float = Field(default=20.0, gt=0.0, description="Phonon correlation horizon (ps)")
    dtau: float = Field(default=0.02, gt=0.0, description="Phonon correlation step (ps)")
    epsilon: float = Field(default=1e-4, gt=0.0, description="Convergence factor for rate integrals (meV)")
    series_eta: float = Field(default=1e-4, gt=0.0, description="η below which Γ_u uses its series form (meV)")
    tail_tolerance: float = Field(default=1e-2, gt=0.0)
    window: float = Field(default=20.0, gt=0.0, description="Photon frequency window around ω_L (meV)")
    domega_base: float = Field(default=5.0, gt=0.0, description="Base photon frequency step (μeV)")
    domega_edge: float = Field(default=0.5, gt=0.0, description="Photon frequency step near band edges (μeV)")
    edge_refine: float = Field(default=0.4, ge=0.0, description="Half-width of the refined region at each edge (meV)")
    kernel_step: float = Field(default=0.5, gt=0.0, description="Sideband kernel frequency step (μeV)")
    zpl_method: Literal["resolvent", "fft", "quadrature"] = "resolvent"
    sideband_method: Literal["fft", "quadrature"] = "fft"
    zpl_decay_factor: float = Field(default=25.0, gt=0.0)
    decay_tolerance: float = Field(default=1e-2, gt=0.0)
    sideband_sampling: Literal["rabi", "generalized"] = "rabi"

    @model_validator(mode="after")
    def _check_grid(self) -> "NumericsConfig":
        if self.dtau >= self.tau_max:
            raise ValueError("dtau must be smaller than tau_max")
        return self


class RunConfig(StrictModel):
    """A complete simulation request: one system, one reservoir, one sweep"""
    system: SystemConfig = Field(default_factory=lambda: SystemConfig(omega_L=800.0))
    phonon: PhononConfig = Field(default_factory=PhononConfig)
    reservoir: ReservoirConfig = Field(default_factory=FlatReservoirConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)


class ManifestEntry(BaseModel):
    """One sweep point"""
    index: int
    variable: str
    value: float
    point_hash: str
    status: Literal["ok", "failed"]
    path: Optional[str] = None
    wall_time: float = 0.0
    error: Optional[str] = None
    positivity_ok: Optional[bool] = None
    min_eigenvalue: Optional[float] = None
    sideband_asymmetry: Optional[float] = None
    reused: bool = False


class RunManifest(BaseModel):
    """Record of a sweep: one entry per sweep point"""
    config_hash: str
    code_version: str
    entries: List[ManifestEntry] = Field(default_factory=list)

    def entry_for(self, point_hash: str) -> Optional[ManifestEntry]:
        for entry in self.entries:
            if entry.point_hash == point_hash:
                return entry
        return None

    @property
    def failed(self) -> List[ManifestEntry]:
        return [e for e in self.entries if e.status == "failed"]
