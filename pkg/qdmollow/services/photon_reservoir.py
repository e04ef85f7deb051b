"""
Photonic reservoirs: spectral function J_ph(ω), detector propagator α_P(ω),
relaxation functions and the phonon-dressed T_k integrals.

Frequencies are absolute energies in meV; J_ph is in μeV so that
∫ J_ph(ω) dω/ħ over a flat reservoir gives γ/2 per unit time.
"""
import logging
from abc import ABC, abstractmethod
from functools import cached_property
from typing import ClassVar, List, Optional, Tuple

import numpy as np
from scipy import constants as si
from scipy.integrate import trapezoid
from scipy.signal import find_peaks as locate_maxima

from qdmollow.models.physics import CONSTANTS, PhysicalConstants
from qdmollow.models.schemas import (
    CoupledCavityReservoirConfig,
    FlatReservoirConfig,
    LorentzianReservoirConfig,
    NumericsConfig,
)
from qdmollow.services.phonon_bath import PhononBath
from qdmollow.utils.errors import BranchViolationError, QuadratureError
from qdmollow.utils.quadrature import principal_value, trapezoid_weights

logger = logging.getLogger(__name__)


class PhotonReservoir(ABC):
    """Immutable photonic environment seen by the quantum dot"""

    kind: ClassVar[str] = ""

    def __init__(self, numerics: Optional[NumericsConfig] = None, constants: PhysicalConstants = CONSTANTS):
        self.numerics = numerics or NumericsConfig()
        self.constants = constants

    @abstractmethod
    def j_ph(self, omega) -> np.ndarray:
        """Spectral function J_ph(ω) in μeV"""

    @abstractmethod
    def propagator(self, omega) -> np.ndarray:
        """Detector propagator α_P(ω), maximum 1"""

    @abstractmethod
    def markov_integral(self, omega_k: float) -> complex:
        """πJ(ω_k) + iP∫J(ω)/(ω_k−ω)dω in μeV (the C_pn ≡ 1 value of T_k)"""

    @abstractmethod
    def sideband_integral(self, omega_k: float, bath: PhononBath) -> complex:
        """∫dω J(ω) K(ω_k − ω) with K the phonon sideband kernel, in μeV"""

    @abstractmethod
    def relaxation_function(self, tau, omega_k: float) -> np.ndarray:
        """J^k_ph(τ) = ∫dω J_ph(ω) e^{i(ω_k−ω)τ} in μeV/ps"""

    def purcell_factor(self, omega, gamma_b: float):
        """PF = 2πJ_ph(ω)/γ_b"""
        if gamma_b <= 0:
            raise ValueError("gamma_b must be positive")
        return 2.0 * np.pi * self.j_ph(omega) / gamma_b

    def band_center(self) -> float:
        raise ValueError(f"{self.kind} reservoir has no band center")

    def edge_frequency(self, edge: str) -> float:
        raise ValueError(f"{self.kind} reservoir has no mode edges")

    def resonances(self) -> List[float]:
        raise ValueError(f"{self.kind} reservoir has no tabulated resonances")

    def _kernel_at(self, nu: np.ndarray, bath: PhononBath, nu_max: float) -> np.ndarray:
        """Interpolate the bath sideband kernel at angular offsets ν"""
        step = self.constants.angular(self.numerics.kernel_step * 1e-3)
        grid, kernel = bath.sideband_kernel(nu_max, step)
        return np.interp(nu, grid, kernel.real, left=0.0, right=0.0) + 1j * np.interp(
            nu, grid, kernel.imag, left=0.0, right=0.0
        )


class FlatReservoir(PhotonReservoir):
    """Frequency-independent reservoir, J_ph = γ/2π"""

    kind = "flat"

    def __init__(self, gamma: float, numerics: Optional[NumericsConfig] = None,
                 constants: PhysicalConstants = CONSTANTS):
        super().__init__(numerics, constants)
        if gamma < 0:
            raise ValueError("gamma must be non-negative")
        self.gamma = gamma

    def j_ph(self, omega):
        return np.full(np.shape(omega), self.gamma / (2.0 * np.pi)) if np.ndim(omega) else self.gamma / (2.0 * np.pi)

    def propagator(self, omega):
        return np.ones(np.shape(omega)) if np.ndim(omega) else 1.0

    def markov_integral(self, omega_k: float) -> complex:
        return complex(0.5 * self.gamma, 0.0)

    def sideband_integral(self, omega_k: float, bath: PhononBath) -> complex:
        # ∫K(ν)dν/ħ over a white spectrum picks out C_pn(0) − ⟨B⟩² = 1 − ⟨B⟩²
        if not bath.enabled:
            return 0j
        return complex(0.5 * self.gamma * (1.0 - bath.displacement_average() ** 2), 0.0)

    def relaxation_function(self, tau, omega_k: float):
        """Window-limited white spectrum: (γ/2π)·2 sin(Wτ/ħ)/τ"""
        tau = np.asarray(tau, dtype=float)
        half = self.constants.angular(self.numerics.window)
        density = self.gamma / (2.0 * np.pi)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(tau > 0, 2.0 * np.sin(half * tau) / np.where(tau > 0, tau, 1.0), 2.0 * half)
        return (density * values).astype(complex)


class LorentzianReservoir(PhotonReservoir):
    """Single cavity mode: J_ph = (g²/π)(κ/2)/((ω−ω_c)² + κ²/4)"""

    kind = "lorentzian"

    def __init__(self, omega_c: float, kappa: float, g: float, numerics: Optional[NumericsConfig] = None,
                 constants: PhysicalConstants = CONSTANTS):
        super().__init__(numerics, constants)
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        self.omega_c = omega_c
        self.kappa = kappa
        self.g = g

    def _detuning_uev(self, omega):
        return (np.asarray(omega, dtype=float) - self.omega_c) * 1e3

    def j_ph(self, omega):
        x = self._detuning_uev(omega)
        half = 0.5 * self.kappa
        j = (self.g ** 2 / np.pi) * half / (x ** 2 + half ** 2)
        return j if np.ndim(j) else float(j)

    def propagator(self, omega):
        x = self._detuning_uev(omega)
        half = 0.5 * self.kappa
        a = half ** 2 / (x ** 2 + half ** 2)
        return a if np.ndim(a) else float(a)

    def markov_integral(self, omega_k: float) -> complex:
        return self.g ** 2 / complex(0.5 * self.kappa, -float(self._detuning_uev(omega_k)))

    def relaxation_function(self, tau, omega_k: float):
        tau = np.asarray(tau, dtype=float)
        hbar_uev = self.constants.hbar * 1e3
        delta = float(self._detuning_uev(omega_k))
        return (self.g ** 2 / hbar_uev) * np.exp((1j * delta - 0.5 * self.kappa) * tau / hbar_uev)

    def sideband_integral(self, omega_k: float, bath: PhononBath) -> complex:
        if not bath.enabled:
            return 0j
        tau, residual = bath.sideband_correlation()
        return complex(trapezoid(residual * self.relaxation_function(tau, omega_k), tau))


class NumericReservoir(PhotonReservoir):
    """Reservoir integrated on a fixed nonuniform frequency grid"""

    @property
    @abstractmethod
    def frequency_grid(self) -> np.ndarray:
        """Integration grid (meV), strictly increasing"""

    @cached_property
    def _grid_density(self) -> np.ndarray:
        return np.asarray(self.j_ph(self.frequency_grid), dtype=float)

    def markov_integral(self, omega_k: float) -> complex:
        grid = self.frequency_grid
        pv = principal_value(omega_k, grid, self._grid_density)
        return complex(np.pi * float(self.j_ph(omega_k)), pv)

    def sideband_integral(self, omega_k: float, bath: PhononBath) -> complex:
        if not bath.enabled:
            return 0j
        grid = self.frequency_grid
        nu = self.constants.angular(omega_k - grid)
        nu_max = self.constants.angular(grid[-1] - grid[0])
        kernel = self._kernel_at(nu, bath, nu_max)
        return complex(trapezoid(self._grid_density * kernel, grid) / self.constants.hbar)

    def relaxation_function(self, tau, omega_k: float):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        grid = self.frequency_grid
        max_step = float(np.max(np.diff(grid)))
        phase_step = self.constants.angular(max_step) * float(tau.max())
        if phase_step > 0.25 * np.pi:
            raise QuadratureError("relaxation_function", phase_step,
                                  f"frequency grid too coarse for tau={tau.max():.1f} ps")
        nu = self.constants.angular(omega_k - grid)
        values = np.exp(1j * np.outer(tau, nu)) @ (self._weights * self._grid_density)
        return values / self.constants.hbar

    @cached_property
    def _weights(self) -> np.ndarray:
        return trapezoid_weights(self.frequency_grid)


class CoupledCavityReservoir(NumericReservoir):
    """
    Coupled-cavity waveguide with band edges ω_l < ω_u.

    J_ph(ω) = A·s(ω) with s(ω) = −(ω/π)·Im[1/√((ω−ω̃_u)(ω−ω̃_l*))], ω̃_u = ω_u + iκ_u,
    ω̃_l* = ω_l + iκ_l. The square root is taken as i√(ω̃_u−ω)·√(ω−ω̃_l*), the branch
    on which Im[·] ≤ 0 throughout.
    """

    kind = "coupled_cavity"
    NEGATIVE_TOLERANCE = 1e-12

    def __init__(self, omega_l: float, omega_u: float, kappa_l: float, kappa_u: float,
                 prefactor: float, numerics: Optional[NumericsConfig] = None,
                 constants: PhysicalConstants = CONSTANTS):
        super().__init__(numerics, constants)
        if not omega_l < omega_u:
            raise ValueError("omega_l must be below omega_u")
        if kappa_l <= 0 or kappa_u <= 0:
            raise ValueError("band-edge losses must be positive")
        self.omega_l = omega_l
        self.omega_u = omega_u
        self.kappa_l = kappa_l
        self.kappa_u = kappa_u
        self.prefactor = prefactor

        density = self._grid_density
        if density.min() < -self.NEGATIVE_TOLERANCE * density.max():
            raise BranchViolationError(f"negative J_ph ({density.min():.3e}) on the integration grid")
        logger.debug(f"Coupled-cavity reservoir: band [{omega_l}, {omega_u}] meV, "
                     f"{self.frequency_grid.size} grid points")

    @classmethod
    def from_config(cls, config: CoupledCavityReservoirConfig, gamma_ref: float,
                    numerics: Optional[NumericsConfig] = None,
                    constants: PhysicalConstants = CONSTANTS) -> "CoupledCavityReservoir":
        """
        Build from a config section. The J_ph scale is calibrated to the mid-band
        Purcell factor when ``pf_mid_band`` is set, else computed from d, n_b, V_eff.
        """
        kappa_default = config.omega_0 / (2.0 * config.Q) * 1e3
        kappa_l = config.kappa_l or kappa_default
        kappa_u = config.kappa_u or kappa_default
        omega_l = config.omega_0 - config.half_bandwidth
        omega_u = config.omega_0 + config.half_bandwidth

        unit = cls(omega_l, omega_u, kappa_l, kappa_u, prefactor=1.0, numerics=numerics, constants=constants)
        if config.pf_mid_band is not None:
            prefactor = config.pf_mid_band * gamma_ref / (2.0 * np.pi * float(unit._shape(config.omega_0)))
        else:
            prefactor = physical_prefactor(config.d, config.n_b, config.V_eff, config.omega_0)
        return cls(omega_l, omega_u, kappa_l, kappa_u, prefactor=prefactor, numerics=numerics, constants=constants)

    def _complex_edges(self) -> Tuple[complex, complex]:
        upper = complex(self.omega_u, self.kappa_u * 1e-3)
        lower_conj = complex(self.omega_l, self.kappa_l * 1e-3)
        return upper, lower_conj

    def _shape(self, omega):
        omega = np.asarray(omega, dtype=float)
        upper, lower_conj = self._complex_edges()
        root = 1j * np.sqrt(upper - omega) * np.sqrt(omega - lower_conj)
        return -(omega / np.pi) * np.imag(1.0 / root)

    def j_ph(self, omega):
        j = self.prefactor * self._shape(omega)
        return j if np.ndim(j) else float(j)

    def _raw_propagator(self, omega):
        omega = np.asarray(omega, dtype=float)
        upper, lower_conj = self._complex_edges()
        return (omega ** 2 / 4.0) / np.abs((omega - lower_conj) * (omega - upper))

    @cached_property
    def _propagator_scale(self) -> float:
        return float(np.max(self._raw_propagator(self.frequency_grid)))

    def propagator(self, omega):
        a = self._raw_propagator(omega) / self._propagator_scale
        return a if np.ndim(a) else float(a)

    @cached_property
    def frequency_grid(self) -> np.ndarray:
        n = self.numerics
        lo = self.omega_l - n.window
        hi = self.omega_u + n.window
        base = np.arange(lo, hi + 0.5 * n.domega_base * 1e-3, n.domega_base * 1e-3)
        pieces = [base]
        if n.edge_refine > 0:
            step = n.domega_edge * 1e-3
            for edge in (self.omega_l, self.omega_u):
                pieces.append(np.arange(edge - n.edge_refine, edge + n.edge_refine + 0.5 * step, step))
        grid = np.unique(np.concatenate(pieces))
        grid.flags.writeable = False
        return grid

    def band_center(self) -> float:
        return 0.5 * (self.omega_l + self.omega_u)

    def edge_frequency(self, edge: str) -> float:
        """Frequency of maximum Purcell factor near the given band edge"""
        if edge not in ("lower", "upper"):
            raise ValueError(f"edge must be 'lower' or 'upper', got {edge}")
        center = self.omega_l if edge == "lower" else self.omega_u
        reach = max(self.numerics.edge_refine, 10.0 * max(self.kappa_l, self.kappa_u) * 1e-3)
        grid = self.frequency_grid
        mask = np.abs(grid - center) <= reach
        return float(grid[mask][np.argmax(self._grid_density[mask])])


class TabulatedReservoir(NumericReservoir):
    """Reservoir from an external table; linear interpolation, J_ph = 0 outside the table"""

    kind = "tabulated"

    def __init__(self, omega: np.ndarray, j_norm: np.ndarray, alpha_norm: np.ndarray, pf_scale: float = 1.0,
                 numerics: Optional[NumericsConfig] = None, constants: PhysicalConstants = CONSTANTS,
                 source: Optional[str] = None):
        super().__init__(numerics, constants)
        omega = np.asarray(omega, dtype=float)
        j_norm = np.asarray(j_norm, dtype=float)
        alpha_norm = np.asarray(alpha_norm, dtype=float)
        if omega.ndim != 1 or omega.size < 2:
            raise ValueError("tabulated reservoir needs at least two points")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("tabulated frequencies must be strictly increasing")
        if j_norm.shape != omega.shape or alpha_norm.shape != omega.shape:
            raise ValueError("tabulated columns must have equal length")
        if np.any(j_norm < 0):
            raise ValueError("tabulated J_ph must be non-negative")
        if pf_scale < 0:
            raise ValueError("PF_scale must be non-negative")
        self.omega = omega
        self.j_norm = j_norm
        self.alpha_norm = alpha_norm
        self.pf_scale = pf_scale
        self.source = source

    def j_ph(self, omega):
        j = self.pf_scale * np.interp(omega, self.omega, self.j_norm, left=0.0, right=0.0)
        return j if np.ndim(j) else float(j)

    def propagator(self, omega):
        peak = float(np.max(self.alpha_norm))
        a = np.interp(omega, self.omega, self.alpha_norm) / (peak if peak > 0 else 1.0)
        return a if np.ndim(a) else float(a)

    @cached_property
    def frequency_grid(self) -> np.ndarray:
        step = self.numerics.domega_base * 1e-3
        fine = np.arange(self.omega[0], self.omega[-1], step)
        grid = np.unique(np.concatenate([self.omega, fine]))
        grid.flags.writeable = False
        return grid

    def band_center(self) -> float:
        return 0.5 * (self.omega[0] + self.omega[-1])

    def resonances(self) -> List[float]:
        """The two tallest LDOS maxima, in increasing frequency"""
        indices, props = locate_maxima(self.j_norm, height=0.0)
        if indices.size < 2:
            raise ValueError("tabulated LDOS has fewer than two resonances")
        tallest = indices[np.argsort(props["peak_heights"])[-2:]]
        return sorted(float(self.omega[i]) for i in tallest)

    def edge_frequency(self, edge: str) -> float:
        lower, upper = self.resonances()
        if edge == "lower":
            return lower
        if edge == "upper":
            return upper
        raise ValueError(f"edge must be 'lower' or 'upper', got {edge}")

    def ldos_maximum(self) -> float:
        return float(self.omega[int(np.argmax(self.j_norm))])


def physical_prefactor(d_debye: float, n_b: float, V_eff: float, omega_0: float) -> float:
    """
    A = d²/(2ε₀n_b²V) in μeV, with V = V_eff·(λ/n_b)³ at the band-center wavelength.
    """
    dipole = d_debye * 1e-21 / si.c
    omega_si = omega_0 * 1e-3 * si.e / si.hbar
    wavelength = 2.0 * np.pi * si.c / omega_si
    volume = V_eff * (wavelength / n_b) ** 3
    energy_joule = dipole ** 2 / (2.0 * si.epsilon_0 * n_b ** 2 * volume)
    return energy_joule / si.e * 1e6


def build_reservoir(config, gamma_b: float, numerics: Optional[NumericsConfig] = None,
                    constants: PhysicalConstants = CONSTANTS) -> PhotonReservoir:
    """
    Build a reservoir from its config section.

    Args:
        config: One of the reservoir config models
        gamma_b: Background rate (μeV), the Purcell reference for calibration
        numerics: Grid settings

    Returns:
        PhotonReservoir instance
    """
    if isinstance(config, FlatReservoirConfig):
        return FlatReservoir(config.gamma, numerics, constants)
    if isinstance(config, LorentzianReservoirConfig):
        return LorentzianReservoir(config.omega_c, config.kappa, config.g, numerics, constants)
    if isinstance(config, CoupledCavityReservoirConfig):
        return CoupledCavityReservoir.from_config(config, gamma_b, numerics, constants)
    if getattr(config, "kind", None) == "tabulated":
        from qdmollow.services.ldos_loader import ingest_ldos
        return ingest_ldos(config.path, numerics, constants)
    raise ValueError(f"Unknown reservoir config: {config!r}")


def mode_edge_frequency(res: PhotonReservoir, edge: str) -> float:
    return res.edge_frequency(edge)


def resonance_frequencies(res: PhotonReservoir) -> List[float]:
    return res.resonances()
