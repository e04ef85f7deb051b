"""
Acoustic phonon bath in the independent boson model.

Provides the spectral function, the phase φ(τ), the displacement average ⟨B⟩,
the correlation C_pn(τ) = e^{φ(τ)−φ(0)} and the drive-dependent phonon
scattering rates of the polaron master equation.
"""
import logging
import threading
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad, trapezoid

from qdmollow.models.physics import CONSTANTS, DressedState, PhononRates, PhysicalConstants
from qdmollow.models.schemas import NumericsConfig, PhononConfig
from qdmollow.utils.errors import QuadratureError
from qdmollow.utils.quadrature import gauss_legendre_panels, half_line_transform

logger = logging.getLogger(__name__)

EPSILON_TOLERANCE = 5e-3


class PhononBath:
    """Phonon bath with a precomputed φ(τ) table; read-only after construction"""

    GL_ORDER = 16
    MIN_PANELS = 32
    TAU_CHUNK = 256
    PHASE_TOLERANCE = 1e-9

    def __init__(self, params: Optional[PhononConfig] = None,
                 numerics: Optional[NumericsConfig] = None,
                 constants: PhysicalConstants = CONSTANTS):
        self.params = params or PhononConfig()
        self.numerics = numerics or NumericsConfig()
        self.constants = constants
        self._kernel_cache: Dict[Tuple[float, float], Tuple[np.ndarray, np.ndarray]] = {}
        self._kernel_lock = threading.Lock()

        n = int(round(self.numerics.tau_max / self.numerics.dtau)) + 1
        self._tau = np.linspace(0.0, self.numerics.tau_max, n)
        self._tau.flags.writeable = False
        self._phi = self.phase(self._tau)
        self._phi.flags.writeable = False
        self._phi0 = float(self._phi[0].real)

        logger.debug(f"Phonon bath ready: enabled={self.enabled}, T={self.T} K, "
                     f"φ(0)={self._phi0:.6f}, {n} τ points")

    @property
    def alpha_p(self) -> float:
        return self.params.alpha_p

    @property
    def omega_b(self) -> float:
        return self.params.omega_b

    @property
    def T(self) -> float:
        return self.params.T

    @property
    def enabled(self) -> bool:
        return self.params.enabled and self.params.alpha_p > 0.0

    @property
    def omega_b_angular(self) -> float:
        return self.constants.angular(self.omega_b)

    @property
    def omega_max_angular(self) -> float:
        return self.numerics.omega_cutoff_factor * self.omega_b_angular

    def spectral_function(self, omega):
        """
        J_pn(ω) = α_p ω³ exp(−ω²/2ω_b²).

        Args:
            omega: Phonon energy (meV), scalar or array, non-negative

        Returns:
            Spectral density in 1/ps
        """
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise ValueError("spectral_function requires omega >= 0")
        w = self.constants.angular(omega)
        j = self.alpha_p * w ** 3 * np.exp(-w ** 2 / (2.0 * self.omega_b_angular ** 2))
        return j if j.ndim else float(j)

    def _thermal_factor(self, w: np.ndarray) -> np.ndarray:
        """coth(ħω/2k_BT), equal to 1 at zero temperature"""
        if self.T == 0.0:
            return np.ones_like(w)
        x = self.constants.hbar * w / (2.0 * self.constants.kB * self.T)
        return 1.0 / np.tanh(x)

    def _reduced_density(self, w: np.ndarray) -> np.ndarray:
        """J_pn(ω)/ω² in the angular variable"""
        return self.alpha_p * w * np.exp(-w ** 2 / (2.0 * self.omega_b_angular ** 2))

    def phase(self, tau) -> np.ndarray:
        """
        φ(τ) on an array of times by composite Gauss-Legendre quadrature.

        The panel count grows with ω_max·τ so every panel spans a bounded phase.
        """
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if np.any(tau < 0):
            raise ValueError("phase requires tau >= 0")
        if not self.enabled:
            return np.zeros(tau.shape, dtype=complex)

        w_max = self.omega_max_angular
        panels = max(self.MIN_PANELS, int(np.ceil(w_max * float(tau.max()) / np.pi)))
        nodes, weights = gauss_legendre_panels(0.0, w_max, panels, self.GL_ORDER)
        density = weights * self._reduced_density(nodes)
        even = density * self._thermal_factor(nodes)

        out = np.empty(tau.shape, dtype=complex)
        for start in range(0, tau.size, self.TAU_CHUNK):
            block = tau[start:start + self.TAU_CHUNK]
            arg = np.outer(block, nodes)
            out[start:start + self.TAU_CHUNK] = np.cos(arg) @ even - 1j * (np.sin(arg) @ density)
        return out

    def ibm_phase(self, tau: float) -> complex:
        """
        φ(τ) = ∫ dω J_pn/ω² [coth(ħω/2k_BT) cos ωτ − i sin ωτ] by adaptive quadrature.

        Raises:
            QuadratureError: if the error estimate or the truncated tail exceeds tolerance
        """
        if tau < 0:
            raise ValueError("ibm_phase requires tau >= 0")
        if not self.enabled:
            return 0j

        w_max = self.omega_max_angular
        b2 = self.omega_b_angular ** 2

        # Upper bound of the dropped ω > ω_max tail
        tail = self.alpha_p * b2 * np.exp(-w_max ** 2 / (2.0 * b2)) * float(self._thermal_factor(np.array([w_max]))[0])
        if tail > self.PHASE_TOLERANCE:
            raise QuadratureError("ibm_phase", tail, "frequency cutoff too low for the phonon phase")

        def even(w):
            if w > 0.0:
                return self._reduced_density(w) * float(self._thermal_factor(np.array([w]))[0])
            # ω coth(ħω/2k_BT) → 2k_BT/ħ at ω = 0
            return self.alpha_p * 2.0 * self.constants.kB * self.T / self.constants.hbar

        def odd(w):
            return self._reduced_density(w)

        if tau == 0.0:
            re, re_err = quad(even, 0.0, w_max, limit=400, epsabs=1e-12, epsrel=1e-10)
            im, im_err = 0.0, 0.0
        else:
            re, re_err = quad(even, 0.0, w_max, weight="cos", wvar=tau,
                              limit=400, epsabs=1e-12, epsrel=1e-10)
            im, im_err = quad(odd, 0.0, w_max, weight="sin", wvar=tau,
                              limit=400, epsabs=1e-12, epsrel=1e-10)

        estimate = max(re_err, im_err)
        if estimate > self.PHASE_TOLERANCE * max(1.0, abs(re)):
            raise QuadratureError("ibm_phase", estimate)
        return complex(re, -im)

    def time_grid(self) -> Tuple[np.ndarray, np.ndarray]:
        """(τ, φ(τ)) on the precomputed grid"""
        return self._tau, self._phi

    def displacement_average(self) -> float:
        """⟨B⟩ = exp(−φ(0)/2)"""
        return float(np.exp(-0.5 * self._phi0))

    def phonon_correlation(self, tau):
        """C_pn(τ) = exp(φ(τ) − φ(0)); scalar in, scalar out"""
        values = np.exp(self.phase(tau) - self._phi0)
        return complex(values[0]) if np.ndim(tau) == 0 else values

    def correlation_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """(τ, C_pn(τ)) on the precomputed grid"""
        return self._tau, np.exp(self._phi - self._phi0)

    def sideband_correlation(self) -> Tuple[np.ndarray, np.ndarray]:
        """(τ, C_pn(τ) − ⟨B⟩²) on the precomputed grid"""
        tau, corr = self.correlation_table()
        return tau, corr - self.displacement_average() ** 2

    def polaron_shift(self) -> float:
        """∫ J_pn(ω)/ω dω in meV (absorbed into the exciton frequency)"""
        if not self.enabled:
            return 0.0
        w_max = self.omega_max_angular
        value, _ = quad(lambda w: w * self._reduced_density(w), 0.0, w_max, limit=200)
        return self.constants.hbar * value

    def sideband_kernel(self, nu_max: float, step: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        K(ν) = ∫₀^τmax (C_pn(τ) − ⟨B⟩²) e^{iντ} dτ on a symmetric uniform ν grid.

        Args:
            nu_max: Half-span of the ν grid (1/ps)
            step: ν spacing (1/ps)

        Returns:
            (nu, K) arrays; cached per (nu_max, step)
        """
        key = (round(nu_max, 12), round(step, 15))
        with self._kernel_lock:
            cached = self._kernel_cache.get(key)
            if cached is not None:
                return cached

            n = int(np.ceil(nu_max / step))
            nu = np.arange(-n, n + 1) * step
            if self.enabled:
                tau, residual = self.sideband_correlation()
                kernel = half_line_transform(tau, residual, nu, method="fft")
            else:
                kernel = np.zeros(nu.shape, dtype=complex)
            logger.debug(f"Sideband kernel computed on {nu.size} points")
            self._kernel_cache[key] = (nu, kernel)
            return nu, kernel


def phonon_rates(ds: DressedState, Delta_Lx: float, bath: PhononBath) -> PhononRates:
    """
    The four drive-dependent phonon scattering rates Γ^{σ+}, Γ^{σ−}, Γ^{cd}, Γ_u.

    Args:
        ds: Dressed state (supplies Ω_R and η)
        Delta_Lx: Laser-exciton detuning ω_L − ω_x (meV)
        bath: Phonon bath

    Returns:
        PhononRates in μeV

    Raises:
        QuadratureError: if an integrand has not decayed at the end of the τ grid
    """
    if not bath.enabled or ds.Omega_R == 0.0:
        return PhononRates.zero()

    c = bath.constants
    numerics = bath.numerics
    omega_r = c.angular(ds.Omega_R)
    delta = c.angular(Delta_Lx)
    eta = c.angular(ds.eta)

    tau, phi = bath.time_grid()
    damping = np.exp(-c.angular(numerics.epsilon) * tau)
    half_damping = np.exp(-0.5 * c.angular(numerics.epsilon) * tau)

    cosh_m1 = np.cosh(phi) - 1.0
    sinh = np.sinh(phi)
    exp_m1 = np.expm1(phi)
    cos_eta = np.cos(eta * tau)

    # f(τ) = (Δ² cos ητ + Ω_R²)/η², written to stay finite as η → 0
    f = 1.0 - (delta / eta) ** 2 * 2.0 * np.sin(0.5 * eta * tau) ** 2
    if ds.eta < numerics.series_eta:
        sin_over_eta = tau
    else:
        sin_over_eta = np.sin(eta * tau) / eta

    common = (cosh_m1 * f + sinh * cos_eta).real
    detuned = (exp_m1 * delta * sin_over_eta).imag
    undamped = {
        "gamma_sig_plus": common - detuned,
        "gamma_sig_minus": common + detuned,
        "gamma_cd": (sinh * cos_eta - cosh_m1 * f).real,
        "gamma_u": sinh * sin_over_eta,
    }
    integrands = {name: values * damping for name, values in undamped.items()}

    for name, values in integrands.items():
        peak = float(np.max(np.abs(values)))
        if peak > 0.0 and abs(values[-1]) > numerics.tail_tolerance * peak:
            raise QuadratureError(name, float(abs(values[-1]) / peak))

    prefactor = 0.5 * omega_r ** 2
    rates = {
        "gamma_sig_plus": prefactor * trapezoid(integrands["gamma_sig_plus"], tau),
        "gamma_sig_minus": prefactor * trapezoid(integrands["gamma_sig_minus"], tau),
        "gamma_cd": prefactor * trapezoid(integrands["gamma_cd"], tau),
        "gamma_u": 0.5j * omega_r ** 3 * trapezoid(integrands["gamma_u"], tau),
    }

    # Rates must not depend on the convergence factor
    for name in rates:
        halved = trapezoid(undamped[name] * half_damping, tau)
        reference = trapezoid(integrands[name], tau)
        scale = max(abs(reference), 1e-3 * trapezoid(np.abs(integrands[name]), tau), 1e-300)
        if abs(halved - reference) > EPSILON_TOLERANCE * scale:
            logger.warning(f"{name} changes by {abs(halved - reference) / scale:.2%} when epsilon is halved")

    result = PhononRates(**{k: c.rate_uev(v) for k, v in rates.items()})
    logger.debug(f"Phonon rates at Ω_R={ds.Omega_R:.4f}, Δ_Lx={Delta_Lx:+.4f}: {result}")
    return result
