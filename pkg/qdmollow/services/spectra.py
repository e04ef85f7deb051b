"""
Emission spectra: polarization spectrum S₀, projected spectrum S_P, and peak analytics.

S₀(ω) = Re ∫₀^∞ dτ [C_pn(τ) g(τ) − ⟨B⟩² g(∞)] e^{iν τ}, ν = (ω_L − ω)/ħ, with
g(τ) = ⟨σ⁺(τ)σ⁻(0)⟩_ss. The dressing is split as C_pn = ⟨B⟩² + (C_pn − ⟨B⟩²):
the first term gives the zero-phonon line, the second the phonon sideband.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.signal import find_peaks as locate_maxima

from qdmollow.models.physics import DensityMatrix, Liouvillian, Peak, PhysicalConstants, SpectrumSeries
from qdmollow.models.schemas import NumericsConfig, SpectrumConfig
from qdmollow.services.dressed_system import SIGMA_MINUS, SIGMA_PLUS
from qdmollow.services.master_equation import slowest_decay, trace_functional, two_time_correlation, vec
from qdmollow.services.phonon_bath import PhononBath
from qdmollow.services.photon_reservoir import PhotonReservoir
from qdmollow.utils.errors import SpectrumAnalysisError, UnresolvedDecayError
from qdmollow.utils.quadrature import half_line_transform

logger = logging.getLogger(__name__)


def _detector_offsets(omega_grid: np.ndarray, omega_L: float, constants: PhysicalConstants) -> np.ndarray:
    return constants.angular(omega_L - np.asarray(omega_grid, dtype=float))


def _zero_phonon_resolvent(L: Liouvillian, rho_ss: DensityMatrix, nu: np.ndarray) -> np.ndarray:
    """
    ∫₀^∞ (g(τ) − g(∞)) e^{iντ} dτ = −Tr[σ⁺ (L + iν)⁻¹ y], y = σ⁻ρ − Tr(σ⁻ρ)ρ.

    The stationary direction is deflated so the solve is regular at ν = 0;
    y is traceless, so the deflation does not change the solution.
    """
    generator = np.asarray(L.generator)
    rho = vec(rho_ss.matrix)
    identity_row = trace_functional(np.eye(2))
    y = vec(SIGMA_MINUS @ rho_ss.matrix) - rho_ss.coherence * rho

    shift = max(1.0, float(np.abs(generator).max()))
    deflated = generator - shift * np.outer(rho, identity_row)
    systems = deflated[None, :, :] + 1j * nu[:, None, None] * np.eye(4)[None, :, :]
    rhs = np.broadcast_to(y[:, None], (nu.size, 4, 1))
    solutions = np.linalg.solve(systems, rhs)[..., 0]
    return -(solutions @ trace_functional(SIGMA_PLUS))


def _zero_phonon_time_domain(L: Liouvillian, rho_ss: DensityMatrix, nu: np.ndarray,
                             numerics: NumericsConfig, method: str) -> np.ndarray:
    """Same integral on a long uniform τ grid, τ_max = factor / slowest decay"""
    tau_max = numerics.zpl_decay_factor / slowest_decay(L)
    fastest = float(np.max(np.abs(np.linalg.eigvals(np.asarray(L.generator)).imag))) + float(np.max(np.abs(nu)))
    dtau = min(0.1 * np.pi / max(fastest, 1e-12), tau_max / 16.0)
    tau = np.linspace(0.0, tau_max, int(np.ceil(tau_max / dtau)) + 1)

    g = two_time_correlation(L, rho_ss, tau)
    limit = np.conj(rho_ss.coherence) * rho_ss.coherence
    fluct = g - limit
    residual = abs(fluct[-1]) / max(abs(fluct[0]), 1e-300)
    if residual > numerics.decay_tolerance:
        raise UnresolvedDecayError("zero-phonon correlation", residual)
    logger.debug(f"Zero-phonon transform on {tau.size} τ points up to {tau_max:.1f} ps")
    return half_line_transform(tau, fluct, nu, method=method)


def polarization_spectrum(L: Liouvillian, rho_ss: DensityMatrix, bath: PhononBath, omega_grid: np.ndarray,
                          omega_L: float, numerics: Optional[NumericsConfig] = None) -> np.ndarray:
    """
    Polarization spectrum S₀ on the detector grid.

    Args:
        L: Liouvillian
        rho_ss: Its steady state
        bath: Phonon bath (supplies ⟨B⟩ and C_pn)
        omega_grid: Detector frequencies (meV)
        omega_L: Laser frequency (meV)
        numerics: Transform settings

    Returns:
        Real array S₀(ω)

    Raises:
        UnresolvedDecayError: if a correlation has not decayed on its time grid
    """
    numerics = numerics or bath.numerics
    nu = _detector_offsets(omega_grid, omega_L, bath.constants)

    if numerics.zpl_method == "resolvent":
        zpl = _zero_phonon_resolvent(L, rho_ss, nu)
    else:
        zpl = _zero_phonon_time_domain(L, rho_ss, nu, numerics, numerics.zpl_method)

    b2 = bath.displacement_average() ** 2
    spectrum = b2 * zpl.real
    if not bath.enabled:
        return spectrum

    tau, residual = bath.sideband_correlation()
    tail = abs(residual[-1]) / max(float(np.max(np.abs(residual))), 1e-300)
    if tail > numerics.decay_tolerance:
        raise UnresolvedDecayError("phonon correlation", tail)

    g = two_time_correlation(L, rho_ss, tau)
    sideband = half_line_transform(tau, residual * g, nu, method=numerics.sideband_method)
    return spectrum + sideband.real


def projected_spectrum(S0: np.ndarray, res: PhotonReservoir, omega_grid: np.ndarray,
                       normalize: bool = False) -> np.ndarray:
    """S_P(ω) = α_P(ω)·S₀(ω), optionally scaled to unit maximum"""
    S0 = np.asarray(S0, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    if S0.shape != omega_grid.shape:
        raise ValueError(f"grid mismatch: S0 has {S0.shape}, omega_grid has {omega_grid.shape}")
    sp = np.asarray(res.propagator(omega_grid), dtype=float) * S0
    if normalize:
        peak = float(np.max(sp))
        if peak > 0:
            sp = sp / peak
    return sp


def ibm_spectrum(bath: PhononBath, omega_grid: np.ndarray, omega_x: float, linewidth: float) -> np.ndarray:
    """
    Weak-excitation spectrum of the bare dot: Re ∫ C_pn(τ) e^{−Γτ/2} e^{i(ω_x−ω)τ/ħ} dτ.

    Args:
        bath: Phonon bath
        omega_grid: Detector frequencies (meV)
        omega_x: Exciton frequency (meV)
        linewidth: Zero-phonon linewidth Γ (μeV)
    """
    c = bath.constants
    nu = c.angular(omega_x - np.asarray(omega_grid, dtype=float))
    half = 0.5 * c.rate_per_ps(linewidth)
    b2 = bath.displacement_average() ** 2
    spectrum = b2 * half / (half ** 2 + nu ** 2)
    if bath.enabled:
        tau, residual = bath.sideband_correlation()
        spectrum = spectrum + half_line_transform(tau, residual * np.exp(-half * tau), nu).real
    return spectrum


def find_peaks(omega_grid: np.ndarray, values: np.ndarray, threshold: float,
               center: Optional[float] = None) -> List[Peak]:
    """
    Local maxima above threshold·max, refined by a 3-point parabola.

    Args:
        omega_grid: Frequencies (meV)
        values: Spectrum values
        threshold: Fraction of the global maximum, in (0, 1)
        center: Laser frequency; the peak nearest to it is the central line

    Returns:
        Peaks in increasing frequency
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    omega_grid = np.asarray(omega_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    top = float(np.max(values))
    if top <= 0:
        return []

    indices, _ = locate_maxima(values, height=threshold * top, prominence=threshold * top)
    peaks = []
    for i in indices:
        omega, height = float(omega_grid[i]), float(values[i])
        if 0 < i < values.size - 1:
            x = omega_grid[i - 1:i + 2] - omega_grid[i]
            a, b, c = np.polyfit(x, values[i - 1:i + 2], 2)
            if a < 0:
                offset = -b / (2.0 * a)
                if abs(offset) <= max(abs(x[0]), abs(x[2])):
                    omega = float(omega_grid[i] + offset)
                    height = float(c - b * b / (4.0 * a))
        peaks.append(Peak(omega=omega, height=height))

    if center is not None and peaks:
        central = int(np.argmin([abs(p.omega - center) for p in peaks]))
        peaks = [p.model_copy(update={"is_sideband": k != central}) for k, p in enumerate(peaks)]
    return peaks


def _mollow_sidebands(series: SpectrumSeries, center: float, which: str, threshold: float):
    if which not in ("S0", "SP"):
        raise ValueError(f"Unknown spectrum: {which}")
    values = series.S0 if which == "S0" else series.SP
    peaks = find_peaks(series.omega_grid, values, threshold, center=center)
    central = [p for p in peaks if not p.is_sideband]
    if not central:
        raise SpectrumAnalysisError("no central peak found")
    middle = central[0].omega
    lower = [p for p in peaks if p.omega < middle]
    upper = [p for p in peaks if p.omega > middle]
    if not lower or not upper:
        raise SpectrumAnalysisError(f"missing sidebands: {len(lower)} below, {len(upper)} above the central line")
    return lower[-1], upper[0]


def sideband_asymmetry(series: SpectrumSeries, center: float, which: str = "S0",
                       threshold: float = 0.01) -> float:
    """
    Height of the lower Mollow sideband over the upper one.

    The sidebands are the peaks adjacent to the central line on either side.

    Raises:
        SpectrumAnalysisError: if either sideband is missing
    """
    lower, upper = _mollow_sidebands(series, center, which, threshold)
    return lower.height / upper.height


def sideband_positions(series: SpectrumSeries, center: float, which: str = "S0",
                       threshold: float = 0.01) -> Tuple[float, float]:
    """(lower, upper) frequencies of the Mollow sidebands"""
    lower, upper = _mollow_sidebands(series, center, which, threshold)
    return lower.omega, upper.omega


def spectrum_grid(omega_L: float, Omega: float, config: SpectrumConfig,
                  res: Optional[PhotonReservoir] = None) -> np.ndarray:
    """Uniform detector grid around ω_L; the wide window also spans the band edges"""
    half_width = config.half_width or 2.5 * max(Omega, 1.0)
    lo, hi = omega_L - half_width, omega_L + half_width
    if config.window == "wide" and res is not None:
        try:
            lo = min(lo, res.edge_frequency("lower") - config.wide_margin)
            hi = max(hi, res.edge_frequency("upper") + config.wide_margin)
        except ValueError:
            logger.debug(f"{res.kind} reservoir has no band edges; using the Mollow window")
    return np.linspace(lo, hi, config.points)


def compute_series(L: Liouvillian, rho_ss: DensityMatrix, bath: PhononBath, res: PhotonReservoir,
                   omega_grid: np.ndarray, omega_L: float, threshold: float = 0.01,
                   numerics: Optional[NumericsConfig] = None) -> SpectrumSeries:
    """S₀ and S_P on one grid, with S₀ peaks labelled relative to ω_L"""
    S0 = polarization_spectrum(L, rho_ss, bath, omega_grid, omega_L, numerics)
    SP = projected_spectrum(S0, res, omega_grid)
    peaks = find_peaks(omega_grid, S0, threshold, center=omega_L)
    return SpectrumSeries(omega_grid=np.asarray(omega_grid, dtype=float), S0=S0, SP=SP, peaks=peaks)
