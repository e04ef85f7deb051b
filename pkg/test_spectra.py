"""
Tests for the polarization and projected spectra and the peak analytics.
"""
import numpy as np
import pytest

from qdmollow.models.physics import CONSTANTS, PhononRates, SpectrumSeries, SystemParams
from qdmollow.models.schemas import NumericsConfig, PhononConfig, SpectrumConfig
from qdmollow.services.dressed_system import dressed_states
from qdmollow.services.master_equation import build_liouvillian, steady_state
from qdmollow.services.phonon_bath import PhononBath, phonon_rates
from qdmollow.services.photon_rates import photon_rates
from qdmollow.services.photon_reservoir import FlatReservoir
from qdmollow.services.spectra import (
    compute_series,
    find_peaks,
    ibm_spectrum,
    polarization_spectrum,
    projected_spectrum,
    sideband_asymmetry,
    sideband_positions,
    spectrum_grid,
)
from qdmollow.utils.errors import SpectrumAnalysisError, UnresolvedDecayError


def _system(res, bath, Omega=1.0, Delta_xL=0.0, gamma_d=7.8):
    params = SystemParams.from_detuning(800.0, Delta_xL, Omega=Omega, gamma_b=1.5, gamma_d=gamma_d)
    ds = dressed_states(params, bath.displacement_average())
    pn = phonon_rates(ds, params.Delta_Lx, bath) if bath.enabled else PhononRates.zero()
    L = build_liouvillian(params, ds, pn, photon_rates(ds, params.Delta_Lx, res, bath))
    return L, steady_state(L)


def _lorentzian(x, x0, width, height):
    return height / (1.0 + ((x - x0) / width) ** 2)


def test_mollow_triplet_height_ratio(no_bath):
    L, rho = _system(FlatReservoir(4.5), no_bath, Omega=1.0, gamma_d=0.0)
    values = polarization_spectrum(L, rho, no_bath, np.array([799.0, 800.0, 801.0]), 800.0)
    assert values[0] / values[1] == pytest.approx(1.0 / 3.0, rel=2e-2)
    assert values[2] / values[1] == pytest.approx(1.0 / 3.0, rel=2e-2)


def test_mollow_triplet_positions_and_symmetry(flat, no_bath):
    L, rho = _system(flat, no_bath, Omega=1.0)
    grid = spectrum_grid(800.0, 1.0, SpectrumConfig(points=20001))
    series = compute_series(L, rho, no_bath, flat, grid, 800.0)
    positions = sorted(p.omega for p in series.peaks)
    assert positions == pytest.approx([799.0, 800.0, 801.0], abs=1e-3)
    assert np.allclose(series.S0, series.S0[::-1], rtol=1e-8, atol=1e-12 * series.S0.max())
    assert sideband_asymmetry(series, 800.0) == pytest.approx(1.0, rel=1e-6)


def test_phonon_dressed_splitting_is_renormalized_drive(flat, bath_4k):
    params = SystemParams.from_detuning(800.0, 0.0, Omega=1.0, gamma_b=1.5, gamma_d=7.8)
    B_avg = bath_4k.displacement_average()
    ds = dressed_states(params, B_avg)
    pn = phonon_rates(ds, params.Delta_Lx, bath_4k)
    ph = photon_rates(ds, params.Delta_Lx, flat, bath_4k)
    grid = spectrum_grid(800.0, 1.0, SpectrumConfig(points=20001))

    def splitting(rates):
        L = build_liouvillian(params, ds, rates, ph)
        series = compute_series(L, steady_state(L), bath_4k, flat, grid, 800.0)
        lower, upper = sideband_positions(series, 800.0)
        return upper - lower

    expected = 2.0 * B_avg * 1.0
    without_shift = pn.model_copy(update={"gamma_u": complex(pn.gamma_u.real, 0.0)})
    assert splitting(without_shift) == pytest.approx(expected, rel=1e-2)
    # Im Γ_u alone widens the splitting
    assert splitting(pn) / expected - 1.0 > 1.5e-2


def test_phonon_sideband_favors_lower_energies(flat, bath_4k):
    L, rho = _system(flat, bath_4k, Omega=1.0)
    grid = spectrum_grid(800.0, 1.0, SpectrumConfig(points=20001))
    series = compute_series(L, rho, bath_4k, flat, grid, 800.0)
    assert sideband_asymmetry(series, 800.0) > 1.0


@pytest.mark.parametrize("method", ["fft", "quadrature"])
def test_zero_phonon_methods_agree(flat, no_bath, method):
    L, rho = _system(flat, no_bath, Omega=0.5)
    grid = np.linspace(798.8, 801.2, 41)
    reference = polarization_spectrum(L, rho, no_bath, grid, 800.0)
    numerics = NumericsConfig(zpl_method=method)
    values = polarization_spectrum(L, rho, no_bath, grid, 800.0, numerics)
    assert np.allclose(values, reference, atol=1e-3 * reference.max())


def test_time_domain_transforms_agree(flat, no_bath):
    L, rho = _system(flat, no_bath, Omega=0.5)
    grid = np.linspace(798.8, 801.2, 41)
    fft = polarization_spectrum(L, rho, no_bath, grid, 800.0, NumericsConfig(zpl_method="fft"))
    quadrature = polarization_spectrum(L, rho, no_bath, grid, 800.0, NumericsConfig(zpl_method="quadrature"))
    assert np.max(np.abs(fft - quadrature)) <= 1e-6 * quadrature.max()


def test_unresolved_zero_phonon_decay(flat, no_bath):
    L, rho = _system(flat, no_bath, Omega=0.5)
    numerics = NumericsConfig(zpl_method="fft", zpl_decay_factor=0.5)
    with pytest.raises(UnresolvedDecayError) as info:
        polarization_spectrum(L, rho, no_bath, np.linspace(799.0, 801.0, 11), 800.0, numerics)
    assert info.value.quantity == "zero-phonon correlation"


def test_unresolved_phonon_correlation(flat, bath_4k):
    L, rho = _system(flat, bath_4k, Omega=0.5)
    short = PhononBath(PhononConfig(), NumericsConfig(tau_max=0.5, dtau=0.005))
    with pytest.raises(UnresolvedDecayError) as info:
        polarization_spectrum(L, rho, short, np.linspace(799.0, 801.0, 11), 800.0)
    assert info.value.quantity == "phonon correlation"


def test_find_peaks_on_synthetic_lines():
    x = np.linspace(0.0, 3.0, 3001)
    y = _lorentzian(x, 1.00037, 0.05, 1.0) + _lorentzian(x, 2.0, 0.05, 0.5)
    peaks = find_peaks(x, y, 0.01, center=1.0)
    assert [p.omega for p in peaks] == pytest.approx([1.00037, 2.0], abs=1e-4)
    assert peaks[0].height == pytest.approx(y.max(), rel=1e-3)
    assert [p.is_sideband for p in peaks] == [False, True]
    assert len(find_peaks(x, y, 0.6)) == 1
    assert find_peaks(x, np.zeros_like(x), 0.1) == []


@pytest.mark.parametrize("threshold", [0.0, 1.0, -0.2])
def test_find_peaks_rejects_threshold(threshold):
    with pytest.raises(ValueError):
        find_peaks(np.arange(5.0), np.ones(5), threshold)


def test_missing_sideband_is_reported():
    x = np.linspace(-1.0, 1.0, 401)
    y = _lorentzian(x, 0.0, 0.05, 1.0)
    series = SpectrumSeries(omega_grid=x, S0=y, SP=y)
    with pytest.raises(SpectrumAnalysisError):
        sideband_asymmetry(series, 0.0)
    with pytest.raises(ValueError):
        sideband_asymmetry(series, 0.0, which="S1")


def test_projected_spectrum(flat, waveguide):
    grid = np.linspace(795.0, 805.0, 101)
    S0 = _lorentzian(grid, 800.0, 1.0, 2.0)
    assert np.array_equal(projected_spectrum(S0, flat, grid), S0)
    SP = projected_spectrum(S0, waveguide, grid, normalize=True)
    assert SP.max() == pytest.approx(1.0)
    assert np.all(SP >= 0)
    with pytest.raises(ValueError):
        projected_spectrum(S0[:-1], flat, grid)


def test_weak_excitation_spectrum(bath_4k, no_bath):
    grid = np.array([799.0, 800.0, 801.0])
    bare = ibm_spectrum(no_bath, grid, 800.0, 3.0)
    assert bare[1] == pytest.approx(2.0 / CONSTANTS.rate_per_ps(3.0))
    assert bare[0] == pytest.approx(bare[2])
    dressed = ibm_spectrum(bath_4k, grid, 800.0, 3.0)
    assert dressed[0] > dressed[2]


def test_spectrum_grid_windows(flat, waveguide):
    mollow = spectrum_grid(800.0, 0.4, SpectrumConfig(points=11))
    assert mollow[0] == pytest.approx(797.5) and mollow[-1] == pytest.approx(802.5)
    wide = SpectrumConfig(points=11, window="wide", half_width=0.5, wide_margin=1.0)
    grid = spectrum_grid(800.0, 0.4, wide, waveguide)
    assert grid[0] < 795.1 and grid[-1] > 804.9
    assert spectrum_grid(800.0, 0.4, wide, flat)[0] == pytest.approx(799.5)
