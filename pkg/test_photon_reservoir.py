"""
Tests for the photonic reservoirs and the dressed T_k integrals.
"""
import numpy as np
import pytest
from scipy.integrate import trapezoid

from qdmollow.models.schemas import (
    CoupledCavityReservoirConfig,
    FlatReservoirConfig,
    LorentzianReservoirConfig,
    TabulatedReservoirConfig,
)
from qdmollow.services.photon_rates import effective_se_rate, t_k
from qdmollow.services.photon_reservoir import (
    CoupledCavityReservoir,
    FlatReservoir,
    LorentzianReservoir,
    TabulatedReservoir,
    build_reservoir,
    mode_edge_frequency,
    physical_prefactor,
    resonance_frequencies,
)


def test_flat_reservoir_identities(flat):
    assert flat.j_ph(800.0) == pytest.approx(1.5 / (2 * np.pi))
    assert flat.markov_integral(800.0) == pytest.approx(0.75)
    assert np.all(flat.propagator(np.linspace(790, 810, 5)) == 1.0)
    assert flat.purcell_factor(800.0, 1.5) == pytest.approx(1.0)


def test_flat_t_k_is_exact_with_phonons(flat, bath_4k, no_bath):
    assert t_k(799.3, flat, bath_4k) == pytest.approx(0.75, abs=1e-12)
    assert t_k(799.3, flat, no_bath) == pytest.approx(0.75, abs=1e-12)
    assert effective_se_rate(flat, bath_4k, 800.0) == pytest.approx(1.5)


def test_flat_relaxation_function_at_zero(flat, numerics):
    value = flat.relaxation_function(np.array([0.0]), 800.0)[0]
    expected = (1.5 / (2 * np.pi)) * 2 * flat.constants.angular(numerics.window)
    assert value.real == pytest.approx(expected)


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        FlatReservoir(-1.0)
    with pytest.raises(ValueError):
        LorentzianReservoir(800.0, 0.0, 10.0)
    with pytest.raises(ValueError):
        FlatReservoir(1.5).purcell_factor(800.0, 0.0)


def test_lorentzian_markov_matches_relaxation_integral():
    cavity = LorentzianReservoir(800.0, kappa=50.0, g=20.0)
    tau = np.linspace(0.0, 600.0, 120001)
    for omega_k in (800.0, 800.02, 799.95):
        numeric = trapezoid(cavity.relaxation_function(tau, omega_k), tau)
        assert numeric == pytest.approx(cavity.markov_integral(omega_k), rel=1e-5)


def test_lorentzian_resonant_values():
    cavity = LorentzianReservoir(800.0, kappa=50.0, g=20.0)
    assert cavity.markov_integral(800.0) == pytest.approx(2 * 20.0 ** 2 / 50.0)
    assert cavity.propagator(800.0) == pytest.approx(1.0)
    assert cavity.j_ph(800.0) == pytest.approx(20.0 ** 2 / np.pi / 25.0)


def test_lorentzian_phonon_dressing_lowers_resonant_rate(bath_4k, no_bath):
    cavity = LorentzianReservoir(800.0, kappa=50.0, g=20.0)
    bare = t_k(800.0, cavity, no_bath).real
    dressed = t_k(800.0, cavity, bath_4k).real
    assert dressed < bare


def test_waveguide_is_non_negative(waveguide):
    density = waveguide.j_ph(waveguide.frequency_grid)
    assert density.min() >= -1e-12 * density.max()


def test_waveguide_mid_band_purcell_factor(waveguide):
    assert waveguide.purcell_factor(800.0, 1.5) == pytest.approx(2.0, rel=1e-9)


def test_waveguide_edges_enhance_emission(waveguide):
    lower = waveguide.edge_frequency("lower")
    upper = waveguide.edge_frequency("upper")
    assert lower == pytest.approx(796.0, abs=0.05)
    assert upper == pytest.approx(804.0, abs=0.05)
    assert waveguide.purcell_factor(lower, 1.5) > 10.0
    assert waveguide.purcell_factor(upper, 1.5) > 10.0
    assert waveguide.purcell_factor(805.0, 1.5) < 0.5
    assert waveguide.purcell_factor(795.0, 1.5) < 0.5


def test_waveguide_geometry(waveguide):
    assert waveguide.band_center() == 800.0
    assert mode_edge_frequency(waveguide, "upper") == waveguide.edge_frequency("upper")
    with pytest.raises(ValueError):
        waveguide.edge_frequency("middle")
    with pytest.raises(ValueError):
        resonance_frequencies(waveguide)


def test_waveguide_propagator(waveguide):
    alpha = waveguide.propagator(waveguide.frequency_grid)
    assert alpha.max() == pytest.approx(1.0)
    assert alpha.min() >= 0.0
    assert waveguide.propagator(800.0) < 0.01 * waveguide.propagator(waveguide.edge_frequency("lower"))


def test_waveguide_defaults():
    config = CoupledCavityReservoirConfig()
    res = CoupledCavityReservoir.from_config(config, 1.5)
    assert res.kappa_l == pytest.approx(800.0 / (2 * 52000.0) * 1e3)
    assert res.omega_l == 796.0 and res.omega_u == 804.0
    assert res.purcell_factor(800.0, 1.5) == pytest.approx(10.0, rel=1e-9)


def test_physical_prefactor_is_consistent_with_calibration():
    config = CoupledCavityReservoirConfig(pf_mid_band=None)
    res = CoupledCavityReservoir.from_config(config, 1.5)
    assert physical_prefactor(50.0, 3.17, 1.0, 800.0) > 0
    assert 1.0 < res.purcell_factor(800.0, 1.5) < 4.0


def test_waveguide_band_center_t_k_is_nearly_real(waveguide, no_bath):
    value = t_k(800.0, waveguide, no_bath)
    assert value.real == pytest.approx(np.pi * waveguide.j_ph(800.0), rel=1e-9)
    assert abs(value.imag) < 0.02 * value.real


def test_waveguide_phonon_sideband_contributes(waveguide, bath_4k, no_bath):
    bare = t_k(800.0, waveguide, no_bath)
    dressed = t_k(800.0, waveguide, bath_4k)
    assert dressed != bare
    assert dressed.real > 0


def test_tabulated_constant_behaves_as_flat(no_bath):
    omega = np.linspace(790.0, 810.0, 401)
    res = TabulatedReservoir(omega, np.ones_like(omega), np.ones_like(omega), pf_scale=1.5 / (2 * np.pi))
    value = res.markov_integral(800.0)
    assert value.real == pytest.approx(0.75, rel=1e-9)
    assert abs(value.imag) < 1e-9
    assert res.propagator(805.0) == pytest.approx(1.0)
    assert res.j_ph(820.0) == 0.0


def test_tabulated_validation():
    omega = np.array([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        TabulatedReservoir(omega[::-1], np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        TabulatedReservoir(omega, -np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        TabulatedReservoir(omega[:1], np.ones(1), np.ones(1))


def test_build_reservoir_dispatch(w1_sample):
    assert isinstance(build_reservoir(FlatReservoirConfig(gamma=2.0), 1.5), FlatReservoir)
    lorentzian = LorentzianReservoirConfig(omega_c=800.0, kappa=50.0, g=10.0)
    assert isinstance(build_reservoir(lorentzian, 1.5), LorentzianReservoir)
    assert isinstance(build_reservoir(CoupledCavityReservoirConfig(), 1.5), CoupledCavityReservoir)
    tabulated = build_reservoir(TabulatedReservoirConfig(path=w1_sample), 1.5)
    assert isinstance(tabulated, TabulatedReservoir)
    assert len(resonance_frequencies(tabulated)) == 2
