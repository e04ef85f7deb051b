"""
Tests for system parameters, dressed states and the coherent Hamiltonian.
"""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from qdmollow.models.physics import CONSTANTS, DressedState, SystemParams
from qdmollow.services.dressed_system import (
    NUMBER,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    coherent_hamiltonian,
    dressed_states,
)


def test_detuning_signs():
    params = SystemParams(omega_x=800.2, omega_L=800.0, Omega=1.0, gamma_b=1.5)
    assert params.Delta_xL == pytest.approx(0.2)
    assert params.Delta_Lx == pytest.approx(-0.2)


def test_from_detuning_places_exciton():
    params = SystemParams.from_detuning(800.0, -0.3, Omega=0.4, gamma_b=1.5)
    assert params.omega_x == pytest.approx(799.7)
    assert params.Delta_Lx == pytest.approx(0.3)


@pytest.mark.parametrize("field,value", [("Omega", -0.1), ("gamma_b", 0.0), ("gamma_d", -1.0)])
def test_invalid_system_params(field, value):
    kwargs = dict(omega_x=800.0, omega_L=800.0, Omega=1.0, gamma_b=1.5, gamma_d=0.0)
    kwargs[field] = value
    with pytest.raises(ValidationError):
        SystemParams(**kwargs)


def test_resonant_dressed_state():
    params = SystemParams.from_detuning(800.0, 0.0, Omega=1.0, gamma_b=1.5)
    ds = dressed_states(params, 0.9)
    assert ds.Omega_R == pytest.approx(0.9)
    assert ds.eta == pytest.approx(0.9)
    assert ds.omega_D == 800.0
    assert ds.omega_U == pytest.approx(800.9)
    assert ds.omega_Lw == pytest.approx(799.1)


def test_detuned_dressed_state():
    params = SystemParams.from_detuning(800.0, 0.3, Omega=0.5, gamma_b=1.5)
    ds = dressed_states(params, 0.8)
    assert ds.eta == pytest.approx(np.hypot(0.4, 0.3))
    assert ds.Delta_xL == pytest.approx(0.3)


def test_undriven_dressed_state():
    params = SystemParams.from_detuning(800.0, 0.0, Omega=0.0, gamma_b=1.5)
    ds = dressed_states(params, 1.0)
    assert ds.Omega_R == 0.0
    assert ds.eta == 0.0


@pytest.mark.parametrize("B_avg", [0.0, -0.5, 1.2])
def test_displacement_average_out_of_range(B_avg):
    params = SystemParams.from_detuning(800.0, 0.0, Omega=1.0, gamma_b=1.5)
    with pytest.raises(ValueError):
        dressed_states(params, B_avg)


@given(
    Omega=st.floats(0.0, 3.0),
    Delta=st.floats(-2.0, 2.0),
    B_avg=st.floats(0.05, 1.0),
)
def test_dressed_state_ordering(Omega, Delta, B_avg):
    params = SystemParams.from_detuning(800.0, Delta, Omega=Omega, gamma_b=1.5)
    ds = dressed_states(params, B_avg)
    assert ds.eta >= ds.Omega_R
    assert ds.eta >= abs(ds.Delta_xL) * (1.0 - 1e-12)
    assert ds.omega_Lw <= ds.omega_D <= ds.omega_U
    assert ds.omega_U - ds.omega_D == pytest.approx(ds.Omega_R)


def test_dressed_state_rejects_eta_below_detuning():
    with pytest.raises(ValidationError):
        DressedState(Omega_R=0.1, eta=0.2, Delta_xL=0.5, omega_D=800.0, omega_U=800.1, omega_Lw=799.9)
    ds = DressedState(Omega_R=0.4, eta=0.5, Delta_xL=-0.3, omega_D=800.0, omega_U=800.4, omega_Lw=799.6)
    assert ds.Delta_xL == -0.3


def test_coherent_hamiltonian():
    params = SystemParams.from_detuning(800.0, 0.25, Omega=1.0, gamma_b=1.5)
    ds = dressed_states(params, 0.9)
    h = coherent_hamiltonian(ds, params)
    assert np.allclose(h, h.conj().T)
    assert h[0, 1] == pytest.approx(0.45)
    assert h[1, 1] == pytest.approx(0.25)
    assert h[0, 0] == 0


def test_two_level_operators():
    assert np.allclose(SIGMA_MINUS @ np.array([0, 1]), [1, 0])
    assert np.allclose(NUMBER, np.diag([0, 1]))
    assert np.allclose(SIGMA_PLUS @ SIGMA_MINUS - SIGMA_MINUS @ SIGMA_PLUS, SIGMA_Z)


def test_unit_conversions():
    assert CONSTANTS.rate_uev(CONSTANTS.rate_per_ps(7.8)) == pytest.approx(7.8)
    assert CONSTANTS.angular(CONSTANTS.hbar) == pytest.approx(1.0)
