"""
Polaron master equation on the 4-dimensional space of vectorized 2×2 density
matrices.

Vectorization is column stacking, so A·ρ·B maps to (Bᵀ ⊗ A)·vec(ρ). The
generator is in 1/ps.
"""
import logging
from typing import Dict, Iterable, Optional

import numpy as np
from scipy.linalg import expm

from qdmollow.models.physics import (
    CONSTANTS,
    DensityMatrix,
    DressedState,
    Liouvillian,
    PhononRates,
    PhotonRates,
    PhysicalConstants,
    SystemParams,
)
from qdmollow.services.dressed_system import NUMBER, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, coherent_hamiltonian
from qdmollow.utils.errors import DegenerateSteadyStateError, PositivityError, UnphysicalRatesError
from qdmollow.utils.quadrature import is_uniform

logger = logging.getLogger(__name__)

IDENTITY = np.eye(2, dtype=complex)
PART_NAMES = ("coherent", "photon", "phonon", "background_SE", "pure_dephasing")

NULL_SPACE_TOLERANCE = 1e-9
POSITIVITY_TOLERANCE = 1e-8


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix, dtype=complex).reshape(-1, order="F")


def unvec(vector: np.ndarray) -> np.ndarray:
    return np.asarray(vector, dtype=complex).reshape(2, 2, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    return np.kron(IDENTITY, a)


def spost(b: np.ndarray) -> np.ndarray:
    return np.kron(b.T, IDENTITY)


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ρ ↦ A ρ B"""
    return np.kron(b.T, a)


def dissipator(op: np.ndarray) -> np.ndarray:
    """L[O]ρ = O ρ O† − ½{O†O, ρ}"""
    op_dag = op.conj().T
    n = op_dag @ op
    return sprepost(op, op_dag) - 0.5 * spre(n) - 0.5 * spost(n)


def trace_functional(op: np.ndarray) -> np.ndarray:
    """Row vector r with r·vec(X) = Tr[op X]"""
    return vec(op.T)


def build_liouvillian(params: SystemParams, ds: DressedState, pn: PhononRates, ph: PhotonRates,
                      constants: PhysicalConstants = CONSTANTS) -> Liouvillian:
    """
    Assemble the generator from its five named parts.

    Args:
        params: System parameters (Δ_xL, γ_b, γ_d)
        ds: Dressed state (Ω_R)
        pn: Phonon rates for the same (Ω_R, Δ_Lx)
        ph: Photon rates for the same (Ω_R, Δ_Lx)

    Returns:
        Liouvillian with the summed generator and its parts

    Raises:
        UnphysicalRatesError: if the undriven population decay rate is not positive
    """
    rate = constants.rate_per_ps
    gamma_p = rate(ph.Gamma_p)
    sig_plus = rate(pn.gamma_sig_plus.real)
    sig_minus = rate(pn.gamma_sig_minus.real)
    background = rate(params.gamma_b)

    population_decay = background + gamma_p + sig_plus + sig_minus
    if population_decay <= 0.0:
        raise UnphysicalRatesError(
            f"undriven decay rate {constants.rate_uev(population_decay):.4g} μeV "
            f"(Γ'={ph.Gamma_p:.4g}, Γσ+={pn.gamma_sig_plus.real:.4g}, Γσ-={pn.gamma_sig_minus.real:.4g})"
        )

    h = coherent_hamiltonian(ds, params) / constants.hbar
    parts: Dict[str, np.ndarray] = {"coherent": -1j * (spre(h) - spost(h))}

    m = rate(ph.M_p)
    n = rate(ph.N_p)
    k = rate(ph.K_p)
    parts["photon"] = (
        gamma_p * dissipator(SIGMA_MINUS)
        # M'[σ⁺, σ_z ρ] + H.c.
        + m * (spre(SIGMA_PLUS @ SIGMA_Z) - sprepost(SIGMA_Z, SIGMA_PLUS))
        + np.conj(m) * (spost(SIGMA_Z @ SIGMA_MINUS) - sprepost(SIGMA_MINUS, SIGMA_Z))
        - n * (spre(NUMBER) - spost(NUMBER))
        + k * sprepost(SIGMA_PLUS, SIGMA_PLUS)
        + np.conj(k) * sprepost(SIGMA_MINUS, SIGMA_MINUS)
    )

    cd = rate(pn.gamma_cd.real)
    u = rate(pn.gamma_u)
    flip = SIGMA_PLUS - SIGMA_MINUS
    parts["phonon"] = (
        sig_plus * dissipator(SIGMA_PLUS)
        + sig_minus * dissipator(SIGMA_MINUS)
        - cd * (sprepost(SIGMA_PLUS, SIGMA_PLUS) + sprepost(SIGMA_MINUS, SIGMA_MINUS))
        # Γ_u(σ⁺σ⁻ρ(σ⁺−σ⁻) + σ⁻ρ) + H.c.
        - u * (sprepost(NUMBER, flip) + spre(SIGMA_MINUS))
        - np.conj(u) * (sprepost(flip.conj().T, NUMBER) + spost(SIGMA_PLUS))
    )

    parts["background_SE"] = background * dissipator(SIGMA_MINUS)
    parts["pure_dephasing"] = rate(params.gamma_d) * dissipator(NUMBER)

    generator = sum(parts[name] for name in PART_NAMES)
    for part in parts.values():
        part.flags.writeable = False
    return Liouvillian(generator=generator, parts=parts)


def _null_space_dimension(generator: np.ndarray) -> int:
    singular = np.linalg.svd(generator, compute_uv=False)
    scale = max(float(singular[0]), 1e-300)
    return int(np.sum(singular <= NULL_SPACE_TOLERANCE * scale))


def steady_state(L: Liouvillian) -> DensityMatrix:
    """
    Unique stationary state, from the generator with its trace row replaced by
    the normalization constraint.

    Raises:
        DegenerateSteadyStateError: if the zero eigenvalue is not simple
        PositivityError: if the steady state has an eigenvalue below −1e−8
    """
    generator = np.array(L.generator)
    if _null_space_dimension(generator) != 1:
        raise DegenerateSteadyStateError("generator does not have a unique stationary state")

    system = generator.copy()
    system[0, :] = trace_functional(IDENTITY)
    rhs = np.zeros(4, dtype=complex)
    rhs[0] = 1.0
    rho = unvec(np.linalg.solve(system, rhs))
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real

    residual = float(np.linalg.norm(generator @ vec(rho)))
    lowest = float(np.linalg.eigvalsh(rho).min())
    logger.debug(f"Steady state: ρ_ee={rho[1, 1].real:.6f}, residual={residual:.2e}, λ_min={lowest:.2e}")
    if lowest < -POSITIVITY_TOLERANCE:
        raise PositivityError(f"steady state has eigenvalue {lowest:.3e}")
    return DensityMatrix(matrix=rho)


def evolve(L: Liouvillian, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """vec(ρ(t)) = exp(L t)·vec(ρ0)"""
    if t < 0:
        raise ValueError("evolve requires t >= 0")
    rho = unvec(expm(np.asarray(L.generator) * t) @ vec(rho0.matrix))
    return DensityMatrix(matrix=0.5 * (rho + rho.conj().T))


def propagate(L: Liouvillian, operator: np.ndarray, tau_grid: np.ndarray) -> np.ndarray:
    """
    exp(L τ)·vec(X) for every τ on the grid; rows are vectorized matrices.

    A uniform grid is stepped with a single one-step propagator.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    generator = np.asarray(L.generator)
    start = vec(operator)
    out = np.empty((tau_grid.size, 4), dtype=complex)
    if tau_grid.size == 0:
        return out

    if tau_grid.size > 2 and is_uniform(tau_grid):
        step = expm(generator * (tau_grid[1] - tau_grid[0]))
        current = expm(generator * tau_grid[0]) @ start
        for i in range(tau_grid.size):
            out[i] = current
            current = step @ current
        return out

    for i, tau in enumerate(tau_grid):
        out[i] = expm(generator * tau) @ start
    return out


def two_time_correlation(L: Liouvillian, rho_ss: DensityMatrix, tau_grid: np.ndarray) -> np.ndarray:
    """g(τ) = Tr[σ⁺ exp(Lτ)(σ⁻ρ_ss)] by the quantum regression theorem"""
    states = propagate(L, SIGMA_MINUS @ rho_ss.matrix, tau_grid)
    return states @ trace_functional(SIGMA_PLUS)


def eigenvalues(L: Liouvillian) -> np.ndarray:
    return np.linalg.eigvals(np.asarray(L.generator))


def slowest_decay(L: Liouvillian) -> float:
    """Smallest |Re λ| over the non-stationary eigenvalues (1/ps)"""
    values = eigenvalues(L)
    order = np.argsort(np.abs(values))
    rates = np.abs(values[order[1:]].real)
    return float(rates.min())


def positivity_monitor(L: Liouvillian, states: Iterable[DensityMatrix], duration: float,
                       steps: int = 50) -> float:
    """
    Evolve each state over [0, duration] and return the most negative eigenvalue seen.
    """
    grid = np.linspace(0.0, duration, steps + 1)
    lowest = np.inf
    for state in states:
        for row in propagate(L, state.matrix, grid):
            rho = unvec(row)
            rho = 0.5 * (rho + rho.conj().T)
            lowest = min(lowest, float(np.linalg.eigvalsh(rho).min()))
    return float(lowest)


def random_states(count: int, seed: Optional[int] = 0) -> list:
    """Random valid two-level states, uniform in the Bloch ball"""
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        r = rng.uniform() ** (1.0 / 3.0)
        x, y, z = r * direction
        rho = 0.5 * np.array([[1 - z, x - 1j * y], [x + 1j * y, 1 + z]])
        states.append(DensityMatrix(matrix=rho))
    return states
