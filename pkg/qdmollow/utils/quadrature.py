"""
Quadrature helpers shared by the phonon and photon services.
"""
from typing import Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import czt


def gauss_legendre_panels(a: float, b: float, panels: int, order: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of a composite Gauss-Legendre rule on [a, b].

    Args:
        a: Lower limit
        b: Upper limit
        panels: Number of equal panels
        order: Nodes per panel

    Returns:
        (nodes, weights), both of length panels * order
    """
    if panels < 1 or order < 1:
        raise ValueError("panels and order must be positive")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Weights w such that w @ f equals the trapezoid rule on a (possibly nonuniform) grid."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("trapezoid rule needs at least two points")
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def is_uniform(x: np.ndarray, rtol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        return True
    dx = np.diff(x)
    return bool(np.allclose(dx, dx[0], rtol=rtol, atol=0.0))


def principal_value(x0: float, grid: np.ndarray, values: np.ndarray) -> float:
    """
    Cauchy principal value of ∫ f(x) / (x0 - x) dx over the span of ``grid``.

    Uses the subtraction form ∫ (f(x) - f(x0)) / (x0 - x) dx + f(x0) ln((x0 - a) / (b - x0)),
    which leaves a regular integrand for the trapezoid rule.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    a, b = grid[0], grid[-1]

    if x0 <= a or x0 >= b:
        return float(trapezoid(values / (x0 - grid), grid))

    f0 = float(np.interp(x0, grid, values))
    diff = x0 - grid
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = (values - f0) / diff

    # Removable singularity at grid points coinciding with x0: limit is -f'(x0)
    hit = np.isclose(diff, 0.0, rtol=0.0, atol=1e-12 * max(abs(b - a), 1.0))
    if np.any(hit):
        slope = np.gradient(values, grid)
        integrand[hit] = -slope[hit]

    return float(trapezoid(integrand, grid) + f0 * np.log((x0 - a) / (b - x0)))


def half_line_transform(tau: np.ndarray, samples: np.ndarray, nu: np.ndarray, method: str = "fft") -> np.ndarray:
    """
    Trapezoid evaluation of ∫ samples(τ) e^{iντ} dτ on a uniform τ grid for many ν.

    With ``method="fft"`` and a uniform ν grid the sum is evaluated by a chirp-z
    transform (FFT based); otherwise by a direct matrix product. Both compute the
    same trapezoid sum.
    """
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    weighted = trapezoid_weights(tau) * np.asarray(samples, dtype=complex)

    if method == "fft" and nu.size > 1 and is_uniform(nu) and is_uniform(tau):
        dtau = tau[1] - tau[0]
        dnu = nu[1] - nu[0]
        # Shift to start at ν0, then a zoom transform in steps of dν
        shifted = weighted * np.exp(1j * nu[0] * tau)
        zoomed = czt(shifted, m=nu.size, w=np.exp(1j * dnu * dtau), a=1.0)
        return zoomed * np.exp(1j * (nu - nu[0]) * tau[0])
    if method not in ("fft", "quadrature"):
        raise ValueError(f"Unknown transform method: {method}")

    out = np.empty(nu.size, dtype=complex)
    # Chunked to bound the size of the phase matrix
    chunk = 512
    for start in range(0, nu.size, chunk):
        block = nu[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * np.outer(block, tau)) @ weighted
    return out
