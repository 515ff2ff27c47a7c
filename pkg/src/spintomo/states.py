"""Reference states: wavepackets, oscillator eigenstates, spinor densities."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import eval_hermite

from .grids import PhaseSpaceGrid
from .spin_frames import spin_eigenvector


def normalize_field(psi: np.ndarray, dx: float) -> np.ndarray:
    """Unit discrete L2 norm: dx * sum |psi|^2 = 1 over all components."""
    norm = math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero field")
    return psi / norm


def gaussian_packet(grid: PhaseSpaceGrid, q0: float = 0.0, p0: float = 0.0,
                    sigma: float = 1.0) -> np.ndarray:
    """Normalized Gaussian wavepacket exp(-(q-q0)^2/(4 sigma^2) + i p0 q / hbar)."""
    q = grid.q
    psi = np.exp(-((q - q0) ** 2) / (4.0 * sigma**2) + 1j * p0 * q / grid.hbar)
    return normalize_field(psi, grid.dx)


def oscillator_eigenstate(grid: PhaseSpaceGrid, k: int) -> np.ndarray:
    """k-th eigenstate of the harmonic oscillator with the grid's m, omega, hbar."""
    if k < 0:
        raise ValueError("eigenstate index must be non-negative")
    xi = np.sqrt(grid.mass * grid.omega / grid.hbar) * grid.q
    psi = eval_hermite(k, xi) * np.exp(-0.5 * xi**2)
    return normalize_field(psi.astype(complex), grid.dx)


def random_band_limited_state(grid: PhaseSpaceGrid, rng: np.random.Generator,
                              n_modes: int = 6) -> np.ndarray:
    """Random smooth wavepacket: low-order oscillator modes with random weights."""
    coeffs = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    psi = sum(c * oscillator_eigenstate(grid, k) for k, c in enumerate(coeffs))
    return normalize_field(psi, grid.dx)


def spinor_product_state(grid: PhaseSpaceGrid, spin_vector: np.ndarray,
                         spatial: np.ndarray) -> np.ndarray:
    """Pure spinor field chi (x) psi, shape (2s+1, n)."""
    chi = np.asarray(spin_vector, dtype=complex)
    chi = chi / np.linalg.norm(chi)
    return np.outer(chi, spatial).astype(complex)


def spin_coherent_state(grid: PhaseSpaceGrid, direction, s: float = 1.0,
                        m: float | None = None, q0: float = 0.0, p0: float = 0.0,
                        sigma: float = 1.0) -> np.ndarray:
    """Spin eigenstate along a direction, tensored with a Gaussian packet."""
    if m is None:
        m = s
    chi = spin_eigenvector(s, np.asarray(direction, dtype=float) /
                           np.linalg.norm(direction), m)
    return spinor_product_state(grid, chi, gaussian_packet(grid, q0, p0, sigma))
