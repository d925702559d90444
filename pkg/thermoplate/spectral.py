"""Sine eigenbasis of the box, pseudo-spectral transforms and phase-space norms.

Coefficients are taken with respect to the L²-orthonormal basis

    e_k(x) = (2/ℓ)^{d/2} Π_i sin(k_i π x_i / ℓ),

so that the L² norm of a field is the Euclidean norm of its coefficients. The
transform pair is the orthonormal type-I DST (factor sqrt(2/(n+1)) per axis,
both directions) combined with the quadrature weight h^{d/2}, h = ℓ/(n+1);
grid values are therefore point values of the represented function, and

    Σ_k c_k² = h^d Σ_j g_j²

holds exactly (discrete Parseval).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from scipy import fft

from .constants import NormSpace
from .data_classes import BoxDomain, FloatArray, IndexRangeError, ShapeError, SpectralField, State

_LOGGER = logging.getLogger(__name__)


def eigenvalue_mu(domain: BoxDomain, k: Sequence[int]) -> float:
    """Return Σ_i (k_i π/ℓ)², the −Δ eigenvalue at multi-index k."""
    if len(k) != domain.dimension:
        raise IndexRangeError(f"multi-index {tuple(k)} has wrong length for a {domain.dimension}D box")
    for component in k:
        if not 1 <= component <= domain.modes:
            raise IndexRangeError(f"multi-index {tuple(k)} outside 1..{domain.modes}")
    return float(sum((component * math.pi / domain.length) ** 2 for component in k))


def mode_position(domain: BoxDomain, k: Sequence[int]) -> int:
    """Flat position of multi-index k in the row-major coefficient layout."""
    eigenvalue_mu(domain, k)
    position = 0
    for component in k:
        position = position * domain.modes + (component - 1)
    return position


def _grid_array(domain: BoxDomain, values: npt.ArrayLike) -> FloatArray:
    grid = np.asarray(values, dtype=np.float64)
    if grid.size != domain.mode_count:
        raise ShapeError(f"grid has {grid.size} values, expected {domain.modes}^{domain.dimension}")
    if grid.ndim not in (1, domain.dimension) or (grid.ndim == domain.dimension and grid.shape != domain.shape):
        raise ShapeError(f"grid shape {grid.shape} does not match {domain.shape}")
    return grid.reshape(domain.shape)


def dst_forward(domain: BoxDomain, values: npt.ArrayLike) -> SpectralField:
    """Sine-series analysis of grid values on the interior collocation grid."""
    grid = _grid_array(domain, values)
    coeffs = fft.dstn(grid, type=1, norm="ortho") * domain.cell_volume**0.5
    return SpectralField(domain, coeffs.reshape(-1))


def dst_inverse(field: SpectralField) -> FloatArray:
    """Grid values of a field, shaped (n,)*d."""
    domain = field.domain
    grid = fft.idstn(field.as_grid_shaped(), type=1, norm="ortho") / domain.cell_volume**0.5
    return np.asarray(grid, dtype=np.float64)


def grid_integral(domain: BoxDomain, values: npt.ArrayLike) -> float:
    """Collocation quadrature with uniform weight h^d."""
    grid = _grid_array(domain, values)
    return float(np.sum(grid.reshape(-1)) * domain.cell_volume)


def norm(field: SpectralField, space: NormSpace | str = NormSpace.L2) -> float:
    """Norm of a field in one of the spaces of the phase-space scale.

    H2 is the seminorm ‖Δu‖_{L²}, consistent with the energy identity.
    """
    space = NormSpace(space)
    coeffs = field.coeffs
    mu = field.domain.spectrum.mu
    if space is NormSpace.L2:
        weighted = coeffs
    elif space is NormSpace.H2:
        weighted = mu * coeffs
    elif space is NormSpace.H1_SEMINORM:
        weighted = np.sqrt(mu) * coeffs
    else:
        weighted = coeffs / mu
    return float(math.sqrt(float(np.dot(weighted, weighted))))


def y_norm(state: State) -> float:
    """sqrt(‖Δu‖² + ‖v‖² + ‖θ‖²), the norm of Y = H² × L² × L²."""
    return math.sqrt(y_norm_squared(state))


def y_norm_squared(state: State) -> float:
    return (
        norm(state.u, NormSpace.H2) ** 2
        + norm(state.v, NormSpace.L2) ** 2
        + norm(state.theta, NormSpace.L2) ** 2
    )


def l2_embedding_constant(domain: BoxDomain) -> float:
    """C₀ with ‖u‖² ≤ C₀‖Δu‖², i.e. 1/λ₁²."""
    return 1.0 / domain.lambda1**2


def gradient_embedding_constant(domain: BoxDomain) -> float:
    """μ₁ with ‖∇u‖² ≤ μ₁‖Δu‖², i.e. 1/λ₁."""
    return 1.0 / domain.lambda1


def inverse_laplacian_constant(domain: BoxDomain) -> float:
    """c₀ with ‖∇Δ⁻¹θ‖² ≤ c₀‖∇θ‖², i.e. 1/λ₁²."""
    return 1.0 / domain.lambda1**2


def sup_norm_constant(domain: BoxDomain) -> float:
    """Smallest K with max_j |u(x_j)| ≤ K‖Δu‖ over the retained modes.

    Follows from |e_k| ≤ (2/ℓ)^{d/2} and Cauchy–Schwarz against mu_k.
    """
    mu = domain.spectrum.mu
    return (2.0 / domain.length) ** (domain.dimension / 2) * math.sqrt(float(np.sum(1.0 / mu**2)))
