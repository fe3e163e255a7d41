"""Cosine spectral basis for the Neumann Laplacian on an interval.

Eigenpairs of A = -d^2/dx^2 with homogeneous Neumann conditions on [0, L]:
lambda_k = (k pi / L)^2 with orthonormal eigenfunctions e_0 = (1/L)^{1/2},
e_k = (2/L)^{1/2} cos(k pi x / L).  Fields are collocated on the midpoint
grid x_m = (m + 1/2) L / M.  The composite midpoint rule integrates
cos(j pi x / L) exactly for 0 <= j < 2M, so with M >= 2N the quadrature
coefficients of a cubic of an N-band field (integrand bandwidth 4N - 4)
are exact: products formed on the grid and truncated back to N carry no
aliasing error inside the retained band.

Transforms are direct matrix applications, O(N M); at desk scale a fast
cosine transform buys nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Basis:
    """Immutable eigenbasis; safe to share across concurrent trajectories."""

    length: float
    modes: int
    grid_points: int
    eigenvalues: np.ndarray = field(init=False, repr=False)
    grid: np.ndarray = field(init=False, repr=False)
    # synthesis[m, k] = e_k(x_m); quadrature weight is length / grid_points
    synthesis: np.ndarray = field(init=False, repr=False)
    deriv_synthesis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        L, N, M = self.length, self.modes, self.grid_points
        k = np.arange(N)
        x = (np.arange(M) + 0.5) * L / M
        lam = (k * np.pi / L) ** 2
        amp = np.full(N, np.sqrt(2.0 / L))
        amp[0] = np.sqrt(1.0 / L)
        E = amp[None, :] * np.cos(np.outer(x, k) * np.pi / L)
        dE = -amp[None, :] * (k * np.pi / L)[None, :] * np.sin(np.outer(x, k) * np.pi / L)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "synthesis", E)
        object.__setattr__(self, "deriv_synthesis", dE)

    def __eq__(self, other):
        if not isinstance(other, Basis):
            return NotImplemented
        return (self.length, self.modes, self.grid_points) == (
            other.length,
            other.modes,
            other.grid_points,
        )

    def __hash__(self):
        return hash((self.length, self.modes, self.grid_points))

    @property
    def quad_weight(self) -> float:
        return self.length / self.grid_points

    def sobolev_weights(self, s: int) -> np.ndarray:
        """Diagonal weights (1 + lambda_k)^s of the discrete H^s norm."""
        if s not in (0, 1, 2, 3):
            raise ValueError(f"Sobolev order s={s} outside supported range 0..3")
        return (1.0 + self.eigenvalues) ** s


def build_basis(length: float, modes: int, grid_points: int) -> Basis:
    """Construct the basis, enforcing the M >= 2N dealiasing bound."""
    if length <= 0:
        raise ValueError(f"interval length must be positive, got {length}")
    if modes < 1:
        raise ValueError(f"mode count must be >= 1, got {modes}")
    if grid_points < 2 * modes:
        raise ValueError(
            f"grid_points={grid_points} violates the dealiasing bound 2*modes={2 * modes}"
        )
    return Basis(float(length), int(modes), int(grid_points))


def forward(grid_values: np.ndarray, basis: Basis) -> np.ndarray:
    """Midpoint-rule coefficients (f, e_k); exact for band-limited integrands.

    Accepts shape (M,) or (..., M) and transforms the last axis.
    """
    grid_values = np.asarray(grid_values, dtype=float)
    if grid_values.shape[-1] != basis.grid_points:
        raise ValueError(
            f"grid length {grid_values.shape[-1]} != basis.grid_points {basis.grid_points}"
        )
    return basis.quad_weight * (grid_values @ basis.synthesis)


def inverse(coefficients: np.ndarray, basis: Basis) -> np.ndarray:
    """Pointwise synthesis sum_k c_k e_k(x_m) on the collocation grid."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape[-1] != basis.modes:
        raise ValueError(
            f"coefficient length {coefficients.shape[-1]} != basis.modes {basis.modes}"
        )
    return coefficients @ basis.synthesis.T


def grid_derivative(coefficients: np.ndarray, basis: Basis) -> np.ndarray:
    """d/dx of the synthesized field, sampled on the grid (sine synthesis)."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape[-1] != basis.modes:
        raise ValueError(
            f"coefficient length {coefficients.shape[-1]} != basis.modes {basis.modes}"
        )
    return coefficients @ basis.deriv_synthesis.T


def project(coefficients: np.ndarray, n: int) -> np.ndarray:
    """Galerkin truncation: zero every coefficient with mode index >= n."""
    coefficients = np.asarray(coefficients, dtype=float)
    if n > coefficients.shape[-1]:
        raise ValueError(f"truncation n={n} exceeds available modes {coefficients.shape[-1]}")
    if n < 0:
        raise ValueError(f"truncation n={n} must be nonnegative")
    out = coefficients.copy()
    out[..., n:] = 0.0
    return out


def sobolev_norm_sq(coefficients: np.ndarray, basis: Basis, s: int) -> float:
    """Discrete H^s norm squared, sum_k (1+lambda_k)^s |c_k|^2 over all components."""
    coefficients = np.asarray(coefficients, dtype=float)
    if not np.all(np.isfinite(coefficients)):
        raise ValueError("coefficients must be finite")
    w = basis.sobolev_weights(s)
    return float(np.sum(w * coefficients**2))
