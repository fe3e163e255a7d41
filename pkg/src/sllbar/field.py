"""R^3-valued spectral fields and the Landau-Lifshitz-Baryakhtar operators.

The magnetization u, and the noise coefficient fields, are stored as 3 x N
coefficient arrays in the Neumann cosine basis.  Nonlinear products are
always formed pointwise on the M-grid and truncated back to N modes
(pseudo-spectral with 2x padding); there is no convolution path.

Model constants are fixed: chi = 1/4 and unit damping/gyromagnetic
constants, so H_eff = Laplacian(u) + 2(1 - |u|^2) u and the drift is

    -Lap u - Lap^2 u + 2(1 - |u|^2) u + 2 Lap(|u|^2 u) - u x Lap u.

The diagonal linear part has per-mode multiplier l_k = lambda_k -
lambda_k^2 + 2 (the 2u piece of the cubic is counted as linear); the
remainder is handled pseudo-spectrally.  This split is what the stiff
integrator relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Basis, forward, inverse, sobolev_norm_sq

__all__ = [
    "VectorField",
    "laplacian",
    "bilaplacian",
    "cubic",
    "effective_field",
    "cross_laplacian",
    "drift",
    "drift_via_effective_field",
    "drift_nonlinear",
    "linear_multipliers",
]


@dataclass(frozen=True, eq=False)
class VectorField:
    """An R^3-valued field, component c and mode k stored as coeffs[c, k]."""

    coeffs: np.ndarray
    basis: Basis

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (3, self.basis.modes):
            raise ValueError(f"coefficients must have shape (3, {self.basis.modes}), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, basis: Basis) -> "VectorField":
        return cls(np.zeros((3, basis.modes)), basis)

    @classmethod
    def constant(cls, basis: Basis, vec) -> "VectorField":
        """Spatially constant field with pointwise value `vec`."""
        c = np.zeros((3, basis.modes))
        c[:, 0] = np.asarray(vec, dtype=float) * np.sqrt(basis.length)
        return cls(c, basis)

    @classmethod
    def from_grid(cls, grid_values: np.ndarray, basis: Basis) -> "VectorField":
        return cls(forward(np.asarray(grid_values, dtype=float), basis), basis)

    def grid_values(self) -> np.ndarray:
        """Pointwise values on the collocation grid, shape (3, M)."""
        return inverse(self.coeffs, self.basis)

    def norm_sq(self, s: int) -> float:
        return sobolev_norm_sq(self.coeffs, self.basis, s)

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_shared_basis(self, other)
        return VectorField(self.coeffs + other.coeffs, self.basis)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_shared_basis(self, other)
        return VectorField(self.coeffs - other.coeffs, self.basis)

    def __mul__(self, a: float) -> "VectorField":
        return VectorField(self.coeffs * float(a), self.basis)

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return VectorField(-self.coeffs, self.basis)


def _check_shared_basis(u: VectorField, v: VectorField) -> None:
    if u.basis != v.basis:
        raise ValueError("fields combined in one operation must share a basis")


def laplacian(u: VectorField) -> VectorField:
    return VectorField(-u.basis.eigenvalues * u.coeffs, u.basis)


def bilaplacian(u: VectorField) -> VectorField:
    return VectorField(u.basis.eigenvalues**2 * u.coeffs, u.basis)


def cubic(u: VectorField) -> VectorField:
    """Dealiased |u|^2 u: formed pointwise on the M-grid, truncated to N."""
    ug = u.grid_values()
    if not np.all(np.isfinite(ug)):
        raise ValueError("non-finite grid values in cubic term")
    return VectorField(forward((ug * ug).sum(axis=0) * ug, u.basis), u.basis)


def effective_field(u: VectorField) -> VectorField:
    """H_eff = Lap u + 2u - 2 |u|^2 u, with the cubic dealiased."""
    lam = u.basis.eigenvalues
    return VectorField((2.0 - lam) * u.coeffs - 2.0 * cubic(u).coeffs, u.basis)


def cross_laplacian(u: VectorField) -> VectorField:
    """Dealiased pointwise cross product u x (Lap u)."""
    ug = u.grid_values()
    lap_g = inverse(-u.basis.eigenvalues * u.coeffs, u.basis)
    return VectorField(forward(np.cross(ug, lap_g, axis=0), u.basis), u.basis)


def linear_multipliers(basis: Basis) -> np.ndarray:
    """Per-mode multiplier of the diagonal drift part: lambda - lambda^2 + 2."""
    lam = basis.eigenvalues
    return lam - lam**2 + 2.0


def drift_nonlinear(u: VectorField) -> VectorField:
    """Drift minus its diagonal linear part: -2(1 + lambda)(|u|^2 u) - u x Lap u."""
    lam = u.basis.eigenvalues
    c = -2.0 * (1.0 + lam) * cubic(u).coeffs - cross_laplacian(u).coeffs
    return VectorField(c, u.basis)


def drift(u: VectorField) -> VectorField:
    """Full deterministic drift, diagonal linear part plus dealiased remainder."""
    return VectorField(
        linear_multipliers(u.basis) * u.coeffs + drift_nonlinear(u).coeffs, u.basis
    )


def drift_via_effective_field(u: VectorField) -> VectorField:
    """Independent drift assembly H_eff - Lap H_eff - u x H_eff.

    H_eff is evaluated pointwise on the grid (no intermediate truncation),
    so u x H_eff = u x Lap u holds exactly pointwise; agreement with
    ``drift`` is the strongest algebraic self-check of the module.
    """
    lam = u.basis.eigenvalues
    ug = u.grid_values()
    lap_g = inverse(-lam * u.coeffs, u.basis)
    heff_g = lap_g + 2.0 * (1.0 - (ug * ug).sum(axis=0)) * ug
    heff_c = forward(heff_g, u.basis)
    c = (1.0 + lam) * heff_c - forward(np.cross(ug, heff_g, axis=0), u.basis)
    return VectorField(c, u.basis)
