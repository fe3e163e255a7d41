"""Flow maps for the jump vector field u -> u x h + g.

A mark l acts on the state by running the ODE du/dt = l (u x h + g) for
unit time (the canonical jump convention that preserves the chain rule).
Because the jump field acts pointwise and affinely, the flow is solved per
grid point and the spectral truncation is applied once, after the time-1
evaluation.

Closed form per grid point: with n = h/|h| and a = l t |h|, the homogeneous
part is the Rodrigues rotation of u about n through angle -a, and the g
forcing contributes

    l t [ sinc(a) g_perp + ((cos a - 1)/a) (n x g) + (g.n) n ],

which reduces to u + l t g wherever h = 0 (taking n = 0 there).  A fixed
step RK4 integration of the same ODE is kept as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import VectorField, _check_shared_basis
from .noise import LevyMeasure
from .spectral import forward

__all__ = [
    "NoiseCoefficients",
    "jump_field",
    "marcus_flow",
    "jump_increment",
    "flow_remainder",
    "drift_correction",
]


@dataclass(frozen=True, eq=False)
class NoiseCoefficients:
    """The pair (h, g) driving the jump field u x h + g.

    h plays the bounded-gradient role, g the finite-energy role; both are
    band-limited spectral fields here.  Grid values and the unit axis field
    n = h/|h| are cached because every flow evaluation needs them.
    """

    h: VectorField
    g: VectorField
    h_grid: np.ndarray = dc_field(init=False, repr=False)
    g_grid: np.ndarray = dc_field(init=False, repr=False)
    h_norm: np.ndarray = dc_field(init=False, repr=False)
    h_dir: np.ndarray = dc_field(init=False, repr=False)
    h_max: float = dc_field(init=False, repr=False)
    _g_par: np.ndarray = dc_field(init=False, repr=False)
    _g_perp: np.ndarray = dc_field(init=False, repr=False)
    _n_cross_g: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        _check_shared_basis(self.h, self.g)
        hg = self.h.grid_values()
        gg = self.g.grid_values()
        hn = np.sqrt((hg * hg).sum(axis=0))
        n = np.divide(hg, hn, out=np.zeros_like(hg), where=hn > 0)
        g_par = (n * gg).sum(axis=0)
        object.__setattr__(self, "h_grid", hg)
        object.__setattr__(self, "g_grid", gg)
        object.__setattr__(self, "h_norm", hn)
        object.__setattr__(self, "h_dir", n)
        object.__setattr__(self, "h_max", float(hn.max()) if hn.size else 0.0)
        object.__setattr__(self, "_g_par", g_par)
        object.__setattr__(self, "_g_perp", gg - g_par * n)
        object.__setattr__(self, "_n_cross_g", np.cross(n, gg, axis=0))

    @property
    def basis(self):
        return self.h.basis


def jump_field(u: VectorField, nc: NoiseCoefficients) -> VectorField:
    """Dealiased u x h + g."""
    _check_shared_basis(u, nc.h)
    cross = np.cross(u.grid_values(), nc.h_grid, axis=0)
    return VectorField(forward(cross, u.basis) + nc.g.coeffs, u.basis)


def _flow_grid_closed(l: float, t: float, u_grid: np.ndarray, nc: NoiseCoefficients) -> np.ndarray:
    n = nc.h_dir
    a = (l * t) * nc.h_norm
    cos_a = np.cos(a)
    sin_a = np.sin(a)
    # rotation about n through angle -a (Rodrigues)
    n_dot_u = (n * u_grid).sum(axis=0)
    rot = cos_a * u_grid - sin_a * np.cross(n, u_grid, axis=0) + (1.0 - cos_a) * n_dot_u * n
    s1 = np.sinc(a / np.pi)
    half = np.sin(0.5 * a)
    s2 = np.divide(-2.0 * half * half, a, out=np.zeros_like(a), where=a != 0)
    forcing = (l * t) * (s1 * nc._g_perp + s2 * nc._n_cross_g + nc._g_par * n)
    return rot + forcing


def _flow_grid_rk4(
    l: float, t: float, u_grid: np.ndarray, nc: NoiseCoefficients, n_steps: int
) -> np.ndarray:
    hg, gg = nc.h_grid, nc.g_grid

    def rhs(v):
        return l * (np.cross(v, hg, axis=0) + gg)

    v = u_grid.copy()
    dt = t / n_steps
    for _ in range(n_steps):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * dt * k1)
        k3 = rhs(v + 0.5 * dt * k2)
        k4 = rhs(v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v


def flow_grid_values(
    l: float,
    u_grid: np.ndarray,
    nc: NoiseCoefficients,
    method: str = "closed_form",
    time: float = 1.0,
    rk4_steps: int = 100,
) -> np.ndarray:
    """Pointwise flow on pre-synthesized grid values (no truncation applied)."""
    if method == "closed_form":
        return _flow_grid_closed(l, time, u_grid, nc)
    if method == "rk4":
        return _flow_grid_rk4(l, time, u_grid, nc, rk4_steps)
    raise ValueError(f"unknown flow method {method!r}")


def marcus_flow(
    l: float,
    u: VectorField,
    nc: NoiseCoefficients,
    method: str = "closed_form",
    *,
    time: float = 1.0,
    rk4_steps: int = 100,
) -> VectorField:
    """Time-`time` solution of du/dt = l (u x h + g) from u, truncated to N."""
    if abs(l) > 1.0:
        raise ValueError(f"mark l={l} outside the unit ball")
    _check_shared_basis(u, nc.h)
    if l == 0.0:
        return VectorField(u.coeffs.copy(), u.basis)
    out = flow_grid_values(l, u.grid_values(), nc, method, time, rk4_steps)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite state in flow evaluation")
    return VectorField(forward(out, u.basis), u.basis)


def jump_increment(
    l: float, u: VectorField, nc: NoiseCoefficients, method: str = "closed_form"
) -> VectorField:
    """Flow displacement Phi(l, u) - u; exactly zero at l = 0."""
    if l == 0.0:
        return VectorField.zeros(u.basis)
    return marcus_flow(l, u, nc, method) - u


def flow_remainder(
    l: float, u: VectorField, nc: NoiseCoefficients, method: str = "closed_form"
) -> VectorField:
    """Second-order remainder Phi(l, u) - u - l (u x h + g); O(l^2) for small l."""
    if l == 0.0:
        return VectorField.zeros(u.basis)
    return jump_increment(l, u, nc, method) - l * jump_field(u, nc)


def drift_correction(u: VectorField, nc: NoiseCoefficients, measure: LevyMeasure) -> VectorField:
    """Exact atomic-measure integral of the flow remainder: sum_j w_j H(l_j, u)."""
    out = VectorField.zeros(u.basis)
    for mark, weight in zip(measure.marks, measure.weights):
        out = out + weight * flow_remainder(float(mark), u, nc)
    return out
