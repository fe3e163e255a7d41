"""Piecewise-constant intensity controls, one channel per jump atom.

A control assigns a nonnegative factor theta_j(t) to atom j on each piece
of a time partition 0 = t_0 < ... < t_m = T.  Skeleton drift accepts any
nonnegative control; modulating a jump process additionally requires the
values to stay inside [1/n, n] for some finite n, i.e. strictly positive
and bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Control"]


@dataclass(frozen=True, eq=False)
class Control:
    breakpoints: np.ndarray  # (m + 1,), increasing, starting at 0
    values: np.ndarray  # (m, n_atoms), nonnegative

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("breakpoints must be a 1-d array with at least two entries")
        if bp[0] != 0.0:
            raise ValueError("time partition must start at 0")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if vals.ndim != 2 or vals.shape[0] != bp.size - 1:
            raise ValueError("values must have shape (n_pieces, n_atoms)")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("control values must be finite and nonnegative")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def horizon(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n_atoms(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, value, horizon: float, n_atoms: int) -> "Control":
        """Single-piece control, one shared or per-atom constant value."""
        vals = np.broadcast_to(np.asarray(value, dtype=float), (n_atoms,))
        return cls(np.array([0.0, float(horizon)]), vals.reshape(1, -1).copy())

    @classmethod
    def from_function(cls, fn, horizon: float, n_pieces: int, n_atoms: int) -> "Control":
        """Sample a scalar t -> theta(t) at piece midpoints, shared by all atoms."""
        bp = np.linspace(0.0, horizon, n_pieces + 1)
        mids = 0.5 * (bp[:-1] + bp[1:])
        col = np.array([float(fn(t)) for t in mids])
        return cls(bp, np.tile(col[:, None], (1, n_atoms)))

    def piece_index(self, t: float) -> int:
        i = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return min(max(i, 0), self.values.shape[0] - 1)

    def values_at(self, t: float) -> np.ndarray:
        """Per-atom values at time t (right-continuous; last piece covers T)."""
        return self.values[self.piece_index(t)]

    def sup_per_atom(self) -> np.ndarray:
        return self.values.max(axis=0)

    def min_value(self) -> float:
        return float(self.values.min()) if self.values.size else 1.0

    def bound(self) -> float:
        """Smallest n with all values in [1/n, n]; inf if some value is 0."""
        if self.values.size == 0:
            return 1.0
        lo = self.min_value()
        hi = float(self.values.max())
        if lo <= 0.0:
            return float("inf")
        return max(hi, 1.0 / lo, 1.0)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t_start,t_end,atom_index,theta\n")
            for i in range(self.values.shape[0]):
                for j in range(self.values.shape[1]):
                    fh.write(
                        f"{self.breakpoints[i]!r},{self.breakpoints[i + 1]!r},"
                        f"{j},{self.values[i, j]!r}\n"
                    )

    @classmethod
    def from_csv(cls, path) -> "Control":
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            expected = ["t_start", "t_end", "atom_index", "theta"]
            if [h.strip() for h in header] != expected:
                raise ValueError(f"control file must have columns {expected}, got {header}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                t0, t1, j, v = line.split(",")
                rows.append((float(t0), float(t1), int(j), float(v)))
        if not rows:
            raise ValueError("control file has no rows")
        starts = sorted({r[0] for r in rows})
        ends = sorted({r[1] for r in rows})
        bp = np.array(starts + [ends[-1]])
        n_atoms = max(r[2] for r in rows) + 1
        vals = np.full((bp.size - 1, n_atoms), np.nan)
        for t0, t1, j, v in rows:
            i = int(np.searchsorted(bp, t0))
            if not (np.isclose(bp[i], t0) and np.isclose(bp[i + 1], t1)):
                raise ValueError(f"piece ({t0}, {t1}) does not align with the time partition")
            vals[i, j] = v
        if np.any(np.isnan(vals)):
            raise ValueError("control file leaves some (piece, atom) cells unspecified")
        return cls(bp, vals)
