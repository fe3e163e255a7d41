"""Atomic jump measures and reproducible jump-path sampling.

The mark measure nu = sum_j w_j delta_{l_j} is finite and atomic with marks
in the punctured unit ball, so every integral against nu is an exact sum
and path sampling is elementary: under the 1/eps time scaling each atom
fires as a Poisson process of rate w_j / eps.

Controlled paths are produced by thinning: sample a dominating process at
the per-atom sup of the control and accept an event at time s with
probability theta_j(s) / sup theta_j.  Randomness comes from one
counter-based stream per (trajectory, atom), derived from a master seed,
so ensembles reproduce regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import Control

__all__ = ["LevyMeasure", "JumpPath", "sample_prm", "sample_controlled_prm", "stream"]


@dataclass(frozen=True, eq=False)
class LevyMeasure:
    marks: np.ndarray  # (K,), 0 < |l_j| <= 1, distinct
    weights: np.ndarray  # (K,), positive

    def __post_init__(self):
        marks = np.atleast_1d(np.asarray(self.marks, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if marks.shape != weights.shape or marks.ndim != 1:
            raise ValueError("marks and weights must be 1-d arrays of equal length")
        if marks.size:
            if not np.all(np.isfinite(marks)) or not np.all(np.isfinite(weights)):
                raise ValueError("marks and weights must be finite")
            if np.any(np.abs(marks) > 1.0) or np.any(marks == 0.0):
                raise ValueError("marks must satisfy 0 < |l| <= 1")
            if np.any(weights <= 0.0):
                raise ValueError("weights must be positive")
            if np.unique(marks).size != marks.size:
                raise ValueError("marks must be distinct")
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_atoms(cls, atoms) -> "LevyMeasure":
        """Build from an iterable of (mark, weight) pairs."""
        atoms = list(atoms)
        if not atoms:
            return cls.empty()
        marks, weights = zip(*atoms)
        return cls(np.asarray(marks, float), np.asarray(weights, float))

    @classmethod
    def empty(cls) -> "LevyMeasure":
        return cls(np.empty(0), np.empty(0))

    @property
    def n_atoms(self) -> int:
        return self.marks.size

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def first_moment(self) -> float:
        return float((self.weights * self.marks).sum())


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Time-sorted realized events of a (scaled, possibly controlled) jump process."""

    times: np.ndarray  # (n,), strictly increasing, in (0, T]
    atom_indices: np.ndarray  # (n,) int
    marks: np.ndarray  # (n,), mark of each event's atom
    horizon: float
    scale: float
    seed: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        idx = np.asarray(self.atom_indices, dtype=int)
        marks = np.asarray(self.marks, dtype=float)
        if not (t.shape == idx.shape == marks.shape) or t.ndim != 1:
            raise ValueError("times, atom_indices and marks must be 1-d arrays of equal length")
        if t.size:
            if np.any(np.diff(t) <= 0):
                raise ValueError("event times must be strictly increasing")
            if t[0] <= 0.0 or t[-1] > self.horizon:
                raise ValueError("event times must lie in (0, horizon]")
            if np.any(idx < 0):
                raise ValueError("atom indices must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "atom_indices", idx)
        object.__setattr__(self, "marks", marks)

    def __len__(self) -> int:
        return self.times.size

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,mark,atom_index\n")
            for t, mark, j in zip(self.times, self.marks, self.atom_indices):
                fh.write(f"{t!r},{mark!r},{j}\n")

    @classmethod
    def from_csv(cls, path, measure: LevyMeasure, horizon: float, scale: float) -> "JumpPath":
        times, idx = [], []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "t,mark,atom_index":
                raise ValueError(f"jump path file must have columns t,mark,atom_index, got {header}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                t, mark, j = line.split(",")
                j = int(j)
                if j >= measure.n_atoms:
                    raise ValueError(f"atom index {j} not in measure with {measure.n_atoms} atoms")
                if not np.isclose(float(mark), measure.marks[j]):
                    raise ValueError(f"mark {mark} does not match atom {j} of the measure")
                times.append(float(t))
                idx.append(j)
        times = np.asarray(times)
        idx = np.asarray(idx, dtype=int)
        return cls(times, idx, measure.marks[idx] if idx.size else np.empty(0),
                   horizon, scale, seed=f"replay:{path}")


def stream(seed, *key: int) -> np.random.Generator:
    """Named counter-based stream: Philox keyed by (master seed, key path)."""
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    else:
        ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _seed_label(seed) -> str:
    if isinstance(seed, np.random.SeedSequence):
        return f"entropy={seed.entropy},key={tuple(seed.spawn_key)}"
    return str(int(seed))


def _merge(per_atom_times, per_atom_idx):
    if per_atom_times:
        times = np.concatenate(per_atom_times)
        idx = np.concatenate(per_atom_idx)
    else:
        times = np.empty(0)
        idx = np.empty(0, dtype=int)
    order = np.argsort(times, kind="stable")
    return times[order], idx[order]


def sample_prm(measure: LevyMeasure, horizon: float, scale: float, rng_seed) -> JumpPath:
    """Sample the time-scaled jump process: atom j fires at rate w_j / scale."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if not (0 < scale <= 1):
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    per_times, per_idx = [], []
    for j in range(measure.n_atoms):
        gen = stream(rng_seed, j)
        count = int(gen.poisson(measure.weights[j] * horizon / scale))
        # T * (1 - U) lands in (0, T]
        times = horizon * (1.0 - gen.random(count))
        per_times.append(times)
        per_idx.append(np.full(count, j, dtype=int))
    times, idx = _merge(per_times, per_idx)
    marks = measure.marks[idx] if idx.size else np.empty(0)
    return JumpPath(times, idx, marks, horizon, scale, seed=_seed_label(rng_seed))


def sample_controlled_prm(
    measure: LevyMeasure, control: Control, horizon: float, scale: float, rng_seed
) -> JumpPath:
    """Thinned sampling of the control-modulated process.

    Atom j gets intensity theta_j(t) w_j / scale: events of the dominating
    process at rate (sup_t theta_j) w_j / scale are kept with probability
    theta_j(s) / sup_t theta_j.  Requires a strictly positive, bounded
    control (the admissible class); theta = 0 pieces are rejected.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if not (0 < scale <= 1):
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    if measure.n_atoms != control.n_atoms:
        raise ValueError(
            f"control has {control.n_atoms} channels but measure has {measure.n_atoms} atoms"
        )
    if measure.n_atoms and not np.isfinite(control.bound()):
        raise ValueError("control must be strictly positive and bounded for jump modulation")
    if control.horizon < horizon - 1e-12:
        raise ValueError("control horizon shorter than sampling horizon")
    sup = control.sup_per_atom()
    per_times, per_idx = [], []
    for j in range(measure.n_atoms):
        gen = stream(rng_seed, j)
        count = int(gen.poisson(sup[j] * measure.weights[j] * horizon / scale))
        times = horizon * (1.0 - gen.random(count))
        accept_prob = np.array([control.values_at(t)[j] for t in times]) / sup[j]
        keep = gen.random(count) < accept_prob
        per_times.append(times[keep])
        per_idx.append(np.full(int(keep.sum()), j, dtype=int))
    times, idx = _merge(per_times, per_idx)
    marks = measure.marks[idx] if idx.size else np.empty(0)
    return JumpPath(times, idx, marks, horizon, scale, seed=_seed_label(rng_seed))
