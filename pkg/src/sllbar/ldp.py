"""Rate cost of intensity tilts and small-noise convergence certifications.

Tilting the jump intensity by a factor theta carries the relative-entropy
cost

    L_T(theta) = sum_j w_j sum_pieces (t_{i+1} - t_i) g(theta_{i,j}),
    g(x) = x log x - x + 1,  g(0) = 1,

exact for piecewise-constant controls against an atomic mark measure.  The
full variational rate function (infimum of L_T over controls reproducing a
given path) is deliberately not minimized; the forward map and the cost
are exposed for parametric studies.

Trajectories are compared in the metric

    d(a, b) = sup_t ||a - b||_{H1} + (int_0^T ||a - b||_{H3}^2 dt)^{1/2},

evaluated on the shared recording grid.  check_condition1 certifies
continuity of the deterministic control-to-solution map along a control
sequence; check_condition2 certifies convergence of the modulated
stochastic dynamics to the deterministic skeleton as the noise scale
decreases, by plain Monte Carlo with per-trajectory independent seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .controls import Control
from .field import VectorField
from .integrator import SolverConfig, Trajectory, integrate_controlled, integrate_skeleton
from .marcus import NoiseCoefficients
from .noise import LevyMeasure

__all__ = [
    "Control",
    "rate_cost",
    "z_distance",
    "z_norm",
    "ZDistance",
    "ConvergenceReport",
    "check_condition1",
    "check_condition2",
]


def _entropy_integrand(x: np.ndarray) -> np.ndarray:
    """g(x) = x log x - x + 1 with the limit convention g(0) = 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("control values must be finite and nonnegative")
    out = np.ones_like(x)
    pos = x > 0
    xp = x[pos]
    out[pos] = xp * np.log(xp) - xp + 1.0
    return out


def rate_cost(control: Control, measure: LevyMeasure, horizon: float) -> float:
    """Exact entropy cost of the tilt over [0, horizon]."""
    if control.horizon < horizon - 1e-12:
        raise ValueError("control not defined on the whole of [0, horizon]")
    if control.n_atoms != measure.n_atoms:
        raise ValueError(
            f"control has {control.n_atoms} channels but measure has {measure.n_atoms} atoms"
        )
    if measure.n_atoms == 0:
        return 0.0
    g = _entropy_integrand(control.values)  # (pieces, atoms)
    lengths = np.minimum(control.breakpoints[1:], horizon) - np.minimum(
        control.breakpoints[:-1], horizon
    )
    return float((lengths[:, None] * g * measure.weights[None, :]).sum())


@dataclass(frozen=True)
class ZDistance:
    sup_h1: float
    l2_h3: float

    @property
    def total(self) -> float:
        return self.sup_h1 + self.l2_h3

    @property
    def squared(self) -> float:
        """sup_t ||.||_{H1}^2 + int ||.||_{H3}^2 dt (the expectation functional)."""
        return self.sup_h1**2 + self.l2_h3**2


def _check_comparable(a: Trajectory, b: Trajectory) -> None:
    if a.basis != b.basis:
        raise ValueError("trajectories live on different bases")
    if a.fields is None or b.fields is None:
        raise ValueError("trajectory comparison needs field snapshots")
    if a.n_samples != b.n_samples or not np.allclose(a.times, b.times):
        raise ValueError("trajectories were recorded on different time grids")


def z_distance(a: Trajectory, b: Trajectory) -> ZDistance:
    _check_comparable(a, b)
    w1 = a.basis.sobolev_weights(1)
    w3 = a.basis.sobolev_weights(3)
    h1_sq = np.empty(a.n_samples)
    h3_sq = np.empty(a.n_samples)
    for i in range(a.n_samples):
        d2 = (a.fields[i] - b.fields[i]) ** 2
        comp = d2.sum(axis=0)
        h1_sq[i] = (w1 * comp).sum()
        h3_sq[i] = (w3 * comp).sum()
    return ZDistance(
        sup_h1=float(np.sqrt(h1_sq.max())),
        l2_h3=float(np.sqrt(np.trapezoid(h3_sq, a.times))),
    )


def z_norm(traj: Trajectory) -> ZDistance:
    return ZDistance(
        sup_h1=float(np.sqrt(np.max(traj.h1_sq))),
        l2_h3=float(np.sqrt(np.trapezoid(traj.h3_sq, traj.times))),
    )


@dataclass
class ConvergenceReport:
    kind: str  # "condition1" | "condition2"
    columns: list
    rows: list  # list of dicts keyed by column names
    thresholds: dict
    monotone: bool
    passed: bool

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                                  for c in self.columns) + "\n")

    def verdict_text(self) -> str:
        lines = [f"report: {self.kind}"]
        for key, val in self.thresholds.items():
            lines.append(f"threshold {key} = {val}")
        lines.append(f"monotone decrease: {'yes' if self.monotone else 'NO'}")
        lines.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def check_condition1(
    theta_sequence,
    theta_limit: Control,
    u0: VectorField,
    nc: NoiseCoefficients,
    measure: LevyMeasure,
    config: SolverConfig,
    *,
    cost_bound: float,
    threshold: float | None = None,
) -> ConvergenceReport:
    """Continuity of the control-to-skeleton map along a control sequence.

    Solves the skeleton equation for each control and for the limit, and
    reports the trajectory-metric distances together with the entropy
    costs.  All controls must respect the stated cost bound.
    """
    costs = [rate_cost(th, measure, config.horizon) for th in theta_sequence]
    limit_cost = rate_cost(theta_limit, measure, config.horizon)
    for i, c in enumerate(costs + [limit_cost]):
        if c > cost_bound + 1e-12:
            raise ValueError(f"control {i} has rate cost {c} above the bound {cost_bound}")

    limit_traj = integrate_skeleton(u0, nc, measure, theta_limit, config)
    if limit_traj.status != "completed":
        raise RuntimeError(f"limit skeleton terminated with status {limit_traj.status}")

    rows = []
    for i, th in enumerate(theta_sequence):
        traj = integrate_skeleton(u0, nc, measure, th, config)
        if traj.status != "completed":
            raise RuntimeError(f"skeleton case {i} terminated with status {traj.status}")
        d = z_distance(traj, limit_traj)
        rows.append(
            {
                "case": i,
                "rate_cost": costs[i],
                "sup_h1": d.sup_h1,
                "l2_h3": d.l2_h3,
                "distance": d.total,
            }
        )

    dists = [r["distance"] for r in rows]
    monotone = all(b < a for a, b in zip(dists, dists[1:]))
    passed = monotone and (threshold is None or dists[-1] <= threshold)
    return ConvergenceReport(
        kind="condition1",
        columns=["case", "rate_cost", "sup_h1", "l2_h3", "distance"],
        rows=rows,
        thresholds={"cost_bound": cost_bound, "distance_threshold": threshold},
        monotone=monotone,
        passed=passed,
    )


def _condition2_member(args):
    (u0, nc, measure, scale, control, master_seed, eps_index, member, config,
     skeleton_fields, skeleton_times, z_cap) = args
    seed = np.random.SeedSequence(entropy=master_seed, spawn_key=(eps_index, member))
    traj = integrate_controlled(u0, nc, measure, scale, control, seed, config)
    if traj.status != "completed":
        return ("blowup", 0.0)
    w1 = traj.basis.sobolev_weights(1)
    w3 = traj.basis.sobolev_weights(3)
    n = traj.n_samples
    h1_sq = np.empty(n)
    h3_sq = np.empty(n)
    for i in range(n):
        d2 = ((traj.fields[i] - skeleton_fields[i]) ** 2).sum(axis=0)
        h1_sq[i] = (w1 * d2).sum()
        h3_sq[i] = (w3 * d2).sum()
    z = z_norm(traj).total
    if z > z_cap:
        return ("excluded", 0.0)
    metric = float(h1_sq.max() + np.trapezoid(h3_sq, traj.times))
    return ("ok", metric)


def check_condition2(
    control: Control,
    scale_list,
    ensemble: int,
    u0: VectorField,
    nc: NoiseCoefficients,
    measure: LevyMeasure,
    master_seed: int,
    config: SolverConfig,
    *,
    z_cap_factor: float = 10.0,
    exclusion_tolerance: float = 0.05,
    threads: int = 1,
) -> ConvergenceReport:
    """Small-noise convergence of the modulated dynamics to the skeleton.

    For each noise scale, estimates E[sup_t ||Y - y||_{H1}^2 +
    int ||Y - y||_{H3}^2 dt] over an ensemble of modulated trajectories Y
    against the one skeleton trajectory y.  Trajectories whose own
    trajectory norm exceeds z_cap_factor times the skeleton's (the
    stopping-time truncation, realized as exclusion) or that blow up are
    excluded and counted.
    """
    scale_list = list(scale_list)
    if not scale_list or any(not (0 < e <= 1) for e in scale_list):
        raise ValueError("scale list must be a nonempty subset of (0, 1]")
    if any(b <= a for a, b in zip(scale_list, scale_list[1:])):
        raise ValueError("scale list must be strictly decreasing")
    if not config.store_fields:
        raise ValueError("condition-2 metric needs field snapshots (store_fields=True)")

    skeleton = integrate_skeleton(u0, nc, measure, control, config)
    if skeleton.status != "completed":
        raise RuntimeError(f"skeleton terminated with status {skeleton.status}")
    z_cap = z_cap_factor * z_norm(skeleton).total

    rows = []
    for eps_index, scale in enumerate(scale_list):
        jobs = [
            (u0, nc, measure, scale, control, master_seed, eps_index, member, config,
             skeleton.fields, skeleton.times, z_cap)
            for member in range(ensemble)
        ]
        if threads == 1:
            outcomes = [_condition2_member(j) for j in jobs]
        else:
            workers = threads if threads > 0 else None
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_condition2_member, jobs))
        metrics = [m for kind, m in outcomes if kind == "ok"]
        blown = sum(1 for kind, _ in outcomes if kind == "blowup")
        capped = sum(1 for kind, _ in outcomes if kind == "excluded")
        n_used = len(metrics)
        if n_used == 0:
            raise RuntimeError(f"all trajectories excluded at scale {scale}")
        mean = float(np.mean(metrics))
        se = float(np.std(metrics, ddof=1) / math.sqrt(n_used)) if n_used > 1 else float("nan")
        rows.append(
            {
                "epsilon": scale,
                "metric_mean": mean,
                "metric_se": se,
                "excluded_fraction": (blown + capped) / ensemble,
                "blowup_fraction": blown / ensemble,
                "n_used": n_used,
            }
        )

    means = [r["metric_mean"] for r in rows]
    monotone = all(b < a for a, b in zip(means, means[1:]))
    max_excluded = max(r["excluded_fraction"] for r in rows)
    passed = monotone and max_excluded < exclusion_tolerance
    return ConvergenceReport(
        kind="condition2",
        columns=["epsilon", "metric_mean", "metric_se", "excluded_fraction"],
        rows=rows,
        thresholds={
            "z_cap_factor": z_cap_factor,
            "exclusion_tolerance": exclusion_tolerance,
            "ensemble": ensemble,
        },
        monotone=monotone,
        passed=passed,
    )
