"""Monte Carlo side of the hitting-probability bounds.

Per-shell minima gamma_hat_n, the calibrated constant c_eff used by the
localized construction, and per-level estimates for exhaustion configs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .builder import build_ball_config, plan_corollary
from .config import ChampagneConfig
from .domains import Domain
from .potential import one_bubble_barrier
from .schedules import CapacityWeight, Schedule
from .wos.engine import TIMEOUT_CAP, Simulator, gap_midpoints, shell_gamma_estimate
from .wos.estimate import HitEstimate


def min_estimate(estimates) -> HitEstimate:
    """The estimate with the smallest p_hat (ties: the larger sigma)."""
    return min(estimates, key=lambda e: (e.p_hat, -e.sigma))


@dataclass
class ShellMinimum:
    k: int
    estimate: HitEstimate
    alpha: float
    barrier: float | None = None  # barrier value at the minimising point
    points: list = field(default_factory=list, repr=False)

    @property
    def ratio(self) -> float:
        return self.estimate.p_hat / self.alpha


def shell_minima(cfg: ChampagneConfig, ks=None, z_samples: int = 8, trials: int = 10_000,
                 seed: int = 0, gap_points: int = 2, max_j: int = 1,
                 eps_obstacle=None, timeout_cap: float = TIMEOUT_CAP) -> dict[int, ShellMinimum]:
    """gamma_hat for each shell: the minimum estimate over random points on the
    intermediate sphere plus (d = 2) gap midpoints, over the first ``max_j``
    intermediate spheres of the shell."""
    ks = sorted({r.k for r in cfg.shells}) if ks is None else list(ks)
    out = {}
    for k in ks:
        rec = cfg.shells_for(k)[0]
        extra = gap_midpoints(rec, gap_points) if cfg.d == 2 and gap_points else None
        ests = []
        for j in range(min(max(rec.m, 1), max_j)):
            ex = extra if j == 0 else None
            ests += shell_gamma_estimate(cfg, k, j, z_samples, trials, seed, extra_points=ex,
                                         group=rec.group, eps_obstacle=eps_obstacle,
                                         timeout_cap=timeout_cap)
        best = min_estimate(ests)
        bar = _barrier_at(cfg, rec, best.start)
        out[k] = ShellMinimum(k, best, rec.alpha, bar, ests)
    return out


def _barrier_at(cfg: ChampagneConfig, rec, z) -> float | None:
    """Barrier of the nearest bubble of the shell at z, or None when z is in it."""
    sl = slice(rec.start, rec.stop)
    dist = np.linalg.norm(cfg.centers[sl] - np.asarray(z), axis=1)
    i = int(np.argmin(dist))
    if dist[i] <= math.exp(rec.log_radius):
        return None
    return one_bubble_barrier(z, cfg.centers[rec.start + i], 0.0, rec.sep, cfg.d,
                              log_r=rec.log_radius)


@dataclass
class Calibration:
    c_eff: float
    raw_min_ratio: float
    minima: dict

    def to_json(self) -> dict:
        return {"c_eff": self.c_eff, "raw_min_ratio": self.raw_min_ratio,
                "shells": {str(k): {"gamma_hat": m.estimate.p_hat, "sigma": m.estimate.sigma,
                                    "alpha": m.alpha, "ratio": m.ratio}
                           for k, m in self.minima.items()}}


def calibrate_c_eff(s: Schedule, w: CapacityWeight, ks, z_samples: int = 8,
                    trials: int = 10_000, seed: int = 0, enforce_k1: bool = True) -> Calibration:
    """c_eff = min_n gamma_hat_n / gamma_n over the shells ``ks`` of the unit
    ball, clamped to (0, 1] so the planner stays conservative."""
    ks = list(ks)
    cfg = build_ball_config(s, w, min(ks), max(ks), audit=False, enforce_k1=enforce_k1)
    minima = shell_minima(cfg, ks, z_samples, trials, seed)
    raw = min(m.ratio for m in minima.values())
    if not raw > 0:
        raise ValueError("a shell was never hit; cannot calibrate c_eff")
    return Calibration(min(raw, 1.0), raw, minima)


def corollary_shells(s: Schedule, w: CapacityWeight, inner_ratio: float, scale: float,
                     gamma: float, delta_y: float, k2: int | None = None) -> range:
    """Shells the localized construction uses when c_eff = 1 (the most it can be)."""
    plan = plan_corollary(s, w, inner_ratio, scale, gamma, delta_y, 1.0, k2)
    return range(plan.k_prime, plan.k_dprime)


# --------------------------------------------------------------------------
# exhaustion levels


def level_subconfig(cfg: ChampagneConfig, n: int) -> tuple[ChampagneConfig, Domain, Domain]:
    """Level-n bubbles inside V_(n+1) (the domain itself past the last level)."""
    ex = [Domain.from_json(v) for v in cfg.meta["exhaustion"]]
    if not 1 <= n <= len(ex):
        raise ValueError(f"level {n} not in 1..{len(ex)}")
    outer = ex[n] if n < len(ex) else cfg.domain
    sub = cfg.select([r for r in cfg.shells if r.level == n], outer)
    return sub, ex[n - 1], outer


def level_eta_estimates(cfg: ChampagneConfig, z_samples: int = 10, trials: int = 2000,
                        seed: int = 0, timeout_cap: float = TIMEOUT_CAP) -> dict[int, HitEstimate]:
    """eta_hat_n: minimum over points z of the boundary of V_n of the chance to
    hit level-n bubbles before leaving V_(n+1)."""
    out = {}
    for lvl in cfg.meta["levels"]:
        n = int(lvl["n"])
        sub, V, _ = level_subconfig(cfg, n)
        rng = np.random.default_rng([seed, n])
        pts = V.sample_boundary(z_samples, rng)
        sim = Simulator(sub)
        gaps, _ = sim.nearest_bubbles(pts)
        inside = gaps <= 0.0
        run = np.flatnonzero(~inside)
        ests = [HitEstimate.from_counts(trials, 0, 0, seed, p, 0.0) for p in pts[inside]]
        if run.size:
            ests += sim.hit_probabilities(pts[run], trials, seed, run + 1000 * n,
                                          timeout_cap=timeout_cap)
        out[n] = min_estimate(ests)
    return out
