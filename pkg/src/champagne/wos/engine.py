"""Walk-on-spheres estimates of hitting probabilities for champagne configs."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..config import ChampagneConfig
from ..domains import Domain
from ..errors import FlaggedTimeouts, InsideObstacle
from ..sphere_nets import uniform_on_sphere
from . import kernels
from .estimate import HitEstimate
from .index import ObstacleIndex

DEFAULT_MAX_STEPS = 1_000_000
TIMEOUT_CAP = 1e-3
# an absorption layer thinner than this (relative to the coordinate scale)
# cannot be resolved in double precision
RESOLUTION = 4e-15


def set_threads(n: int | None) -> int:
    """Use n worker threads (default: CHAMPAGNE_THREADS or all cores)."""
    import numba

    if n is None:
        env = os.environ.get("CHAMPAGNE_THREADS")
        n = int(env) if env else numba.config.NUMBA_NUM_THREADS
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


@dataclass(frozen=True)
class Tolerances:
    eps_obstacle: float
    eps_boundary: float
    max_steps: int
    resolution_limited: bool


def default_tolerances(cfg: ChampagneConfig, index: ObstacleIndex, eps_obstacle=None,
                       eps_boundary=None, max_steps=None) -> Tolerances:
    floor = RESOLUTION * index.coord_scale
    if eps_obstacle is None:
        eps_obstacle = index.min_radius / 100.0 if index.min_radius > 0 else floor
    limited = eps_obstacle < floor
    eps_obstacle = max(eps_obstacle, floor)
    if eps_boundary is None:
        eps_boundary = 1e-6 * cfg.domain.diameter
    return Tolerances(float(eps_obstacle), float(eps_boundary),
                      int(DEFAULT_MAX_STEPS if max_steps is None else max_steps), limited)


class Simulator:
    """A config plus its compiled index; reuse it for many queries."""

    def __init__(self, cfg: ChampagneConfig, index: ObstacleIndex | None = None):
        self.cfg = cfg
        self.index = index or ObstacleIndex.build(cfg)
        self.dkind, dpar = cfg.domain.kernel_params()
        self.dpar = np.ascontiguousarray(dpar, dtype=np.float64)

    def tolerances(self, eps_obstacle=None, eps_boundary=None, max_steps=None) -> Tolerances:
        return default_tolerances(self.cfg, self.index, eps_obstacle, eps_boundary, max_steps)

    def nearest_gap(self, z) -> tuple[float, tuple[str, int]]:
        """min(boundary gap, gap to nearest bubble) and what achieves it."""
        z = np.ascontiguousarray(z, dtype=np.float64).reshape(self.cfg.d)
        bg = kernels.boundary_gap(z, self.dkind, self.dpar)
        og, oid = kernels.nearest(z, np.inf, self.index.arrays)
        if oid >= 0 and og <= 0.0:
            raise InsideObstacle(f"point {z.tolist()} lies in bubble {oid}")
        if oid >= 0 and og < bg:
            return float(og), ("bubble", int(oid))
        return float(bg), ("boundary", -1)

    def nearest_bubbles(self, points) -> tuple[np.ndarray, np.ndarray]:
        pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, self.cfg.d)
        return kernels.nearest_many(pts, np.inf, self.index.arrays)

    def outcomes(self, starts, trials: int, seed: int = 0, streams=None, eps_obstacle=None,
                 eps_boundary=None, max_steps=None):
        """Raw per-trial outcome codes and step counts, shape (points, trials)."""
        if trials < 1:
            raise ValueError("trials must be >= 1")
        starts = np.ascontiguousarray(starts, dtype=np.float64).reshape(-1, self.cfg.d)
        if streams is None:
            streams = np.arange(len(starts), dtype=np.int64)
        streams = np.ascontiguousarray(streams, dtype=np.int64)
        tol = self.tolerances(eps_obstacle, eps_boundary, max_steps)
        out, steps = kernels.run_trials(starts, streams, np.uint64(seed), int(trials),
                                        tol.eps_obstacle, tol.eps_boundary, tol.max_steps,
                                        self.index.arrays, self.dkind, self.dpar)
        return out, steps, tol

    def hit_probability(self, z0, trials: int, seed: int = 0, stream: int = 0, eps_obstacle=None,
                        eps_boundary=None, max_steps=None, timeout_cap: float = TIMEOUT_CAP,
                        raise_on_timeouts: bool = True) -> HitEstimate:
        return self.hit_probabilities([z0], trials, seed, [stream], eps_obstacle, eps_boundary,
                                      max_steps, timeout_cap, raise_on_timeouts)[0]

    def hit_probabilities(self, starts, trials: int, seed: int = 0, streams=None,
                          eps_obstacle=None, eps_boundary=None, max_steps=None,
                          timeout_cap: float = TIMEOUT_CAP,
                          raise_on_timeouts: bool = True) -> list[HitEstimate]:
        starts = np.ascontiguousarray(starts, dtype=np.float64).reshape(-1, self.cfg.d)
        out, steps, _ = self.outcomes(starts, trials, seed, streams, eps_obstacle, eps_boundary,
                                      max_steps)
        res = []
        for p in range(len(starts)):
            o = out[p]
            hit = int(np.count_nonzero(o >= 0))
            bnd = int(np.count_nonzero(o == kernels.BOUNDARY))
            tmo = int(np.count_nonzero(o == kernels.TIMEOUT))
            e = HitEstimate.from_counts(hit, bnd, tmo, seed, starts[p], float(steps[p].mean()))
            if raise_on_timeouts and e.timeout_fraction > timeout_cap:
                raise FlaggedTimeouts(e, timeout_cap)
            res.append(e)
        return res


def hit_probability(z0, cfg: ChampagneConfig, trials: int, eps_obstacle=None, eps_boundary=None,
                    max_steps=None, seed: int = 0, index: ObstacleIndex | None = None,
                    timeout_cap: float = TIMEOUT_CAP) -> HitEstimate:
    return Simulator(cfg, index).hit_probability(z0, trials, seed, 0, eps_obstacle, eps_boundary,
                                                 max_steps, timeout_cap)


def nearest_gap(z, cfg: ChampagneConfig, index: ObstacleIndex | None = None):
    return Simulator(cfg, index).nearest_gap(z)


def wos_trial(z0, cfg: ChampagneConfig, index: ObstacleIndex | None, eps_obstacle: float,
              eps_boundary: float, max_steps: int, trial_seed: int, stream: int = 0):
    """One walk; returns (('obstacle', id) | ('boundary', -1) | ('timeout', -1), steps)."""
    sim = Simulator(cfg, index)
    out, steps, _ = sim.outcomes([z0], 1, trial_seed, [stream], eps_obstacle, eps_boundary,
                                 max_steps)
    o, s = int(out[0, 0]), int(steps[0, 0])
    if o >= 0:
        return ("obstacle", o), s
    return ("boundary" if o == kernels.BOUNDARY else "timeout", -1), s


def annulus_config(r: float, R: float, d: int) -> ChampagneConfig:
    """B(0, R) with the single concentric bubble closed B(0, r)."""
    return ChampagneConfig.from_points(Domain.ball(np.zeros(d), R), np.zeros((1, d)), [r])


# --------------------------------------------------------------------------
# per-shell estimates


def intermediate_radius(rec, j: int) -> float:
    """rho_n = R_k + j a_k for n = M_k + j (in config coordinates)."""
    return rec.R + j * rec.sep


def shell_subconfig(cfg: ChampagneConfig, k: int, j: int, group: int | None = None):
    """Bubbles of shell k only, inside B(c, rho_(n+1)), with the sphere rho_n."""
    recs = [s for s in cfg.shells if s.k == k and (group is None or s.group == group)]
    if not recs:
        raise KeyError(f"shell {k} not in config")
    rec = recs[0]
    if not 0 <= j < max(rec.m, 1):
        raise ValueError(f"need 0 <= j < m_k = {rec.m}")
    center = np.asarray(rec.center, dtype=float)
    rho_n = intermediate_radius(rec, j)
    rho_next = intermediate_radius(rec, j + 1)
    sub = cfg.select(recs[:1], Domain.ball(center, rho_next))
    return sub, center, rho_n, rho_next


def shell_gamma_estimate(cfg: ChampagneConfig, k: int, j: int, z_samples: int, trials: int,
                         seed: int = 0, *, extra_points=None, group: int | None = None,
                         eps_obstacle=None, timeout_cap: float = TIMEOUT_CAP) -> list[HitEstimate]:
    """H_{V_(n+1) minus E} 1_E at points of the sphere of radius rho_n, E = shell-k bubbles.

    Points are drawn uniformly on the sphere (plus ``extra_points``); the
    minimum over the returned estimates is the per-shell gamma_hat.
    """
    sub, center, rho_n, _ = shell_subconfig(cfg, k, j, group)
    rng = np.random.default_rng([seed, k, j])
    pts = center + rho_n * uniform_on_sphere(rng, z_samples, cfg.d)
    if extra_points is not None:
        pts = np.vstack([pts, np.asarray(extra_points, dtype=float).reshape(-1, cfg.d)])
    sim = Simulator(sub)
    res = []
    gaps, _ = sim.nearest_bubbles(pts)
    inside = gaps <= 0.0
    run = np.flatnonzero(~inside)
    est = sim.hit_probabilities(pts[run], trials, seed, run, eps_obstacle=eps_obstacle,
                                timeout_cap=timeout_cap) if run.size else []
    it = iter(est)
    for i in range(len(pts)):
        if inside[i]:
            res.append(HitEstimate.from_counts(trials, 0, 0, seed, pts[i], 0.0))
        else:
            res.append(next(it))
    return res


def gap_midpoints(rec, count: int = 4) -> np.ndarray:
    """Points on a shell's sphere halfway between neighbouring bubbles (d = 2),
    the places farthest from the net."""
    c = np.asarray(rec.center, dtype=float)
    n = rec.count
    j = np.linspace(0, n, count, endpoint=False).astype(int)
    th = 2.0 * math.pi * (j + 0.5) / n
    return np.column_stack((c[0] + rec.R * np.cos(th), c[1] + rec.R * np.sin(th)))
