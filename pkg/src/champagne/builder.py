"""Assemble champagne configurations.

* ``build_ball_config``: shells k_lo..k_hi of the unit-ball construction,
  optionally translated and scaled.
* ``build_corollary_config``: the localized version in B(y, R) whose bubbles
  are hit with probability >= gamma from B(y, r).
* ``build_general_config``: the construction over a finite exhaustion of a
  bounded domain, one localized config per boundary net point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .config import ChampagneConfig, ShellRecord
from .domains import Domain, greedy_thin
from .errors import DisjointnessViolation, HorizonExceeded, Infeasible, ScheduleError
from .schedules import CapacityWeight, Schedule, integral_tail, shell_params
from .sphere_nets import build_net, log_net_size_bound, net_size
from .verifier import capacity_sum

R10 = 0.01  # bubble radius / distance to the boundary


# --------------------------------------------------------------------------
# thresholds


def log_ratio_r_over_a(s: Schedule, k):
    """log(r_k / a_k), vectorised."""
    la = np.asarray(s.log_alpha(k), dtype=float)
    if s.d == 2:
        with np.errstate(over="ignore", invalid="ignore"):
            out = -np.exp(-la) - s.log_a(k)
        # alpha below e^-700: r_k/a_k is far below any double
        return np.where(la < -700.0, -np.inf, out)
    return la / (s.d - 2)


def compute_k1(s: Schedule, horizon: int = 100_000) -> int:
    """Smallest k >= k0 with r_j < a_j/100 for every j >= k up to the horizon.

    The built-in families have an eventually decreasing ratio, so a clean
    stretch up to a large horizon settles the question.
    """
    ks = np.arange(s.k0, horizon + 1, dtype=float)
    lr = log_ratio_r_over_a(s, ks)
    # strict, with a margin so that r_k = a_k/100 up to rounding does not count
    bad = np.flatnonzero(~(lr < math.log(R10) - 1e-12))
    if bad.size == 0:
        return s.k0
    last = int(ks[bad[-1]])
    if last >= horizon - 1:
        raise HorizonExceeded(f"r_k < a_k/100 not reached below k={horizon} for {s.name}")
    return last + 1


def first_shell(s: Schedule, k2: int | None = None) -> int:
    k1 = compute_k1(s)
    return max(s.k0, k1, k2 if k2 is not None else k1)


# --------------------------------------------------------------------------
# audits


def audit_config(cfg: ChampagneConfig, check_r10: bool = True) -> dict:
    """Disjointness of closed bubbles and the radius/boundary-distance ratio."""
    out = {"bubbles": len(cfg)}
    if len(cfg) == 0:
        return {**out, "min_clearance": math.inf, "max_r_over_gap": 0.0}
    radii = cfg.radii
    rmax = float(radii.max())
    tree = cKDTree(cfg.centers)
    pairs = tree.query_pairs(2.0 * rmax + 1e-300, output_type="ndarray")
    clearance = math.inf
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        gap = np.linalg.norm(cfg.centers[i] - cfg.centers[j], axis=1) - radii[i] - radii[j]
        clearance = float(gap.min())
        if clearance <= 0:
            w = int(np.argmin(gap))
            raise DisjointnessViolation(
                f"bubbles {int(i[w])} and {int(j[w])} overlap (clearance {clearance:.3e})"
            )
    else:
        _, nn = tree.query(cfg.centers[: min(len(cfg), 200_000)], k=2) if len(cfg) > 1 else (None, None)
        if nn is not None:
            idx = np.arange(len(nn))
            gap = (np.linalg.norm(cfg.centers[idx] - cfg.centers[nn[:, 1]], axis=1)
                   - radii[idx] - radii[nn[:, 1]])
            clearance = float(gap.min())
    out["min_clearance"] = clearance
    if check_r10:
        gap = cfg.domain.boundary_gap(cfg.centers)
        out["max_r_over_gap"] = float((radii / gap).max())
    return out


# --------------------------------------------------------------------------
# ball configurations


def _shell_records(s: Schedule, ks, center, scale: float, start: int, level: int = 0,
                   group: int = -1, max_points: int | None = None):
    """Nets and records for shells ``ks`` mapped by z -> center + scale z."""
    pts, log_r, kk, ii, recs = [], [], [], [], []
    pos = start
    for k in ks:
        p = shell_params(s, k)
        net = build_net(center, scale * p.R, scale * p.a, s.d, max_points=max_points)
        n = len(net)
        lr = p.log_r + math.log(scale)
        pts.append(net.points)
        log_r.append(np.full(n, lr))
        kk.append(np.full(n, k, np.int64))
        ii.append(np.arange(n, dtype=np.int64))
        recs.append(ShellRecord(k, tuple(float(c) for c in center), scale * p.R, scale * p.a, lr,
                                p.alpha, p.beta, p.m, p.M, pos, pos + n, net.kind, level, group, scale))
        pos += n
    return pts, log_r, kk, ii, recs


def _assemble(d, domain, parts, schedule_meta, k_range, seed, meta) -> ChampagneConfig:
    pts, log_r, kk, ii, recs = parts
    if pts:
        cfg = ChampagneConfig(d, domain, np.concatenate(pts), np.concatenate(log_r),
                              np.concatenate(kk), np.concatenate(ii), recs, schedule_meta,
                              k_range, seed, 0.0, meta)
    else:
        cfg = ChampagneConfig(d, domain, np.zeros((0, d)), [], [], [], [], schedule_meta,
                              k_range, seed, 0.0, meta)
    return cfg


def schedule_meta(s: Schedule, w: CapacityWeight) -> dict:
    return {"schedule": s.name, "weight": w.name, "d": s.d, "k0": s.k0,
            "domain_cap": w.domain_cap}


def build_ball_config(
    s: Schedule,
    w: CapacityWeight,
    k_lo: int,
    k_hi: int,
    d: int | None = None,
    seed: int = 0,
    *,
    center=None,
    scale: float = 1.0,
    domain: Domain | None = None,
    enforce_k1: bool = True,
    audit: bool = True,
    max_points: int | None = None,
) -> ChampagneConfig:
    """Shells k_lo..k_hi (inclusive) of the unit-ball construction.

    With ``center``/``scale`` the construction is mapped by z -> center + scale z
    and placed in ``domain`` (default: the image ball).
    """
    d = s.d if d is None else d
    if d != s.d:
        raise ScheduleError(f"schedule is for d={s.d}, config asked for d={d}")
    if d not in (2, 3):
        raise ScheduleError("configs are built for d in {2, 3} only")
    if k_hi < k_lo:
        raise ScheduleError(f"empty shell range {k_lo}..{k_hi}")
    if k_lo < s.k0:
        raise ScheduleError(f"k_lo={k_lo} below k0={s.k0}")
    if enforce_k1:
        k1 = compute_k1(s)
        if k_lo < k1:
            raise ScheduleError(f"k_lo={k_lo} below k1={k1} (r_k < a_k/100 fails)")
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float).reshape(d)
    if domain is None:
        domain = Domain.unit_ball(d) if scale == 1.0 and not center.any() else Domain.ball(center, scale)
    parts = _shell_records(s, range(k_lo, k_hi + 1), center, scale, 0, max_points=max_points)
    cfg = _assemble(d, domain, parts, schedule_meta(s, w), (k_lo, k_hi), seed, {})
    cfg.capacity_sum = capacity_sum(cfg, w)
    if audit:
        cfg.meta["audit"] = audit_config(cfg)
    return cfg


# --------------------------------------------------------------------------
# the localized construction


@dataclass(frozen=True)
class CorollaryPlan:
    k_prime: int
    k_dprime: int  # exclusive: shells k_prime..k_dprime-1
    inner_ratio: float
    R_kprime: float
    log_product: float
    capacity_tail: float
    capacity_tail_bound: float
    gammas: tuple = field(repr=False, default=())

    @property
    def product(self) -> float:
        return math.exp(self.log_product)

    def to_json(self) -> dict:
        return {"k_prime": self.k_prime, "k_dprime": self.k_dprime, "inner_ratio": self.inner_ratio,
                "R_kprime": self.R_kprime, "product": self.product,
                "capacity_tail": self.capacity_tail, "capacity_tail_bound": self.capacity_tail_bound}


def _log_capacity_terms(s: Schedule, w: CapacityWeight, ks, scale: float, Rk=None):
    """log(#X_k phi(scale r_k) f(phi(scale r_k))), vectorised over ks.

    Counts use the construction's point count (upper bound form for huge k).
    """
    ks = np.asarray(ks, dtype=float)
    lR = np.zeros_like(ks) if Rk is None else np.log(Rk)
    lcount = log_net_size_bound(lR, s.log_a(ks), s.d)
    la = s.log_alpha(ks)
    if s.d == 2:
        # phi(scale r_k) = 1/(1/alpha_k - log scale), kept in log form
        lphi = la - np.log1p(-np.exp(la) * math.log(scale))
    else:
        lphi = (s.d - 2) * (s.log_a(ks) + math.log(scale)) + la
    return lcount + lphi + w.log_value(lphi)


def plan_corollary(s: Schedule, w: CapacityWeight, inner_ratio: float, scale: float,
                   gamma: float, delta_y: float, c_eff: float, k2: int | None = None,
                   horizon: int = 20_000) -> CorollaryPlan:
    """Choose k' and k'' for the localized construction in B(y, R), R = scale.

    k' is the first admissible shell with R_k' > r/R whose whole capacity tail
    (finite part to the horizon plus an integral-test bound) is below delta_y;
    k'' is the first index with prod (1 - c_eff gamma_n) <= 1 - gamma over
    the intermediate balls of shells k'..k''-1.
    """
    if not 0 < inner_ratio < 1:
        raise ValueError("need 0 < r < R")
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    if not 0 < c_eff <= 1:
        raise ValueError("c_eff must lie in (0, 1]")
    k_start = first_shell(s, k2)
    ks = np.arange(k_start, horizon + 1)
    terms = np.exp(_log_capacity_terms(s, w, ks, scale))
    tb = integral_tail(lambda k: _log_capacity_terms(s, w, k, scale), float(horizon))
    if not tb.certified:
        raise Infeasible("capacity tail of the schedule could not be bounded")
    tails = np.cumsum(terms[::-1])[::-1] + tb.value
    k_prime = None
    for idx, k in enumerate(ks):
        if s.R(int(k)) > inner_ratio and tails[idx] < delta_y:
            k_prime = int(k)
            break
    if k_prime is None:
        raise Infeasible(
            f"no k' <= {horizon} with R_k' > {inner_ratio:.6g} and capacity tail < {delta_y:.3g}"
        )
    target = math.log1p(-gamma)
    log_prod, k, gammas = 0.0, k_prime, []
    while log_prod > target:
        if k > horizon:
            raise Infeasible(f"product bound not reached below k={horizon}")
        a = s.alpha(k)
        log_prod += s.m(k) * math.log1p(-c_eff * a)
        gammas.append(a)
        k += 1
    tail_part = float(tails[k_prime - k_start])
    return CorollaryPlan(k_prime, k, inner_ratio, s.R(k_prime), log_prod,
                         float(np.sum(terms[k_prime - k_start:k - k_start])), tail_part,
                         tuple(gammas))


def build_corollary_config(
    y,
    r: float,
    R: float,
    gamma: float,
    delta_y: float,
    s: Schedule,
    w: CapacityWeight,
    c_eff: float,
    seed: int = 0,
    *,
    domain: Domain | None = None,
    k2: int | None = None,
    audit: bool = True,
) -> ChampagneConfig:
    """Bubbles in B(y, R) \\ closed B(y, r) hit with probability >= gamma from B(y, r)."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    y = np.asarray(y, dtype=float).reshape(s.d)
    plan = plan_corollary(s, w, r / R, R, gamma, delta_y, c_eff, k2)
    dom = domain or Domain.ball(y, R)
    if plan.k_dprime == plan.k_prime:
        parts = ([], [], [], [], [])
    else:
        parts = _shell_records(s, range(plan.k_prime, plan.k_dprime), y, R, 0)
    cfg = _assemble(s.d, dom, parts, schedule_meta(s, w), (plan.k_prime, plan.k_dprime - 1), seed,
                    {"corollary": {**plan.to_json(), "y": y.tolist(), "r": r, "R": R,
                                   "gamma": gamma, "delta_y": delta_y, "c_eff": c_eff}})
    cfg.capacity_sum = capacity_sum(cfg, w)
    if audit:
        cfg.meta["audit"] = audit_config(cfg, check_r10=False)
        cfg.meta["audit"]["max_s_over_ball_gap"] = _ball_gap_ratio(cfg, y, R)
    return cfg


def _ball_gap_ratio(cfg: ChampagneConfig, y, R: float) -> float:
    if len(cfg) == 0:
        return 0.0
    gap = R - np.linalg.norm(cfg.centers - y, axis=1)
    return float((cfg.radii / gap).max())


# --------------------------------------------------------------------------
# general domains


def boundary_distance(inner: Domain, outer: Domain, h: float | None = None) -> float:
    """dist(boundary of inner, boundary of outer): exact for concentric balls
    and nested boxes, otherwise a lower bound from a boundary sample."""
    if inner.kind != "box" and outer.kind != "box" and len(inner.radii) == 1 == len(outer.radii) \
            and np.allclose(inner.centers, outer.centers):
        return abs(float(outer.radii[0] - inner.radii[0]))
    if inner.kind == "box" and outer.kind == "box":
        return float(min(np.abs(inner.lo - outer.lo).min(), np.abs(outer.hi - inner.hi).min()))
    h = h or 1e-4 * max(inner.diameter, outer.diameter)
    pts = inner.boundary_points(h)
    inside = outer.contains(pts)
    dist = np.where(inside, outer.boundary_gap(pts), outer.exterior_distance(pts))
    return max(float(dist.min()) - h, 0.0)


def exhaustion_scales(dom: Domain, exhaustion: list[Domain]) -> list[float]:
    """b_n = min(1/n, dist(dV_n, dV_(n-1) u dV_(n+1)) / 2) with V_0 empty and
    the domain itself standing in for V_(L+1)."""
    levels = list(exhaustion) + [dom]
    out = []
    for n in range(1, len(exhaustion) + 1):
        V = levels[n - 1]
        gaps = [boundary_distance(V, levels[n])]
        if n > 1:
            gaps.append(boundary_distance(levels[n - 2], V))
        b = min(1.0 / n, 0.5 * min(gaps))
        if b <= 0:
            raise Infeasible(f"exhaustion levels {n - 1}..{n + 1} touch (b_{n} <= 0)")
        out.append(b)
    return out


def boundary_net(V: Domain, b: float) -> np.ndarray:
    """Y on the boundary of V: B(y, b/2) cover it, B(y, b/6) pairwise disjoint."""
    if V.kind != "box" and len(V.radii) == 1:
        return build_net(V.centers[0], float(V.radii[0]), 1.5 * b, V.d).points
    return greedy_thin(V.boundary_points(0.04 * b), 0.45 * b)


def build_general_config(
    dom: Domain,
    exhaustion: list[Domain],
    delta: float,
    s: Schedule,
    w: CapacityWeight,
    c_eff: float,
    seed: int = 0,
    *,
    audit: bool = True,
) -> ChampagneConfig:
    """Finite-exhaustion version of the construction for a bounded domain."""
    if dom.d != s.d:
        raise ScheduleError("domain and schedule dimensions differ")
    if dom.kind == "union" and not dom.is_connected():
        raise ValueError("union of balls is not connected")
    if delta <= 0:
        raise ValueError("delta must be positive")
    bs = exhaustion_scales(dom, exhaustion)
    delta_q = Fraction(delta)
    pts, log_r, kk, ii, recs = [], [], [], [], []
    levels, pos, group = [], 0, 0
    for n, (V, b) in enumerate(zip(exhaustion, bs), start=1):
        Y = boundary_net(V, b)
        dy = delta_q / (len(Y) * 2**n)
        R_y, r_y = b / 6.0, b / 7.0
        plan = plan_corollary(s, w, r_y / R_y, R_y, 0.5, float(dy), c_eff)
        for y in Y:
            p = _shell_records(s, range(plan.k_prime, plan.k_dprime), y, R_y, pos, n, group)
            for acc, part in zip((pts, log_r, kk, ii, recs), p):
                acc.extend(part)
            pos = recs[-1].stop if recs else pos
            group += 1
        levels.append({
            "n": n, "b": b, "count_Y": len(Y),
            "delta_y": f"{dy.numerator}/{dy.denominator}",
            "level_sum": str(dy * len(Y)),
            "y": Y.tolist(),
            **plan.to_json(),
        })
    meta = {"delta": delta, "levels": levels,
            "exhaustion": [V.to_json() for V in exhaustion]}
    cfg = _assemble(s.d, dom, (pts, log_r, kk, ii, recs), schedule_meta(s, w),
                    (min(l["k_prime"] for l in levels), max(l["k_dprime"] for l in levels) - 1),
                    seed, meta)
    cfg.capacity_sum = capacity_sum(cfg, w)
    if audit:
        cfg.meta["audit"] = audit_config(cfg)
        cfg.meta["audit"]["max_s_over_yball_gap"] = general_gap_ratio(cfg)
    return cfg


def general_gap_ratio(cfg: ChampagneConfig) -> float:
    """max over bubbles of s_x / (b_n/6 - |x - y|)."""
    worst = 0.0
    for rec in cfg.shells:
        c = np.asarray(rec.center)
        sl = slice(rec.start, rec.stop)
        gap = rec.scale - np.linalg.norm(cfg.centers[sl] - c, axis=1)
        worst = max(worst, float((np.exp(cfg.log_radii[sl]) / gap).max()))
    return worst


def level_delta_sums(cfg: ChampagneConfig) -> list[Fraction]:
    """Exact sum of delta_y over each level, recomputed from the metadata."""
    return [Fraction(l["delta_y"]) * l["count_Y"] for l in cfg.meta["levels"]]
