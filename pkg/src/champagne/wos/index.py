"""Flat arrays describing the bubbles for the compiled nearest-obstacle query.

Two levels: clusters (nets sharing a centre, e.g. all shells of one ball)
and groups (one net each). Every group stores radial bounds so the query
can skip it with one distance evaluation:

* ring groups (circle nets with equal angular spacing) are searched in O(1)
  by rounding the polar angle;
* hash groups (nets on 2-spheres) are searched through a sorted cell hash
  around the radial projection of the query point, which is exact because
  the distance to points on a sphere is monotone in the angle;
* point groups (free-form bubbles) are scanned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RING, HASH, POINTS = 0, 1, 2
POINT_LIKE = 1e-300  # radii below this are simulated as capture points


@dataclass(frozen=True, eq=False)
class ObstacleIndex:
    d: int
    arrays: tuple
    n_bubbles: int
    n_groups: int
    n_clusters: int
    min_radius: float
    point_like: int
    coord_scale: float

    @classmethod
    def build(cls, cfg) -> "ObstacleIndex":
        d = cfg.d
        centers = np.ascontiguousarray(cfg.centers, dtype=np.float64).reshape(-1, d)
        radii = np.exp(cfg.log_radii)
        point_like = int(np.count_nonzero(radii < POINT_LIKE))
        radii = np.where(radii < POINT_LIKE, 0.0, radii)
        pos = radii[radii > 0]
        min_r = float(pos.min()) if pos.size else 0.0

        # group records by cluster key: nets with the same centre and tag
        recs = list(cfg.shells)
        covered = np.zeros(len(cfg), bool)
        for r in recs:
            covered[r.start:r.stop] = True
        if not covered.all():
            from ..config import ShellRecord

            left = np.flatnonzero(~covered)
            recs.append(ShellRecord(0, tuple([0.0] * d), 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0,
                                    int(left[0]), int(left[-1]) + 1, "points"))
        clusters: dict[tuple, list] = {}
        for r in recs:
            if r.stop <= r.start:
                continue
            key = ("p", r.start) if r.kind == "points" else (r.group, tuple(np.round(r.center, 15)))
            clusters.setdefault(key, []).append(r)

        g_kind, g_center, g_Rmin, g_Rmax, g_r = [], [], [], [], []
        g_start, g_n, g_hoff, g_h, g_nc, g_lo = [], [], [], [], [], []
        c_center, c_Rmin, c_Rmax, c_rmax, c_g0, c_g1 = [], [], [], [], [], []
        keys_all, idx_all = [], []
        hoff = 0
        for members in clusters.values():
            c_g0.append(len(g_kind))
            lo_c, hi_c, rmax_c = math.inf, 0.0, 0.0
            for r in members:
                sl = slice(r.start, r.stop)
                pts = centers[sl]
                rr = radii[sl]
                n = r.stop - r.start
                if r.kind == "points":
                    c = pts.mean(axis=0)
                    dist = np.linalg.norm(pts - c, axis=1)
                    Rmin, Rmax = 0.0, float(dist.max())
                    kind = POINTS
                else:
                    c = np.asarray(r.center, dtype=float)
                    Rmin = Rmax = float(r.R)
                    kind = RING if d == 2 else HASH
                h, nc, lo = 0.0, 0, np.zeros(d)
                if kind == HASH:
                    h, nc, lo, keys, order = _sphere_hash(pts, c, r.R, r.sep)
                    keys_all.append(keys)
                    idx_all.append(order + r.start)
                g_kind.append(kind)
                g_center.append(c)
                g_Rmin.append(Rmin)
                g_Rmax.append(Rmax)
                g_r.append(float(rr.max()))
                g_start.append(r.start)
                g_n.append(n)
                g_hoff.append(hoff)
                g_h.append(h)
                g_nc.append(nc)
                g_lo.append(lo)
                if kind == HASH:
                    hoff += n
                lo_c = min(lo_c, Rmin)
                hi_c = max(hi_c, Rmax)
                rmax_c = max(rmax_c, float(rr.max()))
            c_center.append(g_center[c_g0[-1]])
            if any(r.kind == "points" for r in members) or len(
                {tuple(np.round(gc, 15)) for gc in g_center[c_g0[-1]:]}
            ) > 1:
                # mixed centres: fall back to a bounding ball
                cc = g_center[c_g0[-1]]
                ext = max(float(np.linalg.norm(g_center[g] - cc)) + g_Rmax[g]
                          for g in range(c_g0[-1], len(g_kind)))
                lo_c, hi_c = 0.0, ext
            c_Rmin.append(lo_c)
            c_Rmax.append(hi_c)
            c_rmax.append(rmax_c)
            c_g1.append(len(g_kind))

        f8, i8 = np.float64, np.int64
        arrays = (
            centers,
            np.ascontiguousarray(radii, f8),
            np.array(g_kind, i8),
            np.array(g_center, f8).reshape(-1, d),
            np.array(g_Rmin, f8),
            np.array(g_Rmax, f8),
            np.array(g_r, f8),
            np.array(g_start, i8),
            np.array(g_n, i8),
            np.array(g_hoff, i8),
            np.array(g_h, f8),
            np.array(g_nc, i8),
            np.array(g_lo, f8).reshape(-1, d),
            np.concatenate(keys_all).astype(i8) if keys_all else np.zeros(0, i8),
            np.concatenate(idx_all).astype(i8) if idx_all else np.zeros(0, i8),
            np.array(c_center, f8).reshape(-1, d),
            np.array(c_Rmin, f8),
            np.array(c_Rmax, f8),
            np.array(c_rmax, f8),
            np.array(c_g0, i8),
            np.array(c_g1, i8),
        )
        scale = float(np.abs(centers).max()) if len(centers) else 1.0
        lo, hi = cfg.domain.bbox
        scale = max(scale, float(np.abs(lo).max()), float(np.abs(hi).max()), 1e-300)
        return cls(d, arrays, len(centers), len(g_kind), len(c_g0), min_r, point_like, scale)


def _sphere_hash(pts, c, R, sep):
    """Cell hash with cell size >= covering radius (sep/3)."""
    h = max(sep / 3.0, 1e-12 * R) * (1.0 + 1e-9)
    lo = c - R - h
    nc = int(math.ceil((2.0 * R + 2.0 * h) / h)) + 2
    cell = np.floor((pts - lo) / h).astype(np.int64)
    keys = (cell[:, 0] * nc + cell[:, 1]) * nc + cell[:, 2]
    order = np.argsort(keys, kind="stable")
    return h, nc, lo, keys[order], order
