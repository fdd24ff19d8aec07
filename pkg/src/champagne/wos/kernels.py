"""Compiled walk-on-spheres kernels.

Outcome codes: >= 0 is the id of the bubble hit, -1 an exit through the
domain boundary, -2 a walk cut off at max_steps.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .rng import trial_key, uniform

BOUNDARY = -1
TIMEOUT = -2
TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _dist(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        t = a[i] - b[i]
        s += t * t
    return math.sqrt(s)


@njit(cache=True)
def boundary_gap(z, dkind, dpar):
    d = z.shape[0]
    if dkind == 0:  # ball: centre, radius
        s = 0.0
        for i in range(d):
            t = z[i] - dpar[i]
            s += t * t
        return dpar[d] - math.sqrt(s)
    if dkind == 1:  # box: lo, hi
        g = np.inf
        for i in range(d):
            g = min(g, z[i] - dpar[i], dpar[d + i] - z[i])
        return g
    m = int(dpar[0])  # union of balls
    g = -np.inf
    for b in range(m):
        off = 1 + b * (d + 1)
        s = 0.0
        for i in range(d):
            t = z[i] - dpar[off + i]
            s += t * t
        g = max(g, dpar[off + d] - math.sqrt(s))
    return g


@njit(cache=True)
def _search_keys(keys, lo, hi, key):
    """First position in keys[lo:hi] holding ``key``, or -1."""
    a, b = lo, hi
    while a < b:
        mid = (a + b) >> 1
        if keys[mid] < key:
            a = mid + 1
        else:
            b = mid
    if a < hi and keys[a] == key:
        return a
    return -1


@njit(cache=True)
def nearest(z, cap, ix):
    """Smallest |z - x| - r_x below ``cap`` and its bubble id (-1 if none)."""
    (centers, radii, g_kind, g_center, g_Rmin, g_Rmax, g_r, g_start, g_n, g_hoff,
     g_h, g_nc, g_lo, hkeys, hidx, c_center, c_Rmin, c_Rmax, c_rmax, c_g0, c_g1) = ix
    best = cap
    bid = -1
    for c in range(c_center.shape[0]):
        dc = _dist(z, c_center[c])
        lb = max(dc - c_Rmax[c], c_Rmin[c] - dc, 0.0) - c_rmax[c]
        if lb >= best:
            continue
        for g in range(c_g0[c], c_g1[c]):
            dg = _dist(z, g_center[g])
            lb = max(dg - g_Rmax[g], g_Rmin[g] - dg, 0.0) - g_r[g]
            if lb >= best:
                continue
            kind = g_kind[g]
            start = g_start[g]
            n = g_n[g]
            if kind == 0:
                ang = math.atan2(z[1] - g_center[g, 1], z[0] - g_center[g, 0])
                j0 = int(math.floor(ang * n / TWO_PI + 0.5))
                for dj in range(-1, 2):
                    j = (j0 + dj) % n
                    i = start + j
                    gap = _dist(z, centers[i]) - radii[i]
                    if gap < best:
                        best = gap
                        bid = i
            elif kind == 1:
                R = g_Rmax[g]
                h = g_h[g]
                nc = g_nc[g]
                if dg > 0.0:
                    px = g_center[g, 0] + R * (z[0] - g_center[g, 0]) / dg
                    py = g_center[g, 1] + R * (z[1] - g_center[g, 1]) / dg
                    pz = g_center[g, 2] + R * (z[2] - g_center[g, 2]) / dg
                else:
                    px, py, pz = g_center[g, 0], g_center[g, 1], g_center[g, 2] + R
                cx = int(math.floor((px - g_lo[g, 0]) / h))
                cy = int(math.floor((py - g_lo[g, 1]) / h))
                cz = int(math.floor((pz - g_lo[g, 2]) / h))
                lo = g_hoff[g]
                hi = lo + n
                for ax in range(cx - 1, cx + 2):
                    for ay in range(cy - 1, cy + 2):
                        for az in range(cz - 1, cz + 2):
                            if ax < 0 or ay < 0 or az < 0 or ax >= nc or ay >= nc or az >= nc:
                                continue
                            key = (ax * nc + ay) * nc + az
                            pos = _search_keys(hkeys, lo, hi, key)
                            if pos < 0:
                                continue
                            while pos < hi and hkeys[pos] == key:
                                i = hidx[pos]
                                gap = _dist(z, centers[i]) - radii[i]
                                if gap < best:
                                    best = gap
                                    bid = i
                                pos += 1
            else:
                for i in range(start, start + n):
                    gap = _dist(z, centers[i]) - radii[i]
                    if gap < best:
                        best = gap
                        bid = i
    return best, bid


@njit(cache=True)
def walk(z0, key, eps_o, eps_b, max_steps, ix, dkind, dpar):
    """One walk-on-spheres path; returns (outcome, steps)."""
    d = z0.shape[0]
    z = z0.copy()
    counter = 0
    for step in range(max_steps):
        bg = boundary_gap(z, dkind, dpar)
        og, oid = nearest(z, bg, ix)
        if oid >= 0 and og <= eps_o:
            return oid, step
        if bg <= eps_b:
            return BOUNDARY, step
        rho = og if oid >= 0 else bg
        if d == 2:
            th = TWO_PI * uniform(key, counter)
            counter += 1
            z[0] += rho * math.cos(th)
            z[1] += rho * math.sin(th)
        else:
            w = 2.0 * uniform(key, counter) - 1.0
            ph = TWO_PI * uniform(key, counter + 1)
            counter += 2
            s = math.sqrt(max(0.0, 1.0 - w * w))
            z[0] += rho * s * math.cos(ph)
            z[1] += rho * s * math.sin(ph)
            z[2] += rho * w
    return TIMEOUT, max_steps


@njit(cache=True, parallel=True)
def run_trials(starts, streams, seed, trials, eps_o, eps_b, max_steps, ix, dkind, dpar):
    """Outcomes and step counts for ``trials`` walks from each start point."""
    P = starts.shape[0]
    out = np.empty((P, trials), np.int64)
    steps = np.empty((P, trials), np.int64)
    for t in prange(P * trials):
        p = t // trials
        i = t - p * trials
        key = trial_key(seed, streams[p], i)
        o, s = walk(starts[p], key, eps_o, eps_b, max_steps, ix, dkind, dpar)
        out[p, i] = o
        steps[p, i] = s
    return out, steps


@njit(cache=True)
def nearest_many(points, cap, ix):
    n = points.shape[0]
    gaps = np.empty(n)
    ids = np.empty(n, np.int64)
    for i in range(n):
        gaps[i], ids[i] = nearest(points[i], cap, ix)
    return gaps, ids


@njit(cache=True)
def boundary_gap_many(points, dkind, dpar):
    n = points.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = boundary_gap(points[i], dkind, dpar)
    return out
