"""Bounded domains: balls, boxes and finite unions of balls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sphere_nets import fibonacci_points, uniform_on_sphere

BALL, BOX, UNION = 0, 1, 2
KINDS = ("unit-ball", "ball", "box", "union")


@dataclass(frozen=True, eq=False)
class Domain:
    """A bounded open set with cheap distance queries.

    ``boundary_gap`` is the distance to the complement for balls and boxes.
    For unions it is max_i (R_i - |z - c_i|), the radius of the largest
    single-ball disc around z; this never exceeds the true distance and
    agrees with it away from the seams where spheres cross.
    """

    kind: str
    d: int
    centers: np.ndarray = field(default=None)
    radii: np.ndarray = field(default=None)
    lo: np.ndarray = field(default=None)
    hi: np.ndarray = field(default=None)

    # constructors --------------------------------------------------------

    @classmethod
    def unit_ball(cls, d: int) -> "Domain":
        return cls("unit-ball", d, np.zeros((1, d)), np.ones(1))

    @classmethod
    def ball(cls, center, R: float) -> "Domain":
        c = np.asarray(center, dtype=float).reshape(1, -1)
        if R <= 0:
            raise ValueError("ball radius must be positive")
        return cls("ball", c.shape[1], c, np.array([float(R)]))

    @classmethod
    def box(cls, lo, hi) -> "Domain":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box needs lo < hi componentwise")
        return cls("box", lo.size, lo=lo, hi=hi)

    @classmethod
    def union(cls, centers, radii, check_connected: bool = True) -> "Domain":
        c = np.atleast_2d(np.asarray(centers, dtype=float))
        r = np.asarray(radii, dtype=float).reshape(-1)
        if len(c) != len(r) or np.any(r <= 0):
            raise ValueError("union needs one positive radius per centre")
        dom = cls("union", c.shape[1], c, r)
        if check_connected and not dom.is_connected():
            raise ValueError("union of balls is not connected")
        return dom

    # geometry ------------------------------------------------------------

    @property
    def is_balls(self) -> bool:
        return self.kind != "box"

    def is_connected(self) -> bool:
        if self.kind != "union":
            return True
        m = len(self.radii)
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in range(m):
                if j not in seen and (
                    np.linalg.norm(self.centers[i] - self.centers[j])
                    < self.radii[i] + self.radii[j]
                ):
                    seen.add(j)
                    stack.append(j)
        return len(seen) == m

    def boundary_gap(self, p):
        """Distance to the complement (a lower bound at union seams)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "box":
            out = np.minimum(p - self.lo, self.hi - p).min(axis=-1)
        else:
            diff = p[..., None, :] - self.centers
            out = (self.radii - np.linalg.norm(diff, axis=-1)).max(axis=-1)
        return out if np.ndim(out) else float(out)

    def exterior_distance(self, p):
        """Distance from p to the closure (0 inside)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "box":
            out = np.linalg.norm(np.maximum(np.maximum(self.lo - p, p - self.hi), 0.0), axis=-1)
        else:
            diff = p[..., None, :] - self.centers
            out = np.maximum((np.linalg.norm(diff, axis=-1) - self.radii).min(axis=-1), 0.0)
        return out if np.ndim(out) else float(out)

    def contains(self, p):
        gap = self.boundary_gap(p)
        return gap > 0

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "box":
            return self.lo.copy(), self.hi.copy()
        return (self.centers - self.radii[:, None]).min(0), (self.centers + self.radii[:, None]).max(0)

    @property
    def diameter(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    def shrink(self, t: float) -> "Domain":
        """Inset by t: radii minus t, or box faces moved inward by t."""
        if self.kind == "box":
            return Domain.box(self.lo + t, self.hi - t)
        r = self.radii - t
        if np.any(r <= 0):
            raise ValueError(f"shrinking by {t} removes a ball")
        return Domain("union" if self.kind == "union" else "ball", self.d, self.centers.copy(), r)

    # boundary sampling ---------------------------------------------------

    def boundary_points(self, h: float) -> np.ndarray:
        """Points on the boundary such that every boundary point lies within h
        of one of them (exact for d = 2; for 3-d unions, up to seam effects)."""
        if self.kind == "box":
            return _box_boundary(self.lo, self.hi, h)
        if self.d == 2:
            return _union_boundary_2d(self.centers, self.radii, h)
        pts = []
        for i, (c, R) in enumerate(zip(self.centers, self.radii)):
            n = max(8, math.ceil((2.75 * R / h) ** 2))
            cand = fibonacci_points(c, R, n)
            keep = np.ones(len(cand), bool)
            for j, (c2, R2) in enumerate(zip(self.centers, self.radii)):
                if j != i:
                    keep &= np.linalg.norm(cand - c2, axis=1) >= R2
            pts.append(cand[keep])
        return np.concatenate(pts)

    def sample_boundary(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n points on the boundary, uniform with respect to surface measure."""
        if self.is_balls and len(self.radii) == 1:
            return self.centers[0] + self.radii[0] * uniform_on_sphere(rng, n, self.d)
        h = self.diameter * 1e-4
        fine = self.boundary_points(h)
        return fine[rng.choice(len(fine), size=n, replace=False)]

    # numba encoding ------------------------------------------------------

    def kernel_params(self) -> tuple[int, np.ndarray]:
        if self.kind == "box":
            return BOX, np.concatenate((self.lo, self.hi))
        if len(self.radii) == 1:
            return BALL, np.concatenate((self.centers[0], self.radii))
        rows = np.column_stack((self.centers, self.radii)).ravel()
        return UNION, np.concatenate(([float(len(self.radii))], rows))

    # serialisation -------------------------------------------------------

    def to_json(self) -> dict:
        if self.kind == "unit-ball":
            return {"kind": "unit-ball", "d": self.d}
        if self.kind == "box":
            return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        if self.kind == "ball":
            return {"kind": "ball", "center": self.centers[0].tolist(), "R": float(self.radii[0])}
        return {"kind": "union", "centers": self.centers.tolist(), "radii": self.radii.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Domain":
        kind = obj["kind"]
        if kind == "unit-ball":
            return cls.unit_ball(int(obj["d"]))
        if kind == "ball":
            return cls.ball(obj["center"], obj["R"])
        if kind == "box":
            return cls.box(obj["lo"], obj["hi"])
        if kind == "union":
            return cls.union(obj["centers"], obj["radii"], check_connected=False)
        raise ValueError(f"unknown domain kind {kind!r}")

    def __repr__(self) -> str:
        return f"Domain({self.to_json()})"


def _arc_points(c, R, t0, t1, h) -> np.ndarray:
    n = max(1, math.ceil(R * (t1 - t0) / h))
    t = np.linspace(t0, t1, n + 1)
    return np.column_stack((c[0] + R * np.cos(t), c[1] + R * np.sin(t)))


def _union_boundary_2d(centers, radii, h) -> np.ndarray:
    pts = []
    for i, (c, R) in enumerate(zip(centers, radii)):
        covered = []
        for j, (c2, R2) in enumerate(zip(centers, radii)):
            if j == i:
                continue
            D = float(np.linalg.norm(c2 - c))
            if D + R <= R2:
                covered = [(-math.inf, math.inf)]
                break
            if D >= R + R2 or D + R2 <= R:
                continue
            kappa = (R * R + D * D - R2 * R2) / (2 * R * D)
            half = math.acos(max(-1.0, min(1.0, kappa)))
            mid = math.atan2(c2[1] - c[1], c2[0] - c[0])
            covered.append((mid - half, mid + half))
        if covered and covered[0][0] == -math.inf:
            continue
        if not covered:
            n = max(3, math.ceil(2 * math.pi * R / h))
            t = 2 * math.pi * np.arange(n) / n
            pts.append(np.column_stack((c[0] + R * np.cos(t), c[1] + R * np.sin(t))))
            continue
        # free arcs = complement of covered intervals on the circle
        base = covered[0][1]
        ivs = sorted(((lo - base) % (2 * math.pi), (lo - base) % (2 * math.pi) + (hi - lo))
                     for lo, hi in covered)
        cursor = 0.0
        for lo, hi in ivs + [(2 * math.pi, 2 * math.pi)]:
            if lo > cursor:
                pts.append(_arc_points(c, R, base + cursor, base + lo, h))
            cursor = max(cursor, hi)
    return np.concatenate(pts)


def _box_boundary(lo, hi, h) -> np.ndarray:
    d = lo.size
    axes = [np.linspace(lo[i], hi[i], max(2, math.ceil((hi[i] - lo[i]) * math.sqrt(max(d - 1, 1)) / h) + 1))
            for i in range(d)]
    pts = []
    for i in range(d):
        for value in (lo[i], hi[i]):
            grids = np.meshgrid(*[axes[j] if j != i else np.array([value]) for j in range(d)],
                                indexing="ij")
            pts.append(np.column_stack([g.ravel() for g in grids]))
    return np.unique(np.concatenate(pts), axis=0)


def greedy_thin(candidates: np.ndarray, min_dist: float) -> np.ndarray:
    """Maximal subset with pairwise distances >= min_dist, in candidate order."""
    cell = min_dist
    grid: dict[tuple, list[int]] = {}
    kept: list[int] = []
    d = candidates.shape[1]
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * d, indexing="ij")).reshape(d, -1).T
    for idx, p in enumerate(candidates):
        key = tuple(np.floor(p / cell).astype(int))
        ok = True
        for off in offsets:
            for j in grid.get(tuple(np.add(key, off)), ()):
                if np.linalg.norm(candidates[j] - p) < min_dist:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            kept.append(idx)
            grid.setdefault(key, []).append(idx)
    return candidates[kept]
