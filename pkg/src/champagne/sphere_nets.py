"""Finite nets on spheres: sep/3-balls around the points cover the sphere and
sep/9-balls are pairwise disjoint.

Circles get exactly equal spacing. Two-spheres get a Fibonacci lattice sized
so that its covering radius is below sep/3; the covering radius is then
computed exactly from the convex hull (each hull facet's circumscribed cap is
a Voronoi vertex) and the lattice is enlarged if the bound is missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import NetTooLarge

# covering radius of the Fibonacci lattice is ~2.7282 R / sqrt(N); N below
# gives 3 * 2.7282 / sqrt(KAPPA_3D) < 1 with a small margin
KAPPA_3D = 67.5
MAX_POINTS = {2: 20_000_000, 3: 2_000_000}
GOLDEN_ANGLE = math.pi * (1.0 + math.sqrt(5.0))
# #points * (sep/R)^(d-1) lies in [c_lo, c_hi] for every net built here
# (d = 2 exact from the ceiling, d = 3 measured over sep/R in [0.02, 2.9])
COUNT_CONSTANTS = {2: (6.0 * math.pi, 6.0 * math.pi + 3.0), 3: (KAPPA_3D, 76.0)}


@dataclass(frozen=True, eq=False)
class SphereNet:
    center: np.ndarray
    R: float
    sep: float
    points: np.ndarray
    kind: str = "ring"

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)


def net_size(R: float, sep: float, d: int) -> int:
    """Point count the construction uses for a sphere of radius R."""
    if d == 2:
        return math.ceil(6.0 * math.pi * R / sep)
    if d == 3:
        return math.ceil(KAPPA_3D * (R / sep) ** 2)
    raise NotImplementedError("nets are built for d in {2, 3} only")


def count_constant(net: SphereNet) -> float:
    """#points * (sep/R)^(d-1), the quantity bounded by COUNT_CONSTANTS."""
    return len(net) * (net.sep / net.R) ** (net.d - 1)


def log_net_size_bound(log_R, log_sep, d: int):
    """Upper bound on log(net_size) valid for huge counts, vectorised."""
    lead = (d - 1) * (np.asarray(log_R) - np.asarray(log_sep))
    const = math.log(6.0 * math.pi) if d == 2 else math.log(KAPPA_3D)
    return np.logaddexp(const + lead, 0.0)


def ring_points(center, R: float, n: int) -> np.ndarray:
    theta = 2.0 * math.pi * np.arange(n) / n
    c = np.asarray(center, dtype=float)
    return np.column_stack((c[0] + R * np.cos(theta), c[1] + R * np.sin(theta)))


def fibonacci_points(center, R: float, n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    s = np.sqrt(1.0 - z * z)
    ang = GOLDEN_ANGLE * i
    unit = np.column_stack((s * np.cos(ang), s * np.sin(ang), z))
    return np.asarray(center, dtype=float) + R * unit


def covering_radius(points: np.ndarray, center, R: float) -> float:
    """Exact Euclidean covering radius of a point set on a circle or 2-sphere."""
    unit = (points - np.asarray(center, dtype=float)) / R
    if unit.shape[1] == 2:
        ang = np.sort(np.arctan2(unit[:, 1], unit[:, 0]))
        gaps = np.diff(np.append(ang, ang[0] + 2.0 * math.pi))
        return 2.0 * R * float(np.sin(gaps.max() / 4.0))
    hull = ConvexHull(unit)
    height = -hull.equations[:, 3]  # facet plane n.x = height, |n| = 1
    return R * float(np.sqrt(np.maximum(2.0 * (1.0 - height), 0.0)).max())


def min_separation(points: np.ndarray) -> float:
    if len(points) < 2:
        return math.inf
    dist, _ = cKDTree(points).query(points, k=2)
    return float(dist[:, 1].min())


def build_net(center, R: float, sep: float, d: int, seed: int = 0,
              max_points: int | None = None) -> SphereNet:
    """Net on the sphere |x - center| = R at scale ``sep``.

    The construction is deterministic; ``seed`` is accepted for interface
    symmetry with the randomised audit.
    """
    if not 0 < sep < 3.0 * R:
        raise ValueError(f"need 0 < sep < 3R, got sep={sep}, R={R}")
    if d not in (2, 3):
        raise NotImplementedError("nets are built for d in {2, 3} only")
    center = np.asarray(center, dtype=float).reshape(d)
    cap = MAX_POINTS[d] if max_points is None else max_points
    n = net_size(R, sep, d)
    if n > cap:
        raise NetTooLarge(n, cap)
    if d == 2:
        return SphereNet(center, R, sep, ring_points(center, R, n), "ring")
    for _ in range(50):
        pts = fibonacci_points(center, R, n)
        if n < 4 or covering_radius(pts, center, R) <= sep / 3.0:
            break
        n = math.ceil(n * 1.02)
        if n > cap:
            raise NetTooLarge(n, cap)
    return SphereNet(center, R, sep, pts, "fibonacci")


def uniform_on_sphere(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass(frozen=True)
class NetReport:
    samples: int
    max_nearest: float
    min_pairwise: float
    covering_ok: bool
    separation_ok: bool

    @property
    def passed(self) -> bool:
        return self.covering_ok and self.separation_ok


def verify_net(net: SphereNet, samples: int, seed: int = 0, tol: float = 1e-12) -> NetReport:
    """Randomised audit of both net conditions."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    probe = net.center + net.R * uniform_on_sphere(rng, samples, net.d)
    dist, _ = cKDTree(net.points).query(probe)
    max_nearest = float(dist.max())
    sep_min = min_separation(net.points)
    return NetReport(
        samples,
        max_nearest,
        sep_min,
        max_nearest <= net.sep / 3.0 + tol * net.R,
        sep_min > 2.0 * net.sep / 9.0,
    )
