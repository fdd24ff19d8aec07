"""Closed-form kernels: the global Green kernel N, the capacity scale phi = 1/N,
the Green function of a ball, annulus hitting probabilities and the
one-bubble barrier."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def _check_dim(d: int) -> None:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")


def N(t, d: int):
    """Global Green kernel: log(1/t) in the plane, t^(2-d) otherwise."""
    _check_dim(d)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = -np.log(t) if d == 2 else t ** (2.0 - d)
    return out if out.ndim else float(out)


def N_from_log(log_t, d: int):
    _check_dim(d)
    log_t = np.asarray(log_t, dtype=float)
    out = -log_t if d == 2 else np.exp((2.0 - d) * log_t)
    return out if out.ndim else float(out)


def phi(t, d: int):
    """Capacity scale 1/N(t). For d = 2 only meaningful on (0, 1)."""
    t_arr = np.asarray(t, dtype=float)
    if d == 2 and np.any((t_arr <= 0) | (t_arr >= 1)):
        raise DomainError("phi in the plane needs t in (0, 1)")
    return 1.0 / N(t, d)


def log_phi_from_log_radius(log_r, d: int):
    """log phi(r) from log r; works where r itself underflows."""
    _check_dim(d)
    log_r = np.asarray(log_r, dtype=float)
    if d == 2:
        if np.any(log_r >= 0):
            raise DomainError("phi in the plane needs r < 1")
        out = -np.log(-log_r)
    else:
        out = (d - 2) * log_r
    return out if out.ndim else float(out)


def green_ball(rho: float, x, y, d: int):
    """Green function of B(0, rho) by Kelvin reflection.

    ``y`` may be a single point or an (n, d) array of points.
    """
    _check_dim(d)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xx = float(x @ x)
    yy = np.einsum("...i,...i->...", y, y)
    if xx >= rho * rho or np.any(yy >= rho * rho):
        raise DomainError("green_ball: points must lie inside the ball")
    diff = y - x
    dist2 = np.einsum("...i,...i->...", diff, diff)
    if np.any(dist2 == 0):
        raise DomainError("green_ball: x == y")
    # |x| |y - x*| / rho written symmetrically; equals rho when x = 0
    refl2 = xx * yy / (rho * rho) - 2.0 * (y @ x) + rho * rho
    if d == 2:
        out = 0.5 * (np.log(refl2) - np.log(dist2))
    else:
        p = (2.0 - d) / 2.0
        out = dist2**p - refl2**p
    return out if np.ndim(out) else float(out)


def annulus_hit_prob(r: float, R: float, s: float, d: int) -> float:
    """P(Brownian motion from |z| = s reaches |z| = r before |z| = R)."""
    _check_dim(d)
    if not (0 < r <= s <= R):
        raise DomainError(f"annulus_hit_prob needs 0 < r <= s <= R, got {(r, R, s)}")
    if r == R:
        return 1.0
    Nr, NR, Ns = N(r, d), N(R, d), N(s, d)
    return (Ns - NR) / (Nr - NR)


def eta(d: int) -> float:
    """Half the smallest chance of reaching B(0, 1/7) before the unit sphere
    from |z| <= 1/2. The smallest value sits on |z| = 1/2."""
    return 0.5 * annulus_hit_prob(1.0 / 7.0, 1.0, 0.5, d)


def one_bubble_barrier(z, x, r_k: float, a_k: float, d: int, log_r: float | None = None) -> float:
    """g(z) = phi(r_k) (N(|z - x|) - N(a_k)): harmonic off x, <= 0 outside
    B(x, a_k) and <= 1 on the bubble. ``log_r`` overrides r_k when the
    radius underflows."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    dist = float(np.linalg.norm(z - x))
    if dist == 0:
        raise DomainError("one_bubble_barrier: z coincides with the bubble centre")
    lr = math.log(r_k) if log_r is None else log_r
    phi_r = math.exp(log_phi_from_log_radius(lr, d))
    return phi_r * (N(dist, d) - N(a_k, d))


def shell_potential(z, points, a: float, rho_next: float, d: int) -> float:
    """G mu(z) for mu = a^(d-1) * (sum of unit masses at ``points``), with G the
    Green function of B(0, rho_next)."""
    z = np.asarray(z, dtype=float)
    if float(z @ z) >= rho_next * rho_next:
        raise DomainError("shell_potential: z outside B(0, rho_next)")
    pts = np.asarray(points, dtype=float)
    return a ** (d - 1) * float(np.sum(green_ball(rho_next, z, pts, d)))
