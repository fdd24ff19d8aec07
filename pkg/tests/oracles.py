"""Independent reference values computed with mpmath or exact arithmetic.

Nothing here imports the package, so each value is a second derivation of
what the code computes.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

mp.mp.dps = 40


def tower1_R3() -> float:
    """1 - sum_{j>=3} 1/j^2 = 1 - (zeta(2) - 1 - 1/4)."""
    return float(1 - (mp.zeta(2) - 1 - mp.mpf(1) / 4))


def tower1_tail_from_3() -> float:
    return float(mp.zeta(2) - 1 - mp.mpf(1) / 4)


def loglog(t) -> float:
    return float(mp.log(mp.log(mp.mpf(t))))


def one_bubble_k10() -> dict:
    beta = mp.log(10) ** 2
    a = mp.mpf(1) / 10 / beta
    return {"beta": float(beta), "a": float(a), "r": float(mp.e ** -10)}


def one_bubble_ratio(k: int) -> float:
    """r_k/a_k = k (log k)^2 e^-k for the one-bubble schedule in the plane."""
    return float(k * mp.log(k) ** 2 * mp.e ** (-k))


def one_bubble_k1(horizon: int = 200) -> int:
    last_bad = max(k for k in range(2, horizon) if one_bubble_ratio(k) >= mp.mpf(1) / 100)
    return last_bad + 1


def ring_count(R: float, sep: float) -> int:
    return int(mp.ceil(6 * mp.pi * mp.mpf(R) / mp.mpf(sep)))


def tower1_shell3_count() -> int:
    """#X_3 for Tower(1), d=2: a_3 = 1/72 on radius R_3."""
    R3 = 1 - (mp.zeta(2) - 1 - mp.mpf(1) / 4)
    return int(mp.ceil(6 * mp.pi * R3 * 72))


def tower1_capacity_k4(count: int) -> float:
    """count * (1/64) * (log 64)^-3."""
    return float(count * mp.mpf(1) / 64 * mp.log(64) ** -3)


def theorem1_d2_term(log_inv_r) -> float:
    L = mp.mpf(log_inv_r)
    return float(1 / L / mp.log(L))


def theorem1_d3_term(r) -> float:
    r = mp.mpf(r)
    return float(r / mp.log(1 / r))


def product_bound(gammas) -> float:
    p = mp.mpf(1)
    for g in gammas:
        p *= 1 - mp.mpf(g)
    return float(1 - p)


def annulus(r, R, s, d) -> float:
    r, R, s = mp.mpf(r), mp.mpf(R), mp.mpf(s)
    if d == 2:
        return float(mp.log(R / s) / mp.log(R / r))
    return float((s ** (2 - d) - R ** (2 - d)) / (r ** (2 - d) - R ** (2 - d)))


def eta(d: int) -> float:
    return float(annulus(mp.mpf(1) / 7, 1, mp.mpf(1) / 2, d) / 2)


def green_ball(rho, x, y, d) -> float:
    """G(x, y) = N(|x - y|) - N(|x|/rho |x* - y|), x* = rho^2 x / |x|^2,
    and N(|y|) - N(rho) at x = 0; written from scratch in mpmath."""
    x = [mp.mpf(v) for v in x]
    y = [mp.mpf(v) for v in y]
    rho = mp.mpf(rho)

    def N(t):
        return mp.log(1 / t) if d == 2 else t ** (2 - d)

    dist = mp.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))
    nx = mp.sqrt(sum(a * a for a in x))
    if nx == 0:
        return float(N(mp.sqrt(sum(b * b for b in y))) - N(rho))
    xs = [a * rho**2 / nx**2 for a in x]
    dist_star = mp.sqrt(sum((a - b) ** 2 for a, b in zip(xs, y)))
    return float(N(dist) - N(nx / rho * dist_star))


def barrier_d3_example() -> float:
    """phi(r)(N(a/3) - N(a)) with r = 1e-4, a = 1e-2 in d = 3."""
    r, a = mp.mpf("1e-4"), mp.mpf("1e-2")
    return float(r * (3 / a - 1 / a))


def corollary_kdprime_tower1(k_prime: int, gamma: float = 0.5, c_eff: float = 1.0) -> int:
    """First k'' with prod_{k'<=k<k''} (1 - c alpha_k)^{m_k} <= 1 - gamma, Tower(1):
    m_k = 2^k, alpha_k = 1/(k 2^k)."""
    target = mp.log(1 - mp.mpf(gamma))
    s, k = mp.mpf(0), k_prime
    while s > target:
        m = mp.mpf(2) ** k
        s += m * mp.log(1 - c_eff / (k * m))
        k += 1
    return k


def delta_split(count_Y: list[int], delta: Fraction) -> list[Fraction]:
    return [delta / (c * 2**n) * c for n, c in enumerate(count_Y, start=1)]


def power_law_kest(k: int, M: int, eps: float, d: int) -> float:
    """beta_k f(alpha_k^(d-1)) with f(t) = t^eps, alpha_k = k^-(M+1), beta_k = k."""
    return float(mp.mpf(k) * mp.mpf(k) ** (-(M + 1) * (d - 1) * eps))


def exact_box_gap(p, lo, hi) -> float:
    return min(min(a - l, h - a) for a, l, h in zip(p, lo, hi))
