"""Sequence families (m_k, alpha_k, beta_k) driving the bubble construction.

Three families are built in:

``one-bubble``
    m_k = 1, alpha_k = 1/k, beta_k = (log k)^2.
``power-law:M=<int>,eps=<real>``
    m_k = k^M, alpha_k = k^-(M+1), beta_k = k, paired with f(t) = t^eps.
``tower:n=<int>``
    m_k = p_n(k), alpha_k = 1/(k m_k), beta_k = k, where p_0(k) = k and
    p_n(k) = 2^p_{n-1}(k).

Every quantity is available both as an exact value for moderate k and in
log form, since the tower radii leave double precision after a few shells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import polygamma

from .errors import DomainError, ScheduleError, UnderflowRadius

KINDS = ("one-bubble", "power-law", "tower")
DEFAULT_K0 = {"one-bubble": 8, "power-law": 3, "tower": 3}

# Tail sums of 1/(j log^2 j) are summed directly up to this index and closed
# with Euler-Maclaurin beyond it.
_EM_SPLIT = 100_000


# --------------------------------------------------------------------------
# elementary functions


def tower(n: int, k: int) -> int:
    """p_n(k): k raised through n levels of 2**(.).

    Raises OverflowError once the value no longer fits a double, which is
    the width every downstream float computation needs.
    """
    if n < 0 or k < 1:
        raise ValueError("tower needs n >= 0 and k >= 1")
    value = k
    for _ in range(n):
        if value >= 1024:
            raise OverflowError(f"p_{n}({k}) exceeds the double range")
        value = 1 << value
    return value


def iterated_log(n: int, t: float) -> float:
    """log applied n times to t."""
    if n < 1:
        raise ValueError("iterated_log needs n >= 1")
    value = float(t)
    for i in range(n):
        if not value > 0:
            raise DomainError(f"log^({i + 1}) undefined: intermediate value {value!r} <= 0")
        value = math.log(value)
    return value


def iterated_log_of_log(n: int, log_t):
    """log^(n)(T) given log T; vectorised, non-positive intermediates give nan."""
    value = np.asarray(log_t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(n - 1):
            value = np.where(value > 0, np.log(np.where(value > 0, value, 1.0)), np.nan)
    return value


def _log_tower(n: int, x):
    """log p_n(x) for real x >= 1 (inf when p_{n-1}(x) overflows)."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.log(x)
    with np.errstate(over="ignore"):
        inner = x
        for _ in range(n - 1):
            inner = np.exp2(inner)
        return inner * math.log(2.0)


def log_radius(a: float, alpha: float, d: int) -> float:
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if d == 2:
        return -1.0 / alpha
    return math.log(a) + math.log(alpha) / (d - 2)


def radius_from_alpha(a: float, alpha: float, d: int, k: int | None = None) -> float:
    """Bubble radius with phi(r) = a^(d-2) * alpha."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if not (0 < a < 1 and 0 < alpha < 1):
        raise DomainError("radius_from_alpha needs a, alpha in (0, 1)")
    lr = log_radius(a, alpha, d)
    r = math.exp(lr)
    if r == 0.0:
        raise UnderflowRadius(lr, k)
    return r


# --------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Schedule:
    kind: str
    d: int
    k0: int
    M: int = 0
    eps: float = 1.0
    n: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.d < 2:
            raise ScheduleError(f"dimension must be >= 2, got {self.d}")
        if self.k0 < 2:
            raise ScheduleError("k0 must be >= 2")
        if self.M < 0 or self.n < 0:
            raise ScheduleError("M and n must be non-negative")
        if self.eps <= 0:
            raise ScheduleError("eps must be positive")

    # construction helpers ------------------------------------------------

    @classmethod
    def one_bubble(cls, d: int = 2, k0: int | None = None) -> "Schedule":
        return cls("one-bubble", d, DEFAULT_K0["one-bubble"] if k0 is None else k0)

    @classmethod
    def power_law(cls, M: int, eps: float, d: int = 2, k0: int | None = None) -> "Schedule":
        return cls("power-law", d, DEFAULT_K0["power-law"] if k0 is None else k0, M=M, eps=eps)

    @classmethod
    def tower_family(cls, n: int, d: int = 2, k0: int | None = None) -> "Schedule":
        return cls("tower", d, DEFAULT_K0["tower"] if k0 is None else k0, n=n)

    @classmethod
    def parse(cls, text: str, d: int, k0: int | None = None) -> "Schedule":
        kind, params = _split_name(text)
        if kind == "one-bubble":
            _expect_keys(params, set(), text)
            return cls.one_bubble(d, k0)
        if kind == "power-law":
            _expect_keys(params, {"M", "eps"}, text)
            return cls.power_law(int(params["M"]), float(params["eps"]), d, k0)
        if kind == "tower":
            _expect_keys(params, {"n"}, text)
            return cls.tower_family(int(params["n"]), d, k0)
        raise ScheduleError(f"unknown schedule {text!r}")

    @property
    def name(self) -> str:
        if self.kind == "power-law":
            return f"power-law:M={self.M},eps={self.eps:g}"
        if self.kind == "tower":
            return f"tower:n={self.n}"
        return "one-bubble"

    @property
    def divergent(self) -> bool:
        # all built-in families have m_k alpha_k >= 1/k
        return True

    # exact sequences -----------------------------------------------------

    def m(self, k: int) -> int:
        if self.kind == "one-bubble":
            return 1
        if self.kind == "power-law":
            return k**self.M
        return tower(self.n, k)

    def alpha(self, k: int) -> float:
        if self.kind == "one-bubble":
            return 1.0 / k
        if self.kind == "power-law":
            return 1.0 / k ** (self.M + 1)
        return 1 / (k * self.m(k))

    def beta(self, k: int) -> float:
        if self.kind == "one-bubble":
            return math.log(k) ** 2
        return float(k)

    # log forms, vectorised over real k ----------------------------------

    def log_m(self, k):
        k = np.asarray(k, dtype=float)
        if self.kind == "one-bubble":
            return np.zeros_like(k)
        if self.kind == "power-law":
            return self.M * np.log(k)
        return _log_tower(self.n, k)

    def log_alpha(self, k):
        k = np.asarray(k, dtype=float)
        if self.kind == "one-bubble":
            return -np.log(k)
        if self.kind == "power-law":
            return -(self.M + 1) * np.log(k)
        return -np.log(k) - self.log_m(k)

    def log_beta(self, k):
        k = np.asarray(k, dtype=float)
        if self.kind == "one-bubble":
            return 2.0 * np.log(np.log(k))
        return np.log(k)

    def log_a(self, k):
        return self.log_alpha(k) - self.log_beta(k)

    def step(self, k):
        """m_k a_k = m_k alpha_k / beta_k, i.e. R_{k+1} - R_k."""
        k = np.asarray(k, dtype=float)
        if self.kind == "one-bubble":
            return 1.0 / (k * np.log(k) ** 2)
        return 1.0 / k**2

    def tail(self, k: int) -> float:
        """sum_{j >= k} m_j a_j."""
        return self.tail_with_error(k)[0]

    def tail_with_error(self, k: int) -> tuple[float, float]:
        if self.kind == "one-bubble":
            return _one_bubble_tail(int(k))
        # m_j a_j = 1/j^2: the trigamma function is the exact tail
        return float(polygamma(1, k)), 4e-16 * float(polygamma(1, k))

    def R(self, k: int) -> float:
        return 1.0 - self.tail(k)

    def log_log_inv_phi_r(self, k):
        """log(-log phi(r_k)), finite even where m_k overflows."""
        k = np.asarray(k, dtype=float)
        if self.kind != "tower":
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.log(-self.log_phi_r(k))
        # -log phi(r_k) = (d-1) log m_k + (2d-3) log k
        d = self.d
        log_log_m = _log_tower(self.n - 1, k) + math.log(math.log(2.0))
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            frac = (2 * d - 3) * np.log(k) / ((d - 1) * np.exp(log_log_m))
        return math.log(d - 1) + log_log_m + np.log1p(frac)

    def log_phi_r(self, k):
        """log phi(r_k) = (d-2) log a_k + log alpha_k."""
        if self.d == 2:
            return self.log_alpha(k)  # avoid 0 * inf once m_k overflows
        return (self.d - 2) * self.log_a(k) + self.log_alpha(k)


def _split_name(text: str) -> tuple[str, dict[str, str]]:
    kind, _, rest = text.strip().partition(":")
    params: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ScheduleError(f"malformed parameter {item!r} in {text!r}")
            params[key.strip()] = value.strip()
    return kind.strip(), params


def _expect_keys(params: dict, keys: set, text: str) -> None:
    if set(params) != keys:
        need = ", ".join(sorted(keys)) or "no parameters"
        raise ScheduleError(f"{text!r}: expected {need}")


@lru_cache(maxsize=None)
def _one_bubble_tail_at_split() -> tuple[float, float]:
    K = float(_EM_SPLIT)
    L = math.log(K)
    f = 1.0 / (K * L * L)
    df = -(L + 2.0) / (K * K * L**3)
    # int_K^inf dx/(x log^2 x) = 1/log K, then Euler-Maclaurin corrections
    value = 1.0 / L + 0.5 * f - df / 12.0
    err = 6.0 / (K**4 * L * L) / 720.0
    return value, err


@lru_cache(maxsize=4096)
def _one_bubble_tail(k: int) -> tuple[float, float]:
    if k < 2:
        raise ScheduleError("one-bubble tail needs k >= 2")
    em, err = _one_bubble_tail_at_split()
    if k >= _EM_SPLIT:
        K = float(k)
        L = math.log(K)
        return 1.0 / L + 0.5 / (K * L * L) + (L + 2.0) / (12.0 * K * K * L**3), err
    j = np.arange(k, _EM_SPLIT, dtype=float)
    terms = 1.0 / (j * np.log(j) ** 2)
    return math.fsum(terms) + em, err + 1e-16 * len(terms) * terms[0]


# --------------------------------------------------------------------------
# shell parameters


@dataclass(frozen=True)
class ShellParams:
    k: int
    m: int
    alpha: float
    beta: float
    a: float
    R: float
    r: float
    log_r: float
    M: int
    d: int
    log_alpha: float = field(repr=False)
    log_a: float = field(repr=False)

    @property
    def log_phi_r(self) -> float:
        return (self.d - 2) * self.log_a + self.log_alpha

    @property
    def phi_r(self) -> float:
        return math.exp(self.log_phi_r)


def shell_params(s: Schedule, k: int, k2: int | None = None) -> ShellParams:
    """All derived per-shell quantities for shell k."""
    if k < s.k0:
        raise ScheduleError(f"shell k={k} below k0={s.k0}")
    tail0 = s.tail(s.k0)
    if tail0 >= 0.5:
        raise ScheduleError(
            f"tail sum m_k a_k from k0={s.k0} is {tail0:.6f} >= 1/2, so R_k > 1/2 fails"
        )
    k2 = s.k0 if k2 is None else k2
    m = s.m(k)
    log_alpha = float(s.log_alpha(k))
    log_a = float(s.log_a(k))
    alpha = s.alpha(k)
    beta = s.beta(k)
    a = alpha / beta
    if s.d == 2:
        lr = -1.0 / alpha if alpha > 0 else -math.exp(-log_alpha)
    else:
        lr = log_a + log_alpha / (s.d - 2)
    r = math.exp(lr)
    if k >= k2:
        M = k2 + sum(s.m(i) for i in range(k2, k))
    else:
        M = k2 - sum(s.m(i) for i in range(k, k2))
    return ShellParams(k, m, alpha, beta, a, s.R(k), r, lr, M, s.d, log_alpha, log_a)


# --------------------------------------------------------------------------
# capacity weights

WEIGHT_KINDS = ("power", "iterlog3", "thm1-d2", "thm1-d3")


def _iterated_exp(n: int) -> float:
    """E_n with E_0 = 1, E_j = exp(E_{j-1}); log^(n) is positive beyond E_{n-1}."""
    value = 1.0
    for _ in range(n):
        value = math.exp(value)
    return value


@dataclass(frozen=True)
class CapacityWeight:
    kind: str
    eps: float = 1.0
    n: int = 1
    d: int = 3
    domain_cap: float = 1.0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ScheduleError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power" and self.eps <= 0:
            raise ScheduleError("power weight needs eps > 0")
        if self.kind != "power" and self.n < 1:
            raise ScheduleError("iterated-log weights need n >= 1")
        if self.kind == "thm1-d3" and self.d < 3:
            raise ScheduleError("thm1-d3 weight needs d >= 3")
        if not self.domain_cap > 0:
            raise ScheduleError("domain_cap must be positive")

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "CapacityWeight":
        kind, params = _split_name(text)
        if kind == "power":
            _expect_keys(params, {"eps"}, text)
            return cls("power", eps=float(params["eps"]))
        if kind in ("iterlog3", "thm1-d2"):
            _expect_keys(params, {"n"}, text)
            return cls(kind, n=int(params["n"]))
        if kind == "thm1-d3":
            if "d" not in params and d is not None:
                params = {**params, "d": str(d)}
            _expect_keys(params, {"n", "d"}, text)
            return cls(kind, n=int(params["n"]), d=int(params["d"]))
        raise ScheduleError(f"unknown weight {text!r}")

    @classmethod
    def theorem_one(cls, n: int, d: int) -> "CapacityWeight":
        """Weight whose capacity sum is the sum in the headline theorem for (n, d)."""
        return cls("thm1-d2", n=n) if d == 2 else cls("thm1-d3", n=n, d=d)

    @property
    def name(self) -> str:
        if self.kind == "power":
            return f"power:eps={self.eps:g}"
        if self.kind == "thm1-d3":
            return f"thm1-d3:n={self.n},d={self.d}"
        return f"{self.kind}:n={self.n}"

    @property
    def natural_cap(self) -> float:
        """Supremum of the arguments where the weight is finite and positive."""
        if self.kind == "power":
            return math.inf
        E = _iterated_exp(self.n - 1)
        if self.kind == "thm1-d3":
            return E ** (-(self.d - 2))
        return 1.0 / E

    def with_cap(self, cap: float) -> "CapacityWeight":
        return CapacityWeight(self.kind, self.eps, self.n, self.d, cap)

    def paired(self, s: Schedule, k2: int) -> "CapacityWeight":
        """Cap the domain at m_{k2}^(1-d)."""
        log_cap = (1 - s.d) * float(s.log_m(k2))
        return self.with_cap(math.exp(log_cap))

    def log_value(self, log_t, log_log_inv=None):
        """log f(t) given log t, vectorised; nan outside the natural domain.

        ``log_log_inv`` = log(log 1/t) may be passed when log t itself
        overflows; the iterated logarithms are then taken from it.
        """
        log_t = np.asarray(log_t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "power":
                return self.eps * log_t
            if log_log_inv is not None:
                ll = np.asarray(log_log_inv, dtype=float)
                if self.kind == "thm1-d3":
                    ll = ll - math.log(self.d - 2)
                # log(log^(n) T) = log^(n+1) T, i.e. n - 1 logs applied to log log T
                log_inner = iterated_log_of_log(self.n, ll)
                power = 3.0 if self.kind == "iterlog3" else 1.0
                return -power * log_inner
            if self.kind == "thm1-d3":
                inner = iterated_log_of_log(self.n, -log_t / (self.d - 2))
                return -np.log(inner)
            inner = iterated_log_of_log(self.n, -log_t)
            power = 3.0 if self.kind == "iterlog3" else 1.0
            return np.where(inner > 0, -power * np.log(inner), np.nan)

    def __call__(self, t: float) -> float:
        if not (0 < t <= self.domain_cap) or (
            self.kind != "power" and t >= self.natural_cap
        ):
            raise DomainError(f"{self.name}: argument {t!r} outside (0, {self.domain_cap:g}]")
        return float(np.exp(self.log_value(math.log(t))))

    def check_log_arg(self, log_t: float) -> None:
        cap = min(self.domain_cap, self.natural_cap)
        if not log_t <= math.log(self.domain_cap) * (1 + 1e-15) or (
            self.kind != "power" and not log_t < math.log(cap)
        ):
            raise DomainError(
                f"{self.name}: argument exp({log_t:.6g}) outside (0, {self.domain_cap:g}]"
            )


def default_weight(s: Schedule) -> CapacityWeight:
    """The weight each family is paired with in the construction."""
    if s.kind == "power-law":
        return CapacityWeight("power", eps=s.eps)
    if s.kind == "tower":
        return CapacityWeight("iterlog3", n=max(s.n, 1))
    # one-bubble: phi^(1+eps) with eps > 1/(d-1)
    return CapacityWeight("power", eps=2.0 / (s.d - 1))


# --------------------------------------------------------------------------
# tails of positive series


@dataclass(frozen=True)
class TailBound:
    """Integral-test bound on sum_{k > K} t_k for an eventually decreasing t."""

    value: float
    decreasing: bool

    @property
    def certified(self) -> bool:
        return self.decreasing and math.isfinite(self.value)


def integral_tail(log_term: Callable[[np.ndarray], np.ndarray], K: float) -> TailBound:
    """Bound sum_{k > K} exp(log_term(k)) by int_K^inf exp(log_term(x)) dx."""
    grid = K * np.exp(np.linspace(0.0, 12.0, 400))
    lt = np.asarray(log_term(grid), dtype=float)
    lt = np.where(np.isnan(lt), np.inf, lt)
    if np.all(lt == -np.inf):
        return TailBound(0.0, True)  # every term is below exp(-1e308)
    lt = np.maximum(lt, -1e300)  # terms that underflow to zero
    # log terms of huge k come out of cancelling O(k) parts, so allow rounding
    # noise and pay for it: a term that may rise by e^rise stays below e^rise
    # times the integral
    rise = float(np.max(np.diff(lt), initial=0.0))
    rise = max(rise, 0.0)
    decreasing = rise <= 1e-6

    def integrand(u):
        x = K * math.exp(u)
        v = float(log_term(np.array([x]))[0])
        if math.isnan(v):
            return math.inf
        return math.exp(min(v + math.log(x), 700.0))

    # x = K e^u up to ~1e300; beyond that any summable majorant is negligible
    u_max = min(700.0, math.log(1e300 / K))
    value = 0.0
    with np.errstate(all="ignore"):
        for lo, hi in ((0, 1), (1, 3), (3, 10), (10, 30), (30, 100), (100, 300), (300, 700)):
            if lo >= u_max:
                break
            part, _ = integrate.quad(integrand, lo, min(hi, u_max), limit=200)
            value += part
    # quad does not detect slow divergence; trust it only when the integrand
    # has visibly decayed over the grid
    if not decreasing or not lt[-1] + math.log(grid[-1]) < lt[0] + math.log(grid[0]) - 5:
        return TailBound(math.inf if not math.isfinite(value) else value, False)
    return TailBound(value * math.exp(rise), True)


def series_with_tail(log_term, k_from: int, k_to: int) -> tuple[float, TailBound]:
    """Direct sum over [k_from, k_to] plus an integral bound beyond k_to."""
    total = 0.0
    chunk = 1 << 20
    for start in range(k_from, k_to + 1, chunk):
        ks = np.arange(start, min(start + chunk, k_to + 1), dtype=float)
        total += math.fsum(np.exp(log_term(ks)))
    return total, integral_tail(log_term, float(k_to))


# --------------------------------------------------------------------------
# validation


@dataclass
class Check:
    name: str
    passed: bool
    evidence: dict

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.evidence = {
            k: (v.item() if isinstance(v, np.generic) else v) for k, v in self.evidence.items()
        }

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "evidence": self.evidence}


@dataclass
class ValidationReport:
    schedule: str
    weight: str
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> list[dict]:
        return [c.to_json() for c in self.checks]


def _first_violation(ks, bad) -> int | None:
    idx = np.flatnonzero(bad)
    return int(ks[idx[0]]) if idx.size else None


def validate_schedule(
    s: Schedule, w: CapacityWeight, k_horizon: int, k2: int | None = None
) -> ValidationReport:
    if k_horizon < s.k0:
        raise ValueError("k_horizon must be >= k0")
    k2 = s.k0 if k2 is None else k2
    ks = np.arange(s.k0, k_horizon + 2, dtype=float)
    checks: list[Check] = []
    lm, la, lb = s.log_m(ks), s.log_alpha(ks), s.log_beta(ks)
    finite = np.isfinite(lm)
    ks, lm, la, lb = ks[finite], lm[finite], la[finite], lb[finite]
    span = {"k_from": int(ks[0]), "k_to": int(ks[-1])}
    tol = 1e-12

    for name, bad, msg in (
        ("m_nondecreasing", np.diff(lm) < -tol, "m_k > m_(k+1)"),
        ("alpha_nonincreasing", np.diff(la) > tol, "alpha_(k+1) > alpha_k"),
        ("beta_nondecreasing", np.diff(lb) < -tol, "beta_k > beta_(k+1)"),
    ):
        k_bad = _first_violation(ks[:-1], bad)
        ev = dict(span)
        if k_bad is not None:
            ev["message"] = f"{msg} at k={k_bad}"
        checks.append(Check(name, k_bad is None, ev))

    bound = -np.maximum(np.log(ks), lm)
    k_bad = _first_violation(ks, la > bound + tol)
    ev = dict(span)
    if k_bad is not None:
        ev["message"] = f"alpha_k > 1/max(k, m_k) at k={k_bad}"
    checks.append(Check("alpha_bound", k_bad is None, ev))

    k_bad = _first_violation(ks, lb < -tol)
    ev = dict(span)
    if k_bad is not None:
        ev["message"] = f"beta_k < 1 at k={k_bad}"
        ev["beta_k"] = float(np.exp(lb[ks == k_bad][0]))
    checks.append(Check("beta_at_least_one", k_bad is None, ev))

    k_bad = _first_violation(ks, lb > np.log(ks) + tol)
    ev = dict(span)
    if k_bad is not None:
        ev["message"] = f"beta_k > k at k={k_bad}"
    checks.append(Check("beta_at_most_k", k_bad is None, ev))

    tail, err = s.tail_with_error(s.k0)
    checks.append(
        Check(
            "tail_below_half",
            tail + err < 0.5,
            {"tail": tail, "remainder_bound": err, "k0": s.k0,
             **({} if tail + err < 0.5 else {"message": f"sum m_k a_k from k0={s.k0} is {tail:.6f} >= 1/2"})},
        )
    )

    partial = math.fsum(np.exp(lm + la))
    checks.append(
        Check(
            "divergence",
            s.divergent,
            {"partial_sum": partial, "k_to": int(ks[-1]), "analytic": s.divergent},
        )
    )

    def fdef_term(k):
        return s.log_beta(k) + w.log_value((s.d - 1) * s.log_alpha(k))

    kk = np.arange(max(k2, s.k0), k_horizon + 1, dtype=float)
    vals = fdef_term(kk)
    ok_vals = bool(np.all(np.isfinite(vals)))
    partial_f = math.fsum(np.exp(vals[np.isfinite(vals)]))
    tb = integral_tail(fdef_term, float(k_horizon))
    checks.append(
        Check(
            "f_def_finite",
            ok_vals and tb.certified,
            {"partial_sum": partial_f, "tail_bound": tb.value, "k2": k2,
             "k_to": k_horizon, "tail_certified": tb.certified},
        )
    )

    ts = np.exp(np.linspace(math.log(min(w.domain_cap, w.natural_cap)) - 30.0,
                            math.log(min(w.domain_cap, w.natural_cap)), 200))
    if w.kind != "power":
        ts = ts[ts < w.natural_cap]
    fv = np.exp(w.log_value(np.log(ts)))
    checks.append(
        Check(
            "f_positive_increasing",
            bool(np.all(fv > 0) and np.all(np.diff(fv) > 0)),
            {"domain_cap": w.domain_cap, "samples": int(ts.size)},
        )
    )
    return ValidationReport(s.name, w.name, checks)
