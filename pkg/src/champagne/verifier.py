"""Analytic checks: capacity sums, the (k-est) ratio, the product bound of the
nested-ball criterion and the certificate tying Monte Carlo output to it."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .potential import log_phi_from_log_radius
from .schedules import CapacityWeight, Schedule, integral_tail
from .sphere_nets import COUNT_CONSTANTS, net_size


# --------------------------------------------------------------------------
# capacity sums


def _group_terms(cfg, w: CapacityWeight):
    """Per-group (log phi, capacity term) pairs; 'points' groups are summed per bubble."""
    rows = []
    for rec in cfg.shells:
        if rec.kind == "points":
            lphi = log_phi_from_log_radius(cfg.log_radii[rec.start:rec.stop], cfg.d)
            if lphi.size:
                w.check_log_arg(float(lphi.max()))
            term = math.fsum(np.exp(lphi + w.log_value(lphi)))
            rows.append((rec, float(lphi.max()) if lphi.size else -math.inf, term))
        else:
            lphi = float(log_phi_from_log_radius(rec.log_radius, cfg.d))
            w.check_log_arg(lphi)
            term = rec.count * math.exp(lphi + float(w.log_value(lphi)))
            rows.append((rec, lphi, term))
    return rows


def capacity_sum(cfg, w: CapacityWeight) -> float:
    """sum over bubbles of phi(r_x) f(phi(r_x)), evaluated from log radii."""
    if len(cfg) == 0:
        return 0.0
    return math.fsum(t for _, _, t in _group_terms(cfg, w))


def theorem1_weight(d: int, n: int) -> CapacityWeight:
    return CapacityWeight.theorem_one(n, d)


def theorem1_sum(cfg, n: int) -> float:
    """d = 2: sum (log 1/r)^-1 (log^(n+1) 1/r)^-1; d >= 3: sum r^(d-2) (log^(n) 1/r)^-1."""
    w = theorem1_weight(cfg.d, n)
    try:
        return capacity_sum(cfg, w)
    except DomainError as exc:
        raise DomainError(f"radius too large for the iterated logarithms: {exc}") from None


def comparison_threshold() -> float:
    """Smallest u0 with u >= (log u)^3 for all u >= u0 (u = log^(n) of 1/phi)."""
    from scipy.optimize import brentq

    return float(math.exp(brentq(lambda x: math.exp(x) - x**3, 3.0, 6.0)))


def comparison_holds(log_phi, n: int) -> np.ndarray:
    """(log^(n) t)^-1 <= (log^(n+1) t)^-3 at t = 1/phi, per entry."""
    from .schedules import iterated_log_of_log

    u = iterated_log_of_log(n, -np.asarray(log_phi, dtype=float))
    with np.errstate(invalid="ignore", divide="ignore"):
        return (u > 1.0) & (np.log(u) ** 3 <= u)


# --------------------------------------------------------------------------
# product bound and the (k-est) ratio


def product_lower_bound(gammas) -> float:
    g = np.asarray(list(gammas), dtype=float)
    if g.size and (np.any(g >= 1.0) or np.any(g < 0.0)):
        raise ValueError("each gamma must lie in [0, 1)")
    return float(-np.expm1(np.sum(np.log1p(-g))))


def kest_ratio(cfg, w: CapacityWeight, k: int) -> float:
    """(#X_k phi(r_k) f(phi(r_k))) / (beta_k f(alpha_k^(d-1))) for shell k of cfg."""
    recs = [(rec, lphi, t) for rec, lphi, t in _group_terms(cfg, w) if rec.k == k]
    if not recs:
        raise KeyError(f"shell {k} not in config")
    rec = recs[0][0]
    term = math.fsum(t for _, _, t in recs) / len(recs)
    la = (cfg.d - 1) * math.log(rec.alpha)
    return term / (rec.beta * math.exp(float(w.log_value(la))))


def kest_ratio_analytic(s: Schedule, w: CapacityWeight, k: int) -> float:
    """Same ratio with #X_k taken from the net-size rule, for shells too large to build."""
    R, a = s.R(k), s.alpha(k) / s.beta(k)
    count = net_size(R, a, s.d)
    lphi = float(s.log_phi_r(k))
    la = (s.d - 1) * math.log(s.alpha(k))
    return count * math.exp(lphi + float(w.log_value(lphi))) / (
        s.beta(k) * math.exp(float(w.log_value(la)))
    )


# --------------------------------------------------------------------------
# tails: the operational form of "< delta"


def _log_shell_terms(s: Schedule, w: CapacityWeight, ks):
    """Upper bound on log(#X_k phi(r_k) f(phi(r_k))) using R_k <= 1.

    #X_k <= c a_k^(1-d) + 1 and phi(r_k) = a_k^(d-2) alpha_k, so
    #X_k phi(r_k) <= c beta_k + phi(r_k); summing in this form avoids
    cancelling two huge logs.
    """
    ks = np.asarray(ks, dtype=float)
    lphi = s.log_phi_r(ks)
    c = 6.0 * math.pi if s.d == 2 else COUNT_CONSTANTS[s.d][1]
    with np.errstate(invalid="ignore"):
        return (np.logaddexp(math.log(c) + s.log_beta(ks), lphi)
                + w.log_value(lphi, s.log_log_inv_phi_r(ks)))


@dataclass(frozen=True)
class TailCertificate:
    k_lo: int
    k_hi: int
    finite_sum: float
    tail_bound: float
    delta: float

    @property
    def total(self) -> float:
        return self.finite_sum + self.tail_bound

    @property
    def passed(self) -> bool:
        return self.total < self.delta

    def to_json(self) -> dict:
        return {"k_lo": self.k_lo, "k_hi": self.k_hi, "finite_sum": self.finite_sum,
                "tail_bound": self.tail_bound, "total": self.total, "delta": self.delta,
                "pass": self.passed}


def tail_certificate(s: Schedule, w: CapacityWeight, k_lo: int, window: int = 100_000) -> TailCertificate:
    """Sum of shell capacity terms over k_lo..k_lo+window plus an integral-test
    bound beyond. Counts use an upper bound on the net size with R_k <= 1."""
    k_hi = k_lo + window
    ks = np.arange(k_lo, k_hi + 1, dtype=float)
    lt = _log_shell_terms(s, w, ks)
    finite = math.fsum(np.exp(lt[np.isfinite(lt)]))
    tb = integral_tail(lambda k: _log_shell_terms(s, w, k), float(k_hi))
    bound = tb.value if tb.certified else math.inf
    return TailCertificate(k_lo, k_hi, finite, bound, math.nan)


def delta_tail_start(s: Schedule, w: CapacityWeight, delta: float, k_min: int | None = None,
                     window: int = 100_000, k_max: int = 10**12) -> TailCertificate:
    """Smallest k_lo (up to bisection on a doubling bracket) whose certified
    tail is below delta."""
    lo = k_min if k_min is not None else s.k0

    def total(k):
        return tail_certificate(s, w, k, window).total

    if total(lo) < delta:
        return _with_delta(tail_certificate(s, w, lo, window), delta)
    hi = lo
    while total(hi) >= delta:
        lo, hi = hi, hi * 2
        if hi > k_max:
            raise ValueError(f"no k_lo <= {k_max} brings the tail below {delta}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if total(mid) < delta:
            hi = mid
        else:
            lo = mid
    return _with_delta(tail_certificate(s, w, hi, window), delta)


def _with_delta(c: TailCertificate, delta: float) -> TailCertificate:
    return TailCertificate(c.k_lo, c.k_hi, c.finite_sum, c.tail_bound, delta)


# --------------------------------------------------------------------------
# the certificate


@dataclass(frozen=True)
class CertificateReport:
    p_hat: float
    bound: float
    sigma_combined: float
    slack: float
    gamma_hats: tuple
    partial_sum: float
    extrapolated_bound: float
    trajectory: tuple

    @property
    def margin(self) -> float:
        return self.p_hat - (self.bound - 3.0 * self.sigma_combined - self.slack)

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0

    def to_json(self) -> dict:
        return {"pass": self.passed, "p_hat": self.p_hat, "bound": self.bound,
                "sigma_combined": self.sigma_combined, "slack": self.slack,
                "margin": self.margin, "gamma_hats": list(self.gamma_hats),
                "partial_sum": self.partial_sum,
                "extrapolated_bound (extrapolation)": self.extrapolated_bound,
                "trajectory": list(self.trajectory)}


def _p_and_sigma(e):
    if isinstance(e, (int, float)):
        return float(e), 0.0
    return float(e.p_hat), float(e.sigma)


def unavoidability_certificate(gamma_estimates, global_estimate, slack: float = 0.0) -> CertificateReport:
    """Check p_hat >= 1 - prod(1 - gamma_hat) - 3 sigma - slack.

    ``gamma_estimates`` holds per-shell minima (HitEstimate or float); the
    bound's standard error comes from the first-order delta method.
    """
    gs = [_p_and_sigma(e) for e in gamma_estimates]
    g = np.array([x for x, _ in gs], dtype=float)
    sg = np.array([s for _, s in gs], dtype=float)
    g = np.minimum(g, np.nextafter(1.0, 0.0))
    bound = product_lower_bound(g)
    P = 1.0 - bound
    var_b = float(np.sum((P / (1.0 - g)) ** 2 * sg**2)) if g.size else 0.0
    p, sp = _p_and_sigma(global_estimate)
    traj = tuple(float(-np.expm1(v)) for v in np.cumsum(np.log1p(-g)))
    total = float(g.sum())
    return CertificateReport(p, bound, math.sqrt(sp**2 + var_b), slack, tuple(g.tolist()),
                             total, float(-math.expm1(-total)), traj)


# --------------------------------------------------------------------------
# the report


@dataclass
class VerificationReport:
    rows: list[dict] = field(default_factory=list)
    totals: dict = field(default_factory=dict)
    checks: list[dict] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c["name"] for c in self.checks if not c["pass"]]

    def add(self, name: str, ok: bool, **evidence) -> None:
        self.checks.append({"name": name, "pass": bool(ok), "evidence": evidence})

    def to_json(self) -> dict:
        return {"pass": self.passed, "params": self.params, "totals": self.totals,
                "checks": self.checks, "shells": self.rows}

    def to_csv(self) -> str:
        from .wos.estimate import fmt

        buf = io.StringIO()
        cols = ("k", "count", "phi_r", "cap_term", "kest_ratio", "gamma_hat", "cum_bound")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for r in self.rows:
            wr.writerow([r["k"], r["count"]] + [
                "" if r.get(c) is None else fmt(r[c]) for c in cols[2:]
            ])
        return buf.getvalue()

    def table(self) -> str:
        head = f"{'k':>5} {'count':>9} {'phi(r_k)':>12} {'cap term':>12} {'kest':>9} {'gamma_hat':>10}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            g = "" if r.get("gamma_hat") is None else f"{r['gamma_hat']:.4f}"
            lines.append(f"{r['k']:>5} {r['count']:>9} {r['phi_r']:>12.5e} {r['cap_term']:>12.5e} "
                         f"{r['kest_ratio']:>9.4f} {g:>10}")
        lines.append(f"capacity sum: {self.totals.get('capacity_sum', 0.0):.6e}")
        for c in self.checks:
            lines.append(f"[{'PASS' if c['pass'] else 'FAIL'}] {c['name']}")
        return "\n".join(lines)


def shell_rows(cfg, w: CapacityWeight, gamma_hats: dict | None = None) -> list[dict]:
    """One row per shell index k, aggregating every net of that shell."""
    by_k: dict[int, dict] = {}
    for rec, lphi, term in _group_terms(cfg, w):
        row = by_k.setdefault(rec.k, {"k": rec.k, "count": 0, "phi_r": math.exp(lphi),
                                      "cap_term": 0.0, "nets": 0, "alpha": rec.alpha,
                                      "beta": rec.beta})
        row["count"] += rec.count
        row["cap_term"] += term
        row["nets"] += 1
    rows = []
    cum = 0.0
    for k in sorted(by_k):
        row = by_k[k]
        if row["alpha"] > 0:
            la = (cfg.d - 1) * math.log(row["alpha"])
            row["kest_ratio"] = row["cap_term"] / row["nets"] / (
                row["beta"] * math.exp(float(w.log_value(la))))
        else:
            row["kest_ratio"] = math.nan
        g = None if gamma_hats is None else gamma_hats.get(k)
        row["gamma_hat"] = g
        if g is not None:
            cum = cum + math.log1p(-min(g, 1 - 1e-16))
            row["cum_bound"] = -math.expm1(cum)
        else:
            row["cum_bound"] = None
        rows.append(row)
    return rows


def verify_config(cfg, w: CapacityWeight, delta: float | None = None,
                  gamma_hats: dict | None = None, certificate: CertificateReport | None = None) -> VerificationReport:
    rep = VerificationReport(params={"weight": w.name, "delta": delta, "seed": cfg.seed,
                                     "schedule": cfg.schedule, "k_range": list(cfg.k_range)})
    rep.rows = shell_rows(cfg, w, gamma_hats)
    total = capacity_sum(cfg, w)
    rep.totals = {"capacity_sum": total, "bubbles": len(cfg), "shells": len(rep.rows)}
    row_sum = math.fsum(r["cap_term"] for r in rep.rows)
    rep.add("totals_match_rows", abs(row_sum - total) <= 1e-12 * max(total, 1e-300),
            rows=row_sum, total=total)
    if delta is not None:
        rep.add("capacity_below_delta", total < delta, capacity_sum=total, delta=delta)
    ident = []
    for rec in cfg.shells:
        if rec.kind == "points" or rec.scale != 1.0:
            continue
        lhs = float(log_phi_from_log_radius(rec.log_radius, cfg.d))
        a = rec.sep
        rhs = (cfg.d - 2) * math.log(a) + math.log(rec.alpha)
        ident.append(abs(math.expm1(lhs - rhs)))
    if ident:
        rep.add("phi_identity", max(ident) <= 1e-12, max_rel_err=max(ident))
    audit = cfg.meta.get("audit")
    if audit:
        rep.add("disjoint", audit["min_clearance"] > 0, min_clearance=audit["min_clearance"])
        if "max_r_over_gap" in audit:
            rep.add("r_over_gap", audit["max_r_over_gap"] <= 0.01, max_ratio=audit["max_r_over_gap"])
    if certificate is not None:
        rep.add("certificate", certificate.passed, **certificate.to_json())
    return rep
