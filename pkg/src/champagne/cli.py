"""Command-line front end: ``champagne build|simulate|verify|report``.

Exit codes: 0 success, 1 usage error, 2 validation failure or unreadable
input, 3 timeout cap breached, 4 verification checks failed.

Numerical modules are imported inside the commands so ``--threads`` can be
applied before numba starts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

EXIT_USAGE, EXIT_INVALID, EXIT_TIMEOUT, EXIT_FAILED = 1, 2, 3, 4


class UsageError(Exception):
    pass


class InvalidInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# small parsers


def parse_k_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        k = int(text)
        return k, k
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected K or K_LO..K_HI, got {text!r}") from None


def parse_point(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def parse_keyvals(text: str) -> dict[str, float]:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise argparse.ArgumentTypeError(f"expected key=value pairs, got {text!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{k}: not a number: {v!r}") from None
    return out


def _json_arg(text: str):
    """Inline JSON or a path to a JSON file."""
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise InvalidInput(f"not a JSON file or JSON text: {text!r}") from None


def _load_config(path: str):
    from .config import ChampagneConfig

    if not os.path.exists(path):
        raise InvalidInput(f"config file not found: {path}")
    try:
        return ChampagneConfig.load(path)
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write(text: str, path: str | None, append: bool = False) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "a" if append else "w", newline="") as fh:
        fh.write(text)


def _resolved(args, skip=("func", "params", "threads", "command", "out", "append", "csv")) -> dict:
    """Parameter set recorded into outputs. Thread counts are left out so
    artifacts do not depend on them."""
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def configure_threads(n: int | None) -> None:
    """Size numba's pool before it is first imported."""
    if n is None and os.environ.get("CHAMPAGNE_THREADS"):
        n = int(os.environ["CHAMPAGNE_THREADS"])
    if n is not None and n > (os.cpu_count() or 1) and "numba" not in sys.modules:
        os.environ.setdefault("NUMBA_NUM_THREADS", str(n))
    from .wos.engine import set_threads

    set_threads(n)


# --------------------------------------------------------------------------
# build


def cmd_build(args) -> int:
    from .builder import (build_ball_config, build_corollary_config, build_general_config,
                          compute_k1)
    from .domains import Domain
    from .schedules import CapacityWeight, Schedule, default_weight, validate_schedule

    if args.k is None and args.kind == "ball":
        raise UsageError("build needs --k K_LO..K_HI")
    k_lo = args.k[0] if args.k else None
    s = Schedule.parse(args.schedule, args.d, k0=args.k0 if args.k0 is not None else k_lo)
    w = CapacityWeight.parse(args.weight, args.d) if args.weight else default_weight(s)
    horizon = args.k[1] if args.k else s.k0 + 64
    report = validate_schedule(s, w, max(horizon, s.k0))
    bad = [c for c in report.failures() if c.name not in ("f_def_finite",)]
    if bad:
        for c in bad:
            msg = c.evidence.get("message", "")
            print(f"validation failed: {c.name}: {msg}".rstrip(": "), file=sys.stderr)
        return EXIT_INVALID

    params = _resolved(args)
    if args.kind == "ball":
        k_lo, k_hi = args.k
        if not args.allow_below_k1 and k_lo < compute_k1(s):
            print(f"validation failed: r_k < a_k/100: k_lo={k_lo} below k1={compute_k1(s)}",
                  file=sys.stderr)
            return EXIT_INVALID
        cfg = build_ball_config(s, w, k_lo, k_hi, seed=args.seed, enforce_k1=False,
                                audit=not args.no_audit, max_points=args.max_points)
    elif args.kind == "corollary":
        y = args.y if args.y is not None else [0.0] * args.d
        cfg = build_corollary_config(y, args.r, args.R, args.gamma, args.delta_y, s, w,
                                     args.c_eff, args.seed, audit=not args.no_audit)
    else:
        if args.domain is None or args.exhaustion is None:
            raise UsageError("--kind general needs --domain and --exhaustion")
        dom = Domain.from_json(_json_arg(args.domain))
        items = _json_arg(args.exhaustion)
        levels = [dom.shrink(float(t)) if not isinstance(t, dict) else Domain.from_json(t)
                  for t in items]
        cfg = build_general_config(dom, levels, args.delta, s, w, args.c_eff, args.seed,
                                   audit=not args.no_audit)
    cfg.meta["params"] = params
    if args.out:
        cfg.save(args.out)
    print(f"schedule {s.name}, weight {w.name}, d={s.d}, seed={args.seed}")
    print(f"{'k':>5} {'count':>10} {'log r_k':>14} {'a_k':>12}")
    for rec in cfg.shells[: args.show]:
        print(f"{rec.k:>5} {rec.count:>10} {rec.log_radius:>14.6f} {rec.sep:>12.5e}")
    if len(cfg.shells) > args.show:
        print(f"... {len(cfg.shells) - args.show} more nets")
    print(f"bubbles: {len(cfg)}  capacity sum: {cfg.capacity_sum:.6e}")
    if "audit" in cfg.meta:
        print(f"audit: {json.dumps(cfg.meta['audit'])}")
    return 0


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    import numpy as np

    from .errors import FlaggedTimeouts
    from .wos.engine import Simulator, annulus_config
    from .wos.estimate import estimates_to_csv

    if (args.config is None) == (args.annulus is None):
        raise UsageError("give exactly one of --config and --annulus")
    params = _resolved(args)
    if args.annulus is not None:
        a = args.annulus
        missing = {"r", "R", "s"} - set(a)
        if missing:
            raise UsageError(f"--annulus needs r=,R=,s= (missing {sorted(missing)})")
        cfg = annulus_config(a["r"], a["R"], args.d)
        starts = args.start or [[a["s"]] + [0.0] * (args.d - 1)]
    else:
        cfg = _load_config(args.config)
        params["config_sha256"] = _sha256(args.config)
        starts = args.start or [[0.0] * cfg.d]
    starts = np.array(starts, dtype=float)
    if starts.ndim != 2 or starts.shape[1] != cfg.d:
        raise UsageError(f"start points must have {cfg.d} coordinates")
    sim = Simulator(cfg)
    tol = dict(eps_obstacle=args.eps_obstacle, eps_boundary=args.eps_boundary,
               max_steps=args.max_steps)
    params["resolved_tolerances"] = sim.tolerances(**tol).__dict__
    try:
        est = sim.hit_probabilities(starts, args.trials, args.seed, timeout_cap=args.timeout_cap,
                                    **tol)
        shells = None
        if args.shells:
            est, shells = _with_shell_minima(cfg, est, args, tol)
    except FlaggedTimeouts as exc:
        print(f"timeout cap breached: {exc}\nhint: check that start points lie inside the "
              "domain, or raise --max-steps / --eps-boundary", file=sys.stderr)
        return EXIT_TIMEOUT
    comments = {"champagne": json.dumps(params, sort_keys=True, default=str)}
    if args.append and args.out and os.path.exists(args.out):
        text = estimates_to_csv(est, cfg.d, shells=shells).split("\n", 1)[1]
    else:
        text = estimates_to_csv(est, cfg.d, comments, shells)
    _write(text, args.out, append=args.append)
    return 0


def _with_shell_minima(cfg, est, args, tol):
    from .calibration import shell_minima

    mins = shell_minima(cfg, None, args.z_samples, args.shell_trials or args.trials, args.seed,
                        eps_obstacle=tol["eps_obstacle"], timeout_cap=args.timeout_cap)
    rows = list(est) + [m.estimate for m in mins.values()]
    return rows, [None] * len(est) + list(mins)


# --------------------------------------------------------------------------
# verify / report


def _verification(args):
    from .schedules import CapacityWeight, Schedule, default_weight
    from .verifier import unavoidability_certificate, verify_config
    from .wos.estimate import split_certificate_rows

    cfg = _load_config(args.config)
    sched = cfg.schedule
    if args.weight:
        w = CapacityWeight.parse(args.weight, cfg.d)
    elif sched.get("weight"):
        w = CapacityWeight.parse(sched["weight"], cfg.d)
    else:
        w = default_weight(Schedule.parse(sched["schedule"], cfg.d))
    gamma_hats, cert = None, None
    if args.certificate:
        if not os.path.exists(args.certificate):
            raise InvalidInput(f"results file not found: {args.certificate}")
        with open(args.certificate) as fh:
            glob, shells = split_certificate_rows(fh.read())
        if not glob:
            raise InvalidInput("certificate needs a global estimate row (empty k column)")
        mins = {k: min(v, key=lambda e: e.p_hat) for k, v in sorted(shells.items())}
        gamma_hats = {k: e.p_hat for k, e in mins.items()}
        worst = min(glob, key=lambda e: e.p_hat)
        cert = unavoidability_certificate(list(mins.values()), worst, slack=args.slack)
    rep = verify_config(cfg, w, args.delta, gamma_hats, cert)
    for key, val in _resolved(args).items():
        if val is not None or key not in rep.params:
            rep.params[key] = val
    return cfg, rep


def cmd_verify(args) -> int:
    _, rep = _verification(args)
    _write(json.dumps(rep.to_json(), indent=2, default=str) + "\n", args.out)
    if args.csv:
        _write(rep.to_csv(), args.csv)
    for c in rep.checks:
        print(f"[{'PASS' if c['pass'] else 'FAIL'}] {c['name']}", file=sys.stderr)
    if not rep.passed:
        print("failed checks: " + ", ".join(rep.failures), file=sys.stderr)
        return EXIT_FAILED
    return 0


def cmd_report(args) -> int:
    cfg, rep = _verification(args)
    if args.format == "json":
        _write(json.dumps(rep.to_json(), indent=2, default=str) + "\n", args.out)
        return 0
    lines = [f"config: {args.config}  d={cfg.d}  bubbles={len(cfg)}  seed={cfg.seed}",
             f"schedule: {cfg.schedule.get('schedule')}  weight: {rep.params['weight']}",
             rep.table()]
    cert = next((c for c in rep.checks if c["name"] == "certificate"), None)
    if cert:
        ev = cert["evidence"]
        lines.append(f"global p_hat {ev['p_hat']:.6f} vs product bound {ev['bound']:.6f} "
                     f"(3 sigma {3 * ev['sigma_combined']:.4f}, margin {ev['margin']:.4f})")
    _write("\n".join(lines) + "\n", args.out)
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="champagne", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: CHAMPAGNE_THREADS or all cores)")
        sp.add_argument("--params", default=None,
                        help="JSON file of defaults; explicit flags override it")

    b = sub.add_parser("build", help="build a champagne configuration")
    common(b)
    b.add_argument("--d", type=int, required=True, choices=(2, 3))
    b.add_argument("--schedule", required=True,
                   help='"one-bubble", "power-law:M=<int>,eps=<real>" or "tower:n=<int>"')
    b.add_argument("--weight", default=None, help='e.g. "iterlog3:n=1", "power:eps=2"')
    b.add_argument("--k", type=parse_k_range, default=None, help="shell range K_LO..K_HI")
    b.add_argument("--k0", type=int, default=None)
    b.add_argument("--kind", choices=("ball", "corollary", "general"), default="ball")
    b.add_argument("--out", default=None)
    b.add_argument("--no-audit", action="store_true")
    b.add_argument("--allow-below-k1", action="store_true",
                   help="build shells where r_k < a_k/100 does not yet hold")
    b.add_argument("--max-points", type=int, default=None)
    b.add_argument("--show", type=int, default=20, help="nets listed in the summary")
    b.add_argument("--y", type=parse_point, default=None)
    b.add_argument("--r", type=float, default=6.0 / 7.0)
    b.add_argument("--R", type=float, default=1.0)
    b.add_argument("--gamma", type=float, default=0.5)
    b.add_argument("--delta-y", type=float, default=1e-3)
    b.add_argument("--c-eff", type=float, default=1.0)
    b.add_argument("--domain", default=None, help="domain JSON (inline or file)")
    b.add_argument("--exhaustion", default=None,
                   help="JSON list of shrink amounts or domain objects, innermost first")
    b.add_argument("--delta", type=float, default=1.0)
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", help="walk-on-spheres hitting probabilities")
    common(s)
    s.add_argument("--config", default=None)
    s.add_argument("--annulus", type=parse_keyvals, default=None, help="r=..,R=..,s=..")
    s.add_argument("--d", type=int, default=2, choices=(2, 3), help="dimension for --annulus")
    s.add_argument("--start", type=parse_point, action="append", default=None)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--eps-obstacle", type=float, default=None)
    s.add_argument("--eps-boundary", type=float, default=None)
    s.add_argument("--max-steps", type=int, default=None)
    s.add_argument("--timeout-cap", type=float, default=1e-3)
    s.add_argument("--shells", action="store_true",
                   help="also estimate per-shell minima (adds column k)")
    s.add_argument("--z-samples", type=int, default=8)
    s.add_argument("--shell-trials", type=int, default=None)
    s.add_argument("--out", default=None)
    s.add_argument("--append", action="store_true")
    s.set_defaults(func=cmd_simulate)

    for name, func, helptext in (("verify", cmd_verify, "analytic checks and certificate"),
                                 ("report", cmd_report, "human-readable summary")):
        v = sub.add_parser(name, help=helptext)
        common(v)
        v.add_argument("--config", required=True)
        v.add_argument("--weight", default=None)
        v.add_argument("--delta", type=float, default=None)
        v.add_argument("--certificate", default=None, help="results CSV from simulate --shells")
        v.add_argument("--slack", type=float, default=0.0)
        v.add_argument("--out", default=None)
        if name == "verify":
            v.add_argument("--csv", default=None, help="per-shell CSV output")
        else:
            v.add_argument("--format", choices=("text", "json"), default="text")
        v.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.params:
        # file values become defaults, then the explicit flags are re-applied
        try:
            defaults = _json_arg(args.params)
        except InvalidInput as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sp._actions}
        unknown = set(defaults) - known
        if unknown:
            print(f"error: unknown keys in params file: {sorted(unknown)}", file=sys.stderr)
            return EXIT_USAGE
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)

    from .errors import ChampagneError

    try:
        if args.command == "simulate" or (args.command == "verify" and args.certificate):
            configure_threads(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInput, ChampagneError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
