"""Command-line experiment runner.

Subcommands: ``linear-convergence`` (benchmark error table over jump counts
and steps), ``silkworm`` (population model trajectory and error series),
``quadrature-check`` (randomized rule-vs-bound suite) and ``bounds``
(measured constants against the a-priori bounds).  All outputs are CSV, LF
line endings, ``.`` decimal separator, with a mandatory header row; runs are
deterministic for a fixed seed.  Exit codes: 0 success, 1 property or bound
violation, 2 configuration error, 3 jump/grid mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, derivator, linear, models, quadrature, solver

DEFAULT_SEED = 20240


class ConfigError(Exception):
    pass


def _resolve_seed(flag_value):
    if flag_value is not None:
        return int(flag_value)
    env = os.environ.get("STIELTJES_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"STIELTJES_SEED must be an integer: {env!r}") from exc
    return DEFAULT_SEED


def _parse_float_list(text, name):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid {name} list: {text!r}") from exc
    if not values:
        raise ConfigError(f"empty {name} list")
    return values


def _parse_int_list(text, name):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"invalid {name} list: {text!r}") from exc
    if not values:
        raise ConfigError(f"empty {name} list")
    return values


def _load_derivator(arg):
    """Accept an inline JSON descriptor or a path to one."""
    if os.path.exists(arg):
        with open(arg, "r", encoding="utf-8") as fh:
            desc = json.load(fh)
    else:
        try:
            desc = json.loads(arg)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"--derivator is neither a file nor valid JSON: {arg!r}") from exc
    try:
        return derivator.from_descriptor(desc)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad derivator descriptor: {exc}") from exc


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- linear-convergence ------------------------------------------------------


def run_linear_convergence(args) -> int:
    h_values = _parse_float_list(args.h, "step")
    jump_counts = _parse_int_list(args.jumps, "jump-count")
    if any(h <= 0 for h in h_values):
        raise ConfigError("steps must be positive")
    if any(nj < 0 for nj in jump_counts):
        raise ConfigError("jump counts must be nonnegative")

    if args.derivator is not None:
        fixed = _load_derivator(args.derivator)
        g_factory = lambda nj: fixed
        jump_counts = [fixed.n_jumps]
    else:
        g_factory = lambda nj: derivator.make_test_derivator(
            nj, alpha=args.alpha, T=args.T, snap=args.snap)

    # fail fast on any jump/grid mismatch before burning time on the grid
    for nj in jump_counts:
        g = g_factory(nj)
        for h in h_values:
            solver.build_partition(g, h)

    d = args.d
    spec_factory = lambda g: models.make_linear_spec(d, args.x0)
    exact_factory = lambda g: (
        lambda t: linear.homogeneous_solution(d, args.x0, g, t),
        lambda t: linear.homogeneous_solution(d, args.x0, g, t, from_right=True),
    )
    cells = analysis.convergence_table(spec_factory, g_factory, exact_factory,
                                       h_values, jump_counts)
    if args.format == "json":
        payload = [vars(c) for c in cells]
        _write_text(args.out, json.dumps(payload, indent=2) + "\n")
    else:
        _write_text(args.out, analysis.format_convergence_csv(cells))
    for nj in jump_counts:
        rows = [c for c in cells if c.num_jumps == nj and not c.failed]
        if len(rows) >= 2:
            order_e = analysis.estimate_order([c.h for c in rows],
                                              [c.max_e for c in rows])
            order_star = analysis.estimate_order([c.h for c in rows],
                                                 [c.max_e_star for c in rows])
            print(f"jumps={nj}: measured corrector order {order_e:.3f}, "
                  f"predictor order {order_star:.3f}")
    print(f"wrote {args.out}")
    return 0


# -- silkworm ----------------------------------------------------------------


def run_silkworm(args) -> int:
    if args.h <= 0:
        raise ConfigError("step must be positive")
    if args.c <= 0:
        raise ConfigError("decay rate must be positive")
    if args.lam < 0:
        raise ConfigError("fecundity must be nonnegative")
    params = models.SilkwormParams(c=args.c, lam=args.lam, x0=args.x0, T=args.T)
    g = derivator.make_silkworm_derivator(args.T)
    part = solver.build_partition(g, args.h)
    spec = models.make_silkworm_spec(params)
    traj = solver.solve(spec, g, part)
    exact = models.SilkwormSolution(params, resolution=args.resolution)
    report = analysis.error_report(traj, exact, exact.right, g, spec)
    lines = ["t,numeric,exact,error"]
    x = exact(part.nodes)
    for t, u, xv, e in zip(part.nodes, traj.values, x, report.e):
        lines.append(f"{t:.6f},{u:.10e},{xv:.10e},{e:.10e}")
    lines.append(f"max,,,{report.max_e:.4e}")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"max|e| = {report.max_e:.4e}")
    print(f"wrote {args.out}")
    return 0


# -- quadrature-check --------------------------------------------------------


def run_quadrature_check(args) -> int:
    if args.cases < 1:
        raise ConfigError("need at least one case")
    seed = _resolve_seed(args.seed)
    rows = quadrature.run_bound_suite(num_cases=args.cases,
                                      n_oracle=args.n_oracle, seed=seed)
    lines = [f"# seed={seed}", "case,rule,value,oracle,bound,pass"]
    failures = 0
    for r in rows:
        ok = r["passed"]
        failures += 0 if ok else 1
        lines.append(f"{r['case']},{r['rule']},{r['value']:.10e},"
                     f"{r['oracle']:.10e},{r['bound']:.10e},{int(ok)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"{len(rows)} rows, {failures} bound violations; wrote {args.out}")
    return 1 if failures else 0


# -- bounds ------------------------------------------------------------------


def run_bounds(args) -> int:
    if args.h <= 0:
        raise ConfigError("step must be positive")
    g = derivator.make_test_derivator(args.jumps, alpha=args.alpha, T=args.T,
                                      snap=args.snap)
    part = solver.build_partition(g, args.h)
    d = args.d
    spec = models.make_linear_spec(d, args.x0)
    exact = lambda t: linear.homogeneous_solution(d, args.x0, g, t)
    exact_right = lambda t: linear.homogeneous_solution(d, args.x0, g, t,
                                                        from_right=True)
    traj = solver.solve(spec, g, part)
    report = analysis.error_report(traj, exact, exact_right, g, spec)
    _, _, resid_comb = analysis.truncation_errors(exact, exact_right, g, spec, part)
    consts = analysis.measure_constants(spec, g, part, exact, exact_right)
    resid_max = float(np.max(np.abs(resid_comb)))
    bound = analysis.theoretical_bounds(consts, args.T, 0.0, resid_max)
    bound_star = analysis.predictor_bound(consts, args.T, 0.0, resid_max,
                                          at_jump=True)
    bound_plus = analysis.right_limit_bound(consts, args.T, 0.0, resid_max,
                                            at_jump=True)
    print(f"measured constants: K1={consts.k1:.4g} K2={consts.k2:.4g} "
          f"K3={consts.k3:.4g} H={consts.lip:.4g}")
    print(f"G1={consts.g1:.4g} G2={consts.g2:.4g} G3={consts.g3:.4g} "
          f"G4={consts.g4:.4g} G5={consts.g5:.4g} G6={consts.g6:.4g}")
    rows = [
        ("corrector", report.max_e, bound),
        ("predictor", report.max_e_star, bound_star),
        ("right-limit", report.max_e_plus, bound_plus),
    ]
    ok = True
    lines = ["quantity,max_error,bound,holds"]
    for name, err, bnd in rows:
        holds = err <= bnd
        ok = ok and holds
        print(f"{name}: max error {err:.4e} vs bound {bnd:.4e} "
              f"({'holds' if holds else 'VIOLATED'})")
        lines.append(f"{name},{err:.4e},{bnd:.4e},{int(holds)}")
    if args.out:
        _write_text(args.out, "\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    return 0 if ok else 1


# -- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stieltjes-ode",
        description="Experiment runner for the jump-driven ODE scheme")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linear-convergence",
                       help="error table for the linear benchmark")
    p.add_argument("--jumps", default="2,4,6,8,10",
                   help="comma-separated jump counts")
    p.add_argument("--h", default="1e-1,1e-2,1e-3,1e-4,1e-5",
                   help="comma-separated steps")
    p.add_argument("--d", type=float, default=-0.5)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--snap", type=float, default=0.1,
                   help="grid the jump times are rounded to")
    p.add_argument("--derivator", default=None,
                   help="JSON descriptor (inline or path) overriding the default driver")
    p.add_argument("--out", default="linear_convergence.csv")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=run_linear_convergence)

    p = sub.add_parser("silkworm", help="population model run vs exact solution")
    p.add_argument("--h", type=float, default=1e-2)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.1)
    p.add_argument("--c", type=float, default=1.2)
    p.add_argument("--x0", type=float, default=8.0)
    p.add_argument("--resolution", type=int, default=1000)
    p.add_argument("--out", default="silkworm.csv")
    p.set_defaults(func=run_silkworm)

    p = sub.add_parser("quadrature-check",
                       help="randomized rule-vs-bound property suite")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--n-oracle", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="quadrature_check.csv")
    p.set_defaults(func=run_quadrature_check)

    p = sub.add_parser("bounds",
                       help="measured constants vs the a-priori error bounds")
    p.add_argument("--jumps", type=int, default=2)
    p.add_argument("--h", type=float, default=1e-2)
    p.add_argument("--d", type=float, default=-0.5)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--snap", type=float, default=0.1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which is our config-error code too
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except solver.GridMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
