"""Command-line front end.

State strings list contour 0 first: ``--state 011`` means d_0=0, d_1=1, d_2=1.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile

from . import markov, verify
from .chain import RULE_NAMES, ChainState, rule_from_name, step_deterministic
from .markov import format_float
from .stochastic import RngStream, check_epsilon, estimate_velocities, step_stochastic

# stream index reserved for drawing `--state random`; replicas use 0, 1, ...
INIT_STREAM = 1 << 31


class UsageError(Exception):
    pass


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _initial_state(args) -> ChainState:
    spec = args.state
    if spec is None or spec == "random":
        if args.n is None:
            raise UsageError("--n is required with a random initial state")
        gen = RngStream(args.seed, INIT_STREAM).generator()
        code = int(gen.integers(0, 1 << args.n))
        return ChainState.from_code(args.n, code)
    try:
        x = ChainState.from_string(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.n is not None and x.n != args.n:
        raise UsageError(f"state {spec!r} has length {x.n}, but --n is {args.n}")
    return x


def _rule(args, n: int):
    try:
        return rule_from_name(args.rule, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _eps(value: float, positive: bool = False) -> float:
    try:
        eps = check_epsilon(value)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if positive and eps == 0.0:
        raise UsageError("epsilon must be positive for a stationary solve")
    return eps


def _require_n(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    return args.n


def cmd_step(args) -> int:
    x = _initial_state(args)
    rule = _rule(args, x.n)
    eps = _eps(args.epsilon[0]) if args.epsilon else 0.0
    if eps > 0:
        y, _ = step_stochastic(x, rule, eps, RngStream(args.seed).generator())
    else:
        y = step_deterministic(x, rule)
    _write(f"{y}\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    x = _initial_state(args)
    rule = _rule(args, x.n)
    eps = _eps(args.epsilon[0]) if args.epsilon else 0.0
    gen = RngStream(args.seed).generator()
    lines = ["t,state,moved,moves"]
    lines.append(f"0,{x},,0")
    for t in range(1, args.steps + 1):
        x, moved = step_stochastic(x, rule, eps, gen)
        lines.append(f"{t},{x},{''.join(map(str, moved))},{sum(moved)}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _sweep(args, eps_list):
    n = _require_n(args)
    rule = _rule(args, n)
    groups = None
    if args.groups:
        if n != 3:
            raise UsageError("--groups is only defined for n=3")
        groups = markov.three_contour_partition()
    try:
        return markov.epsilon_sweep(n, rule, eps_list, groups=groups, levels=args.levels)
    except markov.ExactCapacityError as exc:
        raise UsageError(str(exc)) from exc


def cmd_exact(args) -> int:
    if not args.epsilon or len(args.epsilon) != 1:
        raise UsageError("exact takes exactly one --epsilon")
    table = _sweep(args, [_eps(args.epsilon[0], positive=True)])
    _write(markov.sweep_csv(table), args.out)
    return 0


def cmd_sweep(args) -> int:
    if not args.epsilon:
        raise UsageError("sweep needs at least one --epsilon")
    eps_list = [_eps(e, positive=True) for e in args.epsilon]
    table = _sweep(args, eps_list)
    _write(markov.sweep_csv(table), args.out)
    if len(eps_list) >= 2:
        v = table.column("v_avg")
        fit = markov.fit_expansion(eps_list, v)
        print(f"fit v_avg ~ {format_float(fit.constant)} + ({format_float(fit.slope)}) * eps",
              file=sys.stderr)
    return 0


def cmd_mc(args) -> int:
    x = _initial_state(args)
    rule = _rule(args, x.n)
    eps = _eps(args.epsilon[0]) if args.epsilon else 0.0
    if args.replicas < 1:
        raise UsageError("--replicas must be >= 1")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    est = estimate_velocities(x, rule, eps, args.steps, args.burn_in, args.replicas, args.seed)
    lines = ["particle,v,stderr"]
    for i in range(x.n):
        lines.append(f"{i},{format_float(est.v[i])},{format_float(est.stderr[i])}")
    lines.append(f"avg,{format_float(est.v_avg)},{format_float(est.v_avg_stderr)}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    if args.n_min < 2:
        raise UsageError("--n-min must be >= 2")
    if args.n_max > verify.BFS_CAP:
        raise UsageError(f"--n-max must be <= {verify.BFS_CAP}")
    reports = verify.run_suite(args.n_min, args.n_max)
    lines = []
    for r in reports:
        lines.append(r.summary())
        lines.extend(f"  counterexample: {c}" for c in r.counterexamples)
    by_name: dict[str, list] = {}
    for r in reports:
        by_name.setdefault(r.name, []).append(r)
    ok = True
    for name, rs in by_name.items():
        status = "PASS" if all(r.passed for r in rs) else "FAIL"
        ok &= status == "PASS"
        lines.append(f"{name}: {status} for n={rs[0].n}..{rs[-1].n}")
    _write("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of contours")
    common.add_argument("--rule", choices=RULE_NAMES, default="long-cluster")
    common.add_argument("--epsilon", type=float, action="append",
                        help="move failure probability (repeat for sweep)")
    common.add_argument("--state", help="initial state, contour 0 first (e.g. 011), or 'random'")
    common.add_argument("--steps", type=int, default=1000)
    common.add_argument("--burn-in", type=int, default=None, help="default 10*n")
    common.add_argument("--replicas", type=int, default=8)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--levels", action="store_true", help="add level-set columns P_i")
    common.add_argument("--groups", action="store_true", help="add G1..G4 columns (n=3)")

    parser = argparse.ArgumentParser(
        prog="contourchain",
        description="Binary closed chains of contours: simulation, exact analysis, verification.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in [
        ("step", cmd_step, "print the successor of --state"),
        ("simulate", cmd_simulate, "print a trajectory table"),
        ("exact", cmd_exact, "exact stationary velocities for one epsilon"),
        ("mc", cmd_mc, "Monte Carlo velocity estimates with standard errors"),
        ("sweep", cmd_sweep, "exact velocities over several epsilons (CSV)"),
    ]:
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=func)
    p = sub.add_parser("verify", help="exhaustive optimality and lemma checks")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
