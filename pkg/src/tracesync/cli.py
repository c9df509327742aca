"""Command line entry point: ``tracesync {analyze,solve,generate,verify,oracle}``."""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from .errors import InconclusiveError, InputError, ResourceError
from .formats import RunConfig, format_config, format_trace, parse_config
from .models import detect_topology
from .moebius import (
    Valuation,
    classify_detailed,
    components,
    factored_transform,
    growth_coefficients,
    moebius_polynomial,
    moebius_transform,
    multivariate_eval,
    smallest_root,
)
from .pfsa import PfsaConfig, format_increment_log, naive_walk_state, pfsa_generate
from .rng import RandomStream
from .sampler import psa_run, psa_valuation, structural_class
from .scenarios import SCENARIOS
from .solver import UnsupportedTopology, prefix_moebius, solve_path, solve_ring, uniform_targets
from .traces import enumerate_cliques, enumerate_traces

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
ORACLE_TOL = 1e-9


def _load(args) -> RunConfig:
    if not args.config:
        raise InputError("--config is required")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    cfg = parse_config(text)
    overrides = {k: getattr(args, k) for k in ("seed", "samples", "budget", "out") if getattr(args, k) is not None}
    return replace(cfg, **overrides)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _targets(cfg: RunConfig) -> Valuation:
    if isinstance(cfg.targets, Valuation):
        return cfg.targets
    return uniform_targets(cfg.network.monoid)


def cmd_analyze(args) -> int:
    cfg = _load(args)
    net = cfg.network
    m = net.monoid
    mu = moebius_polynomial(m)
    comps = components(m)
    indep = " ".join(f"{m.names[a]}{m.names[b]}" for a, b in sorted(tuple(sorted(p)) for p in m.independence)) or "(none)"
    lines = [
        f"letters={' '.join(m.names)}",
        f"alphabets={net.size}",
        f"independent_pairs={indep}",
        f"cliques={len(enumerate_cliques(m))}",
        f"moebius_polynomial={mu}",
        f"smallest_root={smallest_root(m):.12g}",
        f"irreducible={'yes' if len(comps) == 1 else 'no'}",
        f"components={len(comps)}",
        f"structural_criterion={structural_class(net).value}",
    ]
    if len(m.names) > 1 and not m.independence:
        lines.append("note=free monoid: every letter depends on every other")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_PASS


def _check_lines(targets: Valuation, solved: Valuation) -> list[str]:
    rows = []
    for name in targets.monoid.names:
        want, got = targets[name], solved[name]
        rows.append(f"# check {name}: target={want:.12g} solved={got:.12g} diff={abs(want - got):.1e}")
    return rows


def cmd_solve(args) -> int:
    cfg = _load(args)
    net = cfg.network
    targets = _targets(cfg)
    topo = detect_topology(net)
    if topo is None:
        raise UnsupportedTopology("general topology unsolved: only path and ring networks are supported")
    if topo.kind == "path":
        params = solve_path(net, targets)
        out = replace(cfg, dists=list(params.dists), targets=None, algorithm="psa", letter=None)
        checks = _check_lines(targets, params.valuation())
    else:
        removed, params = solve_ring(net, targets, cfg.removed or cfg.letter)
        out = replace(cfg, dists=list(params.dists), targets=None, algorithm="pfsa", letter=removed, removed=None)
        pf = PfsaConfig(net, removed, params.dists)
        checks = _check_lines(targets, pf.target_valuation())
        checks.insert(0, f"# dists act on the network without {removed}")
    _emit("\n".join(checks) + "\n" + format_config(out), cfg.out)
    return EXIT_PASS


def _footer(pairs) -> str:
    return "".join(f"# {k}={v}\n" for k, v in pairs)


def cmd_generate(args) -> int:
    cfg = _load(args)
    net = cfg.network
    if cfg.dists is None:
        raise InputError("generate needs a [dists] section")
    rng = RandomStream(cfg.seed)
    start = time.perf_counter()
    head = [("algorithm", cfg.algorithm), ("seed", cfg.seed)]
    if cfg.algorithm == "psa":
        outcome = psa_run(net, cfg.dists, rng, budget=cfg.budget)
        body = format_trace(net.monoid, outcome.trace)
        tail = [("length", len(outcome.trace)), ("status", outcome),
                ("wall_time", f"{time.perf_counter() - start:.3f}")]
        _emit(body + _footer(head + tail), cfg.out)
        return EXIT_PASS
    try:
        if cfg.algorithm == "pfsa":
            if not cfg.letter:
                raise InputError("pfsa needs 'letter' in [run]")
            state = pfsa_generate(PfsaConfig(net, cfg.letter, cfg.dists, cfg.seed, cfg.max_rejects), rng, cfg.length)
        else:
            state = naive_walk_state(net, cfg.dists, rng, cfg.length)
        status, code = "complete", EXIT_PASS
    except ResourceError as exc:
        state = getattr(exc, "partial", None)
        if state is None:
            raise
        status, code = f"error: {exc}", EXIT_RESOURCE
        print(f"tracesync: {exc} (partial output kept)", file=sys.stderr)
    shown = min(state.length, cfg.length)
    body = format_trace(state.monoid, state.prefix(shown))
    tail = [("length", shown), ("generated", state.length), ("increments", state.iterations), ("rejections", state.rejections),
            ("status", status), ("wall_time", f"{time.perf_counter() - start:.3f}")]
    _emit(body + _footer(head + tail), cfg.out)
    if args.increments:
        Path(args.increments).write_text(format_increment_log(state))
    return code


def cmd_verify(args) -> int:
    name = args.scenario
    if name is None and args.config:
        name = _load(args).extra.get("scenario")
    if name is None:
        raise InputError(f"--scenario is required; known: {', '.join(SCENARIOS)}")
    names = list(SCENARIOS) if name == "all" else [name]
    unknown = [n for n in names if n not in SCENARIOS]
    if unknown:
        raise InputError(f"unknown scenario {unknown[0]!r}; known: {', '.join(SCENARIOS)}")
    seed = args.seed if args.seed is not None else 0
    results = [SCENARIOS[n](seed=seed, samples=args.samples) for n in names]
    _emit("".join(r.report() for r in results), args.out)
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


def cmd_oracle(args) -> int:
    cfg = _load(args)
    net, m = cfg.network, cfg.network.monoid
    n = cfg.horizon
    rows, ok = [], True

    def record(name, passed, detail):
        nonlocal ok
        ok &= passed
        rows.append(f"[{'pass' if passed else 'FAIL'}] {name}: {detail}")

    counts = [0] * (n + 1)
    for x in enumerate_traces(m, n):
        counts[len(x)] += 1
    want = growth_coefficients(m, n)
    record(f"trace counts n<={n}", counts == want, f"enumerated {counts} series {want}")

    p0 = smallest_root(m)
    for label, f in [("uniform p0", Valuation.uniform(m, p0)), ("uniform p0/2", Valuation.uniform(m, p0 / 2))]:
        h1, h2 = moebius_transform(m, f), factored_transform(m, f)
        err = max(abs(h1.values[c] - h2.values[c]) for c in h1.values)
        record(f"transform forms, {label}", err <= ORACLE_TOL, f"max difference {err:.1e}")

    topo = detect_topology(net)
    if topo is not None:
        targets = _targets(cfg)
        if topo.kind == "path":
            names = [m.names[a] for a in topo.order]
            rec = prefix_moebius([targets[x] for x in names])[-1]
            closed = multivariate_eval(m, targets)
            record("path recurrence vs polynomial", abs(rec - closed) <= ORACLE_TOL,
                   f"recurrence {rec:.3e} polynomial {closed:.3e}")
            solved = psa_valuation(net, solve_path(net, targets).dists)
        else:
            removed, params = solve_ring(net, targets, cfg.removed or cfg.letter)
            solved = PfsaConfig(net, removed, params.dists).target_valuation()
        err = max(abs(solved[x] - targets[x]) for x in m.names)
        record("solver reproduces targets", err <= ORACLE_TOL, f"max difference {err:.1e}")
        cls = classify_detailed(m, targets)
        rows.append(f"targets classify {cls.kind.value} (epsilon={cls.epsilon:.3g})")
    _emit("\n".join(rows) + f"\noracle: {'PASS' if ok else 'FAIL'}\n", cfg.out)
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run config with [network], [dists], [targets], [run]")
    common.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the config)")
    common.add_argument("--samples", type=int, metavar="N", help="sample count (overrides the config)")
    common.add_argument("--budget", type=int, metavar="N", help="piece or work budget (overrides the config)")
    common.add_argument("--scenario", metavar="NAME", help=f"verify scenario: {', '.join(SCENARIOS)} or all")
    common.add_argument("--out", metavar="PATH", help="write the result here instead of stdout")

    parser = argparse.ArgumentParser(prog="tracesync", description="Random traces of synchronized alphabet networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="monoid, Möbius polynomial and termination report")
    sub.add_parser("solve", parents=[common], help="local distributions for target letter weights")
    gen = sub.add_parser("generate", parents=[common], help="run psa, pfsa or naive generation")
    gen.add_argument("--increments", metavar="PATH", help="also write the walk increments with rejection counts")
    sub.add_parser("verify", parents=[common], help="run a builtin verification scenario")
    sub.add_parser("oracle", parents=[common], help="brute-force cross-checks on a small monoid")
    return parser


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "generate": cmd_generate,
            "verify": cmd_verify, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "generate":
        args.increments = None
    try:
        return COMMANDS[args.command](args)
    except (ResourceError, InconclusiveError) as exc:
        print(f"tracesync: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InputError as exc:
        print(f"tracesync: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
