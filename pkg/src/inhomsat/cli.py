"""Command line interface: ``inhomsat <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import harness, io
from .components import check_product_form, decompose
from .kernel import InvalidKernelError, implication_digraphon, scale, validate_kernel
from .sampler import MODELS, Digraph, Stream, from_dimacs, lit_str, sample, to_dimacs
from .solver import implication_digraph, solve_scc
from .structures import contradictory_sccs, count_bicycles, detect_snake, find_bicycle

EXIT_SAT, EXIT_UNSAT = 10, 20


def _kernel(args):
    return io.resolve_kernel(args.kernel)


def _scales(args) -> list[float]:
    if args.scale:
        return list(args.scale)
    if args.scale_min is None or args.scale_max is None:
        raise SystemExit("give --scale values or --scale-min and --scale-max")
    return [float(c) for c in np.linspace(args.scale_min, args.scale_max, args.scale_steps)]


def cmd_validate(args) -> int:
    try:
        W = _kernel(args)
    except InvalidKernelError as e:
        for v in e.violations:
            print(f"violation: {v}")
        return 1
    problems = validate_kernel(W)
    for v in problems:
        print(f"violation: {v}")
    if not problems:
        print(f"ok: {W.space.t} types, {W.space.n_blocks} blocks")
    return 1 if problems else 0


def cmd_spectrum(args) -> int:
    print(harness.compare_to_prediction(_kernel(args)).text())
    return 0


def cmd_decompose(args) -> int:
    W = _kernel(args)
    G = implication_digraphon(W)
    d = decompose(G)
    sp = W.space
    print("fragmented: " + (", ".join(sp.block_name(b) for b in d.fragmented.sorted()) or "-"))
    product = check_product_form(d)
    for i, comp in enumerate(d.components):
        tag = "contradictory" if d.contradictory_flags[i] else "non-contradictory"
        extra = f", product form {'ok' if product[i] else 'VIOLATED'}" if i in product else ""
        print(f"component {i} ({tag}{extra}): " + ", ".join(sp.block_name(b) for b in comp.sorted()))
    return 0


def cmd_sample(args) -> int:
    W = scale(_kernel(args), args.scale[0] if args.scale else 1.0)
    x = sample(args.model, args.n, W, Stream(args.seed, args.trial))
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if isinstance(x, Digraph):
            io.write_edge_list(x, out)
        else:
            io.write_dimacs(x, out)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_solve(args) -> int:
    with open(args.file) as fh:
        f = io.read_dimacs(fh)
    v = solve_scc(f)
    print(f"s {'SATISFIABLE' if v.satisfiable else 'UNSATISFIABLE'}")
    if v.satisfiable and args.assignment:
        vals = [str(i + 1 if t else -(i + 1)) for i, t in enumerate(v.assignment)]
        print("v " + " ".join(vals) + " 0")
    if not v.satisfiable and args.witness:
        print("c witness " + " -> ".join(str(to_dimacs(l)) for l in v.witness))
    return EXIT_SAT if v.satisfiable else EXIT_UNSAT


def cmd_count_structures(args) -> int:
    x = io.read_instance(args.file)
    dg = implication_digraph(x) if not isinstance(x, Digraph) else x
    print(f"variables: {x.n}")
    print(f"arcs: {len(dg)}")
    print(f"contradictory_sccs: {len(contradictory_sccs(dg))}")
    bike = find_bicycle(dg)
    if bike is None:
        print("bicycle: none")
    else:
        basis = " ".join(str(to_dimacs(l)) for l in bike.basis)
        print(f"bicycle: k={bike.k} a={bike.a} b={bike.b} basis={basis}")
    if x.n <= args.max_exhaustive_n:
        for k in range(2, args.max_k + 1):
            for a in range(2, k + 1):
                for b in range(1, k):
                    c = count_bicycles(dg, k, a, b)
                    if c:
                        print(f"bicycles[k={k},a={a},b={b}]: {c}")
    else:
        print(f"bicycle counts: skipped (n > {args.max_exhaustive_n})")
    if not isinstance(x, Digraph):
        s = detect_snake(x, budget=args.budget)
        if s is None:
            print("snake: not found within budget")
        else:
            chain = " ".join(lit_str(l) for l in s.ls)
            print(f"snake: a={s.a} b={s.b} center={lit_str(s.f)} chain={chain}")
    return 0


def _config(args, scales) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        _kernel(args), ns=tuple(args.n), scales=tuple(scales), trials=args.trials, seed=args.seed,
        model=args.model, workers=args.workers, cell_timeout=args.timeout, kernel_ref=args.kernel)


def cmd_sweep(args) -> int:
    cfg = _config(args, _scales(args))
    res = harness.run_sweep(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            harness.write_csv(res, fh)
    else:
        harness.write_csv(res, sys.stdout)
    if args.plot:
        harness.plot_sweep(res, args.plot)
    pred = res.predicted_scale
    print(f"# predicted threshold scale 1/rho* = {pred:.6g}" if math.isfinite(pred)
          else "# rho* = 0: satisfiable at every scale", file=sys.stderr)
    for msg in res.problems():
        print(f"# {msg}", file=sys.stderr)
    return 0


def cmd_threshold(args) -> int:
    cfg = _config(args, [1.0])
    est = harness.estimate_threshold(cfg, args.scale_min, args.scale_max, probes=args.probes)
    print(harness.compare_to_prediction(cfg.kernel, est).text())
    return 0


def cmd_marginal_test(args) -> int:
    arcs = []
    for spec in args.arc or ["1,2"]:
        u, v = (int(t) for t in spec.split(","))
        arcs.append((from_dimacs(u), from_dimacs(v)))
    r = harness.marginal_equality_test(_kernel(args), args.n[0], args.trials, arcs, seed=args.seed)
    print(f"patterns: {r.patterns}")
    print(f"digraph counts: {r.counts_digraph}")
    print(f"dagger counts: {r.counts_dagger}")
    if r.degenerate:
        print("degenerate: fewer than two patterns observed; no test performed")
    print(f"chi2 = {r.statistic:.6g}, p = {r.p_value:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inhomsat", description="Random 2-SAT on inhomogeneous kernels.")
    sub = p.add_subparsers(dest="command", required=True)

    def kernel_arg(sp, required=True):
        sp.add_argument("--kernel", required=required,
                        help="kernel JSON file, or const:<c>, or abc:<A>,<B>,<C>")

    def experiment_args(sp):
        kernel_arg(sp)
        sp.add_argument("--n", type=int, nargs="+", default=[1000])
        sp.add_argument("--scale", type=float, nargs="+")
        sp.add_argument("--scale-min", type=float)
        sp.add_argument("--scale-max", type=float)
        sp.add_argument("--scale-steps", type=int, default=9)
        sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--model", choices=MODELS, default="twosat")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--timeout", type=float, help="per-cell time limit in seconds")
        sp.add_argument("--out")

    s = sub.add_parser("validate", help="check a kernel file")
    kernel_arg(s)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("spectrum", help="rho*, 1/rho* and per-component spectra")
    kernel_arg(s)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("decompose", help="strong components of the implication digraphon")
    kernel_arg(s)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("sample", help="write one random instance (DIMACS, or edge list for digraph)")
    kernel_arg(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--scale", type=float, nargs=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--model", choices=MODELS, default="twosat")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("solve", help="solve a DIMACS 2-CNF; exit 10 SAT, 20 UNSAT")
    s.add_argument("file")
    s.add_argument("--assignment", action="store_true")
    s.add_argument("--witness", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("count-structures", help="contradictory components, bicycles and snakes")
    s.add_argument("file", help="DIMACS CNF or edge list")
    s.add_argument("--max-k", type=int, default=4)
    s.add_argument("--max-exhaustive-n", type=int, default=12)
    s.add_argument("--budget", type=int, default=10**6)
    s.set_defaults(func=cmd_count_structures)

    s = sub.add_parser("sweep", help="satisfiable fraction over a scale grid (CSV)")
    experiment_args(s)
    s.add_argument("--plot", help="write an SVG plot here")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("threshold", help="bisection estimate of the threshold scale")
    experiment_args(s)
    s.add_argument("--probes", type=int, default=8)
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("marginal-test", help="chi-square test of arc-pattern marginals")
    experiment_args(s)
    s.add_argument("--arc", action="append", help="arc as two DIMACS literals, e.g. 1,2 or --arc=-2,-1 (repeatable)")
    s.set_defaults(func=cmd_marginal_test)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.FormatError, InvalidKernelError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
