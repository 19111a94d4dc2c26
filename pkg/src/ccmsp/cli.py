"""Command line front end: ``ccmsp {gen,solve,exact,reduce,campaign,summarize}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness, kernels, textio
from .instances import GridSpec, write_grid
from .model import Instance, Variant, bitstring
from .oracles import (
    OracleRefusal,
    balanced_partition_dp,
    brute_force_optimum,
    ccmsp1_optimum,
    odd_optimum,
    reduce_partition,
)
from .solvers import FirstOf, IterationCap, SwapStable, TargetFitness, parse_stop, run

log = logging.getLogger("ccmsp")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def auto_stop(inst: Instance, cap: int):
    """Target the known optimum where an oracle exists, else the swap-stable rule or the cap."""
    if inst.variant is Variant.CCMSP1:
        return FirstOf(IterationCap(cap), TargetFitness(ccmsp1_optimum(inst)[0]))
    if inst.variant is Variant.CCMSP2PLUS:
        if inst.n % 2:
            return FirstOf(IterationCap(cap), TargetFitness(odd_optimum(inst)[0]))
        return FirstOf(IterationCap(cap), SwapStable())
    return IterationCap(cap)


def cmd_gen(args) -> int:
    spec = GridSpec.from_mapping(textio.read(args.config))
    rows = write_grid(spec, args.out)
    print(f"wrote {len(rows)} instances to {args.out}")
    return 0


def cmd_solve(args) -> int:
    inst = Instance.load(args.instance)
    if args.stop == "auto":
        stop = auto_stop(inst, args.cap)
    else:
        stop = parse_stop(args.stop, args.cap)
    rec = run(args.algo, inst, init=args.init, stop=stop, seed=args.seed,
              trajectory=args.trajectory is not None, backend=args.backend)
    if args.trajectory:
        Path(args.trajectory).write_text(rec.trajectory_csv(), newline="\n")
    _emit(textio.dumps([
        ("algorithm", rec.algorithm.value),
        ("seed", rec.seed),
        ("iterations", rec.iterations),
        ("stop_reason", rec.stop_reason),
        ("final_fitness", rec.final_fitness),
        ("final_solution", rec.final_solution),
    ]), args.out)
    for w in rec.warnings:
        log.warning(w)
    return 0


def cmd_exact(args) -> int:
    inst = Instance.load(args.instance)
    method = args.method
    if method == "auto":
        if inst.variant is Variant.CCMSP1:
            method = "ccmsp1"
        elif inst.variant is Variant.CCMSP2PLUS and inst.n % 2:
            method = "odd"
        else:
            method = "brute"
    solver = {"brute": brute_force_optimum, "ccmsp1": ccmsp1_optimum, "odd": odd_optimum}[method]
    value, witness = solver(inst)
    _emit(textio.dumps([
        ("method", method),
        ("optimum", value),
        ("witness", bitstring(witness)),
    ]), args.out)
    return 0


def cmd_reduce(args) -> int:
    red = reduce_partition(args.values)
    head = [f"# reduction of {' '.join(str(v) for v in args.values)}"]
    for g, (src, e) in enumerate(zip(red.source_index, red.elements)):
        head.append(f"# group {g}: value {args.values[src]} (input #{src}), doubled {e}")
    if sum(args.values) % 2 == 0:
        yes, _ = balanced_partition_dp(args.values)
        head.append(f"# balanced partition exists: {'yes' if yes else 'no'}")
    _emit("\n".join(head) + "\n" + red.instance.to_text(), args.out)
    return 0


def cmd_campaign(args) -> int:
    config = harness.CampaignConfig.load(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = harness.run_campaign(config, workers=args.workers, backend=args.backend)
    harness.write_results(out / "results.csv", rows, timing=args.timing)
    textio.write(out / "config.txt", config.to_items())
    # summarize what was written so `ccmsp summarize` on the file gives the same bytes
    harness.write_summary(harness.summarize(harness.read_results(out / "results.csv")), out)
    print(f"{len(rows)} runs written to {out / 'results.csv'}")
    return 0


def cmd_summarize(args) -> int:
    rows = []
    for path in args.results:
        rows.extend(harness.read_results(path))
    written = harness.write_summary(harness.summarize(rows), args.out)
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccmsp", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write instance files for a grid config")
    g.add_argument("config")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="one RLS or (1+1) EA run")
    s.add_argument("--algo", default="RLS", help="RLS or EA11")
    s.add_argument("--instance", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cap", type=int, default=harness.DEFAULT_CAP)
    s.add_argument("--stop", default="auto",
                   help="auto, cap, target:VALUE[:TOL], swap-stable, or a '+'-joined mix")
    s.add_argument("--init", default=None, help="initial bit string (default: random)")
    s.add_argument("--trajectory", default=None, help="CSV file for accepted improvements")
    s.add_argument("--out", default=None)
    s.add_argument("--backend", choices=("python", "cython"), default=None)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("exact", help="optimum from an exact or constructive oracle")
    e.add_argument("--instance", required=True)
    e.add_argument("--method", choices=("auto", "brute", "ccmsp1", "odd"), default="auto")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_exact)

    r = sub.add_parser("reduce", help="balanced-partition input to a scheduling instance")
    r.add_argument("values", nargs="+", type=int)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("campaign", help="run a config and write results plus summaries")
    c.add_argument("config")
    c.add_argument("--out", required=True)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--timing", action="store_true", help="add a wall_ms column")
    c.add_argument("--backend", choices=("python", "cython"), default=None)
    c.set_defaults(func=cmd_campaign)

    m = sub.add_parser("summarize", help="aggregate results CSV files")
    m.add_argument("results", nargs="+")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    log.info("kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args)
    except (OracleRefusal, harness.ConfigError, ValueError, OSError) as exc:
        print(f"ccmsp {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
