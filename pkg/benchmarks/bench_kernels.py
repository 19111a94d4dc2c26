"""Compare the compiled and pure-Python run loops on identical runs.

    python benchmarks/bench_kernels.py [--iters 20000] [--repeat 3]

Both backends consume the same random draws, so each pair of runs must end
in the same record; the script checks that before reporting timings.
"""

import argparse
import time

from ccmsp import kernels
from ccmsp.instances import gen_ccmsp1, gen_ccmsp2plus
from ccmsp.model import Instance
from ccmsp.solvers import IterationCap, run

CASES = [
    ("ccmsp1 k=16 m=50", lambda: gen_ccmsp1(16, 50, c=1e-2)),
    ("ccmsp2plus k=64 n=640", lambda: gen_ccmsp2plus(64, 640, seed=1)[0]),
    ("general k=8, per-group c", lambda: Instance((3, 5, 8, 8, 13, 21, 34, 55), 10.0, 0.2,
                                                  (0.1, 0.0, 0.3, 0.2, 0.1, 0.05, 0.0, 0.4), 0.1)),
]


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'case':28s} {'algo':5s} {'python s':>9s} {'cython s':>9s} {'speedup':>8s}")
    for name, make in CASES:
        inst = make()
        for algo in ("RLS", "EA11"):
            timings, records = {}, {}
            for backend in ("python", "cython"):
                timings[backend], records[backend] = best_time(
                    lambda: run(algo, inst, stop=IterationCap(args.iters), seed=1,
                                trajectory=False, backend=backend),
                    args.repeat)
            if records["python"] != records["cython"]:
                raise SystemExit(f"backends disagree on {name} / {algo}")
            py, cy = timings["python"], timings["cython"]
            print(f"{name:28s} {algo:5s} {py:9.3f} {cy:9.4f} {py / cy:7.0f}x")


if __name__ == "__main__":
    main()
