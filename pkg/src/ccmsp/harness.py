"""Experiment campaigns: run a grid of instances many times and aggregate.

A campaign runs every algorithm ``repetitions`` times on every grid point.
Run ``r`` of an instance uses the same seed for every algorithm, so RLS and
the (1+1) EA start from the same random solution. Runs that hit the cap are
kept and count as ``cap`` iterations in every mean.
"""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from . import textio
from .instances import GridPoint, GridSpec
from .model import Variant
from .oracles import ccmsp1_optimum, odd_optimum
from .solvers import (
    Algorithm,
    FirstOf,
    IterationCap,
    SwapStable,
    TargetFitness,
    derive_seed,
    run,
)

DEFAULT_REPETITIONS = 30
DEFAULT_CAP = 100_000


class ConfigError(ValueError):
    pass


def fmt_real(x: float) -> str:
    return format(float(x), ".12g")


@dataclass(frozen=True)
class CampaignConfig:
    grid: GridSpec
    algorithms: tuple[Algorithm, ...] = (Algorithm.RLS, Algorithm.EA11)
    repetitions: int = DEFAULT_REPETITIONS
    cap: int = DEFAULT_CAP
    seed: int = 0
    tol: float = 1e-9

    def __post_init__(self):
        algos = tuple(a if isinstance(a, Algorithm) else Algorithm.parse(a) for a in self.algorithms)
        object.__setattr__(self, "algorithms", algos)
        if not algos:
            raise ConfigError("a campaign needs at least one algorithm")
        if len(set(algos)) != len(algos):
            raise ConfigError("algorithms must not repeat")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.cap < 0:
            raise ConfigError("the iteration cap must be non-negative")
        try:
            for _ in self.grid.points():
                pass
        except ValueError as exc:
            raise ConfigError(f"bad grid: {exc}") from None

    @classmethod
    def from_mapping(cls, doc: dict[str, str]) -> "CampaignConfig":
        known = {"variant", "k", "m", "n_mult", "c", "a", "d", "gamma", "seed", "parity",
                 "algorithms", "repetitions", "cap", "tol"}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            grid = GridSpec.from_mapping(doc)
            kwargs = {"grid": grid, "seed": grid.seed}
            if "algorithms" in doc:
                kwargs["algorithms"] = tuple(textio.as_words(doc["algorithms"]))
            if "repetitions" in doc:
                kwargs["repetitions"] = int(doc["repetitions"])
            if "cap" in doc:
                kwargs["cap"] = int(doc["cap"])
            if "tol" in doc:
                kwargs["tol"] = float(doc["tol"])
            return cls(**kwargs)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        return cls.from_mapping(textio.read(path))

    def to_items(self) -> list[tuple[str, object]]:
        return self.grid.to_items() + [
            ("algorithms", [a.value for a in self.algorithms]),
            ("repetitions", self.repetitions),
            ("cap", self.cap),
            ("tol", self.tol),
        ]


@dataclass
class ResultRow:
    instance_id: str
    variant: str
    k: int
    n: int
    size_param: int
    c: float
    parity: str
    algorithm: str
    repetition: int
    seed: int
    cap: int
    iterations: int
    final_fitness: float
    stop_reason: str
    wall_ms: float = 0.0

    @property
    def censored(self) -> bool:
        return self.stop_reason == "cap"


RESULT_COLUMNS = [f.name for f in fields(ResultRow)]
_INT_COLUMNS = {"k", "n", "size_param", "repetition", "seed", "cap", "iterations"}
_REAL_COLUMNS = {"c", "final_fitness", "wall_ms"}


def stop_policy(point: GridPoint, cap: int, tol: float = 1e-9):
    """Stopping rule for one grid point; oracle refusals propagate as ConfigError."""
    inst = point.instance
    try:
        if inst.variant is Variant.CCMSP1:
            extra = TargetFitness(ccmsp1_optimum(inst)[0], tol)
        elif inst.n % 2:
            extra = TargetFitness(odd_optimum(inst)[0], tol)
        else:
            extra = SwapStable()
    except ValueError as exc:
        raise ConfigError(f"{point.instance_id}: {exc}") from None
    return FirstOf(IterationCap(cap), extra)


def _run_task(task) -> list[ResultRow]:
    point, stop, algo, reps, cap, base_seed, backend = task
    rows = []
    for rep in range(reps):
        seed = derive_seed(base_seed, point.instance_id, rep)
        t0 = time.perf_counter()
        rec = run(algo, point.instance, stop=stop, seed=seed, trajectory=False, backend=backend)
        wall = (time.perf_counter() - t0) * 1000.0
        rows.append(ResultRow(
            instance_id=point.instance_id,
            variant=point.variant.value,
            k=point.k,
            n=point.n,
            size_param=point.size_param,
            c=point.c,
            parity=point.parity,
            algorithm=algo.value,
            repetition=rep,
            seed=seed,
            cap=cap,
            iterations=rec.iterations,
            final_fitness=rec.final_fitness,
            stop_reason=rec.stop_reason,
            wall_ms=wall,
        ))
    return rows


def run_campaign(config: CampaignConfig, workers: int = 1, backend: str | None = None,
                 points: Sequence[GridPoint] | None = None) -> list[ResultRow]:
    """One row per (grid point, algorithm, repetition), in grid order."""
    pts = list(config.grid.points()) if points is None else list(points)
    # resolve every stop rule first so a bad config fails before any run
    stops = [stop_policy(p, config.cap, config.tol) for p in pts]
    tasks = [
        (p, stop, algo, config.repetitions, config.cap, config.seed, backend)
        for p, stop in zip(pts, stops)
        for algo in config.algorithms
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    order = {p.instance_id: i for i, p in enumerate(pts)}
    algo_order = {a.value: i for i, a in enumerate(config.algorithms)}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (order[r.instance_id], algo_order[r.algorithm], r.repetition))
    return rows


# --- CSV -------------------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, float):
        return fmt_real(value)
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_results(path, rows: Sequence[ResultRow], timing: bool = False) -> None:
    # wall-clock varies between runs, so it is only written on request
    with open(path, "w", newline="") as fh:
        fh.write(results_text(rows, timing))


def read_results(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_COLUMNS) - {"wall_ms"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        rows = []
        for rec in reader:
            kw = {}
            for key, val in rec.items():
                if key not in RESULT_COLUMNS:
                    continue
                if key in _INT_COLUMNS:
                    kw[key] = int(val)
                elif key in _REAL_COLUMNS:
                    kw[key] = float(val)
                else:
                    kw[key] = val
            rows.append(ResultRow(**kw))
    return rows


# --- summaries -------------------------------------------------------------


SUMMARY_COLUMNS = [
    "instance_id", "variant", "k", "n", "size_param", "c", "parity", "algorithm",
    "runs", "cap", "mean_iterations", "median_iterations", "min_iterations",
    "max_iterations", "censored", "mean_final_fitness", "min_final_fitness",
]
PLOT_COLUMNS = ["variant", "algorithm", "c", "parity", "series", "size_param", "k", "x", "y"]
TABLE1_COLUMNS = ["k", "n_mult", "n_even", "makespan_even", "n_odd", "makespan_odd", "gap"]


@dataclass
class Summary:
    rows: list[dict]
    plot: list[dict]
    table1: list[dict]


def summarize(results: Sequence[ResultRow], table_algorithm: str = "RLS") -> Summary:
    """Aggregate per (instance, algorithm); a pure function of ``results``."""
    if not results:
        raise ValueError("no results to summarize")
    caps = {r.cap for r in results}
    if len(caps) > 1:
        raise ValueError(f"results mix iteration caps {sorted(caps)}")
    seen = set()
    groups: dict[tuple[str, str], list[ResultRow]] = {}
    for r in results:
        key = (r.instance_id, r.algorithm, r.repetition)
        if key in seen:
            raise ValueError(f"duplicate result for {key}")
        seen.add(key)
        groups.setdefault((r.instance_id, r.algorithm), []).append(r)

    rows = []
    for (iid, algo), grp in groups.items():
        head = grp[0]
        its = [r.iterations for r in grp]
        fit = [r.final_fitness for r in grp]
        rows.append({
            "instance_id": iid, "variant": head.variant, "k": head.k, "n": head.n,
            "size_param": head.size_param, "c": head.c, "parity": head.parity,
            "algorithm": algo, "runs": len(grp), "cap": head.cap,
            "mean_iterations": statistics.fmean(its),
            "median_iterations": float(statistics.median(its)),
            "min_iterations": min(its), "max_iterations": max(its),
            "censored": sum(r.censored for r in grp),
            "mean_final_fitness": statistics.fmean(fit),
            "min_final_fitness": min(fit),
        })
    rows.sort(key=lambda s: (s["variant"], s["c"], s["parity"], s["algorithm"],
                             s["size_param"], s["k"], s["instance_id"]))

    plot = []
    for s in rows:
        prefix = "m" if s["variant"] == Variant.CCMSP1.value else "n_mult"
        plot.append({
            "variant": s["variant"], "algorithm": s["algorithm"], "c": s["c"],
            "parity": s["parity"], "series": f"{prefix}={s['size_param']}",
            "size_param": s["size_param"], "k": s["k"], "x": math.log2(s["k"]),
            "y": s["mean_iterations"],
        })

    table1 = []
    pairs: dict[tuple[int, int, float], dict[str, dict]] = {}
    for s in rows:
        if s["variant"] == Variant.CCMSP2PLUS.value and s["algorithm"] == table_algorithm:
            pairs.setdefault((s["k"], s["size_param"], s["c"]), {})[s["parity"]] = s
    for (k, mult, _c), both in sorted(pairs.items()):
        even, odd = both.get("even"), both.get("odd")
        me = even["mean_final_fitness"] if even else math.nan
        mo = odd["mean_final_fitness"] if odd else math.nan
        table1.append({
            "k": k, "n_mult": mult,
            "n_even": even["n"] if even else "", "makespan_even": me,
            "n_odd": odd["n"] if odd else "", "makespan_odd": mo,
            "gap": mo - me,
        })
    return Summary(rows, plot, table1)


def write_summary(summary: Summary, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, cols, rows in (
        ("summary.csv", SUMMARY_COLUMNS, summary.rows),
        ("plot_data.csv", PLOT_COLUMNS, summary.plot),
        ("table1.csv", TABLE1_COLUMNS, summary.table1),
    ):
        path = out / name
        write_csv(path, cols, ([r[c] for c in cols] for r in rows))
        written.append(path)
    return written


def results_text(rows: Sequence[ResultRow], timing: bool = False) -> str:
    """The results CSV as a string (handy for comparing runs)."""
    buf = io.StringIO()
    cols = RESULT_COLUMNS if timing else [c for c in RESULT_COLUMNS if c != "wall_ms"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_cell(getattr(r, c)) for c in cols])
    return buf.getvalue()


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))


__all__ = [
    "CampaignConfig", "ConfigError", "ResultRow", "Summary", "read_results",
    "run_campaign", "stop_policy", "summarize", "write_results", "write_summary",
]
