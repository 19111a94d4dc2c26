"""Randomized local search and the (1+1) EA on the surrogate makespan.

Both algorithms keep one solution and replace it by a mutated copy whenever
the copy is no worse (``f(y) <= f(x)``). One iteration is one offspring plus
its evaluation.

``rls_step`` / ``ea_step`` are the readable one-iteration versions operating
on a :class:`SearchState`. :func:`run` is the fast path: it samples random
draws in blocks from a seeded numpy generator and hands them to a run-loop
kernel (compiled or pure Python, see :mod:`ccmsp.kernels`). Since the draws
are sampled outside the kernel, both backends give identical runs.
"""

from __future__ import annotations

import enum
import logging
import zlib
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels
from .model import Instance, LoadState, apply_flip, as_bits, bitstring, machine_stats

log = logging.getLogger(__name__)

CHUNK = 4096
DEFAULT_TOL = 1e-9
UNBOUNDED = 2**62


class Algorithm(str, enum.Enum):
    RLS = "RLS"
    EA11 = "EA11"

    @classmethod
    def parse(cls, name: str) -> "Algorithm":
        key = name.strip().upper().replace(" ", "").replace("-", "")
        aliases = {"EA": "EA11", "EA11": "EA11", "(1+1)EA": "EA11", "1+1EA": "EA11",
                   "RLS": "RLS"}
        try:
            return cls(aliases[key])
        except KeyError:
            raise ValueError(f"unknown algorithm {name!r}; expected RLS or EA11") from None


# --- stopping criteria -----------------------------------------------------


@dataclass(frozen=True)
class TargetFitness:
    value: float
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("target tolerance must be non-negative")

    @property
    def threshold(self) -> float:
        # a few ulps of slack absorb rounding in closed-form optima
        return self.value + self.tol + 8 * float(np.spacing(abs(self.value)))


@dataclass(frozen=True)
class SwapStable:
    """Stop at an equal solution where no 0/1 swap can lower the fuller machine's covariance.

    See :func:`ccmsp.oracles.swap_stable_condition` for the exact test.
    """


@dataclass(frozen=True)
class IterationCap:
    limit: int

    def __post_init__(self):
        if self.limit < 0:
            raise ValueError("iteration cap must be non-negative")


@dataclass(frozen=True)
class FirstOf:
    criteria: tuple

    def __init__(self, *criteria):
        flat = []
        for crit in criteria:
            if isinstance(crit, (list, tuple)):
                flat.extend(crit)
            else:
                flat.append(crit)
        object.__setattr__(self, "criteria", tuple(flat))


StopCriterion = Union[TargetFitness, SwapStable, IterationCap, FirstOf]


@dataclass(frozen=True)
class _ResolvedStop:
    cap: int
    target: TargetFitness | None
    swap_stable: bool


def _resolve(stop: StopCriterion) -> _ResolvedStop:
    cap, target, swap = None, None, False
    todo = [stop]
    while todo:
        crit = todo.pop()
        if isinstance(crit, FirstOf):
            todo.extend(crit.criteria)
        elif isinstance(crit, IterationCap):
            cap = crit.limit if cap is None else min(cap, crit.limit)
        elif isinstance(crit, TargetFitness):
            if target is None or crit.threshold > target.threshold:
                target = crit
        elif isinstance(crit, SwapStable):
            swap = True
        else:
            raise TypeError(f"not a stop criterion: {crit!r}")
    return _ResolvedStop(UNBOUNDED if cap is None else cap, target, swap)


def parse_stop(text: str, cap: int | None = None) -> StopCriterion:
    """Parse ``cap``, ``target:VALUE[:TOL]``, ``swap-stable`` or a ``+``-joined mix."""
    parts = []
    for token in text.split("+"):
        token = token.strip().lower()
        if token == "cap":
            continue
        if token.startswith("target:"):
            fields = token.split(":")[1:]
            value = float(fields[0])
            tol = float(fields[1]) if len(fields) > 1 else DEFAULT_TOL
            parts.append(TargetFitness(value, tol))
        elif token in ("swap-stable", "swap_stable"):
            parts.append(SwapStable())
        else:
            raise ValueError(f"unknown stop criterion {token!r}")
    if cap is not None:
        parts.append(IterationCap(cap))
    return FirstOf(*parts)


# --- run records -----------------------------------------------------------


@dataclass
class RunRecord:
    seed: int
    algorithm: Algorithm
    iterations: int
    final_fitness: float
    final_solution: str
    stop_reason: str
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def trajectory_csv(self) -> str:
        lines = ["iteration,fitness"]
        lines += [f"{it},{val:.12g}" for it, val in self.trajectory]
        return "\n".join(lines) + "\n"


def derive_seed(base_seed: int, instance_id: str, repetition: int) -> int:
    """64-bit run seed from (campaign seed, instance id, repetition index)."""
    key = zlib.crc32(instance_id.encode())
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(key, int(repetition)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


# --- single steps ----------------------------------------------------------


@dataclass
class SearchState:
    bits: np.ndarray
    load: LoadState
    value: float
    argmax: int

    @classmethod
    def start(cls, inst: Instance, sol) -> "SearchState":
        bits = as_bits(sol, inst.n)
        load = machine_stats(inst, bits)
        value, argmax = load.fitness()
        return cls(bits, load, value, argmax)


def _try_flips(inst: Instance, state: SearchState, idx: Sequence[int]) -> bool:
    for j in idx:
        apply_flip(state.load, inst, state.bits, j)
    value, argmax = state.load.fitness()
    if value <= state.value:
        state.value, state.argmax = value, argmax
        return True
    for j in reversed(idx):
        apply_flip(state.load, inst, state.bits, j)
    return False


def rls_mutation(n: int, rng) -> list[int]:
    """Indices flipped by one RLS mutation: one bit, or a uniform unordered pair."""
    coin = int(rng.integers(2))
    i = int(rng.integers(n))
    if coin == 0 or n < 2:
        return [i]
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1
    return [i, j]


def ea_mutation(n: int, rng) -> list[int]:
    """Indices flipped by standard bit mutation with rate 1/n."""
    return np.flatnonzero(rng.random(n) < 1.0 / n).tolist()


def rls_step(inst: Instance, state: SearchState, rng) -> SearchState:
    _try_flips(inst, state, rls_mutation(inst.n, rng))
    return state


def ea_step(inst: Instance, state: SearchState, rng) -> SearchState:
    _try_flips(inst, state, ea_mutation(inst.n, rng))
    return state


# --- fast runs -------------------------------------------------------------


class _EADraws:
    """Flip positions of a Bernoulli(1/n) process over the stream of all bits.

    Iteration ``t`` owns stream positions ``[t*n, (t+1)*n)``. Gaps between
    flips are geometric, so sampling costs O(flips) rather than O(n) per
    iteration.
    """

    def __init__(self, rng: np.random.Generator, n: int):
        self.rng = rng
        self.n = n
        self.p = 1.0 / n
        self.next_pos = int(rng.geometric(self.p)) - 1
        self.chunk_start = 0

    def chunk(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        end = self.chunk_start + size * n
        found = []
        while self.next_pos < end:
            expect = (end - self.next_pos) // n + 1
            gaps = self.rng.geometric(self.p, size=expect + 8 + int(3 * expect**0.5))
            cum = self.next_pos + np.concatenate(([0], np.cumsum(gaps)))
            inside = int(np.searchsorted(cum, end))
            found.append(cum[: min(inside, gaps.size)])
            self.next_pos = int(cum[min(inside, gaps.size)])
        pos = np.concatenate(found) if found else np.empty(0, dtype=np.int64)
        pos = pos.astype(np.int64) - self.chunk_start
        self.chunk_start = end
        iters = pos // n
        offsets = np.searchsorted(iters, np.arange(size + 1)).astype(np.int64)
        return np.ascontiguousarray(pos % n), offsets


def run(
    algorithm,
    inst: Instance,
    init=None,
    stop: StopCriterion | None = None,
    seed: int = 0,
    *,
    trajectory: bool = True,
    backend: str | None = None,
    known_optimum: float | None = None,
) -> RunRecord:
    """Run RLS or the (1+1) EA from ``init`` (uniformly random if None) until ``stop`` fires."""
    algo = algorithm if isinstance(algorithm, Algorithm) else Algorithm.parse(str(algorithm))
    resolved = _resolve(stop if stop is not None else IterationCap(100_000))
    kern = kernels.get(backend)
    rng = make_rng(seed)
    n, k = inst.n, inst.k
    warnings = []

    if resolved.swap_stable and inst.uniform_c is None:
        raise ValueError("the swap-stable stop needs one covariance shared by all groups")
    if resolved.target is not None and known_optimum is not None:
        if resolved.target.threshold < known_optimum:
            msg = (f"target {resolved.target.value!r} lies below the known optimum "
                   f"{known_optimum!r}; only the iteration cap can end this run")
            if resolved.cap >= UNBOUNDED:
                raise ValueError(msg)
            warnings.append(msg)
            log.warning(msg)

    if init is None or (isinstance(init, str) and init.upper() == "RANDOM"):
        bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    else:
        bits = as_bits(init, n)
    load = machine_stats(inst, bits)
    cur_f, _ = load.fitness()

    group = np.ascontiguousarray(inst.group_index, dtype=np.int32)
    counts = np.ascontiguousarray(load.counts, dtype=np.int64)
    tp = np.array(load.total + load.pair_count, dtype=np.int64)
    cvec = np.asarray(inst.c, dtype=np.float64)
    uniform = inst.uniform_c is not None
    c = inst.uniform_c if uniform else 0.0
    use_target = resolved.target is not None
    target = resolved.target.threshold if use_target else 0.0
    params = (cvec, uniform, c, inst.a, inst.d, inst.q, target, use_target, resolved.swap_stable)

    traj = [(0, cur_f)] if trajectory else []
    traj_it = np.empty(CHUNK, dtype=np.int64)
    traj_val = np.empty(CHUNK, dtype=np.float64)
    code = kern.stop_code(counts, tp, cvec, uniform, c, inst.a, inst.d, inst.q, k, n,
                          target, use_target, resolved.swap_stable)
    iterations = 0
    ea_draws = _EADraws(rng, n) if algo is Algorithm.EA11 else None

    while code == 0 and iterations < resolved.cap:
        todo = min(CHUNK, resolved.cap - iterations)
        # always sample a full chunk so the stream does not depend on the cap
        if algo is Algorithm.RLS:
            coin = rng.integers(0, 2, size=CHUNK, dtype=np.int64)
            first = rng.integers(0, n, size=CHUNK, dtype=np.int64)
            second = (rng.integers(0, n - 1, size=CHUNK, dtype=np.int64)
                      if n > 1 else np.zeros(CHUNK, dtype=np.int64))
            done, code, cur_f, nt = kern.rls_chunk(
                bits, group, counts, tp, *params, coin, first, second,
                todo, iterations, cur_f, traj_it, traj_val)
        else:
            flip_pos, offsets = ea_draws.chunk(CHUNK)
            done, code, cur_f, nt = kern.ea_chunk(
                bits, group, counts, tp, *params, flip_pos, offsets,
                todo, iterations, cur_f, traj_it, traj_val)
        iterations += done
        if trajectory:
            traj.extend(zip(traj_it[:nt].tolist(), traj_val[:nt].tolist()))

    reason = {0: "cap", 1: "target", 2: "swap-stable"}[code]
    return RunRecord(
        seed=int(seed),
        algorithm=algo,
        iterations=iterations,
        final_fitness=cur_f,
        final_solution=bitstring(bits),
        stop_reason=reason,
        trajectory=traj,
        warnings=warnings,
    )
