"""Problem instances, machine load statistics and the surrogate fitness.

A solution is a 0/1 vector of length ``n``; bit 0 puts the job on machine
M0 and bit 1 on M1. Jobs are laid out group by group, so bit ``j`` belongs
to group ``inst.group_index[j]``.

Every real-valued statistic is rebuilt from integer counters (jobs per group
per machine and same-group pair counts) each time it is read. The compiled
and pure-Python kernels evaluate exactly the same expressions in the same
order, so fitness values agree bit for bit across all three code paths.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import textio


class Variant(str, enum.Enum):
    GENERAL = "GENERAL"
    CCMSP1 = "CCMSP1"
    CCMSP2 = "CCMSP2"
    CCMSP2PLUS = "CCMSP2PLUS"


class InstanceError(ValueError):
    pass


def pairs(x: int) -> int:
    """Binomial coefficient C(x, 2)."""
    return x * (x - 1) // 2


def surrogate_factor(gamma: float) -> float:
    return (1.0 - gamma) / gamma


def extra_constraint_lhs(sizes: Sequence[int], d: float, c, gamma: float) -> float:
    """Largest possible variance contribution to a machine's surrogate load.

    ``c`` is one covariance for all groups or one per group.
    """
    n = sum(sizes)
    cs = [c] * len(sizes) if np.isscalar(c) else list(c)
    cov = sum(2.0 * ci * pairs(m) for ci, m in zip(cs, sizes))
    return math.sqrt(surrogate_factor(gamma) * (n * d + cov))


@dataclass(frozen=True)
class Instance:
    """A CCMSP instance with uniform job mean ``a`` and variance ``d``.

    ``c`` holds one covariance per group; a scalar is broadcast. Groups must
    be sorted by size (non-decreasing).
    """

    sizes: tuple[int, ...]
    a: float
    d: float
    c: tuple[float, ...]
    gamma: float
    variant: Variant = Variant.GENERAL

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        c = self.c
        if np.isscalar(c):
            c = (float(c),) * len(sizes)
        c = tuple(float(x) for x in c)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "variant", Variant(self.variant))
        self._validate()

    def _validate(self):
        if not self.sizes:
            raise InstanceError("an instance needs at least one group")
        if any(m < 1 for m in self.sizes):
            raise InstanceError(f"group sizes must be positive, got {self.sizes}")
        if any(x > y for x, y in zip(self.sizes, self.sizes[1:])):
            raise InstanceError(f"group sizes must be non-decreasing, got {self.sizes}")
        if len(self.c) != len(self.sizes):
            raise InstanceError(f"expected {len(self.sizes)} covariances, got {len(self.c)}")
        if any(not math.isfinite(x) or x < 0 for x in self.c):
            raise InstanceError("covariances must be finite and non-negative")
        if not (math.isfinite(self.a) and self.a > 0):
            raise InstanceError("expected processing time a must be positive")
        if not (math.isfinite(self.d) and self.d >= 0):
            raise InstanceError("variance d must be non-negative")
        # gamma = 0 would divide by zero in the surrogate
        if not 0.0 < self.gamma < 1.0:
            raise InstanceError(f"gamma must lie in (0, 1), got {self.gamma}")

        if self.variant is not Variant.GENERAL and self.uniform_c is None:
            raise InstanceError(f"{self.variant.value} requires one covariance shared by all groups")
        if self.variant is Variant.CCMSP1:
            m = self.sizes[0]
            if any(x != m for x in self.sizes) or m % 2:
                raise InstanceError("CCMSP1 requires equal, even group sizes")
        if self.variant is Variant.CCMSP2PLUS:
            lhs = extra_constraint_lhs(self.sizes, self.d, self.c[0], self.gamma)
            if not lhs < self.a:
                raise InstanceError(
                    f"CCMSP2PLUS extra constraint violated: {lhs:.6g} >= a = {self.a:.6g}"
                )

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def q(self) -> float:
        return surrogate_factor(self.gamma)

    @cached_property
    def uniform_c(self) -> float | None:
        first = self.c[0]
        return first if all(x == first for x in self.c) else None

    @cached_property
    def group_index(self) -> np.ndarray:
        idx = np.repeat(np.arange(self.k, dtype=np.int32), self.sizes)
        idx.setflags(write=False)
        return idx

    def to_text(self) -> str:
        return textio.dumps(
            [
                ("variant", self.variant.value),
                ("k", self.k),
                ("sizes", list(self.sizes)),
                ("a", self.a),
                ("d", self.d),
                ("c", list(self.c)),
                ("gamma", self.gamma),
            ]
        )

    @classmethod
    def from_mapping(cls, doc: dict[str, str]) -> "Instance":
        try:
            sizes = textio.as_ints(doc["sizes"])
            inst = cls(
                sizes=tuple(sizes),
                a=float(doc["a"]),
                d=float(doc["d"]),
                c=tuple(textio.as_floats(doc["c"])),
                gamma=float(doc["gamma"]),
                variant=Variant(doc.get("variant", "GENERAL")),
            )
        except KeyError as exc:
            raise InstanceError(f"instance document lacks field {exc.args[0]!r}") from None
        if "k" in doc and int(doc["k"]) != inst.k:
            raise InstanceError(f"k = {doc['k']} disagrees with {inst.k} sizes")
        return inst

    @classmethod
    def from_text(cls, text: str) -> "Instance":
        return cls.from_mapping(textio.loads(text))

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path) as fh:
            return cls.from_text(fh.read())


def as_bits(sol, n: int | None = None) -> np.ndarray:
    """Copy ``sol`` (bit string, sequence or array) into a fresh uint8 vector."""
    if isinstance(sol, str):
        if set(sol) - {"0", "1"}:
            raise ValueError(f"not a bit string: {sol!r}")
        bits = np.frombuffer(sol.encode(), dtype=np.uint8) - ord("0")
    else:
        bits = np.asarray(sol)
        if bits.ndim != 1 or (bits.size and not np.isin(bits, (0, 1)).all()):
            raise ValueError("a solution must be a 1-d vector of 0/1 values")
        bits = bits.astype(np.uint8)
    if n is not None and bits.size != n:
        raise ValueError(f"solution has length {bits.size}, instance has n = {n}")
    return bits.copy()


def bitstring(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def complement(sol) -> np.ndarray:
    return 1 - as_bits(sol)


def covariance(inst: Instance, row, pair_count: int) -> float:
    c = inst.uniform_c
    if c is not None:
        return 2.0 * c * pair_count
    cov = 0.0
    for ci, x in zip(inst.c, row):
        cov += 2.0 * ci * pairs(int(x))
    return cov


def surrogate_load(inst: Instance, count: int, cov: float) -> float:
    return count * inst.a + math.sqrt(inst.q * (count * inst.d + cov))


@dataclass(eq=False)
class LoadState:
    """Integer counters for both machines plus statistics derived from them.

    ``counts[t, i]`` is the number of jobs of group ``i`` on machine ``t``.
    """

    inst: Instance = field(repr=False)
    counts: np.ndarray
    total: list[int]
    pair_count: list[int]

    @property
    def expected(self) -> tuple[float, float]:
        return tuple(self.total[t] * self.inst.a for t in (0, 1))

    @property
    def var_sum(self) -> tuple[float, float]:
        return tuple(self.total[t] * self.inst.d for t in (0, 1))

    @property
    def cov(self) -> tuple[float, float]:
        return tuple(covariance(self.inst, self.counts[t], self.pair_count[t]) for t in (0, 1))

    @property
    def variance(self) -> tuple[float, float]:
        cov = self.cov
        return tuple(self.total[t] * self.inst.d + cov[t] for t in (0, 1))

    @property
    def surrogate(self) -> tuple[float, float]:
        cov = self.cov
        return tuple(surrogate_load(self.inst, self.total[t], cov[t]) for t in (0, 1))

    def fitness(self) -> tuple[float, int]:
        s0, s1 = self.surrogate
        return (s1, 1) if s1 > s0 else (s0, 0)

    def copy(self) -> "LoadState":
        return LoadState(self.inst, self.counts.copy(), list(self.total), list(self.pair_count))

    def same_counters(self, other: "LoadState") -> bool:
        return (
            np.array_equal(self.counts, other.counts)
            and self.total == other.total
            and self.pair_count == other.pair_count
        )


def machine_stats(inst: Instance, sol) -> LoadState:
    """Recount everything from scratch for ``sol``."""
    bits = as_bits(sol, inst.n)
    ones = np.bincount(inst.group_index, weights=bits, minlength=inst.k).astype(np.int64)
    counts = np.vstack([np.asarray(inst.sizes, dtype=np.int64) - ones, ones])
    total = [int(counts[0].sum()), int(counts[1].sum())]
    pair_count = [sum(pairs(int(x)) for x in counts[t]) for t in (0, 1)]
    return LoadState(inst, counts, total, pair_count)


def fitness(inst: Instance, sol) -> tuple[float, int]:
    """Surrogate makespan ``max(l'_0, l'_1)`` and the machine attaining it (ties go to M0)."""
    return machine_stats(inst, sol).fitness()


def apply_flip(state: LoadState, inst: Instance, sol: np.ndarray, bit_index: int) -> LoadState:
    """Move job ``bit_index`` to the other machine, updating ``state`` and ``sol`` in place."""
    if not 0 <= bit_index < inst.n:
        raise IndexError(f"bit index {bit_index} out of range for n = {inst.n}")
    g = inst.group_index[bit_index]
    src = int(sol[bit_index])
    dst = 1 - src
    counts = state.counts
    state.pair_count[src] -= int(counts[src, g]) - 1
    counts[src, g] -= 1
    state.pair_count[dst] += int(counts[dst, g])
    counts[dst, g] += 1
    state.total[src] -= 1
    state.total[dst] += 1
    sol[bit_index] = dst
    return state


def chance_bound(inst: Instance, sol, M: float) -> tuple[float, float]:
    """One-sided Chebyshev bound on ``Pr(l_t > M)`` for both machines."""
    st = machine_stats(inst, sol)
    out = []
    for mean, var in zip(st.expected, st.variance):
        delta = M - mean
        if not delta > 0:
            raise ValueError(f"M = {M!r} does not exceed the expected load {mean!r}")
        out.append(var / (var + delta * delta))
    return tuple(out)


class SolutionClass(NamedTuple):
    is_equal: bool
    is_balanced: bool
    argmax: int


def classify(inst: Instance, sol) -> SolutionClass:
    st = machine_stats(inst, sol)
    is_equal = abs(st.total[0] - st.total[1]) <= 1
    is_balanced = is_equal and bool(np.all(np.abs(st.counts[0] - st.counts[1]) <= 1))
    return SolutionClass(is_equal, is_balanced, st.fitness()[1])
