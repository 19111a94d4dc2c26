"""Exact and constructive reference solvers.

Contents: exhaustive enumeration, the closed-form optimum for equal even
groups (CCMSP1), the greedy optimum for odd job counts under the extra
constraint, the swap-stable stopping test used for even job counts, the
balanced-partition DP and the partition-to-scheduling reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Instance, Variant, extra_constraint_lhs, machine_stats, pairs

BRUTE_FORCE_LIMIT = 24
_BLOCK = 1 << 18


class OracleRefusal(ValueError):
    """The oracle does not apply to this input."""


def _block_fitness(inst: Instance, x: np.ndarray, masks: list[int]) -> np.ndarray:
    n = inst.n
    q = inst.q
    ones = [np.bitwise_count(x & np.uint32(mask)).astype(np.int64) for mask in masks]
    tot1 = np.bitwise_count(x).astype(np.int64)
    tot0 = n - tot1
    cov0 = np.zeros(x.size)
    cov1 = np.zeros(x.size)
    for m, c, b in zip(inst.sizes, inst.c, ones):
        a_ = m - b
        cov0 += 2.0 * c * (a_ * (a_ - 1) // 2)
        cov1 += 2.0 * c * (b * (b - 1) // 2)
    s0 = tot0 * inst.a + np.sqrt(q * (tot0 * inst.d + cov0))
    s1 = tot1 * inst.a + np.sqrt(q * (tot1 * inst.d + cov1))
    return np.maximum(s0, s1)


def brute_force_optimum(inst: Instance, limit: int = BRUTE_FORCE_LIMIT) -> tuple[float, np.ndarray]:
    """Minimum fitness over all 2^n assignments and the lexicographically smallest witness.

    Job ``j`` is bit ``n-1-j`` of the enumeration counter, so counting upwards
    visits bit strings in lexicographic order and the first minimum wins.
    Swapping the machines maps a string to its complement with the same
    fitness, so only strings starting with 0 are visited.
    """
    n = inst.n
    if n > limit:
        raise OracleRefusal(f"brute force is limited to n <= {limit}, got n = {n}")
    masks = []
    start = 0
    for m in inst.sizes:
        mask = 0
        for j in range(start, start + m):
            mask |= 1 << (n - 1 - j)
        masks.append(mask)
        start += m

    best_val, best_x = math.inf, 0
    total = 1 << (n - 1) if n else 1
    for lo in range(0, total, _BLOCK):
        x = np.arange(lo, min(total, lo + _BLOCK), dtype=np.uint32)
        vals = _block_fitness(inst, x, masks)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_x = float(vals[i]), lo + i
    witness = np.array([(best_x >> (n - 1 - j)) & 1 for j in range(n)], dtype=np.uint8)
    return best_val, witness


def _witness_from_counts(sizes: Sequence[int], on_m0: Sequence[int]) -> np.ndarray:
    """Per group, ``on_m0[i]`` zeros followed by ones (the lexicographically smallest layout)."""
    parts = []
    for m, alpha in zip(sizes, on_m0):
        parts.append(np.zeros(alpha, dtype=np.uint8))
        parts.append(np.ones(m - alpha, dtype=np.uint8))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def _require(inst: Instance, variant: Variant):
    if inst.variant is not variant:
        raise OracleRefusal(f"needs a {variant.value} instance, got {inst.variant.value}")


def ccmsp1_bounds(inst: Instance) -> tuple[float, float]:
    """Lowest fitness reachable with unequal job counts (A) and with equal counts (B)."""
    _require(inst, Variant.CCMSP1)
    k, m, n = inst.k, inst.sizes[0], inst.n
    a, d, c, q = inst.a, inst.d, inst.c[0], inst.q
    unequal = math.sqrt(q * (d * (n / 2 + 1) + c * (k * m * m / 4 + m - n / 2))) + (n / 2 + 1) * a
    equal = math.sqrt(q * (d * n / 2 + c * (k * m * m / 4 - n / 2))) + n * a / 2
    return unequal, equal


def ccmsp1_optimum(inst: Instance) -> tuple[float, np.ndarray]:
    """Balanced split of every group; its value is the equal-count bound B."""
    _, value = ccmsp1_bounds(inst)
    half = inst.sizes[0] // 2
    return value, _witness_from_counts(inst.sizes, [half] * inst.k)


def odd_assignment(sizes: Sequence[int]) -> list[int]:
    """Jobs per group on the fuller machine, which holds (n+1)/2 jobs.

    Groups are visited smallest first; a group that cannot reach its fair
    share of the remaining jobs goes entirely to the fuller machine, any other
    group takes the rounded-up fair share.
    """
    if any(x > y for x, y in zip(sizes, sizes[1:])):
        raise OracleRefusal("group sizes must be sorted non-decreasing")
    k = len(sizes)
    remaining = (sum(sizes) + 1) // 2
    alpha = []
    for i, m in enumerate(sizes):
        slots = k - i
        if m * slots < remaining:
            share = m
        else:
            share = -(-remaining // slots)
        alpha.append(share)
        remaining -= share
    assert remaining == 0, "greedy assignment did not place every job"
    return alpha


def odd_optimum(inst: Instance) -> tuple[float, np.ndarray]:
    _require(inst, Variant.CCMSP2PLUS)
    if inst.n % 2 == 0:
        raise OracleRefusal("odd_optimum needs an odd number of jobs; use the swap-stable stop")
    witness = _witness_from_counts(inst.sizes, odd_assignment(inst.sizes))
    return machine_stats(inst, witness).fitness()[0], witness


def property_odd_violations(inst: Instance, sol) -> list[str]:
    """Reasons ``sol`` fails the optimality characterisation for odd n (empty when it holds)."""
    st = machine_stats(inst, sol)
    if inst.n % 2 == 0:
        return ["n is even"]
    if abs(st.total[0] - st.total[1]) != 1:
        return [f"not an equal-solution: {st.total[0]} vs {st.total[1]} jobs"]
    fuller = 0 if st.total[0] > st.total[1] else 1
    alpha = st.counts[fuller]
    top = int(alpha.max())
    out = []
    for i, (m, x) in enumerate(zip(inst.sizes, alpha)):
        if x != m and top - x > 1:
            out.append(f"group {i}: {int(x)} of {m} jobs on the fuller machine, max is {top}")
    return out


def property_odd_check(inst: Instance, sol) -> bool:
    return not property_odd_violations(inst, sol)


def swap_stable_condition(inst: Instance, sol) -> bool:
    """Stopping test for even job counts.

    True iff ``sol`` is an equal-solution and either

    * for every pair of groups i, j with alpha_i > alpha_j + 1:
      |cov_0 - cov_1| <= 2c (beta_i - beta_j + 1), or
    * cov on the argmax machine <= (c/4)(n^2/k - 2n + k),

    where alpha counts jobs on the argmax machine and beta on the other one.
    """
    c = inst.uniform_c
    if c is None:
        raise OracleRefusal("needs one covariance shared by all groups")
    st = machine_stats(inst, sol)
    if abs(st.total[0] - st.total[1]) > 1:
        return False
    t = st.fitness()[1]
    cov = st.cov
    n, k = inst.n, inst.k

    def at_most(x, y):
        # both sides are multiples of c/4, so a relative slack far below
        # one unit only absorbs rounding
        return x <= y + 1e-9 * max(abs(x), abs(y))

    if at_most(cov[t], c / 4 * (n * n / k - 2 * n + k)):
        return True
    alpha, beta = st.counts[t], st.counts[1 - t]
    gap = abs(cov[0] - cov[1])
    return all(
        at_most(gap, 2 * c * (int(beta[i]) - int(beta[j]) + 1))
        for i in range(k)
        for j in range(k)
        if alpha[i] > alpha[j] + 1
    )


def balanced_partition_dp(values: Sequence[int]) -> tuple[bool, list[int] | None]:
    """Can ``values`` be split into two halves of equal size and equal sum?

    Reachability over (items seen, items chosen, sum of chosen); the witness
    lists indices of one half, recovered by walking the table backwards.
    """
    vals = [int(v) for v in values]
    if any(v < 0 for v in vals):
        raise ValueError("values must be non-negative integers")
    if len(vals) % 2 or sum(vals) % 2:
        raise ValueError("needs an even number of values with an even sum")
    size = len(vals)
    half, target = size // 2, sum(vals) // 2
    reach = np.zeros((size + 1, half + 1, target + 1), dtype=bool)
    reach[0, 0, 0] = True
    for i, v in enumerate(vals):
        reach[i + 1] = reach[i]
        if v <= target:
            reach[i + 1, 1:, v:] |= reach[i, :-1, : target + 1 - v]
    if not reach[size, half, target]:
        return False, None
    chosen = []
    cnt, s = half, target
    for i in range(size, 0, -1):
        if reach[i - 1, cnt, s]:
            continue
        chosen.append(i - 1)
        cnt -= 1
        s -= vals[i - 1]
    return True, sorted(chosen)


@dataclass(frozen=True)
class PartitionReduction:
    instance: Instance
    elements: tuple[int, ...]
    source_index: tuple[int, ...]

    def group_of(self, i: int) -> int:
        """Group that encodes the ``i``-th input value."""
        return self.source_index.index(i)


REDUCTION_GAMMA = 0.05
REDUCTION_D = 1e-2
REDUCTION_C = 1e-7


def reduce_partition(values: Sequence[int]) -> PartitionReduction:
    """Scheduling instance whose optimum reveals the balanced-partition answer for ``values``.

    Values are doubled (keeps the answer, makes the sum even) and sorted;
    group ``i`` gets ``2*e_i + 1`` jobs for doubled value ``2*e_i``. A
    yes-answer corresponds to a balanced solution with equal covariance on
    both machines.
    """
    vals = [int(v) for v in values]
    if len(vals) % 2:
        raise ValueError("needs an even number of values")
    if any(v < 0 for v in vals):
        raise ValueError("values must be non-negative integers")
    order = sorted(range(len(vals)), key=lambda i: vals[i])
    doubled = tuple(2 * vals[i] for i in order)
    sizes = tuple(x + 1 for x in doubled)
    lhs = extra_constraint_lhs(sizes, REDUCTION_D, REDUCTION_C, REDUCTION_GAMMA)
    a = 1.0
    while not a > lhs:
        a *= 10.0
    inst = Instance(sizes, a, REDUCTION_D, REDUCTION_C, REDUCTION_GAMMA, Variant.CCMSP2PLUS)
    return PartitionReduction(inst, doubled, tuple(order))


def cov_balanced_pairs(inst: Instance) -> int:
    """Fewest same-machine pairs summed over both machines (every group split in half)."""
    return sum(pairs((m + 1) // 2) + pairs(m // 2) for m in inst.sizes)


def attains_cov_balance(inst: Instance, sol) -> bool:
    """Does ``sol`` put exactly half of the minimum total pair count on each machine?"""
    st = machine_stats(inst, sol)
    return 2 * max(st.pair_count) == cov_balanced_pairs(inst)
