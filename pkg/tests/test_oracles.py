import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccmsp.model import Instance, Variant, bitstring, classify, fitness, machine_stats
from ccmsp.oracles import (
    OracleRefusal,
    attains_cov_balance,
    balanced_partition_dp,
    brute_force_optimum,
    ccmsp1_bounds,
    ccmsp1_optimum,
    cov_balanced_pairs,
    odd_assignment,
    odd_optimum,
    property_odd_check,
    reduce_partition,
    swap_stable_condition,
)
from ccmsp.instances import validate_extra_constraint
from ccmsp import kernels

Q = 19.0


def plus(sizes, c=1e-7):
    return Instance(tuple(sorted(sizes)), 100.0, 0.01, c, 0.05, Variant.CCMSP2PLUS)


def all_solutions(n):
    for bits in itertools.product((0, 1), repeat=n):
        yield np.array(bits, dtype=np.uint8)


# --- brute force ------------------------------------------------------------


def test_brute_force_k1_m2():
    inst = Instance((2,), 100.0, 0.01, 0.01, 0.05, Variant.CCMSP1)
    value, witness = brute_force_optimum(inst)
    assert value == pytest.approx(100 + math.sqrt(Q * 0.01), rel=1e-12)
    assert value == pytest.approx(100.43589, abs=1e-5)
    assert bitstring(witness) == "01"


def test_brute_force_single_job():
    inst = Instance((1,), 3.0, 0.5, 0.0, 0.2)
    value, witness = brute_force_optimum(inst)
    assert value == pytest.approx(3.0 + math.sqrt(4.0 * 0.5))
    assert bitstring(witness) == "0"


def test_brute_force_matches_naive_scan():
    rng = np.random.default_rng(1)
    for _ in range(20):
        k = int(rng.integers(1, 4))
        sizes = sorted(rng.integers(1, 4, k).tolist())
        inst = Instance(tuple(sizes), float(rng.uniform(1, 5)), float(rng.uniform(0, 1)),
                        tuple(rng.uniform(0, 1, k)), float(rng.uniform(0.05, 0.5)))
        vals = [(fitness(inst, x)[0], bitstring(x)) for x in all_solutions(inst.n)]
        best = min(v for v, _ in vals)
        value, witness = brute_force_optimum(inst)
        assert value == pytest.approx(best, rel=1e-12)
        # lexicographically first among the minimisers
        first = min(s for v, s in vals if v <= best * (1 + 1e-12))
        assert bitstring(witness) == first


def test_brute_force_refuses_large_n():
    inst = Instance((25,), 1.0, 0.0, 0.0, 0.5)
    with pytest.raises(OracleRefusal, match="n <= 24"):
        brute_force_optimum(inst)


def test_brute_force_witness_balanced_for_ccmsp1():
    for k, m in ((1, 2), (2, 2), (3, 2), (1, 4), (2, 4), (3, 4), (2, 6), (1, 12), (6, 2)):
        inst = Instance((m,) * k, 100.0, 0.01, 0.01, 0.05, Variant.CCMSP1)
        _, witness = brute_force_optimum(inst)
        assert classify(inst, witness).is_balanced


# --- CCMSP1 closed form ----------------------------------------------------


def test_ccmsp1_value_example():
    inst = Instance((10,) * 4, 100.0, 0.01, 0.01, 0.05, Variant.CCMSP1)
    value, witness = ccmsp1_optimum(inst)
    assert value == pytest.approx(2000 + math.sqrt(19), rel=1e-12)
    assert fitness(inst, witness)[0] == pytest.approx(value, rel=1e-12)
    assert classify(inst, witness).is_balanced


def test_ccmsp1_no_variance():
    inst = Instance((4,) * 3, 7.0, 0.0, 0.0, 0.3, Variant.CCMSP1)
    assert ccmsp1_optimum(inst)[0] == 7.0 * 6


def test_ccmsp1_wrong_variant():
    with pytest.raises(OracleRefusal):
        ccmsp1_optimum(plus((3, 4)))


@given(st.integers(1, 6), st.integers(1, 6), st.floats(1, 200), st.floats(0, 1),
       st.floats(0, 1), st.floats(0.01, 0.9))
def test_unequal_bound_exceeds_equal_bound(k, half, a, d, c, gamma):
    inst = Instance((2 * half,) * k, a, d, c, gamma, Variant.CCMSP1)
    lo_unequal, lo_equal = ccmsp1_bounds(inst)
    assert lo_unequal > lo_equal


def test_ccmsp1_matches_brute_force():
    for k, m in ((1, 2), (2, 2), (2, 4), (3, 4), (1, 10), (2, 6), (6, 2)):
        for c in (0.0, 1e-7, 1e-2, 0.5):
            inst = Instance((m,) * k, 100.0, 0.01, c, 0.05, Variant.CCMSP1)
            assert ccmsp1_optimum(inst)[0] == pytest.approx(brute_force_optimum(inst)[0],
                                                           rel=1e-9)


# --- odd job counts -----------------------------------------------------------


def test_odd_assignment_examples():
    assert odd_assignment((3, 3, 5)) == [2, 2, 2]
    assert odd_assignment((1, 2, 8)) == [1, 2, 3]
    assert odd_assignment((7,)) == [4]
    with pytest.raises(OracleRefusal):
        odd_assignment((5, 3))


@pytest.mark.parametrize("sizes", [(3, 3, 5), (1, 2, 8), (1, 1, 1, 2), (2, 3, 4), (1, 12)])
def test_odd_optimum_matches_brute_force(sizes):
    inst = plus(sizes)
    value, witness = odd_optimum(inst)
    assert value == pytest.approx(brute_force_optimum(inst)[0], rel=1e-9)
    assert property_odd_check(inst, witness)
    assert swap_stable_condition(inst, witness) in (True, False)


def test_odd_optimum_table_value():
    inst = plus((9, 10, 11, 11))
    assert odd_optimum(inst)[0] == pytest.approx(2101.9975, abs=1e-3)


def test_odd_optimum_refusals():
    with pytest.raises(OracleRefusal):
        odd_optimum(plus((2, 4)))
    with pytest.raises(OracleRefusal):
        odd_optimum(Instance((3,), 100.0, 0.01, 1e-7, 0.05, Variant.GENERAL))


def test_property_odd_examples():
    inst = plus((3, 3, 5))
    # alpha = (3, 0, 3) on the fuller machine: group 1 lags the max by 3
    sol = "000" + "111" + "00011"
    assert not property_odd_check(inst, sol)
    assert property_odd_check(plus((5,)), "00011")
    assert not property_odd_check(inst, "0" * 11)


@pytest.mark.parametrize("sizes", [(1, 2, 2), (3, 3, 5), (1, 2, 8), (2, 2, 3, 4), (1, 1, 3, 4)])
def test_property_odd_iff_optimal(sizes):
    inst = plus(sizes)
    best = brute_force_optimum(inst)[0]
    for x in all_solutions(inst.n):
        st_ = machine_stats(inst, x)
        if abs(st_.total[0] - st_.total[1]) != 1:
            continue
        optimal = st_.fitness()[0] <= best * (1 + 1e-12)
        assert property_odd_check(inst, x) == optimal


# --- swap-stable predicate ----------------------------------------------------


def test_swap_stable_examples():
    single = plus((2,))
    assert swap_stable_condition(single, "01")
    assert not swap_stable_condition(single, "00")
    balanced = plus((2, 4, 6))
    assert swap_stable_condition(balanced, "01" + "0011" + "000111")


def test_swap_stable_hand_example():
    # sizes (2, 6), alpha = (0, 4) on M0, beta = (2, 2) on M1
    inst = plus((2, 6), c=0.01)
    sol = "11" + "000011"
    st_ = machine_stats(inst, sol)
    assert st_.counts.tolist() == [[0, 4], [2, 2]]
    assert st_.pair_count == [6, 2]
    t = st_.fitness()[1]
    assert t == 0
    # first clause: alpha_1 = 4 > alpha_0 + 1 needs |cov0 - cov1| = 0.08 <= 2c(beta_1 - beta_0 + 1) = 0.02
    first = abs(st_.cov[0] - st_.cov[1]) <= 2 * 0.01 * (2 - 2 + 1)
    # second clause: cov on M0 = 0.12 against (c/4)(64/2 - 16 + 2) = 0.045
    second = st_.cov[0] <= 0.01 / 4 * (64 / 2 - 16 + 2)
    assert (first, second) == (False, False)
    assert not swap_stable_condition(inst, sol)


def _kernel_swap_stable(backend, inst, sol):
    st_ = machine_stats(inst, sol)
    counts = np.ascontiguousarray(st_.counts, dtype=np.int64)
    tp = np.array(st_.total + st_.pair_count, dtype=np.int64)
    cvec = np.asarray(inst.c, dtype=np.float64)
    code = backend.stop_code(counts, tp, cvec, True, inst.c[0], inst.a, inst.d, inst.q,
                             inst.k, inst.n, 0.0, False, True)
    return code == 2


@pytest.mark.parametrize("name", ["python", "cython"])
def test_kernel_predicate_matches_oracle(name):
    if name == "cython" and kernels.compiled_backend is None:
        pytest.skip("compiled kernels not built")
    backend = kernels.get(name)
    rng = np.random.default_rng(8)
    hits = 0
    for _ in range(1500):
        k = int(rng.integers(1, 6))
        sizes = sorted(rng.integers(1, 9, k).tolist())
        if sum(sizes) % 2:
            sizes[-1] += 1
        inst = plus(sizes, c=float(rng.choice([1e-7, 1e-2, 0.1])))
        # bias towards equal solutions so both outcomes occur often
        sol = np.zeros(inst.n, dtype=np.uint8)
        sol[rng.permutation(inst.n)[: inst.n // 2 + int(rng.integers(-1, 2))]] = 1
        expect = swap_stable_condition(inst, sol)
        hits += expect
        assert _kernel_swap_stable(backend, inst, sol) == expect
    assert 100 < hits < 1400


# --- balanced partition DP ---------------------------------------------------------


def enumerate_partition(values):
    size = len(values)
    target = sum(values) / 2
    return any(sum(values[i] for i in idx) == target
               for idx in itertools.combinations(range(size), size // 2))


def test_dp_examples():
    assert balanced_partition_dp([1, 1, 2, 2]) == (True, [0, 2])
    assert balanced_partition_dp([1, 1, 1, 3]) == (False, None)
    assert balanced_partition_dp([]) == (True, [])
    with pytest.raises(ValueError):
        balanced_partition_dp([1, 2, 3])
    with pytest.raises(ValueError):
        balanced_partition_dp([1, 2])


@given(st.lists(st.integers(0, 10), max_size=12).filter(lambda v: len(v) % 2 == 0 and sum(v) % 2 == 0))
def test_dp_agrees_with_enumeration(values):
    decision, witness = balanced_partition_dp(values)
    assert decision == enumerate_partition(values)
    if decision:
        assert len(witness) == len(values) // 2
        assert 2 * sum(values[i] for i in witness) == sum(values)


# --- reduction ---------------------------------------------------------------------


def test_reduction_examples():
    red = reduce_partition([1, 1])
    assert red.instance.sizes == (3, 3)
    red = reduce_partition([3, 1, 1, 1])
    assert red.elements == (2, 2, 2, 6)
    assert red.instance.sizes == (3, 3, 3, 7)
    assert red.group_of(0) == 3
    assert validate_extra_constraint(red.instance)
    assert red.instance.a == 10.0
    with pytest.raises(ValueError):
        reduce_partition([1, 2, 3])


@given(st.lists(st.integers(0, 50), min_size=2, max_size=10).filter(lambda v: len(v) % 2 == 0))
def test_reduction_always_valid(values):
    inst = reduce_partition(values).instance
    assert validate_extra_constraint(inst)
    # a is the smallest power of ten above the constraint's left side
    assert inst.a / 10 <= math.sqrt(inst.q * (inst.n * inst.d + 2 * inst.c[0] * sum(
        m * (m - 1) // 2 for m in inst.sizes))) or inst.a == 1.0


def test_reduction_soundness_small():
    for values, expect in (([1, 1], True), ([1, 1, 2, 2], True), ([1, 1, 1, 3], False),
                           ([1, 2], False), ([2, 1, 1, 2], True)):
        inst = reduce_partition(values).instance
        _, witness = brute_force_optimum(inst)
        assert attains_cov_balance(inst, witness) == expect
        assert balanced_partition_dp([2 * v for v in values])[0] == expect


def test_total_pair_bound_alone_is_not_enough():
    # the optimum meets the summed bound with unequal machines, so the check is per machine
    inst = reduce_partition([1, 1, 1, 3]).instance
    _, witness = brute_force_optimum(inst)
    st_ = machine_stats(inst, witness)
    assert sum(st_.pair_count) == cov_balanced_pairs(inst)
    assert st_.pair_count[0] != st_.pair_count[1]
