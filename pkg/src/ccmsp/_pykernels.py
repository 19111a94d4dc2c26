"""Pure-Python run loops, used when the compiled extension is unavailable.

Every function here has a twin in ``_ckernels.pyx`` with the same signature and
the same floating-point expression order. Random draws arrive pre-sampled, so
both backends walk through identical trajectories for a given seed.

Stop codes: 0 = keep going, 1 = target fitness reached, 2 = the swap-stable
predicate holds (see ``oracles.swap_stable_condition``).
"""

from math import sqrt

STOP_NONE = 0
STOP_TARGET = 1
STOP_SWAP_STABLE = 2


def _cov(row, pair_count, cvec, uniform, c):
    if uniform:
        return 2.0 * c * pair_count
    cov = 0.0
    for ci, x in zip(cvec, row):
        cov += 2.0 * ci * (x * (x - 1) // 2)
    return cov


def _fitness(counts, tp, cvec, uniform, c, a, d, q):
    cov0 = _cov(counts[0], tp[2], cvec, uniform, c)
    cov1 = _cov(counts[1], tp[3], cvec, uniform, c)
    s0 = tp[0] * a + sqrt(q * (tp[0] * d + cov0))
    s1 = tp[1] * a + sqrt(q * (tp[1] * d + cov1))
    if s1 > s0:
        return s1, 1
    return s0, 0


def _flip(bits, group, counts, tp, j):
    g = group[j]
    src = bits[j]
    dst = 1 - src
    tp[2 + src] -= counts[src][g] - 1
    counts[src][g] -= 1
    tp[2 + dst] += counts[dst][g]
    counts[dst][g] += 1
    tp[src] -= 1
    tp[dst] += 1
    bits[j] = dst


def _swap_stable(counts, tp, k, n, t, c):
    if abs(tp[0] - tp[1]) > 1:
        return False
    if c == 0.0:
        return True
    p_t = tp[2 + t]
    # cov_t <= (c/4)(n^2/k - 2n + k), scaled to integers
    if 8 * k * p_t <= n * n - 2 * n * k + k * k:
        return True
    gap = abs(tp[2] - tp[3])
    alpha = counts[t]
    beta = counts[1 - t]
    # the first clause fails iff some i, j with alpha_i >= alpha_j + 2 has
    # beta_i - beta_j + 1 < gap; for each i only the largest such beta_j matters
    order = sorted(range(k), key=lambda i: alpha[i])
    best_beta = None
    lo = 0
    for i in order:
        while lo < k and alpha[order[lo]] <= alpha[i] - 2:
            bj = beta[order[lo]]
            if best_beta is None or bj > best_beta:
                best_beta = bj
            lo += 1
        if best_beta is not None and beta[i] - best_beta + 1 < gap:
            return False
    return True


def stop_code(counts, tp, cvec, uniform, c, a, d, q, k, n, target, use_target, use_swap_stable):
    counts_l = [list(map(int, counts[0])), list(map(int, counts[1]))]
    tp_l = list(map(int, tp))
    f, t = _fitness(counts_l, tp_l, list(cvec), uniform, c, a, d, q)
    if use_target and f <= target:
        return STOP_TARGET
    if use_swap_stable and _swap_stable(counts_l, tp_l, k, n, t, c):
        return STOP_SWAP_STABLE
    return STOP_NONE


def _unpack(bits, group, counts, tp, cvec):
    return (
        bits.tolist(),
        group.tolist(),
        [counts[0].tolist(), counts[1].tolist()],
        tp.tolist(),
        cvec.tolist(),
    )


def _pack(bits_l, counts_l, tp_l, bits, counts, tp):
    bits[:] = bits_l
    counts[0, :] = counts_l[0]
    counts[1, :] = counts_l[1]
    tp[:] = tp_l


def rls_chunk(bits, group, counts, tp, cvec, uniform, c, a, d, q,
              target, use_target, use_swap_stable,
              coin, first, second, n_iter, iter_offset, cur_f,
              traj_iter, traj_val):
    """Run up to ``n_iter`` RLS iterations; returns (iterations, stop, fitness, n_traj)."""
    bits_l, group_l, counts_l, tp_l, cvec_l = _unpack(bits, group, counts, tp, cvec)
    coin = coin.tolist()
    first = first.tolist()
    second = second.tolist()
    k = len(cvec_l)
    n = len(bits_l)
    ntraj = 0
    stop = STOP_NONE
    it = 0
    while it < n_iter:
        i = first[it]
        if coin[it] == 0 or n < 2:
            _flip(bits_l, group_l, counts_l, tp_l, i)
            j = -1
        else:
            j = second[it]
            if j >= i:
                j += 1
            _flip(bits_l, group_l, counts_l, tp_l, i)
            _flip(bits_l, group_l, counts_l, tp_l, j)
        it += 1
        f, t = _fitness(counts_l, tp_l, cvec_l, uniform, c, a, d, q)
        if f <= cur_f:
            if f < cur_f:
                traj_iter[ntraj] = iter_offset + it
                traj_val[ntraj] = f
                ntraj += 1
            cur_f = f
            if use_target and f <= target:
                stop = STOP_TARGET
                break
            if use_swap_stable and _swap_stable(counts_l, tp_l, k, n, t, c):
                stop = STOP_SWAP_STABLE
                break
        else:
            if j >= 0:
                _flip(bits_l, group_l, counts_l, tp_l, j)
            _flip(bits_l, group_l, counts_l, tp_l, i)
    _pack(bits_l, counts_l, tp_l, bits, counts, tp)
    return it, stop, cur_f, ntraj


def ea_chunk(bits, group, counts, tp, cvec, uniform, c, a, d, q,
             target, use_target, use_swap_stable,
             flip_pos, offsets, n_iter, iter_offset, cur_f,
             traj_iter, traj_val):
    """Run up to ``n_iter`` (1+1) EA iterations; returns (iterations, stop, fitness, n_traj)."""
    bits_l, group_l, counts_l, tp_l, cvec_l = _unpack(bits, group, counts, tp, cvec)
    flip_pos = flip_pos.tolist()
    offsets = offsets.tolist()
    k = len(cvec_l)
    n = len(bits_l)
    ntraj = 0
    stop = STOP_NONE
    it = 0
    while it < n_iter:
        lo = offsets[it]
        hi = offsets[it + 1]
        for p in range(lo, hi):
            _flip(bits_l, group_l, counts_l, tp_l, flip_pos[p])
        it += 1
        if hi == lo:
            # parent copy: accepted, nothing changes
            continue
        f, t = _fitness(counts_l, tp_l, cvec_l, uniform, c, a, d, q)
        if f <= cur_f:
            if f < cur_f:
                traj_iter[ntraj] = iter_offset + it
                traj_val[ntraj] = f
                ntraj += 1
            cur_f = f
            if use_target and f <= target:
                stop = STOP_TARGET
                break
            if use_swap_stable and _swap_stable(counts_l, tp_l, k, n, t, c):
                stop = STOP_SWAP_STABLE
                break
        else:
            for p in range(hi - 1, lo - 1, -1):
                _flip(bits_l, group_l, counts_l, tp_l, flip_pos[p])
    _pack(bits_l, counts_l, tp_l, bits, counts, tp)
    return it, stop, cur_f, ntraj
