"""Compiled sampling kernels.

Networks are flattened into integer arrays: component ``i`` owns
``comp_letters[comp_ptr[i]:comp_ptr[i + 1]]`` with cumulative weights in
``comp_cum``; letter ``a`` sits in components ``res_list[res_ptr[a]:res_ptr[a + 1]]``.
``lmap`` translates local letter ids to output ids so a reduced network
can write letters of the full monoid.

Every kernel draws from splitmix64 states shared with :mod:`tracesync.rng`.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit
from .rng import k_derive, k_next, k_uniform

EOF = 0
DL = 1
BUDGET = 2

WALK_DONE = 0
WALK_FULL = 1
WALK_REJECTED = 2
WALK_OVERFLOW = 3


@njit
def draw_letter(states, i, comp_ptr, comp_letters, comp_cum, comp_sub):
    """Next letter of component ``i``, or -1 for its stopping symbol."""
    u = k_uniform(states, i)
    lo = comp_ptr[i]
    hi = comp_ptr[i + 1]
    for k in range(lo, hi):
        if u < comp_cum[k]:
            return comp_letters[k]
    if comp_sub[i]:
        return -1
    return comp_letters[hi - 1]


@njit
def psa_core(master, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
             heads, cnt, states, out, start, budget):
    """One PSA run writing its pieces to ``out[start:]``.

    Each component keeps one drawn letter ahead.  A letter is a minimal
    piece when it heads every component it belongs to; the smallest such
    letter is taken first.  Returns ``(length, status)``.
    """
    n_comp = comp_ptr.shape[0] - 1
    n_let = res_ptr.shape[0] - 1
    for i in range(n_comp):
        states[i] = k_derive(master, i)
    for a in range(n_let):
        cnt[a] = 0
    for i in range(n_comp):
        h = draw_letter(states, i, comp_ptr, comp_letters, comp_cum, comp_sub)
        heads[i] = h
        if h >= 0:
            cnt[h] += 1
    n = 0
    while True:
        best = -1
        for a in range(n_let):
            if cnt[a] == res_ptr[a + 1] - res_ptr[a]:
                best = a
                break
        if best < 0:
            for i in range(n_comp):
                if heads[i] >= 0:
                    return n, DL
            return n, EOF
        if n >= budget:
            return n, BUDGET
        out[start + n] = lmap[best]
        n += 1
        cnt[best] = 0
        for r in range(res_ptr[best], res_ptr[best + 1]):
            j = res_list[r]
            h = draw_letter(states, j, comp_ptr, comp_letters, comp_cum, comp_sub)
            heads[j] = h
            if h >= 0:
                cnt[h] += 1


@njit
def psa_single(rng, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap, out, budget):
    n_comp = comp_ptr.shape[0] - 1
    heads = np.empty(n_comp, np.int64)
    cnt = np.empty(res_ptr.shape[0] - 1, np.int64)
    states = np.empty(n_comp, np.uint64)
    master = k_next(rng, 0)
    return psa_core(master, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                    heads, cnt, states, out, 0, budget)


@njit
def psa_batch(rng, runs, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap, budget,
              lengths, statuses):
    """Lengths and statuses of ``runs`` independent PSA runs."""
    n_comp = comp_ptr.shape[0] - 1
    heads = np.empty(n_comp, np.int64)
    cnt = np.empty(res_ptr.shape[0] - 1, np.int64)
    states = np.empty(n_comp, np.uint64)
    out = np.empty(budget + 1, np.int64)
    for r in range(runs):
        master = k_next(rng, 0)
        n, status = psa_core(master, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                             heads, cnt, states, out, 0, budget)
        lengths[r] = n
        statuses[r] = status


@njit
def is_pyramid_below(out, start, stop, a, dep, covered):
    """Whether every piece of ``out[start:stop]`` lies below a final ``a``."""
    n_let = dep.shape[0]
    for c in range(n_let):
        covered[c] = dep[a, c]
    for k in range(stop - 1, start - 1, -1):
        b = out[k]
        if not covered[b]:
            return False
        for c in range(n_let):
            if dep[b, c]:
                covered[c] = True
    return True


@njit
def walk_increment(rng, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                   a, dep, heads, cnt, states, covered, out, start, max_rejects):
    """One walk increment written at ``out[start:]``.

    With ``a >= 0`` the reduced PSA output is retried until appending ``a``
    gives a pyramid topped by ``a``.  With ``a < 0`` the raw output is the
    increment.  Returns ``(length, rejections, status)``.
    """
    rejects = 0
    room = out.shape[0] - start - 1
    while True:
        master = k_next(rng, 0)
        n, status = psa_core(master, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                             heads, cnt, states, out, start, room)
        if status == BUDGET:
            return n, rejects, WALK_OVERFLOW
        if a < 0:
            return n, rejects, WALK_DONE
        if is_pyramid_below(out, start, start + n, a, dep, covered):
            out[start + n] = a
            return n + 1, rejects, WALK_DONE
        rejects += 1
        if rejects > max_rejects:
            return n, rejects, WALK_REJECTED


@njit
def walk(rng, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap, a, dep,
         out, total, inc_ends, inc_rejects, n_inc, target_len, target_incs, reserve, max_rejects):
    """Append increments until the length or increment target is met.

    Stops early with ``WALK_FULL`` when fewer than ``reserve`` free slots
    remain in ``out`` or ``inc_ends`` is full; the caller grows the arrays
    and resumes from the returned offsets.
    """
    n_comp = comp_ptr.shape[0] - 1
    heads = np.empty(n_comp, np.int64)
    cnt = np.empty(res_ptr.shape[0] - 1, np.int64)
    states = np.empty(n_comp, np.uint64)
    covered = np.empty(dep.shape[0], np.bool_)
    while total < target_len and n_inc < target_incs:
        if out.shape[0] - total < reserve or n_inc >= inc_ends.shape[0]:
            return total, n_inc, WALK_FULL
        n, rej, status = walk_increment(rng, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list,
                                        lmap, a, dep, heads, cnt, states, covered, out, total, max_rejects)
        if status != WALK_DONE:
            return total, n_inc, status
        total += n
        inc_ends[n_inc] = total
        inc_rejects[n_inc] = rej
        n_inc += 1
    return total, n_inc, WALK_DONE


@njit
def decider_reset(proj_ptr, ptr):
    done = 0
    for k in range(ptr.shape[0]):
        ptr[k] = 0
        if proj_ptr[k + 1] == proj_ptr[k]:
            done += 1
    return done


@njit
def decider_feed(out, start, stop, dep, pair_index, proj_ptr, proj_data, ptr, done):
    """Advance the prefix test on ``out[start:stop]``.

    ``x <= y`` iff for each dependent pair the projection of ``x`` is a
    prefix of that of ``y``.  Returns the new count of completed pairs,
    or -1 once some projection disagrees.
    """
    n_let = dep.shape[0]
    for k in range(start, stop):
        b = out[k]
        for c in range(n_let):
            if not dep[b, c]:
                continue
            p = pair_index[b, c]
            pos = ptr[p]
            if pos == proj_ptr[p + 1] - proj_ptr[p]:
                continue
            if proj_data[proj_ptr[p] + pos] != b:
                return -1
            ptr[p] = pos + 1
            if pos + 1 == proj_ptr[p + 1] - proj_ptr[p]:
                done += 1
    return done


@njit
def psa_cylinder_batch(rng, runs, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                       cap, dep, pair_index, proj_ptr, proj_data, counts):
    """Tally ``x <= output`` over PSA runs cut at ``cap`` pieces.

    ``counts`` receives (dominating, not dominating, undecided).
    """
    n_comp = comp_ptr.shape[0] - 1
    heads = np.empty(n_comp, np.int64)
    cnt = np.empty(res_ptr.shape[0] - 1, np.int64)
    states = np.empty(n_comp, np.uint64)
    out = np.empty(cap + 1, np.int64)
    ptr = np.empty(proj_ptr.shape[0] - 1, np.int64)
    n_pairs = ptr.shape[0]
    for r in range(runs):
        master = k_next(rng, 0)
        n, status = psa_core(master, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                             heads, cnt, states, out, 0, cap)
        done = decider_reset(proj_ptr, ptr)
        done = decider_feed(out, 0, n, dep, pair_index, proj_ptr, proj_data, ptr, done)
        if done == n_pairs:
            counts[0] += 1
        elif done < 0 or status != BUDGET:
            counts[1] += 1
        else:
            counts[2] += 1


@njit
def walk_cylinder_batch(rng, runs, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr, res_list, lmap,
                        a, cap, reserve, max_rejects, dep, pair_index, proj_ptr, proj_data, counts):
    """Tally ``x <= walk`` over independent walks, each stopped once decided.

    Returns a nonzero walk status if an increment fails.
    """
    n_comp = comp_ptr.shape[0] - 1
    heads = np.empty(n_comp, np.int64)
    cnt = np.empty(res_ptr.shape[0] - 1, np.int64)
    states = np.empty(n_comp, np.uint64)
    covered = np.empty(dep.shape[0], np.bool_)
    out = np.empty(cap + reserve, np.int64)
    ptr = np.empty(proj_ptr.shape[0] - 1, np.int64)
    n_pairs = ptr.shape[0]
    for r in range(runs):
        done = decider_reset(proj_ptr, ptr)
        total = 0
        while done >= 0 and done < n_pairs and total < cap:
            n, rej, status = walk_increment(rng, comp_ptr, comp_letters, comp_cum, comp_sub, res_ptr,
                                            res_list, lmap, a, dep, heads, cnt, states, covered, out,
                                            total, max_rejects)
            if status != WALK_DONE:
                return status
            done = decider_feed(out, total, total + n, dep, pair_index, proj_ptr, proj_data, ptr, done)
            total += n
        if done == n_pairs:
            counts[0] += 1
        elif done < 0:
            counts[1] += 1
        else:
            counts[2] += 1
    return WALK_DONE


@njit
def bernoulli_lengths(rng, runs, cum, max_length, lengths):
    """Lengths of finite Bernoulli words with stopping mass ``1 - cum[-1]``.

    Returns the index of the first run hitting ``max_length``, or -1.
    """
    n = cum.shape[0]
    total = cum[n - 1]
    for r in range(runs):
        k = 0
        while k_uniform(rng, 0) < total:
            k += 1
            if k >= max_length:
                return r
        lengths[r] = k
    return -1
