"""Compiled inner loops of the tax simulation."""

import numpy as np
from numba import njit


@njit(cache=True)
def _before(wealth, a, b):
    wa = wealth[a]
    wb = wealth[b]
    return wa < wb or (wa == wb and a < b)


@njit(cache=True)
def sort_by_wealth(wealth, order, buf, run):
    # Sort ``order`` by (wealth, citizen index). A step moves each group's
    # non-evaders monotonically, so every block of ``run`` entries of the
    # previous order stays nearly sorted: insertion-sort the blocks, then
    # merge them bottom-up.
    n = order.shape[0]
    for start in range(0, n, run):
        end = min(start + run, n)
        for k in range(start + 1, end):
            idx = order[k]
            j = k - 1
            while j >= start and _before(wealth, idx, order[j]):
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = idx
    width = run
    in_order = True
    while width < n:
        src = order if in_order else buf
        dst = buf if in_order else order
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            if mid == hi or _before(wealth, src[mid - 1], src[mid]):
                dst[lo:hi] = src[lo:hi]
                continue
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if _before(wealth, src[j], src[i]):
                    dst[k] = src[j]
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
        in_order = not in_order
        width *= 2
    if not in_order:
        order[:] = buf


@njit(cache=True)
def regroup(wealth, order, group, group_size):
    buf = np.empty_like(order)
    sort_by_wealth(wealth, order, buf, group_size)
    for k in range(order.shape[0]):
        group[order[k]] = k // group_size


@njit(cache=True)
def advance(wealth, primary, order, group, evader, draws, collect, redistribute, catch, fine,
            interest_rate, group_size):
    """Advance one society by one step in place and return the redistributed pool."""
    n = wealth.shape[0]
    collected = 0.0
    for i in range(n):
        w = wealth[i]
        primary[i] = w
        tax = collect[group[i]] * w
        if evader[i]:
            if draws[i] < catch:
                paid = min(tax + fine * tax, w)
            else:
                paid = 0.0
        else:
            paid = tax
        wealth[i] = w - paid
        collected += paid
    pool = collected * (1.0 + interest_rate)
    for i in range(n):
        wealth[i] += pool * redistribute[group[i]] / group_size
    regroup(wealth, order, group, group_size)
    return pool


@njit(cache=True)
def run_batch(wealth, evader, draws, genes, num_groups, interest_rate):
    """Run every row of ``wealth`` through ``draws.shape[1]`` steps.

    Mutates ``wealth`` in place; returns (primary, group, pool).
    """
    batch, n = wealth.shape
    steps = draws.shape[1]
    g = num_groups
    size = n // g
    primary = wealth.copy()
    group = np.empty((batch, n), dtype=np.int64)
    pool = np.zeros(batch)
    order = np.empty(n, dtype=np.int64)
    for b in range(batch):
        order[:] = np.argsort(wealth[b], kind="mergesort")
        regroup(wealth[b], order, group[b], size)
        collect = genes[b, :g]
        redistribute = genes[b, g:2 * g]
        for t in range(steps):
            pool[b] = advance(wealth[b], primary[b], order, group[b], evader[b], draws[b, t],
                              collect, redistribute, genes[b, 2 * g], genes[b, 2 * g + 1],
                              interest_rate, size)
    return primary, group, pool
