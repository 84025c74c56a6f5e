"""Reference computations that share no code with the package under test."""

import itertools
import math


def clmul_mod(a, b, poly=0x11D):
    """Carry-less multiply followed by polynomial long division."""
    product = 0
    for bit in range(8):
        if (b >> bit) & 1:
            product ^= a << bit
    for shift in range(15, 7, -1):
        if (product >> shift) & 1:
            product ^= poly << (shift - 8)
    return product


def slow_inv(a):
    return next(x for x in range(1, 256) if clmul_mod(a, x) == 1)


def rank(matrix):
    """Rank over GF(256) by row reduction with the bitwise oracle."""
    rows = [list(r) for r in matrix]
    rank = 0
    cols = len(rows[0]) if rows else 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = slow_inv(rows[rank][col])
        rows[rank] = [clmul_mod(v, inv) for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [v ^ clmul_mod(f, p) for v, p in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def enumerate_availability(p, k, m):
    """Sum over all 2^m endpoint up/down states with at least k up."""
    total = 0.0
    for state in itertools.product((0, 1), repeat=m):
        up = sum(state)
        if up >= k:
            total += p**up * (1 - p) ** (m - up)
    return total


def enumerate_placement_availability(p, k, counts):
    total = 0.0
    for state in itertools.product((0, 1), repeat=len(counts)):
        chunks = sum(c for c, s in zip(counts, state) if s)
        if chunks >= k:
            up = sum(state)
            total += p**up * (1 - p) ** (len(counts) - up)
    return total


def list_schedule_makespan(costs, workers):
    """Greedy list scheduling: each job goes to the earliest-free worker."""
    free = [0.0] * workers
    for c in costs:
        i = min(range(workers), key=lambda w: (free[w], w))
        free[i] += c
    return max(free)


def binomial_tail(p, k, m):
    return sum(math.comb(m, j) * p**j * (1 - p) ** (m - j) for j in range(k, m + 1))
