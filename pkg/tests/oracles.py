"""Independent reference computations used by several test modules."""

from __future__ import annotations

import itertools
from math import gcd

import numpy as np


def det(m: list[list[int]]) -> int:
    """Laplace expansion; exact for small integer matrices."""
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * det([row[:j] + row[j + 1:] for row in m[1:]]) for j in range(n) if m[0][j])


def invariant_factors(M: list[list[int]]) -> list[int]:
    """Nonzero invariant factors from gcds of k-minors (determinantal divisors)."""
    n = len(M)
    m = len(M[0]) if n else 0
    out, prev = [], 1
    for k in range(1, min(n, m) + 1):
        g = 0
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(m), k):
                g = gcd(g, det([[M[i][j] for j in cols] for i in rows]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def abelian_groups_up_to(order: int) -> list[tuple[int, ...]]:
    """Divisor chains ``d1 | d2 | ...`` (each >= 2) with product at most ``order``."""
    out = [()]

    def grow(chain, prod):
        last = chain[-1] if chain else 1
        for d in range(2, order // prod + 1):
            if d % last == 0:
                c = chain + (d,)
                out.append(c)
                grow(c, prod * d)

    grow((), 1)
    return out


def order_profile(orders: tuple[int, ...]) -> list[int]:
    """Sorted element orders of ``Z/o1 + Z/o2 + ...``."""
    res = []
    for x in itertools.product(*[range(o) for o in orders]):
        k = 1
        while any((k * a) % o for a, o in zip(x, orders)):
            k += 1
        res.append(k)
    return sorted(res)


def quotient_profile(orders: tuple[int, ...], n: int) -> list[int]:
    """Element orders of ``G / nG`` by explicit cosets."""
    elems = list(itertools.product(*[range(o) for o in orders]))
    nG = {tuple((n * a) % o for a, o in zip(x, orders)) for x in elems}
    seen, profile = set(), []
    for x in elems:
        key = min(tuple((a + b) % o for a, b, o in zip(x, y, orders)) for y in nG)
        if key in seen:
            continue
        seen.add(key)
        k = 1
        while tuple((k * a) % o for a, o in zip(x, orders)) not in nG:
            k += 1
        profile.append(k)
    return sorted(profile)


def random_admissible(spec, shape, rng, max_nodes: int = 200_000):
    """Random locally admissible box for a planar pairs SFT: randomized depth-first fill."""
    allowed = sorted(spec.allowed)
    n0, n1 = shape
    cells = np.full(shape, -1, dtype=np.int64)
    order = [(i, j) for i in range(n0) for j in range(n1)]
    stack = [None] * len(order)
    k = nodes = 0
    while k < len(order):
        i, j = order[k]
        if stack[k] is None:
            opts = [
                s
                for s in allowed
                if (i == 0 or (int(cells[i - 1, j]), s) in spec.pairs[0])
                and (j == 0 or (int(cells[i, j - 1]), s) in spec.pairs[1])
            ]
            stack[k] = [opts[t] for t in rng.permutation(len(opts))]
        nodes += 1
        if nodes > max_nodes:
            raise RuntimeError("sampler budget exhausted")
        if stack[k]:
            cells[i, j] = stack[k].pop()
            k += 1
        else:
            stack[k] = None
            cells[i, j] = -1
            k -= 1
            if k < 0:
                raise RuntimeError("no admissible box")
    return cells


def random_walk(start, steps, rng, inside):
    """Random nearest-neighbour walk staying inside the predicate."""
    pts = [tuple(start)]
    D = len(start)
    for _ in range(steps):
        z = pts[-1]
        moves = []
        for a in range(D):
            for s in (1, -1):
                y = tuple(v + (s if k == a else 0) for k, v in enumerate(z))
                if inside(y):
                    moves.append(y)
        pts.append(moves[rng.integers(len(moves))])
    return pts


def box_ok(spec, blk) -> bool:
    """Pairs SFT: every symbol allowed and every adjacent pair inside the box matches."""
    if any(int(x) not in spec.allowed for x in blk.ravel()):
        return False
    for i, rel in enumerate(spec.pairs):
        a = np.take(blk, range(blk.shape[i] - 1), axis=i).ravel()
        b = np.take(blk, range(1, blk.shape[i]), axis=i).ravel()
        if any((int(x), int(y)) not in rel for x, y in zip(a, b)):
            return False
    return True


def brute_ball_ok(spec, cells, idx, r) -> bool:
    return box_ok(spec, cells[tuple(slice(i - r, i + r + 1) for i in idx)])


def brute_field(spec, cfg):
    """Defect field by direct ball checks, capped by the window."""
    out = np.empty(cfg.shape, dtype=np.int64)
    for idx in itertools.product(*[range(s) for s in cfg.shape]):
        rfit = min(min(i, s - 1 - i) for i, s in zip(idx, cfg.shape))
        v = -1
        for r in range(rfit + 1):
            if brute_ball_ok(spec, cfg.cells, idx, r):
                v = r
            else:
                break
        out[idx] = v
    return out
