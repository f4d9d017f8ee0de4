"""Geometry of Z^D: boxes, trails, trail homotopy in the plane, cubical chains.

Adjacency is l1 (unit steps).  Balls are l-infinity boxes ``z + [-r..r]^D``.
Site ``z`` corresponds to the unit cube ``z + [0,1]^D``; axis 0 points east and
axis 1 points north.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import EndpointMismatch, InvalidTrail, NoEnclosingRing, UnsupportedDimension

Site = tuple[int, ...]

_COORD_LIMIT = 2**31


def site(*coords: int) -> Site:
    if len(coords) == 1 and not isinstance(coords[0], (int, np.integer)):
        coords = tuple(coords[0])
    s = tuple(int(c) for c in coords)
    if not s:
        raise ValueError("sites need D >= 1")
    if any(abs(c) > _COORD_LIMIT for c in s):
        raise ValueError("coordinate exceeds 2^31")
    return s


def add(a: Sequence[int], b: Sequence[int]) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[int], b: Sequence[int]) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def unit(D: int, axis: int, sign: int = 1) -> Site:
    return tuple(sign if i == axis else 0 for i in range(D))


def linf(a: Sequence[int], b: Sequence[int] | None = None) -> int:
    if b is None:
        return max((abs(x) for x in a), default=0)
    return max((abs(x - y) for x, y in zip(a, b)), default=0)


def l1(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


def neighbours(z: Site) -> Iterator[Site]:
    for i in range(len(z)):
        for s in (1, -1):
            yield z[:i] + (z[i] + s,) + z[i + 1 :]


def step_of(a: Site, b: Site) -> tuple[int, int]:
    """``(axis, sign)`` of the unit step ``a -> b``; raises if not adjacent."""
    d = sub(b, a)
    nz = [(i, x) for i, x in enumerate(d) if x]
    if len(nz) != 1 or abs(nz[0][1]) != 1:
        raise InvalidTrail(f"{a} and {b} are not adjacent")
    return nz[0][0], nz[0][1]


@dataclass(frozen=True)
class Box:
    """``center + [-radius..radius]^D``."""

    center: Site
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("negative radius")

    @property
    def lo(self) -> Site:
        return tuple(c - self.radius for c in self.center)

    @property
    def hi(self) -> Site:
        return tuple(c + self.radius for c in self.center)

    def sites(self) -> list[Site]:
        return [tuple(p) for p in itertools.product(*[range(c - self.radius, c + self.radius + 1) for c in self.center])]

    def __len__(self) -> int:
        return (2 * self.radius + 1) ** len(self.center)

    def __contains__(self, z: Sequence[int]) -> bool:
        return linf(z, self.center) <= self.radius


# ---------------------------------------------------------------------------
# trails


@dataclass(frozen=True)
class Trail:
    sites: tuple[Site, ...]

    def __post_init__(self):
        s = tuple(tuple(int(c) for c in z) for z in self.sites)
        object.__setattr__(self, "sites", s)
        if s and len({len(z) for z in s}) != 1:
            raise InvalidTrail("mixed dimensions")
        for a, b in zip(s, s[1:]):
            if l1(a, b) != 1:
                raise InvalidTrail(f"{a} -> {b} is not a unit step")

    @classmethod
    def of(cls, *sites: Sequence[int]) -> "Trail":
        return cls(tuple(tuple(z) for z in sites))

    @classmethod
    def from_steps(cls, start: Sequence[int], steps: Iterable[tuple[int, int]]) -> "Trail":
        pts = [tuple(start)]
        for axis, sign in steps:
            pts.append(add(pts[-1], unit(len(start), axis, sign)))
        return cls(tuple(pts))

    @classmethod
    def straight(cls, start: Sequence[int], axis: int, n: int) -> "Trail":
        sign = 1 if n >= 0 else -1
        return cls.from_steps(start, [(axis, sign)] * abs(n))

    @classmethod
    def manhattan(cls, a: Sequence[int], b: Sequence[int], order: Sequence[int] | None = None) -> "Trail":
        """Axis-by-axis path from ``a`` to ``b`` (axes in ``order``, default ascending)."""
        order = range(len(a)) if order is None else order
        steps = []
        for i in order:
            d = b[i] - a[i]
            steps += [(i, 1 if d > 0 else -1)] * abs(d)
        return cls.from_steps(a, steps)

    @property
    def start(self) -> Site:
        return self.sites[0]

    @property
    def end(self) -> Site:
        return self.sites[-1]

    @property
    def closed(self) -> bool:
        return len(self.sites) > 0 and self.sites[0] == self.sites[-1]

    def steps(self) -> list[tuple[int, int]]:
        return [step_of(a, b) for a, b in zip(self.sites, self.sites[1:])]

    def __len__(self) -> int:
        return len(self.sites)

    def translate(self, v: Sequence[int]) -> "Trail":
        return Trail(tuple(add(z, v) for z in self.sites))

    def repeat(self, n: int) -> "Trail":
        if not self.closed:
            raise EndpointMismatch("only closed trails can be repeated")
        if n < 0:
            return reverse(self).repeat(-n)
        out = Trail((self.start,))
        for _ in range(n):
            out = concat(out, self)
        return out


def concat(t1: Trail, t2: Trail) -> Trail:
    if not t1.sites:
        return t2
    if not t2.sites:
        return t1
    if t1.end != t2.start:
        raise EndpointMismatch(f"{t1.end} != {t2.start}")
    return Trail(t1.sites + t2.sites[1:])


def reverse(t: Trail) -> Trail:
    return Trail(t.sites[::-1])


def elementary_homotope(t1: Trail, t2: Trail, region: Iterable[Sequence[int]]) -> bool:
    """True iff the trails differ by exactly one square swap, backtrack deletion or insertion."""
    reg = region if isinstance(region, (set, frozenset)) else {tuple(z) for z in region}
    a, b = t1.sites, t2.sites
    if not a or not b or a[0] != b[0] or a[-1] != b[-1]:
        return False
    if any(z not in reg for z in a + b):
        return False
    if len(a) == len(b):
        diff = [i for i in range(len(a)) if a[i] != b[i]]
        if len(diff) != 1:
            return False
        i = diff[0]
        if i == 0 or i == len(a) - 1:
            return False
        p, q, r, s = a[i - 1], a[i], a[i + 1], b[i]
        # p, q, r, s are the four corners of a unit square with p, r opposite
        return l1(p, r) == 2 and linf(p, r) == 1 and q != s
    if abs(len(a) - len(b)) == 2:
        longer, shorter = (a, b) if len(a) > len(b) else (b, a)
        for n in range(1, len(longer) - 1):
            if longer[n + 1] == longer[n - 1] and longer[: n] + longer[n + 2 :] == shorter:
                return True
        return False
    return False


def _require_2d(*ts: Trail) -> None:
    for t in ts:
        if t.sites and len(t.sites[0]) != 2:
            raise UnsupportedDimension("planar homotopy only (D = 2)")


# ---------------------------------------------------------------------------
# planar holes and homotopy words


@dataclass(frozen=True)
class PlanarComplex:
    """2-complex of a finite planar site set: unit steps plus unit squares with all corners present.

    ``holes[i]`` is a representative unfilled square (lower-left corner) of the
    i-th bounded complementary component.  Trails are classified by their
    reduced crossing words against vertical rays shot north from each hole.
    """

    region: frozenset
    holes: tuple[Site, ...]
    hole_cells: tuple[frozenset, ...] = field(repr=False, default=())

    @classmethod
    def build(cls, region: Iterable[Sequence[int]]) -> "PlanarComplex":
        reg = frozenset(tuple(z) for z in region)
        if not reg:
            return cls(reg, (), ())
        if len(next(iter(reg))) != 2:
            raise UnsupportedDimension("planar complex needs D = 2")
        xs = [z[0] for z in reg]
        ys = [z[1] for z in reg]
        x0, y0 = min(xs) - 1, min(ys) - 1
        W, H = max(xs) - x0 + 2, max(ys) - y0 + 2
        # doubled grid: (2x, 2y) vertices, odd coordinates edges / squares
        occ = np.zeros((2 * W + 1, 2 * H + 1), dtype=bool)
        for x, y in reg:
            occ[2 * (x - x0), 2 * (y - y0)] = True
        V = occ[0::2, 0::2]
        occ[1::2, 0::2] = V[:-1, :] & V[1:, :]
        occ[0::2, 1::2] = V[:, :-1] & V[:, 1:]
        occ[1::2, 1::2] = V[:-1, :-1] & V[1:, :-1] & V[:-1, 1:] & V[1:, 1:]
        from scipy.ndimage import label

        lab, n = label(~occ)
        outer = lab[0, 0]
        holes, cells = [], []
        for k in range(1, n + 1):
            if k == outer:
                continue
            pts = np.argwhere(lab == k)
            sq = [(int(i), int(j)) for i, j in pts if i % 2 == 1 and j % 2 == 1]
            rep = min(((i // 2 + x0, j // 2 + y0) for i, j in sq), key=lambda p: (p[0], p[1]))
            holes.append(rep)
            cells.append(frozenset((i // 2 + x0, j // 2 + y0) for i, j in pts if i % 2 == 0 and j % 2 == 0))
        order = sorted(range(len(holes)), key=lambda i: holes[i])
        return cls(reg, tuple(holes[i] for i in order), tuple(cells[i] for i in order))

    def _ray_x(self, i: int) -> float:
        # distinct offsets keep rays from holes in the same column disjoint
        return self.holes[i][0] + 0.5 + 0.4 * (i + 1) / (len(self.holes) + 1) - 0.2

    def word(self, t: Trail) -> tuple[int, ...]:
        """Reduced free-group word (letters ``+-(i+1)``); westward crossings count positively."""
        _require_2d(t)
        by_col: dict[int, list[int]] = {}
        for i, (hx, _) in enumerate(self.holes):
            by_col.setdefault(hx, []).append(i)
        stack: list[int] = []
        for a, b in zip(t.sites, t.sites[1:]):
            if a[1] != b[1]:
                continue
            xl = min(a[0], b[0])
            hit = [i for i in by_col.get(xl, ()) if a[1] > self.holes[i][1]]
            if not hit:
                continue
            east = b[0] > a[0]
            hit.sort(key=self._ray_x, reverse=not east)
            for i in hit:
                letter = -(i + 1) if east else (i + 1)
                if stack and stack[-1] == -letter:
                    stack.pop()
                else:
                    stack.append(letter)
        return tuple(stack)


def trails_homotopic(t1: Trail, t2: Trail, region: Iterable[Sequence[int]], complex_: PlanarComplex | None = None) -> bool:
    """Fixed-endpoint homotopy in the 2-complex of ``region`` (exact, via free-group words)."""
    _require_2d(t1, t2)
    K = complex_ or PlanarComplex.build(region)
    if not t1.sites or not t2.sites or t1.start != t2.start or t1.end != t2.end:
        raise EndpointMismatch("homotopy needs equal endpoints")
    if any(z not in K.region for z in t1.sites + t2.sites):
        return False
    return K.word(t1) == K.word(t2)


def winding_number(loop: Trail, point: Sequence[float]) -> int:
    """Winding number of a closed lattice loop around a non-lattice point (counterclockwise positive)."""
    _require_2d(loop)
    if not loop.closed:
        raise EndpointMismatch("winding number needs a closed trail")
    px, py = float(point[0]), float(point[1])
    w = 0
    for a, b in zip(loop.sites, loop.sites[1:]):
        if a[1] == b[1] and a[1] > py and min(a[0], b[0]) < px < max(a[0], b[0]):
            w += 1 if b[0] < a[0] else -1
    return w


# ---------------------------------------------------------------------------
# components and enclosing rings


def connected_components(sites: Iterable[Sequence[int]], diagonal: bool = False) -> list[frozenset]:
    """Maximal connected subsets under l1 adjacency (``diagonal=True``: l-infinity adjacency)."""
    todo = {tuple(z) for z in sites}
    if not todo:
        return []
    D = len(next(iter(todo)))
    if diagonal:
        offs = [o for o in itertools.product((-1, 0, 1), repeat=D) if any(o)]
    else:
        offs = [unit(D, i, s) for i in range(D) for s in (1, -1)]
    comps = []
    while todo:
        seed = min(todo)
        todo.discard(seed)
        comp = {seed}
        queue = deque([seed])
        while queue:
            z = queue.popleft()
            for o in offs:
                y = add(z, o)
                if y in todo:
                    todo.discard(y)
                    comp.add(y)
                    queue.append(y)
        comps.append(frozenset(comp))
    comps.sort(key=min)
    return comps


def rectangle_ring(x0: int, y0: int, x1: int, y1: int) -> Trail:
    """Counterclockwise boundary of ``[x0..x1] x [y0..y1]`` from the lower-left corner, heading east."""
    pts = [(x, y0) for x in range(x0, x1 + 1)]
    pts += [(x1, y) for y in range(y0 + 1, y1 + 1)]
    pts += [(x, y1) for x in range(x1 - 1, x0 - 1, -1)]
    pts += [(x0, y) for y in range(y1 - 1, y0 - 1, -1)]
    return Trail(tuple(pts))


def enclosing_rings(component: Iterable[Sequence[int]], region: Iterable[Sequence[int]]) -> list[tuple[int, int, int, int]]:
    """All rectangles whose ring lies in ``region`` and whose interior meets only ``component`` outside ``region``.

    Sorted by (half-perimeter, area, x0, y0).
    """
    comp = {tuple(z) for z in component}
    reg = region if isinstance(region, (set, frozenset)) else {tuple(z) for z in region}
    if not comp:
        raise NoEnclosingRing("empty component")
    if len(next(iter(comp))) != 2:
        raise UnsupportedDimension("rings are planar")
    allx = [z[0] for z in reg | comp]
    ally = [z[1] for z in reg | comp]
    bx0, by0 = min(allx), min(ally)
    W, H = max(allx) - bx0 + 1, max(ally) - by0 + 1
    notreg = np.ones((W, H), dtype=np.int64)
    for x, y in reg:
        notreg[x - bx0, y - by0] = 0
    other = notreg.copy()
    for x, y in comp:
        other[x - bx0, y - by0] = 0
    P = np.zeros((W + 1, H + 1), dtype=np.int64)
    P[1:, 1:] = notreg.cumsum(0).cumsum(1)
    Q = np.zeros((W + 1, H + 1), dtype=np.int64)
    Q[1:, 1:] = other.cumsum(0).cumsum(1)

    cx0 = min(z[0] for z in comp) - bx0
    cx1 = max(z[0] for z in comp) - bx0
    cy0 = min(z[1] for z in comp) - by0
    cy1 = max(z[1] for z in comp) - by0
    X0 = np.arange(0, cx0)[:, None, None, None]
    X1 = np.arange(cx1 + 1, W)[None, :, None, None]
    Y0 = np.arange(0, cy0)[None, None, :, None]
    Y1 = np.arange(cy1 + 1, H)[None, None, None, :]
    if X0.size == 0 or X1.size == 0 or Y0.size == 0 or Y1.size == 0:
        return []

    def rect(S, a0, b0, a1, b1):  # inclusive sums, broadcast
        return S[a1 + 1, b1 + 1] - S[a0, b1 + 1] - S[a1 + 1, b0] + S[a0, b0]

    full = rect(P, X0, Y0, X1, Y1)
    inner_bad = rect(P, X0 + 1, Y0 + 1, X1 - 1, Y1 - 1)
    ring_ok = (full - inner_bad) == 0
    inner_other = rect(Q, X0 + 1, Y0 + 1, X1 - 1, Y1 - 1)
    ok = ring_ok & (inner_other == 0)
    idx = np.argwhere(ok)
    out = []
    for i, j, k, l in idx:
        x0, x1, y0, y1 = int(X0[i, 0, 0, 0]) + bx0, int(X1[0, j, 0, 0]) + bx0, int(Y0[0, 0, k, 0]) + by0, int(Y1[0, 0, 0, l]) + by0
        out.append((x0, y0, x1, y1))
    out.sort(key=lambda r: (r[2] - r[0] + r[3] - r[1], (r[2] - r[0]) * (r[3] - r[1]), r[0], r[1]))
    return out


def loop_around(component: Iterable[Sequence[int]], region: Iterable[Sequence[int]]) -> Trail:
    """Smallest counterclockwise rectangular ring in ``region`` enclosing ``component`` and nothing else."""
    rings = enclosing_rings(component, region)
    if not rings:
        raise NoEnclosingRing("no rectangular ring in the region separates this component")
    return rectangle_ring(*rings[0])


# ---------------------------------------------------------------------------
# cubical cells and chains


@dataclass(frozen=True, order=True)
class CubicCell:
    """``base + prod_{a in axes} [0,1]``; axes strictly ascending."""

    base: Site
    axes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(c) for c in self.base))
        ax = tuple(int(a) for a in self.axes)
        if list(ax) != sorted(set(ax)) or any(not 0 <= a < len(self.base) for a in ax):
            raise ValueError(f"bad axes {ax} for D={len(self.base)}")
        object.__setattr__(self, "axes", ax)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def translate(self, v: Sequence[int]) -> "CubicCell":
        return CubicCell(add(self.base, v), self.axes)

    def vertices(self) -> list[Site]:
        D = len(self.base)
        return [add(self.base, tuple(sum(e for a, e in zip(self.axes, eps) if a == i) for i in range(D)))
                for eps in itertools.product((0, 1), repeat=self.dim)]


def cell_boundary_terms(cell: CubicCell) -> list[tuple[CubicCell, int]]:
    """Signed faces: sum over k of (-1)^k (front_k - back_k), k counted from 1."""
    out = []
    D = len(cell.base)
    for k, a in enumerate(cell.axes, start=1):
        rest = cell.axes[: k - 1] + cell.axes[k:]
        s = -1 if k % 2 else 1
        out.append((CubicCell(cell.base, rest), s))
        out.append((CubicCell(add(cell.base, unit(D, a)), rest), -s))
    return out


@dataclass(frozen=True)
class Chain:
    terms: Mapping[CubicCell, int]
    dim: int

    def __post_init__(self):
        t = {c: int(v) for c, v in dict(self.terms).items() if v}
        if any(c.dim != self.dim for c in t):
            raise ValueError("mixed-dimension chain")
        object.__setattr__(self, "terms", t)

    @classmethod
    def of(cls, *cells: CubicCell, dim: int | None = None) -> "Chain":
        t: dict[CubicCell, int] = {}
        for c in cells:
            t[c] = t.get(c, 0) + 1
        d = dim if dim is not None else (cells[0].dim if cells else 0)
        return cls(t, d)

    def __add__(self, other: "Chain") -> "Chain":
        if self.terms and other.terms and self.dim != other.dim:
            raise ValueError("dimension mismatch")
        t = dict(self.terms)
        for c, v in other.terms.items():
            t[c] = t.get(c, 0) + v
        return Chain(t, self.dim if self.terms else other.dim)

    def __neg__(self) -> "Chain":
        return Chain({c: -v for c, v in self.terms.items()}, self.dim)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def scale(self, k: int) -> "Chain":
        return Chain({c: k * v for c, v in self.terms.items()}, self.dim)

    def translate(self, v: Sequence[int]) -> "Chain":
        return Chain({c.translate(v): x for c, x in self.terms.items()}, self.dim)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.terms == other.terms and (self.dim == other.dim or not self.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))


def boundary(chain: Chain) -> Chain:
    if chain.dim == 0:
        return Chain({}, 0)
    t: dict[CubicCell, int] = {}
    for c, v in chain.terms.items():
        for f, s in cell_boundary_terms(c):
            t[f] = t.get(f, 0) + s * v
    return Chain(t, chain.dim - 1)


def trail_chain(t: Trail) -> Chain:
    """1-chain of a trail (each step an oriented edge)."""
    terms: dict[CubicCell, int] = {}
    for a, b in zip(t.sites, t.sites[1:]):
        axis, sign = step_of(a, b)
        base = a if sign > 0 else b
        c = CubicCell(base, (axis,))
        terms[c] = terms.get(c, 0) + sign
    return Chain(terms, 1)


def box_chain(lo: Sequence[int], hi: Sequence[int]) -> Chain:
    """Sum of all D-cells with base in ``[lo..hi)`` (half-open per axis)."""
    D = len(lo)
    cells = [CubicCell(tuple(p), tuple(range(D))) for p in itertools.product(*[range(a, b) for a, b in zip(lo, hi)])]
    return Chain({c: 1 for c in cells}, D)
