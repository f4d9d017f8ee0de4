"""Coefficient groups, pseudonorms, Smith normal form and homology of integer complexes.

Four group kinds are supported:

* :class:`FgAbelian` -- ``Z^R + Z/n_1 + ... + Z/n_K`` with componentwise payloads.
* :class:`FreeProductZ2Z2` -- ``<v, h | v^2 = h^2 = e>`` with reduced alternating words.
* :class:`FreeGroup` -- free group on ``n`` generators, words as tuples of ``+-(i+1)``.
* :class:`FiniteTable` -- a finite group given by its multiplication table.

Elements are immutable :class:`GroupElement` values; multiplication of elements
from different groups raises :class:`~defectlab.errors.SpecMismatch`.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .errors import (
    InvalidGroup,
    NoNontrivialPseudonorm,
    NonComposable,
    NonzeroComposition,
    SpecMismatch,
)

# ---------------------------------------------------------------------------
# group kinds


class Group:
    """Abstract group.  Subclasses define the payload calculus."""

    kind = "abstract"
    abelian = False

    def identity(self) -> "GroupElement":
        return GroupElement(self, self._identity())

    def element(self, payload: Any) -> "GroupElement":
        return GroupElement(self, self._normalize(payload))

    def mul(self, a: "GroupElement", b: "GroupElement") -> "GroupElement":
        self._own(a)
        self._own(b)
        return GroupElement(self, self._mul(a.payload, b.payload))

    def inv(self, a: "GroupElement") -> "GroupElement":
        self._own(a)
        return GroupElement(self, self._inv(a.payload))

    def eq(self, a: "GroupElement", b: "GroupElement") -> bool:
        self._own(a)
        self._own(b)
        return a.payload == b.payload

    def product(self, elements: Iterable["GroupElement"]) -> "GroupElement":
        acc = self.identity()
        for g in elements:
            acc = self.mul(acc, g)
        return acc

    def _own(self, a: "GroupElement") -> None:
        if a.group != self:
            raise SpecMismatch(f"element of {a.group} used in {self}")

    # subclass hooks
    def _identity(self):
        raise NotImplementedError

    def _normalize(self, payload):
        raise NotImplementedError

    def _mul(self, a, b):
        raise NotImplementedError

    def _inv(self, a):
        raise NotImplementedError

    def generators(self) -> list["GroupElement"]:
        raise NotImplementedError

    def elements(self) -> list["GroupElement"]:
        raise InvalidGroup(f"{self} is infinite")

    def is_finite(self) -> bool:
        return False


@dataclass(frozen=True)
class GroupElement:
    group: Group
    payload: Any

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.mul(self, other)

    def inverse(self) -> "GroupElement":
        return self.group.inv(self)

    def __pow__(self, n: int) -> "GroupElement":
        base = self if n >= 0 else self.inverse()
        acc = self.group.identity()
        for _ in range(abs(n)):
            acc = acc * base
        return acc

    def is_identity(self) -> bool:
        return self.payload == self.group._identity()

    def __repr__(self) -> str:
        return f"{self.group.format(self)}"


@dataclass(frozen=True)
class FgAbelian(Group):
    """``Z^rank + Z/torsion[0] + ...``; written multiplicatively through :meth:`mul`."""

    rank: int = 0
    torsion: tuple[int, ...] = ()
    kind: str = field(default="abelian", init=False, repr=False, compare=False)

    abelian = True

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(n) for n in self.torsion))
        if self.rank < 0:
            raise InvalidGroup("negative rank")
        if any(n < 2 for n in self.torsion):
            raise InvalidGroup("torsion orders must be >= 2", torsion=self.torsion)

    @property
    def ngens(self) -> int:
        return self.rank + len(self.torsion)

    def _identity(self):
        return (0,) * self.ngens

    def _normalize(self, payload):
        vals = tuple(int(x) for x in payload)
        if len(vals) != self.ngens:
            raise InvalidGroup(f"payload length {len(vals)} != {self.ngens}")
        return vals[: self.rank] + tuple(v % n for v, n in zip(vals[self.rank :], self.torsion))

    def _mul(self, a, b):
        return self._normalize(tuple(x + y for x, y in zip(a, b)))

    def _inv(self, a):
        return self._normalize(tuple(-x for x in a))

    def generators(self):
        return [self.element(tuple(int(i == j) for j in range(self.ngens))) for i in range(self.ngens)]

    def is_finite(self) -> bool:
        return self.rank == 0

    def order(self) -> int | float:
        return math.prod(self.torsion) if self.rank == 0 else math.inf

    def elements(self):
        if self.rank:
            raise InvalidGroup(f"{self} is infinite")
        return [self.element(p) for p in itertools.product(*[range(n) for n in self.torsion])]

    def from_ints(self, free: Sequence[int] = (), tors: Sequence[int] = ()) -> GroupElement:
        return self.element(tuple(free) + tuple(tors))

    def canonical(self) -> "FgAbelian":
        """Same group with torsion rewritten as a divisor chain ``d_1 | d_2 | ...``."""
        return FgAbelian(self.rank, divisor_chain(self.torsion))

    def isomorphic(self, other: "FgAbelian") -> bool:
        a, b = self.canonical(), other.canonical()
        return a.rank == b.rank and a.torsion == b.torsion

    def format(self, g: GroupElement) -> str:
        if self.ngens == 1:
            return str(g.payload[0])
        free = ", ".join(map(str, g.payload[: self.rank]))
        tors = ", ".join(map(str, g.payload[self.rank :]))
        return "(" + "; ".join(x for x in (free, tors) if x) + ")"

    def __str__(self) -> str:
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts += [f"Z/{n}" for n in self.torsion]
        return " + ".join(parts) if parts else "0"

    @staticmethod
    def parse(text: str) -> "FgAbelian":
        """Parse ``"Z^2 + Z/4"``, ``"Z/2+Z/3"``, ``"0"``; ``Z/n`` with ``n=1`` is dropped."""
        text = text.replace(" ", "")
        if text in ("0", ""):
            return FgAbelian(0, ())
        rank, tors = 0, []
        for term in text.split("+"):
            m = re.fullmatch(r"Z(?:\^(\d+))?", term)
            if m:
                rank += int(m.group(1) or 1)
                continue
            m = re.fullmatch(r"Z/(\d+)(?:\^(\d+))?", term)
            if m:
                n, mult = int(m.group(1)), int(m.group(2) or 1)
                if n == 0:
                    rank += mult
                elif n > 1:
                    tors += [n] * mult
                continue
            raise InvalidGroup(f"cannot parse group term {term!r}")
        return FgAbelian(rank, tuple(tors))


def Z(rank: int = 1) -> FgAbelian:
    return FgAbelian(rank, ())


def ZMod(*orders: int) -> FgAbelian:
    return FgAbelian(0, tuple(orders))


@dataclass(frozen=True)
class FreeProductZ2Z2(Group):
    """``Z/2 * Z/2`` on letters ``v`` and ``h``; payloads are reduced alternating strings."""

    kind: str = field(default="z2*z2", init=False, repr=False)

    def _identity(self):
        return ""

    def _normalize(self, payload):
        word = str(payload)
        if set(word) - {"v", "h"}:
            raise InvalidGroup(f"bad letters in {word!r}")
        return self._reduce("", word)

    @staticmethod
    def _reduce(a: str, b: str) -> str:
        stack = list(a)
        for ch in b:
            if stack and stack[-1] == ch:
                stack.pop()
            else:
                stack.append(ch)
        return "".join(stack)

    def _mul(self, a, b):
        return self._reduce(a, b)

    def _inv(self, a):
        return a[::-1]

    def generators(self):
        return [self.element("v"), self.element("h")]

    def format(self, g):
        return g.payload or "e"

    def __str__(self):
        return "Z/2*Z/2"


@dataclass(frozen=True)
class FreeGroup(Group):
    """Free group on ``n`` generators; letter ``+k``/``-k`` is generator ``k`` or its inverse."""

    n: int = 2
    kind: str = field(default="free", init=False, repr=False)

    def _identity(self):
        return ()

    def _normalize(self, payload):
        letters = tuple(int(x) for x in payload)
        if any(x == 0 or abs(x) > self.n for x in letters):
            raise InvalidGroup(f"letter out of range in {letters}")
        return self._reduce((), letters)

    @staticmethod
    def _reduce(a, b):
        stack = list(a)
        for x in b:
            if stack and stack[-1] == -x:
                stack.pop()
            else:
                stack.append(x)
        return tuple(stack)

    def _mul(self, a, b):
        return self._reduce(a, b)

    def _inv(self, a):
        return tuple(-x for x in reversed(a))

    def generators(self):
        return [self.element((i + 1,)) for i in range(self.n)]

    def abelianize(self, g: GroupElement) -> tuple[int, ...]:
        out = [0] * self.n
        for x in g.payload:
            out[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(out)

    def format(self, g):
        if not g.payload:
            return "e"
        names = "abcdefghijklmnopqrstuvwxyz"
        return " ".join(names[abs(x) - 1] + ("" if x > 0 else "^-1") for x in g.payload)

    def __str__(self):
        return f"F{self.n}"


@dataclass(frozen=True)
class FiniteTable(Group):
    """Finite group from a multiplication table ``table[i][j] = i*j``.  Validated at construction."""

    table: tuple[tuple[int, ...], ...] = ((0,),)
    kind: str = field(default="table", init=False, repr=False)

    def __post_init__(self):
        t = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", t)
        n = len(t)
        if n == 0 or any(len(row) != n for row in t):
            raise InvalidGroup("table must be square and nonempty")
        if any(not 0 <= x < n for row in t for x in row):
            raise InvalidGroup("table entries out of range")
        ids = [e for e in range(n) if all(t[e][x] == x and t[x][e] == x for x in range(n))]
        if not ids:
            raise InvalidGroup("no identity")
        e = ids[0]
        for x in range(n):
            if not any(t[x][y] == e for y in range(n)):
                raise InvalidGroup("missing inverse", element=x)
        for x, y, z in itertools.product(range(n), repeat=3):
            if t[t[x][y]][z] != t[x][t[y][z]]:
                raise InvalidGroup("not associative", triple=(x, y, z))
        object.__setattr__(self, "_e", e)

    @property
    def order_(self) -> int:
        return len(self.table)

    def _identity(self):
        return self._e  # type: ignore[attr-defined]

    def _normalize(self, payload):
        i = int(payload)
        if not 0 <= i < len(self.table):
            raise InvalidGroup("index out of range")
        return i

    def _mul(self, a, b):
        return self.table[a][b]

    def _inv(self, a):
        return next(y for y in range(len(self.table)) if self.table[a][y] == self._e)  # type: ignore[attr-defined]

    def generators(self):
        return self.elements()

    def elements(self):
        return [self.element(i) for i in range(len(self.table))]

    def is_finite(self):
        return True

    @property
    def abelian(self) -> bool:  # type: ignore[override]
        n = len(self.table)
        return all(self.table[x][y] == self.table[y][x] for x in range(n) for y in range(n))

    def format(self, g):
        return f"#{g.payload}"

    def __str__(self):
        return f"Table({len(self.table)})"


def cyclic_table(n: int) -> FiniteTable:
    return FiniteTable(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)))


# ---------------------------------------------------------------------------
# pseudonorms


def pseudonorm(g: GroupElement) -> int:
    """Conjugation-invariant subadditive norm.

    ``FgAbelian``: sum of ``|z_i|`` plus ``min(y, n - y)`` on torsion coordinates.
    ``FreeGroup``: the abelian norm of the abelianization.
    ``Z/2*Z/2`` admits only the zero pseudonorm, so it is refused.
    """
    G = g.group
    if isinstance(G, FgAbelian):
        free = sum(abs(x) for x in g.payload[: G.rank])
        tors = sum(min(y, n - y) for y, n in zip(g.payload[G.rank :], G.torsion))
        return free + tors
    if isinstance(G, FreeGroup):
        return sum(abs(x) for x in G.abelianize(g))
    if isinstance(G, FreeProductZ2Z2):
        raise NoNontrivialPseudonorm("Z/2*Z/2 admits no nontrivial pseudonorm; recode into a cyclic subgroup first")
    raise NoNontrivialPseudonorm(f"no pseudonorm implemented for {G}")


def normalized_pseudonorm(values: Iterable[GroupElement]) -> tuple[float, int]:
    """Scale factor making every listed generator value have norm at most 1.

    Returns ``(scale, max_norm)``; divide norms by ``scale``.  A zero max norm
    flags a degenerate (identically zero on the generators) pseudonorm.
    """
    m = max((pseudonorm(g) for g in values), default=0)
    return (float(m) if m else 1.0), m


def vh_exponent(g: GroupElement) -> int:
    """Export an element of the cyclic subgroup ``<vh>`` of ``Z/2*Z/2`` to ``Z``."""
    from .errors import ValueEscapesSubgroup

    if not isinstance(g.group, FreeProductZ2Z2):
        raise SpecMismatch("vh export needs a Z/2*Z/2 element")
    w = g.payload
    if w == "":
        return 0
    if len(w) % 2:
        raise ValueEscapesSubgroup(f"{w} is not a power of vh", word=w)
    return len(w) // 2 if w[0] == "v" else -(len(w) // 2)


# ---------------------------------------------------------------------------
# integer matrices and Smith normal form

Matrix = list[list[int]]


def as_matrix(rows: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    m = [[int(x) for x in row] for row in rows]
    if m and any(len(r) != len(m[0]) for r in m):
        raise NonComposable("ragged matrix")
    return m


def identity_matrix(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix, inner: int | None = None) -> Matrix:
    n = len(a)
    k = len(a[0]) if a else (inner or 0)
    if b and len(b) != k:
        raise NonComposable(f"shapes {n}x{k} and {len(b)}x{len(b[0]) if b else 0}")
    m = len(b[0]) if b else 0
    bt = list(zip(*b)) if b else []
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a] if m else [[] for _ in range(n)]


def determinant(a: Matrix) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    n = len(a)
    if n == 0:
        return 1
    m = [row[:] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass
class SNFResult:
    S: Matrix
    U: Matrix
    V: Matrix
    Vinv: Matrix

    @property
    def diagonal(self) -> list[int]:
        return [self.S[i][i] for i in range(min(len(self.S), len(self.S[0]) if self.S else 0))]


def smith_normal_form(M: Sequence[Sequence[int]]) -> SNFResult:
    """``S = U M V`` with ``U, V`` unimodular and ``S`` diagonal with ``s_1 | s_2 | ...``.

    Exact arbitrary-precision arithmetic; suited to small and medium dense matrices.
    """
    A = as_matrix(M)
    n = len(A)
    m = len(A[0]) if n else 0
    U = identity_matrix(n)
    V = identity_matrix(m)
    Vi = identity_matrix(m)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, c):  # row_dst += c * row_src
        if c:
            A[dst] = [x + c * y for x, y in zip(A[dst], A[src])]
            U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, c):  # col_dst += c * col_src ; Vinv row_src -= c * row_dst
        if c:
            for row in A:
                row[dst] += c * row[src]
            for row in V:
                row[dst] += c * row[src]
            Vi[src] = [x - c * y for x, y in zip(Vi[src], Vi[dst])]

    def neg_row(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]

    t = 0
    while t < min(n, m):
        # pick smallest nonzero |entry| in the remaining block
        best = None
        for i in range(t, n):
            for j in range(t, m):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, n):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(i, t, -q)
                    if A[i][t]:
                        done = False
            for j in range(t + 1, m):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(j, t, -q)
                    if A[t][j]:
                        done = False
            if done:
                # divisibility of the remaining block
                bad = next(
                    ((i, j) for i in range(t + 1, n) for j in range(t + 1, m) if A[i][j] % A[t][t]), None
                )
                if bad is None:
                    break
                add_row(t, bad[0], 1)
                continue
            # move a smaller remainder into the pivot position
            best = None
            for i in range(t, n):
                if A[i][t] and (best is None or abs(A[i][t]) < abs(best[1])):
                    best = (("r", i), A[i][t])
            for j in range(t, m):
                if A[t][j] and (best is None or abs(A[t][j]) < abs(best[1])):
                    best = (("c", j), A[t][j])
            (kind, idx), _ = best
            if kind == "r":
                swap_rows(t, idx)
            else:
                swap_cols(t, idx)
        if A[t][t] < 0:
            neg_row(t)
        t += 1
    return SNFResult(A, U, V, Vi)


# ---------------------------------------------------------------------------
# sparse elimination (ranks and elementary divisors of large sparse matrices)


@dataclass
class SparseMatrix:
    """Integer matrix stored as ``{(row, col): value}`` without zeros."""

    nrows: int
    ncols: int
    entries: dict[tuple[int, int], int] = field(default_factory=dict)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "SparseMatrix":
        n = len(rows)
        m = len(rows[0]) if n else (ncols or 0)
        ent = {(i, j): int(x) for i, row in enumerate(rows) for j, x in enumerate(row) if x}
        return cls(n, m, ent)

    def to_dense(self) -> Matrix:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for (i, j), x in self.entries.items():
            out[i][j] = x
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, {(j, i): x for (i, j), x in self.entries.items()})

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise NonComposable(f"{self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        by_row: dict[int, list[tuple[int, int]]] = {}
        for (k, j), x in other.entries.items():
            by_row.setdefault(k, []).append((j, x))
        out: dict[tuple[int, int], int] = {}
        for (i, k), x in self.entries.items():
            for j, y in by_row.get(k, ()):
                out[(i, j)] = out.get((i, j), 0) + x * y
        return SparseMatrix(self.nrows, other.ncols, {k: v for k, v in out.items() if v})

    def is_zero(self) -> bool:
        return not self.entries

    def to_triplets(self) -> list[list[int]]:
        return [[i, j, x] for (i, j), x in sorted(self.entries.items())]


def _rows_of(M: SparseMatrix) -> dict[int, dict[int, int]]:
    rows: dict[int, dict[int, int]] = {}
    for (i, j), x in M.entries.items():
        rows.setdefault(i, {})[j] = x
    return rows


def _eliminate(M: SparseMatrix, modulus: int | None) -> tuple[int, dict[int, dict[int, int]]]:
    """Greedy unit-pivot elimination.  Returns ``(pivots, remaining rows)``.

    Over ``Z`` only ``+-1`` pivots are used; over ``Z/p`` every nonzero entry is a unit.
    """
    rows = _rows_of(M)
    if modulus:
        rows = {i: {j: x % modulus for j, x in r.items() if x % modulus} for i, r in rows.items()}
        rows = {i: r for i, r in rows.items() if r}
    cols: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)
    pivots = 0

    def is_unit(x: int) -> bool:
        return (x % modulus != 0) if modulus else abs(x) == 1

    while True:
        cand = None
        for i, r in rows.items():
            for j, x in r.items():
                if is_unit(x):
                    cost = (len(r) - 1) * (len(cols[j]) - 1)
                    if cand is None or cost < cand[0]:
                        cand = (cost, i, j)
                        if cost == 0:
                            break
            if cand is not None and cand[0] == 0:
                break
        if cand is None:
            break
        _, pi, pj = cand
        prow = rows.pop(pi)
        for j in prow:
            cols[j].discard(pi)
        pv = prow[pj]
        inv = pow(pv, -1, modulus) if modulus else pv  # pv = +-1 over Z
        for i in list(cols[pj]):
            r = rows[i]
            f = r[pj] * inv
            if modulus:
                f %= modulus
            for j, x in prow.items():
                nv = r.get(j, 0) - f * x
                if modulus:
                    nv %= modulus
                if nv:
                    if j not in r:
                        cols.setdefault(j, set()).add(i)
                    r[j] = nv
                elif j in r:
                    del r[j]
                    cols[j].discard(i)
            if not r:
                del rows[i]
        del cols[pj]
        pivots += 1
    return pivots, rows


def rank_mod_p(M: SparseMatrix, p: int) -> int:
    pivots, rows = _eliminate(M, p)
    assert not rows
    return pivots


def elementary_divisors(M: SparseMatrix) -> list[int]:
    """Nonzero invariant factors of an integer matrix (sparse pass, then dense SNF)."""
    pivots, rows = _eliminate(M, None)
    out = [1] * pivots
    if rows:
        colset = sorted({j for r in rows.values() for j in r})
        cidx = {j: k for k, j in enumerate(colset)}
        dense = [[0] * len(colset) for _ in rows]
        for k, r in enumerate(rows.values()):
            for j, x in r.items():
                dense[k][cidx[j]] = x
        out += [d for d in _snf_diagonal(dense) if d]
    return out


def _snf_diagonal(A: Matrix) -> list[int]:
    """Invariant factors only (no transforms)."""
    A = [row[:] for row in A]
    n = len(A)
    m = len(A[0]) if n else 0
    diag = []
    t = 0
    while t < min(n, m):
        best = None
        for i in range(t, n):
            for j in range(t, m):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i0, j0 = best
        A[t], A[i0] = A[i0], A[t]
        for row in A:
            row[t], row[j0] = row[j0], row[t]
        while True:
            changed = False
            for i in range(t + 1, n):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        changed = True
            for j in range(t + 1, m):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    for row in A:
                        row[j] -= q * row[t]
                    if A[t][j]:
                        changed = True
            if changed:
                best = None
                for i in range(t, n):
                    if A[i][t] and (best is None or abs(A[i][t]) < abs(A[best][t])):
                        best = i
                A[t], A[best] = A[best], A[t]
                bj = None
                for j in range(t, m):
                    if A[t][j] and (bj is None or abs(A[t][j]) < abs(A[t][bj])):
                        bj = j
                for row in A:
                    row[t], row[bj] = row[bj], row[t]
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, m) if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def divisor_chain(orders: Iterable[int]) -> tuple[int, ...]:
    """Rewrite ``+ Z/n_k`` as a divisor chain; entries equal to 1 disappear."""
    orders = [int(n) for n in orders if int(n) != 1]
    if not orders:
        return ()
    diag = _snf_diagonal([[orders[i] if i == j else 0 for j in range(len(orders))] for i in range(len(orders))])
    return tuple(d for d in diag if d > 1)


def _as_sparse(M) -> SparseMatrix:
    if isinstance(M, SparseMatrix):
        return M
    return SparseMatrix.from_dense(M)


def homology_of_pair(d_in, d_out, coefficients: FgAbelian | None = None, n: int | None = None) -> FgAbelian:
    """``ker(d_out) / im(d_in)`` for ``C_{d+1} --d_in--> C_d --d_out--> C_{d-1}``.

    ``coefficients`` defaults to ``Z``.  Prime cyclic coefficients use mod-p ranks;
    other coefficient groups use the universal-coefficient formula, whose torsion
    term only needs the elementary divisors of ``d_in`` and ``d_out``.
    """
    A = _as_sparse(d_in)
    B = _as_sparse(d_out)
    size = n if n is not None else (A.nrows if A.nrows or not B.ncols else B.ncols)
    if A.nrows != size or B.ncols != size:
        raise NonComposable(f"d_in has {A.nrows} rows, d_out has {B.ncols} cols")
    if not B.matmul(A).is_zero():
        raise NonzeroComposition("d_out . d_in != 0")
    G = coefficients if coefficients is not None else Z(1)
    if G.rank == 0 and len(G.torsion) == 1 and _is_prime(G.torsion[0]):
        p = G.torsion[0]
        return FgAbelian(0, (p,) * (size - rank_mod_p(A, p) - rank_mod_p(B, p)))
    ea = elementary_divisors(A)
    eb = elementary_divisors(B)
    betti = size - len(ea) - len(eb)
    tors_z = [s for s in ea if s > 1]
    tors_prev = [s for s in eb if s > 1]
    rank = betti * G.rank
    tors: list[int] = []
    tors += list(G.torsion) * betti
    # H_d(C) (x) G : torsion of H_d tensored with G
    for s in tors_z:
        tors += [s] * G.rank + [math.gcd(s, m) for m in G.torsion]
    # Tor(H_{d-1}(C), G)
    for s in tors_prev:
        tors += [math.gcd(s, m) for m in G.torsion]
    return FgAbelian(rank, divisor_chain(tors))


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, math.isqrt(n) + 1))


# ---------------------------------------------------------------------------
# Hom and Ext of finitely generated abelian groups


def quotient_by_multiple(G: FgAbelian, n: int) -> FgAbelian:
    """``G / nG``."""
    tors = [n] * G.rank + [math.gcd(n, m) for m in G.torsion]
    return FgAbelian(0, divisor_chain(tors))


def ext_group(H: FgAbelian, G: FgAbelian) -> FgAbelian:
    """``Ext(H, G) = + over torsion orders n_k of H of G / n_k G``; the free part of H contributes 0."""
    tors: list[int] = []
    for n in H.torsion:
        tors += list(quotient_by_multiple(G, n).torsion)
    return FgAbelian(0, divisor_chain(tors))


def hom_group(H: FgAbelian, G: FgAbelian) -> FgAbelian:
    """``Hom(H, G)``: ``G`` per free generator of ``H``, the ``n``-torsion ``G[n]`` per ``Z/n``."""
    rank = H.rank * G.rank
    tors = list(G.torsion) * H.rank
    for n in H.torsion:
        tors += [math.gcd(n, m) for m in G.torsion]
    return FgAbelian(rank, divisor_chain(tors))


def direct_sum(*groups: FgAbelian) -> FgAbelian:
    return FgAbelian(sum(g.rank for g in groups), divisor_chain(t for g in groups for t in g.torsion))
