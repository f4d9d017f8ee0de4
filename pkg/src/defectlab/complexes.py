"""Tile complexes of Wang tile sets, their (co)homology, connecting maps between radii and CA-induced maps.

Cells of the quotient-by-translation complex are classes of ``(tile, face)``
where a face of the unit cube is a word ``c`` in ``{0, 1, 2}^D``: ``2`` marks
an axis along which the face extends, ``0``/``1`` a fixed coordinate.  Facing
faces of matching tiles are identified.  Orientation follows the cubical
convention of :func:`defectlab.lattice.cell_boundary_terms`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from .automaton import CaRule
from .errors import (
    BudgetExceeded,
    DisconnectedColourGraph,
    InvalidGroup,
    NonzeroComposition,
    SpecMismatch,
    UnsupportedDimension,
)
from .groups import FgAbelian, SparseMatrix, Z, direct_sum, ext_group, hom_group, homology_of_pair, smith_normal_form
from .symbolic import SftSpec, WangTileSet, wang_representation


def _faces(D: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1, 2), repeat=D))


def _face_index(c: Sequence[int]) -> int:
    k = 0
    for x in c:
        k = 3 * k + x
    return k


def _face_boundary(c: tuple[int, ...]) -> list[tuple[tuple[int, ...], int]]:
    axes = [j for j, x in enumerate(c) if x == 2]
    out = []
    for k, a in enumerate(axes, start=1):
        s = (-1) ** k
        lo = c[:a] + (0,) + c[a + 1:]
        hi = c[:a] + (1,) + c[a + 1:]
        out.append((lo, s))
        out.append((hi, -s))
    return out


@dataclass(frozen=True, eq=False)
class TileComplex:
    """Quotient cell complex: ``cells[d]`` lists a representative ``(tile, face)`` per class."""

    D: int
    ntiles: int
    label: np.ndarray  # (ntiles, 3^D) -> class index within its dimension
    cells: tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]
    boundaries: tuple[csr_matrix, ...]  # boundaries[d]: C_d -> C_{d-1}, d = 1..D (index 0 unused)
    provenance: dict = field(default_factory=dict)

    def counts(self) -> list[int]:
        return [len(c) for c in self.cells]

    def boundary(self, d: int) -> csr_matrix:
        if d <= 0 or d > self.D:
            rows = len(self.cells[d - 1]) if 0 < d <= self.D + 1 and d - 1 <= self.D else 0
            cols = len(self.cells[d]) if 0 <= d <= self.D else 0
            return csr_matrix((rows, cols), dtype=np.int64)
        return self.boundaries[d]

    def class_of(self, tile: int, face: Sequence[int]) -> int:
        return int(self.label[tile, _face_index(face)])

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * n for d, n in enumerate(self.counts()))

    def check_boundary_squared(self) -> bool:
        return all((self.boundaries[d - 1] @ self.boundaries[d]).count_nonzero() == 0 for d in range(2, self.D + 1))

    def to_json(self) -> dict:
        out = {"D": self.D, "tiles": self.ntiles, "cells": self.counts(), "boundaries": {}}
        for d in range(1, self.D + 1):
            m = self.boundaries[d].tocoo()
            out["boundaries"][str(d)] = {"shape": list(m.shape),
                                         "triplets": sorted([int(i), int(j), int(x)] for i, j, x in zip(m.row, m.col, m.data) if x)}
        out.update({k: v for k, v in self.provenance.items() if isinstance(v, (int, str))})
        return out


def build_tile_complex(w: WangTileSet, provenance: dict | None = None) -> TileComplex:
    D, T = w.D, len(w.tiles)
    faces = _faces(D)
    F = len(faces)
    rows, cols = [], []
    for i, rel in enumerate(w.match):
        if not rel:
            continue
        pairs = np.asarray(sorted(rel), dtype=np.int64)
        for c in faces:
            if c[i] != 1:
                continue
            c2 = c[:i] + (0,) + c[i + 1:]
            rows.append(pairs[:, 0] * F + _face_index(c))
            cols.append(pairs[:, 1] * F + _face_index(c2))
    n = T * F
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        g = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
    else:
        g = coo_matrix((n, n), dtype=np.int8)
    _, comp = connected_components(g, directed=False)
    comp = comp.reshape(T, F)
    dims = np.array([sum(1 for x in c if x == 2) for c in faces])
    label = np.empty((T, F), dtype=np.int64)
    cells: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(D + 1)]
    for d in range(D + 1):
        cols_d = np.nonzero(dims == d)[0]
        sub = comp[:, cols_d]
        uniq, first, inv = np.unique(sub.ravel(), return_index=True, return_inverse=True)
        # number classes by first appearance (tile-major) for determinism
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        label[:, cols_d] = rank[inv].reshape(sub.shape)
        for k in order:
            t, j = divmod(int(first[k]), len(cols_d))
            cells[d].append((t, faces[int(cols_d[j])]))
    bds: list[csr_matrix] = [csr_matrix((0, len(cells[0])), dtype=np.int64)]
    for d in range(1, D + 1):
        r, c, v = [], [], []
        for j, (t, face) in enumerate(cells[d]):
            for sub_face, s in _face_boundary(face):
                r.append(int(label[t, _face_index(sub_face)]))
                c.append(j)
                v.append(s)
        bds.append(coo_matrix((v, (r, c)), shape=(len(cells[d - 1]), len(cells[d])), dtype=np.int64).tocsr())
    tc = TileComplex(D, T, label, tuple(tuple(x) for x in cells), tuple(bds), dict(provenance or {}))
    if not tc.check_boundary_squared():
        raise NonzeroComposition("boundary of boundary is nonzero")
    return tc


def _sparse(m: csr_matrix) -> SparseMatrix:
    c = m.tocoo()
    return SparseMatrix(c.shape[0], c.shape[1], {(int(i), int(j)): int(x) for i, j, x in zip(c.row, c.col, c.data) if x})


def tile_homology(tc: TileComplex, d: int, coefficients: FgAbelian | None = None) -> FgAbelian:
    if not 0 <= d <= tc.D:
        raise SpecMismatch(f"degree {d} outside 0..{tc.D}")
    n = len(tc.cells[d])
    d_in = tc.boundaries[d + 1] if d + 1 <= tc.D else csr_matrix((n, 0), dtype=np.int64)
    d_out = tc.boundaries[d] if d >= 1 else csr_matrix((0, n), dtype=np.int64)
    return homology_of_pair(_sparse(d_in), _sparse(d_out), coefficients, n)


def tile_cohomology(tc: TileComplex, d: int, coefficients: FgAbelian | None = None) -> FgAbelian:
    """Cohomology of the cochain complex ``Hom(C_*, G)`` (transposed boundaries)."""
    if not 0 <= d <= tc.D:
        raise SpecMismatch(f"degree {d} outside 0..{tc.D}")
    n = len(tc.cells[d])
    delta_in = tc.boundaries[d].T.tocsr() if d >= 1 else csr_matrix((n, 0), dtype=np.int64)
    delta_out = tc.boundaries[d + 1].T.tocsr() if d + 1 <= tc.D else csr_matrix((0, n), dtype=np.int64)
    return homology_of_pair(_sparse(delta_in), _sparse(delta_out), coefficients, n)


def cohomology_by_uct(tc: TileComplex, d: int, G: FgAbelian) -> FgAbelian:
    """``Hom(H_d, G) + Ext(H_{d-1}, G)``: an independent route to :func:`tile_cohomology`."""
    h = hom_group(tile_homology(tc, d), G)
    e = ext_group(tile_homology(tc, d - 1), G) if d >= 1 else FgAbelian(0, ())
    return direct_sum(h, e).canonical()


def betti_numbers(tc: TileComplex) -> list[int]:
    return [tile_homology(tc, d).rank for d in range(tc.D + 1)]


# ---------------------------------------------------------------------------
# Conway-Lagarias (abelianized)


@dataclass(frozen=True)
class AbelianQuotient:
    """``ker(sigma) / im(rel)`` inside ``Z^n`` with explicit coordinates."""

    group: FgAbelian
    _vinv: tuple  # rows of sigma's V^{-1}
    _rank: int
    _u: tuple  # U of the relation SNF
    _diag: tuple

    def coordinates(self, x: Sequence[int]):
        """Class of a vector of ``ker(sigma)`` as an element of :attr:`group`."""
        c = [sum(a * b for a, b in zip(row, x)) for row in self._vinv]
        if any(c[: self._rank]):
            raise SpecMismatch("vector is not in the kernel")
        k = c[self._rank:]
        y = [sum(a * b for a, b in zip(row, k)) for row in self._u]
        free, tors = [], []
        for i, yi in enumerate(y):
            di = self._diag[i] if i < len(self._diag) else 0
            if di == 0:
                free.append(yi)
            elif di > 1:
                tors.append(yi % di)
        return self.group.from_ints(free, tors)


def _kernel_mod_image(sigma: list[list[int]], rel: list[list[int]], n: int) -> AbelianQuotient:
    if sigma and any(row for row in sigma):
        snf = smith_normal_form(sigma)
        rank = sum(1 for x in snf.diagonal if x)
        vinv = snf.Vinv
    else:
        rank = 0
        vinv = [[int(i == j) for j in range(n)] for i in range(n)]
    k = n - rank
    # relation columns in kernel coordinates
    M = [[sum(vinv[rank + i][j] * rel[j][c] for j in range(n)) for c in range(len(rel[0]) if rel else 0)] for i in range(k)]
    if M and M[0]:
        s2 = smith_normal_form(M)
        diag = [s2.S[i][i] if i < len(s2.S[0]) else 0 for i in range(k)]
        U = s2.U
    else:
        diag = [0] * k
        U = [[int(i == j) for j in range(k)] for i in range(k)]
    free = sum(1 for x in diag if x == 0)
    tors = tuple(x for x in diag if x > 1)
    return AbelianQuotient(FgAbelian(free, tors), tuple(map(tuple, vinv)), rank, tuple(map(tuple, U)), tuple(diag))


@dataclass(frozen=True)
class ConwayLagarias:
    group: FgAbelian
    horizontal: tuple[int, ...]  # edge classes along axis 0 (colours of N/S sides)
    vertical: tuple[int, ...]  # edge classes along axis 1 (colours of E/W sides)
    quotient: AbelianQuotient
    complex: TileComplex

    def colour_vector(self, coeffs: dict[tuple[str, int], int]) -> list[int]:
        """Vector on the colour basis from ``{("h", edge_class): k, ("v", edge_class): k}``."""
        x = [0] * (len(self.horizontal) + len(self.vertical))
        for (kind, cls), k in coeffs.items():
            idx = self.horizontal.index(cls) if kind == "h" else len(self.horizontal) + self.vertical.index(cls)
            x[idx] += k
        return x

    def class_of(self, coeffs: dict[tuple[str, int], int]):
        return self.quotient.coordinates(self.colour_vector(coeffs))


def conway_lagarias_abelianized(w: WangTileSet) -> ConwayLagarias:
    """Free abelian group on edge colours, cut down to balanced words, modulo ``s + e - n - w`` per tile.

    Colours are the edge classes of the tile complex.
    """
    if w.D != 2:
        raise UnsupportedDimension("Conway-Lagarias groups are planar")
    tc = build_tile_complex(w)
    if tile_homology(tc, 0).rank != 1:
        raise DisconnectedColourGraph("the tile complex is disconnected")
    H = tuple(range(len(tc.cells[1])))
    horiz = tuple(k for k in H if tc.cells[1][k][1] == (2, 0) or tc.cells[1][k][1] == (2, 1))
    vert = tuple(k for k in H if k not in horiz)
    n = len(horiz) + len(vert)
    pos = {("h", c): i for i, c in enumerate(horiz)}
    pos.update({("v", c): len(horiz) + i for i, c in enumerate(vert)})
    rel_cols = []
    for t in range(len(w.tiles)):
        s = tc.class_of(t, (2, 0))
        nn = tc.class_of(t, (2, 1))
        ww = tc.class_of(t, (0, 2))
        e = tc.class_of(t, (1, 2))
        col = [0] * n
        col[pos[("h", s)]] += 1
        col[pos[("v", e)]] += 1
        col[pos[("h", nn)]] -= 1
        col[pos[("v", ww)]] -= 1
        rel_cols.append(col)
    rel = [[rel_cols[c][i] for c in range(len(rel_cols))] for i in range(n)]
    sigma = [[1 if i < len(horiz) else 0 for i in range(n)], [1 if i >= len(horiz) else 0 for i in range(n)]]
    q = _kernel_mod_image(sigma, rel, n)
    return ConwayLagarias(q.group, horiz, vert, q, tc)


# ---------------------------------------------------------------------------
# radius-r complexes of an SFT


@dataclass(frozen=True, eq=False)
class RadiusComplex:
    spec: SftSpec
    r: int
    blocks: np.ndarray  # (ntiles, (2r+1)^D)
    complex: TileComplex

    def block_index(self) -> dict[bytes, int]:
        return {b.tobytes(): k for k, b in enumerate(np.ascontiguousarray(self.blocks))}


_CACHE: dict[tuple[int, int], RadiusComplex] = {}


def radius_complex(spec: SftSpec, r: int, budget: int = 200_000) -> RadiusComplex:
    key = (id(spec), r)
    hit = _CACHE.get(key)
    if hit is not None and hit.spec is spec:
        return hit
    tiles, blocks = wang_representation(spec, r, budget)
    tc = build_tile_complex(tiles, {"r": r, "sft": spec.name})
    rc = RadiusComplex(spec, r, np.ascontiguousarray(blocks), tc)
    _CACHE[key] = rc
    return rc


def invariant_cohomology(spec: SftSpec, r: int, d: int, G: FgAbelian | None = None, budget: int = 200_000) -> FgAbelian:
    """``H^d`` of the translation-quotient complex of the radius-``r`` Wang representation."""
    return tile_cohomology(radius_complex(spec, r, budget).complex, d, G if G is not None else Z())


# ---------------------------------------------------------------------------
# chain maps


@dataclass(frozen=True, eq=False)
class ChainMap:
    """Cellular map ``source -> target`` sending each ``d``-class to one class with coefficient 1."""

    source: TileComplex
    target: TileComplex
    maps: tuple[np.ndarray, ...]  # maps[d][source class] = target class
    name: str = ""

    def matrix(self, d: int) -> csr_matrix:
        m = self.maps[d]
        return coo_matrix((np.ones(len(m), dtype=np.int64), (m, np.arange(len(m)))),
                          shape=(len(self.target.cells[d]), len(self.source.cells[d]))).tocsr()

    def is_chain_map(self) -> bool:
        for d in range(1, self.source.D + 1):
            lhs = self.matrix(d - 1) @ self.source.boundaries[d]
            rhs = self.target.boundaries[d] @ self.matrix(d)
            if (lhs - rhs).count_nonzero():
                return False
        return True

    def compose(self, first: "ChainMap") -> "ChainMap":
        """``self o first``."""
        if first.target is not self.source:
            raise SpecMismatch("chain maps do not compose")
        return ChainMap(first.source, self.target, tuple(self.maps[d][first.maps[d]] for d in range(len(self.maps))),
                        f"{self.name}o{first.name}")

    def equals(self, other: "ChainMap") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(self.maps, other.maps))


def _tile_map(src: RadiusComplex, tgt: RadiusComplex, images: np.ndarray) -> ChainMap:
    idx = tgt.block_index()
    tmap = np.empty(len(images), dtype=np.int64)
    for k, b in enumerate(np.ascontiguousarray(images)):
        j = idx.get(b.tobytes())
        if j is None:
            raise SpecMismatch("image block is not admissible at the target radius")
        tmap[k] = j
    D = src.complex.D
    faces = _faces(D)
    dims = [sum(1 for x in c if x == 2) for c in faces]
    maps = []
    for d in range(D + 1):
        m = np.empty(len(src.complex.cells[d]), dtype=np.int64)
        for j, (t, face) in enumerate(src.complex.cells[d]):
            m[j] = tgt.complex.class_of(int(tmap[t]), face)
        maps.append(m)
    # every representative of a class must land in one class
    for t in range(len(tmap)):
        for f, c in enumerate(faces):
            if maps[dims[f]][src.complex.label[t, f]] != tgt.complex.label[tmap[t], f]:
                raise SpecMismatch("block map does not respect the gluing")
    cm = ChainMap(src.complex, tgt.complex, tuple(maps))
    if not cm.is_chain_map():
        raise NonzeroComposition("induced cellular map does not commute with the boundary")
    return cm


def _restrict(blocks: np.ndarray, D: int, r_from: int, r_to: int) -> np.ndarray:
    side = 2 * r_from + 1
    cubes = blocks.reshape((-1,) + (side,) * D)
    m = r_from - r_to
    sl = (slice(None),) + (slice(m, side - m),) * D
    return cubes[sl].reshape(len(blocks), -1)


def connecting_map(spec: SftSpec, r: int, budget: int = 200_000) -> ChainMap:
    """``zeta_r``: restriction of ``(r+1)``-blocks to their central ``r``-blocks."""
    src = radius_complex(spec, r + 1, budget)
    tgt = radius_complex(spec, r, budget)
    cm = _tile_map(src, tgt, _restrict(src.blocks, spec.D, r + 1, r))
    return ChainMap(cm.source, cm.target, cm.maps, f"zeta_{r}")


def identity_map(spec: SftSpec, r: int, budget: int = 200_000) -> ChainMap:
    rc = radius_complex(spec, r, budget)
    return ChainMap(rc.complex, rc.complex, tuple(np.arange(len(c), dtype=np.int64) for c in rc.complex.cells), "id")


def ca_chain_map(spec: SftSpec, ca: CaRule, r: int, budget: int = 200_000) -> ChainMap:
    """Block image: an ``(r+q)``-block goes to the ``r``-block ``Phi(block)``."""
    if ca.D != spec.D or ca.n != spec.n:
        raise SpecMismatch("CA does not act on this SFT's alphabet")
    q = ca.radius
    src = radius_complex(spec, r + q, budget)
    tgt = radius_complex(spec, r, budget)
    side = 2 * (r + q) + 1
    cubes = src.blocks.reshape((-1,) + (side,) * spec.D)
    imgs = np.stack([ca.apply_block(c).ravel() for c in cubes]) if len(cubes) else np.zeros((0, (2 * r + 1) ** spec.D), np.int64)
    cm = _tile_map(src, tgt, imgs)
    return ChainMap(cm.source, cm.target, cm.maps, f"Phi_{r}")


# ---------------------------------------------------------------------------
# induced maps on cohomology over Z/p


def _rref(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    A = np.mod(M.astype(np.int64), p)
    rows, cols = A.shape
    piv: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + nz[0]
        A[[r, k]] = A[[k, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        if len(others):
            A[others] = (A[others] - np.outer(A[others, c], A[r])) % p
        piv.append(c)
        r += 1
    return A[:r], piv


def _nullspace(M: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning ``{x : M x = 0}`` over ``Z/p``."""
    n = M.shape[1]
    R, piv = _rref(M, p) if M.shape[0] else (np.zeros((0, n), np.int64), [])
    free = [j for j in range(n) if j not in set(piv)]
    N = np.zeros((n, len(free)), dtype=np.int64)
    for k, f in enumerate(free):
        N[f, k] = 1
        for i, pc in enumerate(piv):
            N[pc, k] = (-R[i, f]) % p
    return N


def _colspace(M: np.ndarray, p: int) -> np.ndarray:
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=np.int64)
    R, _ = _rref(M.T, p)
    return R.T.copy()


@dataclass(frozen=True)
class CohomologyBasis:
    p: int
    B: np.ndarray  # coboundaries (columns)
    H: np.ndarray  # representatives of a basis of H^d (columns)

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    def coordinates(self, z: np.ndarray) -> np.ndarray:
        """Coordinates of cocycles (columns of ``z``) in the basis ``H``."""
        A = np.concatenate([self.B, self.H], axis=1)
        aug = np.concatenate([A, z.reshape(A.shape[0], -1)], axis=1)
        R, piv = _rref(aug, self.p)
        ncol = A.shape[1]
        if any(c >= ncol for c in piv):
            raise SpecMismatch("vector is not a cocycle")
        sol = np.zeros((ncol, aug.shape[1] - ncol), dtype=np.int64)
        for i, c in enumerate(piv):
            sol[c] = R[i, ncol:]
        return sol[self.B.shape[1]:] % self.p


def _prime_of(G: FgAbelian) -> int:
    from .groups import _is_prime

    if G.rank == 0 and len(G.torsion) == 1 and _is_prime(G.torsion[0]):
        return G.torsion[0]
    raise InvalidGroup("induced maps are computed over Z/p coefficients")


def cohomology_basis(tc: TileComplex, d: int, p: int) -> CohomologyBasis:
    n = len(tc.cells[d])
    delta_out = tc.boundaries[d + 1].T.toarray() if d + 1 <= tc.D else np.zeros((0, n), np.int64)
    delta_in = tc.boundaries[d].T.toarray() if d >= 1 else np.zeros((n, 0), np.int64)
    Zc = _nullspace(delta_out, p) if delta_out.shape[0] else np.eye(n, dtype=np.int64)
    B = _colspace(delta_in, p)
    cur = B
    rank = _rref(cur.T, p)[0].shape[0] if cur.size else 0
    H = []
    for k in range(Zc.shape[1]):
        trial = np.concatenate([cur, Zc[:, k:k + 1]], axis=1)
        rk = _rref(trial.T, p)[0].shape[0]
        if rk > rank:
            cur, rank = trial, rk
            H.append(Zc[:, k])
    Hm = np.stack(H, axis=1) if H else np.zeros((n, 0), dtype=np.int64)
    return CohomologyBasis(p, B, Hm)


def induced_map_on_cohomology(cm: ChainMap, d: int, G: FgAbelian) -> np.ndarray:
    """Matrix of ``cm^*: H^d(target; Z/p) -> H^d(source; Z/p)`` in the bases of :func:`cohomology_basis`."""
    p = _prime_of(G)
    bt = cohomology_basis(cm.target, d, p)
    bs = cohomology_basis(cm.source, d, p)
    if bt.dim == 0:
        return np.zeros((bs.dim, 0), dtype=np.int64)
    pulled = bt.H[cm.maps[d]]  # (f^* h)(cell) = h(f(cell))
    if bs.dim == 0:
        return np.zeros((0, bt.dim), dtype=np.int64)
    return bs.coordinates(pulled)


def rank_mod(M: np.ndarray, p: int) -> int:
    return _rref(M, p)[0].shape[0] if M.size else 0


def ca_induced_map(spec: SftSpec, ca: CaRule, r: int, d: int, G: FgAbelian, budget: int = 200_000) -> np.ndarray:
    return induced_map_on_cohomology(ca_chain_map(spec, ca, r, budget), d, G)


@dataclass(frozen=True)
class LadderCheck:
    chain_maps_ok: bool
    chain_identity: bool  # zeta_r o Phi_{r+1} == Phi_r o zeta_{r+q}
    cohomology_identity: bool | None


def ladder_check(spec: SftSpec, ca: CaRule, r: int, d: int | None = None, G: FgAbelian | None = None,
                 budget: int = 200_000) -> LadderCheck:
    """Commuting square of connecting maps and CA-induced maps at the chain level (and on ``H^d`` if asked)."""
    q = ca.radius
    phi_hi = ca_chain_map(spec, ca, r + 1, budget)  # X_{r+1+q} -> X_{r+1}
    zeta_lo = connecting_map(spec, r, budget)  # X_{r+1} -> X_r
    zeta_src = _chain_restriction(spec, r + 1 + q, r + q, budget)  # X_{r+1+q} -> X_{r+q}
    phi_lo = ca_chain_map(spec, ca, r, budget)  # X_{r+q} -> X_r
    ok = all(m.is_chain_map() for m in (phi_hi, zeta_lo, zeta_src, phi_lo))
    left = zeta_lo.compose(phi_hi)
    right = phi_lo.compose(zeta_src)
    chain_eq = left.equals(right)
    coh = None
    if d is not None and G is not None:
        a = induced_map_on_cohomology(left, d, G)
        b = induced_map_on_cohomology(right, d, G)
        coh = bool(np.array_equal(a % G.torsion[0], b % G.torsion[0]))
    return LadderCheck(ok, chain_eq, coh)


def _chain_restriction(spec: SftSpec, r_from: int, r_to: int, budget: int) -> ChainMap:
    if r_from == r_to:
        return identity_map(spec, r_from, budget)
    src = radius_complex(spec, r_from, budget)
    tgt = radius_complex(spec, r_to, budget)
    return _tile_map(src, tgt, _restrict(src.blocks, spec.D, r_from, r_to))


@dataclass(frozen=True)
class ScanRow:
    r: int
    group: FgAbelian | None
    map_rank: int | None  # rank of zeta_{r-1}^* : H^d(X_{r-1}) -> H^d(X_r)
    isomorphism: bool | None
    status: str  # ok | budget

    def to_json(self) -> dict:
        return {"r": self.r, "group": str(self.group) if self.group is not None else None,
                "map_rank": self.map_rank, "isomorphism": self.isomorphism, "status": self.status}


def stabilization_scan(spec: SftSpec, d: int, G: FgAbelian, r_min: int, r_max: int, budget: int = 200_000) -> list[ScanRow]:
    """Groups ``H^d(X_r; G)`` and ranks of the maps between consecutive radii.

    Stable isomorphisms over a finite range are evidence, not a certificate, for
    the limit.  Radii past the block budget are reported with status ``budget``.
    """
    p = _prime_of(G)
    rows: list[ScanRow] = []
    for r in range(r_min, r_max + 1):
        try:
            grp = invariant_cohomology(spec, r, d, G, budget)
            rank = iso = None
            if r > r_min and rows[-1].status == "ok":
                M = induced_map_on_cohomology(connecting_map(spec, r - 1, budget), d, G)
                rank = rank_mod(M, p)
                iso = M.shape[0] == M.shape[1] == rank
            rows.append(ScanRow(r, grp, rank, iso, "ok"))
        except BudgetExceeded:
            rows.append(ScanRow(r, None, None, None, "budget"))
    return rows


@dataclass(frozen=True)
class InducedMapReport:
    matrix: np.ndarray  # columns: basis of H^d(X_r), rows: basis of H^d(source)
    p: int
    rank: int
    injective: bool
    surjective: bool  # onto H^d of the source radius

    def to_json(self) -> dict:
        return {"p": self.p, "rank": self.rank, "injective": self.injective, "surjective": self.surjective,
                "matrix": self.matrix.tolist()}


def induced_map_report(cm: ChainMap, d: int, G: FgAbelian) -> InducedMapReport:
    p = _prime_of(G)
    M = induced_map_on_cohomology(cm, d, G) % p
    rk = rank_mod(M, p)
    return InducedMapReport(M, p, rk, rk == M.shape[1], rk == M.shape[0])
