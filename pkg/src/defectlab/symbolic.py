"""Alphabets, subshifts of finite type, Wang tile sets, windowed configurations, defect fields.

Two SFT presentations are supported:

``pairs``
    Nearest-neighbour rules: an allowed-symbol set and, per axis, the allowed
    ordered pairs ``(a_z, a_{z+e_i})``.  Radius 1 (radius 0 when every pair is
    allowed).  Wang tile sets compile to this form.
``blocks``
    An explicit list of admissible ``(2R+1)^D`` blocks.  Blocks of radius ``r < R``
    are admissible iff they are central sub-blocks of an admissible ``R``-block;
    blocks of radius ``r >= R`` iff every ``R``-sub-block is admissible.

Under both semantics the defect field obeys ``F(z) = R - 1 + d(z, X)`` off the
set ``X`` of sites whose ``R``-ball is inadmissible (l-infinity distance).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import BudgetExceeded, OutOfWindow, RadiusTooSmall, SpecMismatch, WindowTooSmall
from .lattice import Site, add, connected_components, unit

# ---------------------------------------------------------------------------
# tile sets and SFTs


@dataclass(frozen=True)
class WangTileSet:
    """Tiles with one matching relation per axis: ``(a, b) in match[i]`` iff ``b`` may sit at ``+e_i`` of ``a``."""

    D: int
    tiles: tuple[str, ...]
    match: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(self.tiles))
        object.__setattr__(self, "match", tuple(frozenset((int(a), int(b)) for a, b in m) for m in self.match))
        if len(self.match) != self.D:
            raise SpecMismatch("one match relation per axis")
        if any(not m for m in self.match):
            raise SpecMismatch("empty match relation")

    def dead_tiles(self) -> list[int]:
        """Tiles that lack a partner in some axis direction."""
        out = []
        for t in range(len(self.tiles)):
            for m in self.match:
                if not any(a == t for a, _ in m) or not any(b == t for _, b in m):
                    out.append(t)
                    break
        return out


@dataclass(frozen=True)
class SftSpec:
    D: int
    alphabet: tuple[str, ...]
    radius: int
    kind: str = "pairs"
    allowed: frozenset = frozenset()
    pairs: tuple[frozenset, ...] = ()
    blocks: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("pairs", "blocks"):
            raise SpecMismatch(f"unknown SFT kind {self.kind}")
        if self.kind == "pairs":
            if len(self.pairs) != self.D:
                raise SpecMismatch("one pair relation per axis")
            if not self.allowed:
                object.__setattr__(self, "allowed", frozenset(range(len(self.alphabet))))
        elif not self.blocks:
            raise SpecMismatch("blocks SFT needs at least one admissible block")

    @property
    def n(self) -> int:
        return len(self.alphabet)

    # lookup tables (cached on the instance; the dataclass stays hashable)
    @cached_property
    def allowed_mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        if self.kind == "pairs":
            m[list(self.allowed)] = True
        else:
            for b in self.blocks:
                m[list(set(b))] = True
        return m

    @cached_property
    def pair_tables(self) -> list[np.ndarray]:
        out = []
        for rel in self.pairs:
            t = np.zeros((self.n, self.n), dtype=bool)
            if rel:
                a, b = zip(*rel)
                t[list(a), list(b)] = True
            out.append(t)
        return out

    @cached_property
    def successors(self) -> list[list[frozenset]]:
        out = []
        for rel in self.pairs:
            s: list[set] = [set() for _ in range(self.n)]
            for a, b in rel:
                s[a].add(b)
            out.append([frozenset(x) for x in s])
        return out

    @cached_property
    def predecessors(self) -> list[list[frozenset]]:
        out = []
        for rel in self.pairs:
            s: list[set] = [set() for _ in range(self.n)]
            for a, b in rel:
                s[b].add(a)
            out.append([frozenset(x) for x in s])
        return out

    @cached_property
    def block_shape(self) -> tuple[int, ...]:
        return (2 * self.radius + 1,) * self.D

    @cached_property
    def sub_admissible(self) -> dict[int, frozenset]:
        """Central sub-blocks of radius ``r < R`` (flattened C-order tuples)."""
        out = {}
        R = self.radius
        for r in range(R):
            sl = tuple(slice(R - r, R + r + 1) for _ in range(self.D))
            out[r] = frozenset(
                tuple(np.asarray(b).reshape(self.block_shape)[sl].ravel().tolist()) for b in self.blocks
            )
        return out

    def symbol(self, name: str) -> int:
        return self.alphabet.index(name)


def wang_to_sft(w: WangTileSet, name: str = "") -> SftSpec:
    full = all(len(m) == len(w.tiles) ** 2 for m in w.match)
    return SftSpec(w.D, w.tiles, 0 if full else 1, "pairs", frozenset(range(len(w.tiles))), w.match, name=name)


def full_shift(n: int, D: int, name: str = "") -> SftSpec:
    rel = frozenset(itertools.product(range(n), repeat=2))
    return SftSpec(D, tuple(str(i) for i in range(n)), 0, "pairs", frozenset(range(n)), (rel,) * D, name=name)


def blocks_sft(D: int, alphabet: Sequence[str], R: int, blocks: Iterable[Sequence[int]], name: str = "") -> SftSpec:
    bl = frozenset(tuple(int(x) for x in np.asarray(b).ravel()) for b in blocks)
    size = (2 * R + 1) ** D
    if any(len(b) != size for b in bl):
        raise SpecMismatch(f"blocks must have {size} cells")
    return SftSpec(D, tuple(alphabet), R, "blocks", blocks=bl, name=name)


def block_ok(spec: SftSpec, block: np.ndarray) -> bool:
    """Membership of a ``(2r+1)^D`` block in ``A_(r)``."""
    b = np.asarray(block)
    if b.ndim != spec.D or len(set(b.shape)) != 1 or b.shape[0] % 2 == 0:
        raise SpecMismatch(f"block shape {b.shape} is not a D-cube of odd side")
    r = b.shape[0] // 2
    if b.min() < 0 or b.max() >= spec.n:
        return False
    if spec.kind == "pairs":
        if not spec.allowed_mask[b].all():
            return False
        for i, t in enumerate(spec.pair_tables):
            lo = np.take(b, range(0, b.shape[i] - 1), axis=i)
            hi = np.take(b, range(1, b.shape[i]), axis=i)
            if not t[lo, hi].all():
                return False
        return True
    R = spec.radius
    if r < R:
        return tuple(b.ravel().tolist()) in spec.sub_admissible[r]
    w = np.lib.stride_tricks.sliding_window_view(b, spec.block_shape)
    return all(tuple(w[idx].ravel().tolist()) in spec.blocks for idx in np.ndindex(w.shape[: spec.D]))


sft_admissibility_check = block_ok


def patch_ok(spec: SftSpec, patch: np.ndarray) -> bool:
    """Local admissibility of a box of any shape: no forbidden symbol, pair or fully contained ``R``-block."""
    b = np.asarray(patch)
    if b.ndim != spec.D:
        raise SpecMismatch("patch dimension differs from the SFT")
    if b.size == 0:
        return True
    if b.min() < 0 or b.max() >= spec.n:
        return False
    if spec.kind == "pairs":
        if not spec.allowed_mask[b].all():
            return False
        return all(
            bool(t[np.take(b, range(0, b.shape[i] - 1), axis=i), np.take(b, range(1, b.shape[i]), axis=i)].all())
            for i, t in enumerate(spec.pair_tables)
        )
    if any(s < k for s, k in zip(b.shape, spec.block_shape)):
        return True
    w = np.lib.stride_tricks.sliding_window_view(b, spec.block_shape)
    return all(tuple(w[idx].ravel().tolist()) in spec.blocks for idx in np.ndindex(w.shape[: spec.D]))


def enumerate_patches(spec: SftSpec, offsets: Sequence[Sequence[int]], limit: int | None = None) -> np.ndarray:
    """All locally admissible fillings of a finite site set, shape ``(count, len(offsets))``.

    ``pairs`` specs: allowed symbols, every adjacent pair inside the set matches.
    ``blocks`` specs: every ``R``-ball inside the set is admissible.
    """
    offs = [tuple(o) for o in offsets]
    index = {o: k for k, o in enumerate(offs)}
    if len(index) != len(offs):
        raise SpecMismatch("repeated offsets")
    D = spec.D
    out: list[list[int]] = []
    cur = [0] * len(offs)
    allowed = [a for a in range(spec.n) if spec.allowed_mask[a]]

    if spec.kind == "pairs":
        # constraints from earlier positions only
        cons: list[list[tuple[int, int, bool]]] = []
        for k, o in enumerate(offs):
            c = []
            for i in range(D):
                for s in (1, -1):
                    j = index.get(add(o, unit(D, i, s)))
                    if j is not None and j < k:
                        c.append((j, i, s < 0))  # s<0: earlier site is the lower one
            cons.append(c)

        def rec(k: int) -> None:
            if limit is not None and len(out) >= limit:
                return
            if k == len(offs):
                out.append(cur.copy())
                return
            cands = None
            for j, i, earlier_low in cons[k]:
                s = spec.successors[i][cur[j]] if earlier_low else spec.predecessors[i][cur[j]]
                cands = s if cands is None else cands & s
                if not cands:
                    return
            for a in sorted(cands) if cands is not None else allowed:
                if spec.allowed_mask[a]:
                    cur[k] = a
                    rec(k + 1)

        rec(0)
    else:
        R = spec.radius
        ball = list(itertools.product(range(-R, R + 1), repeat=D))
        checks: list[list[list[int]]] = [[] for _ in offs]
        for o in offs:
            members = [index.get(add(o, b)) for b in ball]
            if all(m is not None for m in members):
                checks[max(members)].append(members)

        def rec(k: int) -> None:
            if limit is not None and len(out) >= limit:
                return
            if k == len(offs):
                out.append(cur.copy())
                return
            for a in allowed:
                cur[k] = a
                if all(tuple(cur[m] for m in mem) in spec.blocks for mem in checks[k]):
                    rec(k + 1)

        rec(0)
    return np.array(out, dtype=np.int64).reshape(len(out), len(offs))


def box_offsets(D: int, lo: Sequence[int], hi: Sequence[int]) -> list[Site]:
    """Sites of ``[lo..hi]`` (inclusive) in C order (last axis fastest)."""
    return [tuple(p) for p in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])]


def admissible_blocks(spec: SftSpec, r: int) -> np.ndarray:
    """``A_(r)`` as an array ``(count, (2r+1)^D)`` (C-order flattening)."""
    if spec.kind == "blocks" and r < spec.radius:
        return np.array(sorted(spec.sub_admissible[r]), dtype=np.int64).reshape(-1, (2 * r + 1) ** spec.D)
    return enumerate_patches(spec, box_offsets(spec.D, (-r,) * spec.D, (r,) * spec.D))


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True, eq=False)
class Configuration:
    """Symbols on a rectangular window; ``cells[i0, i1, ...]`` sits at ``origin + (i0, i1, ...)``."""

    cells: np.ndarray
    origin: Site | None = None
    periodic: bool = False

    def __post_init__(self):
        c = np.array(self.cells, dtype=np.int64)
        if c.ndim < 1 or c.size == 0:
            raise WindowTooSmall("empty window")
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)
        o = tuple(int(x) for x in (self.origin if self.origin is not None else (0,) * c.ndim))
        if len(o) != c.ndim:
            raise SpecMismatch("origin dimension mismatch")
        object.__setattr__(self, "origin", o)

    @classmethod
    def from_function(cls, lo: Sequence[int], hi: Sequence[int], f, periodic: bool = False) -> "Configuration":
        """Window ``[lo..hi]`` (inclusive) filled by ``f(site)``."""
        shape = tuple(b - a + 1 for a, b in zip(lo, hi))
        arr = np.empty(shape, dtype=np.int64)
        for idx in np.ndindex(shape):
            arr[idx] = f(add(lo, idx))
        return cls(arr, tuple(lo), periodic)

    @property
    def D(self) -> int:
        return self.cells.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells.shape

    @property
    def lo(self) -> Site:
        return self.origin

    @property
    def hi(self) -> Site:
        return tuple(o + s - 1 for o, s in zip(self.origin, self.shape))

    def contains(self, z: Sequence[int]) -> bool:
        return self.periodic or all(o <= x < o + s for x, o, s in zip(z, self.origin, self.shape))

    def index(self, z: Sequence[int]) -> tuple[int, ...]:
        idx = tuple(x - o for x, o in zip(z, self.origin))
        if self.periodic:
            return tuple(i % s for i, s in zip(idx, self.shape))
        if any(not 0 <= i < s for i, s in zip(idx, self.shape)):
            raise OutOfWindow(f"{tuple(z)} outside window", site=tuple(z))
        return idx

    def __getitem__(self, z: Sequence[int]) -> int:
        return int(self.cells[self.index(z)])

    def block(self, center: Sequence[int], r: int) -> np.ndarray:
        return self.box(tuple(c - r for c in center), tuple(c + r for c in center))

    def box(self, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
        """Sub-array on ``[lo..hi]`` (inclusive)."""
        if self.periodic:
            idx = [np.arange(a - o, b - o + 1) % s for a, b, o, s in zip(lo, hi, self.origin, self.shape)]
            return self.cells[np.ix_(*idx)]
        self.index(lo)
        self.index(hi)
        sl = tuple(slice(a - o, b - o + 1) for a, b, o in zip(lo, hi, self.origin))
        return self.cells[sl]

    def sites(self) -> list[Site]:
        return [add(self.origin, idx) for idx in np.ndindex(self.shape)]

    def with_cells(self, cells: np.ndarray, origin: Sequence[int] | None = None) -> "Configuration":
        return Configuration(cells, tuple(origin) if origin is not None else self.origin, self.periodic)

    def replace(self, changes: dict) -> "Configuration":
        c = self.cells.copy()
        for z, v in changes.items():
            c[self.index(z)] = v
        return self.with_cells(c)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Configuration)
            and self.origin == other.origin
            and self.periodic == other.periodic
            and self.cells.shape == other.cells.shape
            and bool((self.cells == other.cells).all())
        )

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# defect field


@dataclass(frozen=True, eq=False)
class DefectField:
    """Per-site ``F`` on the window.

    ``values[idx] = -1`` when not even the single symbol is admissible.
    ``window_bound[idx]`` marks lower bounds: the true value is at least ``values[idx]``.
    ``violations`` is the set ``X`` of sites whose ``R``-ball is inadmissible whatever lies outside the window.
    """

    values: np.ndarray
    window_bound: np.ndarray
    violations: np.ndarray
    origin: Site
    R: int

    def at(self, z: Sequence[int]) -> tuple[int, bool]:
        idx = tuple(x - o for x, o in zip(z, self.origin))
        if any(not 0 <= i < s for i, s in zip(idx, self.values.shape)):
            raise OutOfWindow(f"{tuple(z)} outside window")
        return int(self.values[idx]), bool(self.window_bound[idx])

    def site_set(self, mask: np.ndarray) -> frozenset:
        return frozenset(add(self.origin, tuple(int(i) for i in idx)) for idx in np.argwhere(mask))

    @property
    def defect_sites(self) -> frozenset:
        return self.site_set(self.violations)

    def unflawed_mask(self, r: int) -> np.ndarray:
        return (self.values >= r) | self.window_bound


def _ball_footprint(D: int, r: int) -> np.ndarray:
    return np.ones((2 * r + 1,) * D, dtype=bool)


def _bad_balls_pairs(spec: SftSpec, arr: np.ndarray) -> np.ndarray:
    """Sites whose ``R``-ball (unclipped) contains a forbidden symbol or pair; R in {0, 1}."""
    D = arr.ndim
    safe = np.clip(arr, 0, spec.n - 1)
    bad_sym = ~spec.allowed_mask[safe] | (arr < 0) | (arr >= spec.n)
    if spec.radius == 0:
        return bad_sym
    out = ndimage.maximum_filter(bad_sym, footprint=_ball_footprint(D, 1), mode="constant", cval=False)
    for i, t in enumerate(spec.pair_tables):
        lo = np.take(safe, range(arr.shape[i] - 1), axis=i)
        hi = np.take(safe, range(1, arr.shape[i]), axis=i)
        bp = ~t[lo, hi]
        # pair (u, u+e_i) lies in B(z,1) iff u_i in {z_i-1, z_i} and |u_j - z_j| <= 1 otherwise
        pad_a = [(0, 0)] * D
        pad_a[i] = (0, 1)
        pad_b = [(0, 0)] * D
        pad_b[i] = (1, 0)
        hit = np.pad(bp, pad_a) | np.pad(bp, pad_b)
        size = [3] * D
        size[i] = 1
        out |= ndimage.maximum_filter(hit, size=size, mode="constant", cval=False)
    return out


def _bad_balls_blocks(spec: SftSpec, arr: np.ndarray, inner: np.ndarray) -> np.ndarray:
    R = spec.radius
    out = np.zeros(arr.shape, dtype=bool)
    if not inner.any():
        return out
    w = np.lib.stride_tricks.sliding_window_view(arr, spec.block_shape)
    for idx in np.argwhere(inner):
        widx = tuple(int(i) - R for i in idx)
        out[tuple(idx)] = tuple(w[widx].ravel().tolist()) not in spec.blocks
    return out


def _small_r_value(spec: SftSpec, arr: np.ndarray, idx: tuple[int, ...], rmax: int) -> int:
    """Largest ``r <= rmax`` with the ``r``-ball admissible, by direct checks; -1 if none."""
    best = -1
    for r in range(rmax + 1):
        sl = tuple(slice(i - r, i + r + 1) for i in idx)
        if block_ok(spec, arr[sl]):
            best = r
        else:
            break
    return best


def defect_field(cfg: Configuration, spec: SftSpec) -> DefectField:
    if cfg.D != spec.D:
        raise SpecMismatch(f"configuration D={cfg.D}, SFT D={spec.D}")
    R = spec.radius
    if cfg.periodic:
        big = np.tile(cfg.cells, (3,) * cfg.D)
        cap = (min(cfg.shape) - 1) // 2
        off = cfg.shape
    else:
        big = cfg.cells
        cap = None
        off = (0,) * cfg.D
    shape = big.shape
    grids = np.indices(shape)
    rfit = np.min([np.minimum(g, s - 1 - g) for g, s in zip(grids, shape)], axis=0)
    if cap is not None:
        rfit = np.minimum(rfit, cap)
    if cap is None and rfit.max() < R:
        raise WindowTooSmall(f"no {2 * R + 1}-ball fits in window {shape}")
    if cap is not None and cap < R:
        raise WindowTooSmall(f"period too small for radius {R}")
    inner = rfit >= R
    if spec.kind == "pairs":
        # a violation seen inside a clipped ball condemns every extension
        X = _bad_balls_pairs(spec, big)
    else:
        X = _bad_balls_blocks(spec, big, inner)
    if X.any():
        dist = ndimage.distance_transform_cdt(~X, metric="chessboard").astype(np.int64)
    else:
        dist = np.full(shape, np.iinfo(np.int64).max // 4, dtype=np.int64)
    glued = R - 1 + dist
    values = np.minimum(glued, rfit)
    wb = glued >= rfit
    # violation sites and thin margins: direct checks below R
    for idx in map(tuple, np.argwhere(X | ~inner)):
        if cap is not None and not all(o <= i < o + s for i, o, s in zip(idx, off, cfg.shape)):
            continue
        lim = min(R - 1, int(rfit[idx])) if X[idx] else int(rfit[idx])
        v = _small_r_value(spec, big, idx, lim)
        values[idx] = v
        wb[idx] = (not X[idx]) and v == int(rfit[idx])
    sl = tuple(slice(o, o + s) for o, s in zip(off, cfg.shape))
    return DefectField(values[sl].copy(), wb[sl].copy(), X[sl].copy(), cfg.origin, R)


def mismatch_sites(cfg: Configuration, spec: SftSpec) -> frozenset:
    """Sites carrying a forbidden symbol or an endpoint of a forbidden adjacent pair (``pairs`` specs)."""
    if spec.kind != "pairs":
        raise SpecMismatch("mismatch sites are defined for nearest-neighbour rules")
    arr = cfg.cells
    out: set = set()
    safe = np.clip(arr, 0, spec.n - 1)
    bad = ~spec.allowed_mask[safe] | (arr < 0) | (arr >= spec.n)
    out |= {add(cfg.origin, tuple(map(int, i))) for i in np.argwhere(bad)}
    for i, t in enumerate(spec.pair_tables):
        lo = np.take(safe, range(arr.shape[i] - 1), axis=i)
        hi = np.take(safe, range(1, arr.shape[i]), axis=i)
        for idx in np.argwhere(~t[lo, hi]):
            z = add(cfg.origin, tuple(map(int, idx)))
            out.add(z)
            out.add(add(z, unit(cfg.D, i)))
    return frozenset(out)


# ---------------------------------------------------------------------------
# regions and classification


@dataclass(frozen=True)
class Region:
    sites: frozenset
    label: str  # "unflawed" or "defect"
    r: int


def defect_region(cfg: Configuration, spec: SftSpec, r: int, fld: DefectField | None = None) -> tuple[Region, Region]:
    """``(G_r, D)``: sites with ``F >= r`` (window-bound sites included) and the violation set."""
    fld = fld or defect_field(cfg, spec)
    return Region(fld.site_set(fld.unflawed_mask(r)), "unflawed", r), Region(fld.defect_sites, "defect", r)


@dataclass(frozen=True)
class Classification:
    kind: str  # none | domain-boundary | codimension-2 | mixed | unresolved | other
    components: tuple[frozenset, ...]
    projective: tuple[int, ...]  # indices into components
    holes: tuple[frozenset, ...]
    r: int

    @property
    def n_projective(self) -> int:
        return len(self.projective)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "r": self.r,
            "components": len(self.components),
            "projective_components": len(self.projective),
            "holes": len(self.holes),
            "hole_sizes": [len(h) for h in self.holes],
        }


def classify_defect(cfg: Configuration, spec: SftSpec, r: int, fld: DefectField | None = None) -> Classification:
    """Window-relative codimension classification of the defects in ``cfg``.

    A component of ``G_r`` counts as projective when it reaches the window edge
    (it contains window-bound sites).  Holes are bounded complementary components
    of ``G_r`` (l-infinity connected, not touching the window edge).
    """
    if cfg.D not in (2, 3):
        raise SpecMismatch("classification supports D = 2 and D = 3")
    fld = fld or defect_field(cfg, spec)
    G = fld.unflawed_mask(r)
    if not fld.violations.any() and G.all():
        return Classification("none", (), (), (), r)
    lab, n = ndimage.label(G)
    comps, proj = [], []
    edge = np.zeros(G.shape, dtype=bool)
    for i in range(G.ndim):
        edge[(slice(None),) * i + (0,)] = True
        edge[(slice(None),) * i + (-1,)] = True
    border_labels = set(np.unique(lab[edge & G]).tolist()) - {0}
    order = sorted(range(1, n + 1), key=lambda k: tuple(np.argwhere(lab == k)[0]))
    for k in order:
        if k in border_labels:
            proj.append(len(comps))
        comps.append(fld.site_set(lab == k))
    clab, cn = ndimage.label(~G, structure=np.ones((3,) * G.ndim, bool))
    touching = set(np.unique(clab[edge & ~G]).tolist()) - {0}
    holes = tuple(fld.site_set(clab == k) for k in range(1, cn + 1) if k not in touching)
    holes = tuple(sorted(holes, key=min))
    if cfg.D == 3:
        kind = "domain-boundary" if len(proj) >= 2 else "other"
    elif len(proj) >= 2 and holes:
        kind = "mixed"
    elif len(proj) >= 2:
        kind = "domain-boundary"
    elif holes:
        kind = "codimension-2"
    else:
        kind = "unresolved"
    return Classification(kind, tuple(comps), tuple(proj), holes, r)


# ---------------------------------------------------------------------------
# block recoding


def recode_spec(spec: SftSpec, k: int) -> SftSpec:
    """``k^D`` block recoding of a nearest-neighbour SFT.

    Symbols are all ``n^(k^D)`` patterns, numbered base ``n`` in C order; the
    allowed ones are the internally admissible patterns, and two allowed
    patterns match along axis ``i`` iff their facing layers match.
    """
    if spec.kind != "pairs":
        raise SpecMismatch("recoding implemented for nearest-neighbour SFTs")
    if k == 1:
        return spec
    D, n = spec.D, spec.n
    cells = k**D
    if n**cells > 2_000_000:
        raise SpecMismatch(f"recoded alphabet {n}^{cells} too large")
    pats = enumerate_patches(spec, box_offsets(D, (0,) * D, (k - 1,) * D))
    weights = n ** np.arange(cells - 1, -1, -1)
    codes = (pats * weights).sum(axis=1)
    names = tuple(".".join(map(str, np.unravel_index(c, (n,) * cells))) for c in range(n**cells))
    blocks = pats.reshape((-1,) + (k,) * D)
    pairs = []
    for i in range(D):
        first = np.take(blocks, 0, axis=1 + i).reshape(len(blocks), -1)
        last = np.take(blocks, k - 1, axis=1 + i).reshape(len(blocks), -1)
        t = spec.pair_tables[i]
        ok = t[last[:, None, :], first[None, :, :]].all(axis=2)
        a, b = np.nonzero(ok)
        pairs.append(frozenset(zip(codes[a].tolist(), codes[b].tolist())))
    return SftSpec(D, names, 1, "pairs", frozenset(codes.tolist()), tuple(pairs), name=f"{spec.name}^[{k}]")


def recode_config(cfg: Configuration, spec: SftSpec, k: int) -> Configuration:
    """Recoded window: site ``w`` carries the pattern on ``k*w + [0..k-1]^D``."""
    if k == 1:
        return cfg
    D, n = cfg.D, spec.n
    lo = [-(-o // k) for o in cfg.origin]
    hi = [(h + 1) // k - 1 for h in cfg.hi]
    if any(b < a for a, b in zip(lo, hi)):
        raise WindowTooSmall("window smaller than one recoding block")
    shape = tuple(b - a + 1 for a, b in zip(lo, hi))
    start = tuple(k * a - o for a, o in zip(lo, cfg.origin))
    sub = cfg.cells[tuple(slice(s, s + k * m) for s, m in zip(start, shape))]
    # (m0, k, m1, k, ...) -> (m0, m1, ..., k, k, ...)
    r = sub.reshape(tuple(x for m in shape for x in (m, k)))
    perm = list(range(0, 2 * D, 2)) + list(range(1, 2 * D, 2))
    r = r.transpose(perm).reshape(shape + (k**D,))
    weights = n ** np.arange(k**D - 1, -1, -1)
    return Configuration((r * weights).sum(axis=-1), tuple(lo), cfg.periodic and all(s % k == 0 for s in cfg.shape))


def decode_symbol(spec: SftSpec, k: int, code: int) -> np.ndarray:
    return np.array(np.unravel_index(int(code), (spec.n,) * (k**spec.D))).reshape((k,) * spec.D)


# ---------------------------------------------------------------------------
# Wang representation


def wang_representation(spec: SftSpec, r: int, budget: int | None = None) -> tuple[WangTileSet, np.ndarray]:
    """Tiles are the admissible ``r``-blocks; ``a`` matches ``b`` along axis ``i`` when their overlaps agree.

    Returns the tile set and the ``(count, (2r+1)^D)`` block array indexing it.
    For a nearest-neighbour (``pairs``) SFT, ``r = 0`` gives the allowed symbols
    glued by the allowed pairs.  More than ``budget`` blocks raises
    :class:`BudgetExceeded`.
    """
    if r == 0 and spec.kind == "pairs":
        syms = sorted(a for a in range(spec.n) if spec.allowed_mask[a])
        idx = {a: k for k, a in enumerate(syms)}
        match = tuple(frozenset((idx[a], idx[b]) for a, b in rel if a in idx and b in idx) for rel in spec.pairs)
        return WangTileSet(spec.D, tuple(spec.alphabet[a] for a in syms), match), np.asarray(syms, dtype=np.int64)[:, None]
    if r < spec.radius:
        raise RadiusTooSmall(f"r={r} below SFT radius {spec.radius}")
    if budget is None:
        blocks = admissible_blocks(spec, r)
    else:
        blocks = enumerate_patches(spec, box_offsets(spec.D, (-r,) * spec.D, (r,) * spec.D), limit=budget + 1)
        if len(blocks) > budget:
            raise BudgetExceeded(f"more than {budget} admissible {r}-blocks", r=r, budget=budget)
    side = 2 * r + 1
    cubes = blocks.reshape((-1,) + (side,) * spec.D)
    match = []
    for i in range(spec.D):
        hi_part = np.take(cubes, range(1, side), axis=1 + i).reshape(len(cubes), -1)
        lo_part = np.take(cubes, range(0, side - 1), axis=1 + i).reshape(len(cubes), -1)
        groups: dict[bytes, list[int]] = {}
        for t in range(len(cubes)):
            groups.setdefault(lo_part[t].tobytes(), []).append(t)
        rel = set()
        for a in range(len(cubes)):
            for b in groups.get(hi_part[a].tobytes(), ()):
                rel.add((a, b))
        match.append(frozenset(rel))
    names = tuple("".join(spec.alphabet[x] if len(spec.alphabet[x]) == 1 else f"[{spec.alphabet[x]}]" for x in b) for b in blocks)
    return WangTileSet(spec.D, names, tuple(match)), blocks


# ---------------------------------------------------------------------------
# rendering


def render_ascii(fld: DefectField) -> str:
    """2D map, north up: digits (capped at 9), ``#`` on the defect set, ``·`` where only a lower bound is known."""
    if fld.values.ndim != 2:
        raise SpecMismatch("ASCII maps are planar")
    W, H = fld.values.shape
    lines = []
    for y in range(H - 1, -1, -1):
        row = []
        for x in range(W):
            if fld.violations[x, y]:
                row.append("#")
            elif fld.window_bound[x, y]:
                row.append("·")
            else:
                v = int(fld.values[x, y])
                row.append("#" if v < 0 else str(min(v, 9)))
        lines.append("".join(row))
    return "\n".join(lines)


def components_of(sites: Iterable[Site]) -> list[frozenset]:
    return connected_components(sites)
