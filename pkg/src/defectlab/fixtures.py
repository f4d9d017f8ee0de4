"""Bundled tile sets, cocycles and defect configurations.

Tile sets
    ``ice``: six 2-in/2-out vertex tiles (arrows cross tile sides).
    ``dominoes``: half-domino tiles L, R, B, T.
    ``paths``: 21 path tiles with sides coloured blank / blue / red.
    ``ice-cubes-3d``: 20 cubes, each with three outward pins among its six faces.
    ``golden-mean``: the one-dimensional shift without ``11``.

Configurations reproduce the standard gap, pole and shell examples for these
tile sets; every fixture carries the reference sites and loops its analyses use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .automaton import CaRule, identity_ca, shift_ca, symbol_map_ca
from .cocycles import CocycleRule, EquivariantCochainRule, TileRule
from .errors import SchemaError
from .groups import FreeProductZ2Z2, Z, ZMod
from .symbolic import Configuration, SftSpec, WangTileSet, wang_to_sft

# ---------------------------------------------------------------------------
# square ice

# (n, e, s, w) with 1 = arrow points out of the tile
ICE_FLAGS: tuple[tuple[int, int, int, int], ...] = tuple(
    f for f in itertools.product((1, 0), repeat=4) if sum(f) == 2
)
_SIDE = "NESW"


def _ice_name(f) -> str:
    return "".join(c for c, x in zip(_SIDE, f) if x)


ICE_NAMES = tuple(_ice_name(f) for f in ICE_FLAGS)


def ice_index(n: int, e: int, s: int, w: int) -> int:
    return ICE_FLAGS.index((n, e, s, w))


@lru_cache(maxsize=None)
def ice_tiles() -> WangTileSet:
    m0 = {(a, b) for a, fa in enumerate(ICE_FLAGS) for b, fb in enumerate(ICE_FLAGS) if fa[1] != fb[3]}
    m1 = {(a, b) for a, fa in enumerate(ICE_FLAGS) for b, fb in enumerate(ICE_FLAGS) if fa[0] != fb[2]}
    return WangTileSet(2, ICE_NAMES, (frozenset(m0), frozenset(m1)))


@lru_cache(maxsize=None)
def ice_spec() -> SftSpec:
    return wang_to_sft(ice_tiles(), "ice")


@lru_cache(maxsize=None)
def ice_height_rule() -> TileRule:
    """Z-valued height: the east step gains +1 when the south arrow points north; the north step +1 when the west arrow points west."""
    G = Z()
    c1 = tuple(G.element((1 if f[2] == 0 else -1,)) for f in ICE_FLAGS)
    c2 = tuple(G.element((1 if f[3] == 1 else -1,)) for f in ICE_FLAGS)
    return TileRule(G, 2, (c1, c2), name="ice-height")


def ice_reversal_map() -> tuple[int, ...]:
    """Symbol map reversing every arrow (a radius-0 automaton preserving ice)."""
    return tuple(ICE_FLAGS.index(tuple(1 - x for x in f)) for f in ICE_FLAGS)


def _ice_config(lo, hi, flags_at: Callable[[int, int], tuple[int, int, int, int]]) -> Configuration:
    return Configuration.from_function(lo, hi, lambda z: ICE_FLAGS.index(flags_at(*z)))


def ice_pole_config(half: int = 10) -> Configuration:
    """Two half-strips of reversed arrows meeting at a corner: four doubled arrows around one lattice point.

    All arrows are then reversed so that the point is a sink, which gives the
    counterclockwise height loop the value +8.
    """

    def flags(x, y):
        n, e, s, w = 1, 1, 0, 0  # background: arrows point east and north
        if y in (0, 1) and x <= 0:
            e, w = 1 - e, 1 - w
        if x in (0, 1) and y <= 0:
            n, s = 1 - n, 1 - s
        return (1 - n, 1 - e, 1 - s, 1 - w)

    return _ice_config((-half, -half), (half + 1, half + 1), flags)


def ice_gap_config(half: int = 20) -> Configuration:
    """Arrows point north on rows ``y >= 0`` and south below; all horizontal arrows point east."""

    def flags(x, y):
        return (1, 1, 0, 0) if y >= 0 else (0, 1, 1, 0)

    return _ice_config((-half, -half), (half, half), flags)


def ice_uniform_config(lo=(0, 0), hi=(7, 7), periodic: bool = True) -> Configuration:
    return Configuration.from_function(lo, hi, lambda z: ice_index(1, 1, 0, 0), periodic=periodic)


# All sixteen arrow patterns; the first six are the ice tiles, the rest violate the ice rule.
ARROW_FLAGS: tuple[tuple[int, int, int, int], ...] = ICE_FLAGS + tuple(
    f for f in itertools.product((1, 0), repeat=4) if sum(f) != 2
)


@lru_cache(maxsize=None)
def ice_arrow_spec() -> SftSpec:
    """Ice over all sixteen arrow patterns: only the six 2-in/2-out patterns are allowed symbols."""
    m0 = frozenset((a, b) for a, fa in enumerate(ARROW_FLAGS) for b, fb in enumerate(ARROW_FLAGS) if fa[1] != fb[3])
    m1 = frozenset((a, b) for a, fa in enumerate(ARROW_FLAGS) for b, fb in enumerate(ARROW_FLAGS) if fa[0] != fb[2])
    names = tuple(_ice_name(f) or "-" for f in ARROW_FLAGS)
    names = tuple(f"{n}/{i}" if i >= 6 else n for i, n in enumerate(names))
    return SftSpec(2, names, 1, "pairs", frozenset(range(6)), (m0, m1), name="ice-arrows")


def ice_flip_edge_config(half: int = 6) -> Configuration:
    """Uniform ice (arrows east and north) with the arrow between tiles (0,0) and (1,0) reversed.

    Both endpoint tiles then break the two-in/two-out rule; symbols index :data:`ARROW_FLAGS`.
    """

    def f(z):
        n, e, s, w = 1, 1, 0, 0
        if z == (0, 0):
            e = 0
        if z == (1, 0):
            w = 1
        return ARROW_FLAGS.index((n, e, s, w))

    return Configuration.from_function((-half, -half), (half, half), f)


# ---------------------------------------------------------------------------
# dominoes

DOMINO_NAMES = ("L", "R", "B", "T")
L, R, B, T = range(4)


@lru_cache(maxsize=None)
def domino_tiles() -> WangTileSet:
    m0 = {(L, R)} | set(itertools.product((R, B, T), (L, B, T)))
    m1 = {(B, T)} | set(itertools.product((L, R, T), (L, R, B)))
    return WangTileSet(2, DOMINO_NAMES, (frozenset(m0), frozenset(m1)))


@lru_cache(maxsize=None)
def domino_spec() -> SftSpec:
    return wang_to_sft(domino_tiles(), "dominoes")


@lru_cache(maxsize=None)
def domino_rule() -> TileRule:
    """Values in Z/2*Z/2: east steps ``h`` (``vhv`` on T), north steps ``v`` (``hvh`` on R)."""
    G = FreeProductZ2Z2()
    c1 = tuple(G.element("vhv" if t == T else "h") for t in range(4))
    c2 = tuple(G.element("hvh" if t == R else "v") for t in range(4))
    return TileRule(G, 2, (c1, c2), name="domino")


def _vertical(x: int, y: int, phase: int) -> int:
    """Vertical dominoes covering rows ``(2k+phase, 2k+phase+1)``."""
    return B if (y - phase) % 2 == 0 else T


def _horizontal(x: int, y: int, phase: int) -> int:
    return L if (x - phase) % 2 == 0 else R


def domino_gap_b_config(lo=(-6, -12), hi=(23, 13)) -> Configuration:
    """Vertical dominoes in both halves; the north half staggers columns, the south half is aligned."""

    def f(z):
        x, y = z
        if y >= 0:
            return _vertical(x, y, 1 if x % 2 else 0)
        return _vertical(x, y, 0)

    return Configuration.from_function(lo, hi, f)


def domino_gap_c_config(lo=(-14, -4), hi=(14, 37)) -> Configuration:
    """Horizontal brick walls in opposite phases west of column 1 and from column 1 on."""

    def f(z):
        x, y = z
        west_phase = 1 if y % 2 else 0
        phase = west_phase if x <= 0 else 1 - west_phase
        return _horizontal(x, y, phase)

    return Configuration.from_function(lo, hi, f)


def domino_brick_config(lo=(0, 0), hi=(7, 7), periodic=True) -> Configuration:
    return Configuration.from_function(lo, hi, lambda z: _vertical(z[0], z[1], 0), periodic=periodic)


# ---------------------------------------------------------------------------
# path tiles

BLANK, BLUE, RED = 0, 1, 2


def _path_tile_list() -> list[tuple[int, int, int, int]]:
    tiles = [(0, 0, 0, 0)]
    for c in (BLUE, RED):
        tiles += [
            (c, 0, c, 0),  # vertical straight
            (0, c, 0, c),  # horizontal straight
            (c, c, 0, 0),
            (0, c, c, 0),
            (0, 0, c, c),
            (c, 0, 0, c),  # corners NE, ES, SW, WN
            (c, c, c, c),  # self-crossing
        ]
    tiles += [(BLUE, RED, BLUE, RED), (RED, BLUE, RED, BLUE)]
    tiles += [(BLUE, BLUE, RED, RED), (RED, RED, BLUE, BLUE), (BLUE, RED, RED, BLUE), (RED, BLUE, BLUE, RED)]
    return tiles


PATH_TILES: tuple[tuple[int, int, int, int], ...] = tuple(_path_tile_list())


def _path_name(t) -> str:
    return "".join("0br"[c] for c in t)


PATH_NAMES = tuple(_path_name(t) for t in PATH_TILES)


def path_index(n: int, e: int, s: int, w: int) -> int:
    return PATH_TILES.index((n, e, s, w))


@lru_cache(maxsize=None)
def path_tiles() -> WangTileSet:
    m0 = {(a, b) for a, ta in enumerate(PATH_TILES) for b, tb in enumerate(PATH_TILES) if ta[1] == tb[3]}
    m1 = {(a, b) for a, ta in enumerate(PATH_TILES) for b, tb in enumerate(PATH_TILES) if ta[0] == tb[2]}
    return WangTileSet(2, PATH_NAMES, (frozenset(m0), frozenset(m1)))


@lru_cache(maxsize=None)
def path_spec() -> SftSpec:
    return wang_to_sft(path_tiles(), "paths")


_COLOUR_VALUE = {BLANK: (0, 0), BLUE: (1, 0), RED: (0, 1)}


@lru_cache(maxsize=None)
def path_rule() -> TileRule:
    """(Z/2)^2-valued parity: an east step reads the south side colour, a north step the west side colour."""
    G = ZMod(2, 2)
    c1 = tuple(G.element(_COLOUR_VALUE[t[2]]) for t in PATH_TILES)
    c2 = tuple(G.element(_COLOUR_VALUE[t[3]]) for t in PATH_TILES)
    return TileRule(G, 2, (c1, c2), name="path-parity")


def path_three_defects_config(lo=(-8, -8), hi=(32, 9)) -> Configuration:
    """A blue path on row 0 (x in 0..11) and a red path on row 1 (x in 0..23) on a blank background."""
    hb = path_index(0, BLUE, 0, BLUE)
    hr = path_index(0, RED, 0, RED)

    def f(z):
        x, y = z
        if y == 0 and 0 <= x <= 11:
            return hb
        if y == 1 and 0 <= x <= 23:
            return hr
        return 0

    return Configuration.from_function(lo, hi, f)


def path_vertical_blue_config(lo=(0, 0), hi=(15, 15), periodic=True) -> Configuration:
    """Blue vertical straights everywhere: every east step crosses one blue path."""
    v = path_index(BLUE, 0, BLUE, 0)
    return Configuration.from_function(lo, hi, lambda z: v, periodic=periodic)


def path_boundary_config(half: int = 20) -> Configuration:
    """Blue vertical paths on rows ``y >= 0`` meeting red vertical paths below."""
    vb = path_index(BLUE, 0, BLUE, 0)
    vr = path_index(RED, 0, RED, 0)
    return Configuration.from_function((-half, -half), (half, half), lambda z: vb if z[1] >= 0 else vr)


# ---------------------------------------------------------------------------
# ice cubes (3D)

FACES: tuple[tuple[int, int], ...] = tuple((a, s) for a in range(3) for s in (1, -1))
CUBE_TILES: tuple[frozenset, ...] = tuple(frozenset(c) for c in itertools.combinations(FACES, 3))


def _cube_name(t) -> str:
    return "".join(f"{'xyz'[a]}{'+' if s > 0 else '-'}" for a, s in sorted(t, key=lambda f: (f[0], -f[1])))


CUBE_NAMES = tuple(_cube_name(t) for t in CUBE_TILES)


def cube_index(outs) -> int:
    return CUBE_TILES.index(frozenset(outs))


@lru_cache(maxsize=None)
def cube_tiles() -> WangTileSet:
    rels = []
    for i in range(3):
        rels.append(frozenset(
            (a, b)
            for a, ta in enumerate(CUBE_TILES)
            for b, tb in enumerate(CUBE_TILES)
            if ((i, 1) in ta) != ((i, -1) in tb)
        ))
    return WangTileSet(3, CUBE_NAMES, tuple(rels))


@lru_cache(maxsize=None)
def cube_spec() -> SftSpec:
    return wang_to_sft(cube_tiles(), "ice-cubes")


# face (j, k): normal e_j x e_k as (axis, sign)
_FACE_NORMAL = {(0, 1): (2, 1), (0, 2): (1, -1), (1, 2): (0, 1)}


def pin_value(axes: tuple[int, int], plus_side_tile: int, flip: Callable | None = None) -> int:
    """+1 when the pin through the face points along ``e_j x e_k``, else -1."""
    (i,) = set(range(3)) - set(axes)
    pin_sign = -1 if (i, -1) in CUBE_TILES[plus_side_tile] else 1
    n_axis, n_sign = _FACE_NORMAL[axes]
    assert n_axis == i
    return 1 if pin_sign == n_sign else -1


@lru_cache(maxsize=None)
def pin_cocycle() -> EquivariantCochainRule:
    """Degree-2 cochain on Z: the pin through each face, read from the cube on its positive side."""
    G = Z()

    def make(axes):
        def f(fb):
            return G.element((pin_value(axes, int(fb[1, 1, 1])),))

        return f

    axes = list(itertools.combinations(range(3), 2))
    return EquivariantCochainRule(G, 3, 2, 1, {ax: make(ax) for ax in axes}, name="pin",
                                  supports={ax: ((0, 0, 0),) for ax in axes})


def cube_background(z) -> int:
    return cube_index([(0, 1), (1, 1), (2, 1)])


def cube_pole_config(half: int = 5) -> Configuration:
    """Rays ``-k e_i`` (k >= 1) reversed along axis ``i``: three doubled faces around the origin cube, shell flux +6."""

    def f(z):
        outs = {(0, 1), (1, 1), (2, 1)}
        for i in range(3):
            if z[i] <= -1 and all(z[j] == 0 for j in range(3) if j != i):
                outs = (outs - {(i, 1)}) | {(i, -1)}
        return cube_index(outs)

    return Configuration.from_function((-half,) * 3, (half,) * 3, f)


def cube_boundary_config(half: int = 4) -> Configuration:
    """Cubes pin upward for ``z >= 0`` and downward below: a planar domain boundary."""

    def f(p):
        if p[2] >= 0:
            return cube_index([(0, 1), (1, 1), (2, 1)])
        return cube_index([(0, 1), (1, 1), (2, -1)])

    return Configuration.from_function((-half,) * 3, (half,) * 3, f)


def cube_line_config(half: int = 4) -> Configuration:
    """The column ``x = y = 0`` reversed along the x axis: a line of mismatched faces."""

    def f(p):
        if p[0] == 0 and p[1] == 0:
            return cube_index([(0, -1), (1, 1), (2, 1)])
        return cube_index([(0, 1), (1, 1), (2, 1)])

    return Configuration.from_function((-half,) * 3, (half,) * 3, f)


# ---------------------------------------------------------------------------
# golden mean (D = 1)


@lru_cache(maxsize=None)
def golden_mean_spec() -> SftSpec:
    rel = frozenset({(0, 0), (0, 1), (1, 0)})
    return SftSpec(1, ("0", "1"), 1, "pairs", frozenset({0, 1}), (rel,), name="golden-mean")


def golden_mean_config(n: int = 12) -> Configuration:
    return Configuration(np.array([(1 if i % 3 == 0 else 0) for i in range(n)]), (0,), periodic=(n % 3 == 0))


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    description: str
    spec: SftSpec
    tiles: WangTileSet | None = None
    rule: CocycleRule | None = None
    config: Configuration | None = None
    eqrule: EquivariantCochainRule | None = None
    meta: dict = field(default_factory=dict)


def _ice_pole():
    return Fixture("ice-pole", "ice with a four-fold sink: height residue 8", ice_spec(), ice_tiles(), ice_height_rule(),
                   ice_pole_config(), meta={"radius": 1, "residue": 8})


def _ice_gap():
    return Fixture("ice-gap", "ice with north arrows above a row of south arrows", ice_spec(), ice_tiles(), ice_height_rule(),
                   ice_gap_config(), meta={"radius": 1, "x_ref": (0, 1), "y_ref": (0, -2), "cgap_slope": 2})


def _domino_gap_b():
    return Fixture("domino-gap-b", "staggered vs aligned vertical dominoes", domino_spec(), domino_tiles(), domino_rule(),
                   domino_gap_b_config(), meta={"radius": 1, "recode": 2, "x_ref": (0, 1), "y_ref": (0, -2),
                                                "step": (1, 0), "per_step": 2})


def _domino_gap_c():
    return Fixture("domino-gap-c", "horizontal brick walls in opposite phases", domino_spec(), domino_tiles(), domino_rule(),
                   domino_gap_c_config(), meta={"radius": 1, "recode": 2, "x_ref": (-4, 0), "y_ref": (4, 0),
                                                "step": (0, 1), "per_step": -4})


def _paths_three():
    return Fixture("paths-three-defects", "one blue and one red path ending in three defects", path_spec(), path_tiles(),
                   path_rule(), path_three_defects_config(), meta={"radius": 1})


REGISTRY: dict[str, Callable[[], Fixture]] = {
    "ice": lambda: Fixture("ice", "six-vertex ice tiles", ice_spec(), ice_tiles(), ice_height_rule(), ice_uniform_config()),
    "ice-pole": _ice_pole,
    "ice-gap": _ice_gap,
    "ice-flip": lambda: Fixture("ice-flip", "uniform ice with one reversed arrow", ice_arrow_spec(), None, None,
                                ice_flip_edge_config()),
    "dominoes": lambda: Fixture("dominoes", "half-domino tiles", domino_spec(), domino_tiles(), domino_rule(), domino_brick_config()),
    "domino-gap-b": _domino_gap_b,
    "domino-gap-c": _domino_gap_c,
    "paths": lambda: Fixture("paths", "21 path tiles", path_spec(), path_tiles(), path_rule(),
                             Configuration(np.zeros((8, 8), dtype=np.int64), (0, 0), True)),
    "paths-three-defects": _paths_three,
    "paths-boundary": lambda: Fixture("paths-boundary", "blue paths above red paths", path_spec(), path_tiles(), path_rule(),
                                      path_boundary_config(), meta={"radius": 1}),
    "paths-vertical-blue": lambda: Fixture("paths-vertical-blue", "blue vertical straights everywhere", path_spec(), path_tiles(),
                                           path_rule(), path_vertical_blue_config()),
    "ice-cubes-3d": lambda: Fixture("ice-cubes-3d", "20 ball-and-pin cubes", cube_spec(), cube_tiles(), None,
                                    Configuration.from_function((0,) * 3, (3,) * 3, cube_background, periodic=True), pin_cocycle()),
    "ice-cubes-pole": lambda: Fixture("ice-cubes-pole", "three reversed rays meeting at the origin cube", cube_spec(), cube_tiles(),
                                      None, cube_pole_config(), pin_cocycle(), meta={"radius": 1, "flux": 6}),
    "ice-cubes-boundary": lambda: Fixture("ice-cubes-boundary", "up pins above down pins", cube_spec(), cube_tiles(), None,
                                          cube_boundary_config(), pin_cocycle(), meta={"radius": 1}),
    "ice-cubes-line": lambda: Fixture("ice-cubes-line", "a reversed column of cubes", cube_spec(), cube_tiles(), None,
                                      cube_line_config(), pin_cocycle(), meta={"radius": 1}),
    "golden-mean": lambda: Fixture("golden-mean", "binary words without 11", golden_mean_spec(), None, None, golden_mean_config()),
}


def fixture(name: str) -> Fixture:
    if name not in REGISTRY:
        raise SchemaError(f"unknown fixture {name!r}; known: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[name]()


def names() -> list[str]:
    return sorted(REGISTRY)


# ---------------------------------------------------------------------------
# persistence trajectories: planar fixtures paired with SFT-preserving CAs


def trajectory_cas(name: str) -> list[CaRule]:
    """Identity, unit and diagonal shifts and (for ice tiles) arrow reversal on the fixture's alphabet."""
    fx = fixture(name)
    D, n = fx.spec.D, fx.spec.n
    units = [tuple(s if k == a else 0 for k in range(D)) for a in range(D) for s in (1, -1)]
    cas = [identity_ca(D, n)] + [shift_ca(D, n, v) for v in units + [(1,) * D]]
    if fx.spec.name.startswith("ice") and n == len(ICE_FLAGS):
        cas.append(symbol_map_ca(D, ice_reversal_map(), "reversal"))
    return cas


TRAJECTORY_FIXTURES = ("ice-pole", "ice-gap", "ice-flip", "paths-three-defects", "paths-boundary", "domino-gap-b")


def trajectories(steps: int = 3) -> list[tuple[str, CaRule, int]]:
    return [(nm, ca, steps) for nm in TRAJECTORY_FIXTURES for ca in trajectory_cas(nm)]
