"""Group-valued cocycles on subshifts: local rules, trail evaluation, verification, conversions.

A dynamical rule assigns a group element to every unit step ``z -> z + s*e_i``
given the symbols near ``z``.  Rules declare which offsets they read
(:meth:`CocycleRule.support`); :meth:`CocycleRule.value` receives the
``(2r+1)^D`` block centred at ``z`` with unread cells set to 0.

Trail values multiply later steps on the left:
``C(z_0 ... z_N) = c_N * ... * c_2 * c_1``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    DegreeUnsupported,
    InvalidGroup,
    OutOfWindow,
    SpecMismatch,
    TrailExitsWindow,
    ValueEscapesSubgroup,
)
from .groups import FgAbelian, FreeProductZ2Z2, Group, GroupElement, vh_exponent
from .lattice import Chain, CubicCell, Site, Trail, add, cell_boundary_terms, linf, step_of, unit
from .symbolic import (
    Configuration,
    SftSpec,
    admissible_blocks,
    decode_symbol,
    enumerate_patches,
    recode_spec,
)

Direction = tuple[int, int]


def directions(D: int) -> list[Direction]:
    return [(i, s) for i in range(D) for s in (1, -1)]


def _ball(D: int, r: int) -> tuple[Site, ...]:
    return tuple(itertools.product(range(-r, r + 1), repeat=D))


class CocycleRule:
    """Base class of locally determined dynamical rules."""

    group: Group
    D: int
    radius: int

    def support(self, axis: int, sign: int) -> tuple[Site, ...]:
        return _ball(self.D, self.radius)

    def value(self, axis: int, sign: int, block: np.ndarray) -> GroupElement:
        raise NotImplementedError

    # evaluation helpers -------------------------------------------------
    def blank(self) -> np.ndarray:
        return np.zeros((2 * self.radius + 1,) * self.D, dtype=np.int64)

    def block_from(self, axis: int, sign: int, read: Callable[[Site], int], at: Site) -> np.ndarray:
        blk = self.blank()
        r = self.radius
        for o in self.support(axis, sign):
            blk[tuple(x + r for x in o)] = read(add(at, o))
        return blk

    def value_at(self, cfg: Configuration, z: Sequence[int], axis: int, sign: int) -> GroupElement:
        def read(y):
            try:
                return cfg[y]
            except OutOfWindow:
                raise TrailExitsWindow(f"rule reads {y}, outside the window", site=y) from None

        return self.value(axis, sign, self.block_from(axis, sign, read, tuple(z)))


# ---------------------------------------------------------------------------
# concrete rules


@dataclass(frozen=True, eq=False)
class TileRule(CocycleRule):
    """Height-type rule: step ``+e_i`` from ``z`` is ``gens[i][a_z]``; step ``-e_i`` is ``gens[i][a_{z-e_i}]^-1``."""

    group: Group
    D: int
    gens: tuple[tuple[GroupElement, ...], ...]
    name: str = ""

    @property
    def radius(self) -> int:  # type: ignore[override]
        return 1

    def support(self, axis, sign):
        return ((0,) * self.D,) if sign > 0 else (unit(self.D, axis, -1),)

    def value(self, axis, sign, block):
        c = (1,) * self.D
        if sign > 0:
            return self.gens[axis][int(block[c])]
        return self.gens[axis][int(block[add(c, unit(self.D, axis, -1))])].inverse()


@dataclass(frozen=True, eq=False)
class ConstantRule(CocycleRule):
    """Homomorphism cocycle: step ``+-e_i`` is ``gens[i]^{+-1}`` regardless of the configuration."""

    group: Group
    D: int
    gens: tuple[GroupElement, ...]

    @property
    def radius(self) -> int:  # type: ignore[override]
        return 0

    def support(self, axis, sign):
        return ()

    def value(self, axis, sign, block):
        g = self.gens[axis]
        return g if sign > 0 else g.inverse()


def identity_rule(group: Group, D: int) -> ConstantRule:
    return ConstantRule(group, D, (group.identity(),) * D)


@dataclass(frozen=True, eq=False)
class FunctionRule(CocycleRule):
    """Rule given by a Python callable ``fn(axis, sign, block)``."""

    group: Group
    D: int
    radius: int
    fn: Callable[[int, int, np.ndarray], GroupElement]
    supports: Mapping[Direction, tuple[Site, ...]] | None = None

    def support(self, axis, sign):
        if self.supports is not None and (axis, sign) in self.supports:
            return self.supports[(axis, sign)]
        return _ball(self.D, self.radius)

    def value(self, axis, sign, block):
        return self.fn(axis, sign, block)


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """``b``: admissible ``radius``-blocks to group elements (callable or table keyed by flattened blocks)."""

    group: Group
    D: int
    radius: int
    fn: Callable[[np.ndarray], GroupElement] | None = None
    table: Mapping[tuple, GroupElement] | None = None
    default: GroupElement | None = None

    def __call__(self, block: np.ndarray) -> GroupElement:
        if self.fn is not None:
            return self.fn(block)
        key = tuple(np.asarray(block).ravel().tolist())
        if key in self.table:
            return self.table[key]
        if self.default is not None:
            return self.default
        raise SpecMismatch(f"transfer function undefined on block {key}")

    def at(self, cfg: Configuration, z: Sequence[int]) -> GroupElement:
        return self(cfg.block(z, self.radius))


def constant_transfer(group: Group, D: int, g: GroupElement | None = None) -> TransferFunction:
    g = g if g is not None else group.identity()
    return TransferFunction(group, D, 0, fn=lambda _b: g)


@dataclass(frozen=True, eq=False)
class CoboundaryRule(CocycleRule):
    """``c(e, a) = b(sigma^e a) * b(a)^-1``."""

    b: TransferFunction

    @property
    def group(self) -> Group:  # type: ignore[override]
        return self.b.group

    @property
    def D(self) -> int:  # type: ignore[override]
        return self.b.D

    @property
    def radius(self) -> int:  # type: ignore[override]
        return self.b.radius + 1

    def support(self, axis, sign):
        e = unit(self.D, axis, sign)
        ball = _ball(self.D, self.b.radius)
        return tuple(sorted(set(ball) | {add(o, e) for o in ball}))

    def value(self, axis, sign, block):
        r, rb = self.radius, self.b.radius
        here = block[tuple(slice(r - rb, r + rb + 1) for _ in range(self.D))]
        e = unit(self.D, axis, sign)
        there = block[tuple(slice(r + d - rb, r + d + rb + 1) for d in e)]
        return self.b(there) * self.b(here).inverse()


def coboundary_rule(b: TransferFunction) -> CoboundaryRule:
    return CoboundaryRule(b)


@dataclass(frozen=True, eq=False)
class ProductRule(CocycleRule):
    """Pointwise product ``c1(e,a) * c2(e,a)`` (a cocycle when the group is abelian)."""

    first: CocycleRule
    second: CocycleRule

    def __post_init__(self):
        if self.first.group != self.second.group or self.first.D != self.second.D:
            raise SpecMismatch("product of rules over different groups")
        if not self.first.group.abelian:
            raise InvalidGroup("pointwise products need an abelian group")

    @property
    def group(self):  # type: ignore[override]
        return self.first.group

    @property
    def D(self):  # type: ignore[override]
        return self.first.D

    @property
    def radius(self):  # type: ignore[override]
        return max(self.first.radius, self.second.radius)

    def support(self, axis, sign):
        return tuple(sorted(set(self.first.support(axis, sign)) | set(self.second.support(axis, sign))))

    def _sub(self, rule, block):
        d = self.radius - rule.radius
        return block[tuple(slice(d, block.shape[0] - d) for _ in range(self.D))]

    def value(self, axis, sign, block):
        return self.first.value(axis, sign, self._sub(self.first, block)) * self.second.value(
            axis, sign, self._sub(self.second, block)
        )


@dataclass(frozen=True, eq=False)
class PowerRule(CocycleRule):
    """``c(e,a)^m`` (abelian groups)."""

    base: CocycleRule
    m: int

    @property
    def group(self):  # type: ignore[override]
        return self.base.group

    @property
    def D(self):  # type: ignore[override]
        return self.base.D

    @property
    def radius(self):  # type: ignore[override]
        return self.base.radius

    def support(self, axis, sign):
        return self.base.support(axis, sign)

    def value(self, axis, sign, block):
        return self.base.value(axis, sign, block) ** self.m


@dataclass(frozen=True, eq=False)
class PullbackRule(CocycleRule):
    """``(Phi_* C)(e, a) = C(e, Phi(a))``; radius grows by the CA radius."""

    base: CocycleRule
    ca: object  # automaton.CaRule

    @property
    def group(self):  # type: ignore[override]
        return self.base.group

    @property
    def D(self):  # type: ignore[override]
        return self.base.D

    @property
    def radius(self):  # type: ignore[override]
        return self.base.radius + self.ca.radius

    def support(self, axis, sign):
        return tuple(sorted({add(s, h) for s in self.base.support(axis, sign) for h in self.ca.neighbourhood}))

    def value(self, axis, sign, block):
        return self.base.value(axis, sign, self.ca.apply_block(block))


def pullback(rule: CocycleRule, ca) -> CocycleRule:
    if ca.kind == "identity":
        return rule
    return PullbackRule(rule, ca)


@dataclass(frozen=True, eq=False)
class RecodedRule(CocycleRule):
    """Rule on the ``k``-block recoding: one recoded step is ``k`` original steps from the block origin."""

    base: CocycleRule
    spec: SftSpec  # original SFT
    k: int

    @property
    def group(self):  # type: ignore[override]
        return self.base.group

    @property
    def D(self):  # type: ignore[override]
        return self.base.D

    def _reads(self, axis, sign) -> list[tuple[Site, Site]]:
        """(original offset from the block origin, start of the original step) per read cell."""
        out = []
        for j in range(self.k):
            start = unit(self.D, axis, sign * j)
            for s in self.base.support(axis, sign):
                out.append((add(start, s), start))
        return out

    def support(self, axis, sign):
        return tuple(sorted({tuple(x // self.k for x in o) for o, _ in self._reads(axis, sign)}))

    @property
    def radius(self):  # type: ignore[override]
        return max(linf(o) for i in range(self.D) for s in (1, -1) for o in self.support(i, s)) if self.D else 0

    def value(self, axis, sign, block):
        r, k = self.radius, self.k
        cache: dict[Site, np.ndarray] = {}

        def orig(o: Site) -> int:
            w = tuple(x // k for x in o)
            if w not in cache:
                cache[w] = decode_symbol(self.spec, k, int(block[tuple(x + r for x in w)]))
            return int(cache[w][tuple(x % k for x in o)])

        acc = self.group.identity()
        for j in range(k):
            start = unit(self.D, axis, sign * j)
            v = self.base.value(axis, sign, self.base.block_from(axis, sign, orig, start))
            acc = v * acc
        return acc


def recode_block(rule: CocycleRule, spec: SftSpec, k: int) -> tuple[CocycleRule, SftSpec]:
    if k < 1:
        raise SpecMismatch("k must be positive")
    if k == 1:
        return rule, spec
    return RecodedRule(rule, spec, k), recode_spec(spec, k)


def export_to_integer(g: GroupElement) -> int:
    """Integer image of a value in an infinite cyclic group: ``Z`` itself, or ``<vh>`` inside ``Z/2*Z/2``."""
    if isinstance(g.group, FreeProductZ2Z2):
        return vh_exponent(g)
    if isinstance(g.group, FgAbelian) and g.group.rank == 1 and not g.group.torsion:
        return int(g.payload[0])
    raise ValueEscapesSubgroup(f"no integer export for {g.group}")


# ---------------------------------------------------------------------------
# trails


def evaluate_trail(rule: CocycleRule, cfg: Configuration, trail: Trail) -> GroupElement:
    acc = rule.group.identity()
    for (a, b) in zip(trail.sites, trail.sites[1:]):
        axis, sign = step_of(a, b)
        acc = rule.value_at(cfg, a, axis, sign) * acc
    return acc


def trail_touches_defect(rule: CocycleRule, trail: Trail, defect_sites: Iterable[Site]) -> bool:
    """True when some step reads within the rule radius of a defect site."""
    X = set(defect_sites)
    r = rule.radius
    for z in trail.sites:
        for o in _ball(len(z), r):
            if add(z, o) in X:
                return True
    return False


def is_homomorphism_rule(rule: CocycleRule, spec: SftSpec | None = None) -> bool:
    """Does every step value ignore the configuration?"""
    if isinstance(rule, ConstantRule):
        return True
    if spec is None:
        raise SpecMismatch("a non-constant rule needs its SFT to decide")
    for axis, sign in directions(rule.D):
        offs = list(rule.support(axis, sign))
        pats = enumerate_patches(spec, offs) if offs else np.zeros((1, 0), dtype=np.int64)
        vals = {_value_on(rule, axis, sign, offs, p, (0,) * rule.D) for p in pats}
        if len(vals) > 1:
            return False
    return True


def _value_on(rule: CocycleRule, axis: int, sign: int, offs: Sequence[Site], patch: Sequence[int], at: Site) -> GroupElement:
    look = dict(zip(offs, (int(x) for x in patch)))
    return rule.value(axis, sign, rule.block_from(axis, sign, lambda y: look[y], at))


@dataclass(frozen=True)
class CocycleCheck:
    ok: bool
    condition: str = ""
    counterexample: dict | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def check_cocycle_conditions(rule: CocycleRule, spec: SftSpec, budget: int = 2_000_000) -> CocycleCheck:
    """Exhaustive check of the commuting-square and inverse-step identities on locally admissible patches."""
    if rule.D != spec.D:
        raise SpecMismatch("rule and SFT dimensions differ")
    D = rule.D
    origin = (0,) * D
    checked = 0
    # (b) c(-e, at e) * c(e, at 0) = identity
    for axis in range(D):
        e = unit(D, axis)
        offs = sorted(set(rule.support(axis, 1)) | {add(e, o) for o in rule.support(axis, -1)})
        pats = enumerate_patches(spec, offs, limit=budget + 1)
        if len(pats) > budget:
            raise BudgetExceeded("too many patches for the inverse-step check", count=len(pats))
        for p in pats:
            g = _value_on(rule, axis, -1, offs, p, e) * _value_on(rule, axis, 1, offs, p, origin)
            checked += 1
            if not g.is_identity():
                return CocycleCheck(False, "inverse-step", dict(zip(offs, p.tolist())), checked)
    # (a) commuting squares for every pair of axes and every sign pattern
    for i, j in itertools.combinations(range(D), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            ei, ej = unit(D, i, si), unit(D, j, sj)
            offs = sorted(
                set(rule.support(i, si))
                | {add(ei, o) for o in rule.support(j, sj)}
                | set(rule.support(j, sj))
                | {add(ej, o) for o in rule.support(i, si)}
            )
            pats = enumerate_patches(spec, offs, limit=budget + 1)
            if len(pats) > budget:
                raise BudgetExceeded("too many patches for the square check", count=len(pats))
            for p in pats:
                left = _value_on(rule, j, sj, offs, p, ei) * _value_on(rule, i, si, offs, p, origin)
                right = _value_on(rule, i, si, offs, p, ej) * _value_on(rule, j, sj, offs, p, origin)
                checked += 1
                if left != right and left.payload != right.payload:
                    return CocycleCheck(False, f"square({i}{'+' if si > 0 else '-'},{j}{'+' if sj > 0 else '-'})",
                                        dict(zip(offs, p.tolist())), checked)
    return CocycleCheck(True, "", None, checked)


# ---------------------------------------------------------------------------
# two-point form


@dataclass(frozen=True, eq=False)
class TwoPointCocycle:
    """``C(y, w)``: value of a trail from ``w`` to ``y`` (path-independent on admissible windows)."""

    rule: CocycleRule
    cfg: Configuration
    order: tuple[int, ...] | None = None

    def __call__(self, y: Sequence[int], w: Sequence[int]) -> GroupElement:
        return evaluate_trail(self.rule, self.cfg, Trail.manhattan(tuple(w), tuple(y), self.order))


def to_two_point(rule: CocycleRule, cfg: Configuration, order: Sequence[int] | None = None) -> TwoPointCocycle:
    return TwoPointCocycle(rule, cfg, tuple(order) if order is not None else None)


# ---------------------------------------------------------------------------
# equivariant cochains


def face_offsets(D: int, axes: Sequence[int], rho: int) -> list[Site]:
    """Cubes read by a cell with the given axes: ``[-rho..rho]`` along the cell, ``[-rho..rho-1]`` across it."""
    rngs = [range(-rho, rho + 1) if a in axes else range(-rho, rho) for a in range(D)]
    return [tuple(p) for p in itertools.product(*rngs)]


def face_shape(D: int, axes: Sequence[int], rho: int) -> tuple[int, ...]:
    return tuple(2 * rho + 1 if a in axes else 2 * rho for a in range(D))


@dataclass(frozen=True, eq=False)
class EquivariantCochainRule:
    """Degree-``d`` cochain: ``maps[axes](face_block)``; face blocks are indexed with offset ``rho``."""

    group: FgAbelian
    D: int
    degree: int
    radius: int
    maps: Mapping[tuple[int, ...], Callable[[np.ndarray], GroupElement]]
    name: str = ""
    supports: Mapping[tuple[int, ...], tuple[Site, ...]] | None = None

    def support(self, axes: tuple[int, ...]) -> list[Site]:
        """Offsets (from the cell base) that ``maps[axes]`` reads."""
        if self.supports is not None and axes in self.supports:
            return list(self.supports[axes])
        return face_offsets(self.D, axes, self.radius)

    def __post_init__(self):
        if not self.group.abelian:
            raise InvalidGroup("equivariant cochains need an abelian group")
        need = set(itertools.combinations(range(self.D), self.degree))
        if set(self.maps) != need:
            raise SpecMismatch(f"maps must cover the cell classes {sorted(need)}")

    def cell_value(self, cfg: Configuration, cell: CubicCell) -> GroupElement:
        if cell.dim != self.degree:
            raise DegreeUnsupported("cell dimension differs from cochain degree")
        rho = self.radius
        lo = tuple(b - rho for b in cell.base)
        hi = tuple(b + (rho if a in cell.axes else rho - 1) for a, b in enumerate(cell.base))
        try:
            fb = cfg.box(lo, hi)
        except OutOfWindow:
            raise OutOfWindow(f"cell {cell} reads outside the window") from None
        return self.maps[cell.axes](fb)

    def value_on_patch(self, cell: CubicCell, look: Callable[[Site], int]) -> GroupElement:
        rho = self.radius
        shp = face_shape(self.D, cell.axes, rho)
        fb = np.zeros(shp, dtype=np.int64)
        for o in self.support(cell.axes):
            fb[tuple(x + rho for x in o)] = look(add(cell.base, o))
        return self.maps[cell.axes](fb)


def eval_equivariant(eq: EquivariantCochainRule, cfg: Configuration, chain: Chain) -> GroupElement:
    acc = eq.group.identity()
    for cell, coef in sorted(chain.terms.items()):
        acc = acc * (eq.cell_value(cfg, cell) ** coef)
    return acc


def check_equivariant_cocycle(eq: EquivariantCochainRule, spec: SftSpec, budget: int = 2_000_000) -> CocycleCheck:
    """``delta C = 0``: the cochain vanishes on the boundary of every ``(d+1)``-cell, on all local patches."""
    D, d = eq.D, eq.degree
    if d + 1 > D:
        return CocycleCheck(True, "", None, 0)
    checked = 0
    for T in itertools.combinations(range(D), d + 1):
        cell = CubicCell((0,) * D, T)
        faces = cell_boundary_terms(cell)
        offs = sorted({add(f.base, o) for f, _ in faces for o in eq.support(f.axes)})
        pats = enumerate_patches(spec, offs, limit=budget + 1)
        if len(pats) > budget:
            raise BudgetExceeded("too many patches", count=len(pats))
        for p in pats:
            look = dict(zip(offs, p.tolist())).__getitem__
            acc = eq.group.identity()
            for f, s in faces:
                acc = acc * (eq.value_on_patch(f, look) ** s)
            checked += 1
            if not acc.is_identity():
                return CocycleCheck(False, f"cell{T}", dict(zip(offs, p.tolist())), checked)
    return CocycleCheck(True, "", None, checked)


def to_equivariant(rule: CocycleRule) -> EquivariantCochainRule:
    """Degree-1 cochain with ``C(edge z -> z+e_i) = c(+e_i, a near z)``."""
    if not rule.group.abelian:
        raise InvalidGroup("equivariant form needs an abelian group")
    D, r = rule.D, rule.radius
    rho = r + 1 if D >= 2 else r

    def make(i):
        def f(fb):
            blk = fb[tuple(slice(rho - r, rho + r + 1) for _ in range(D))]
            return rule.value(i, 1, blk)

        return f

    sup = {(i,): tuple(sorted(rule.support(i, 1))) for i in range(D)}
    return EquivariantCochainRule(rule.group, D, 1, rho, {(i,): make(i) for i in range(D)}, name="equivariant", supports=sup)


@dataclass(frozen=True, eq=False)
class EquivariantDynamicalRule(CocycleRule):
    """Dynamical rule read off a degree-1 equivariant cochain."""

    eq: EquivariantCochainRule

    @property
    def group(self):  # type: ignore[override]
        return self.eq.group

    @property
    def D(self):  # type: ignore[override]
        return self.eq.D

    @property
    def radius(self):  # type: ignore[override]
        return self.eq.radius + 1

    def support(self, axis, sign):
        base = (0,) * self.D if sign > 0 else unit(self.D, axis, -1)
        return tuple(sorted(add(base, o) for o in self.eq.support((axis,))))

    def value(self, axis, sign, block):
        r = self.radius
        base = (0,) * self.D if sign > 0 else unit(self.D, axis, -1)
        cell = CubicCell(base, (axis,))
        g = self.eq.value_on_patch(cell, lambda y: int(block[tuple(x + r for x in y)]))
        return g if sign > 0 else g.inverse()


def from_equivariant(eq: EquivariantCochainRule) -> CocycleRule:
    if eq.degree != 1:
        raise DegreeUnsupported("only degree-1 cochains have a dynamical form")
    return EquivariantDynamicalRule(eq)


def rules_agree(r1: CocycleRule, r2: CocycleRule, spec: SftSpec, budget: int = 2_000_000) -> tuple[bool, dict | None]:
    """Equal step values on every locally admissible patch of the joint support."""
    D = r1.D
    for axis, sign in directions(D):
        offs = sorted(set(r1.support(axis, sign)) | set(r2.support(axis, sign)))
        pats = enumerate_patches(spec, offs, limit=budget + 1) if offs else np.zeros((1, 0), np.int64)
        if len(pats) > budget:
            raise BudgetExceeded("too many patches", count=len(pats))
        for p in pats:
            a = _value_on(r1, axis, sign, offs, p, (0,) * D)
            b = _value_on(r2, axis, sign, offs, p, (0,) * D)
            if a != b and a.payload != b.payload:
                return False, {"direction": (axis, sign), "patch": dict(zip(offs, p.tolist()))}
    return True, None


# ---------------------------------------------------------------------------
# cohomologous search


@dataclass(frozen=True)
class SearchResult:
    transfer: TransferFunction | None
    radius: int | None
    exhaustive: bool
    relative_to_candidates: bool

    @property
    def found(self) -> bool:
        return self.transfer is not None


def cohomologous_search(
    rule1: CocycleRule,
    rule2: CocycleRule,
    spec: SftSpec,
    max_radius: int,
    candidates: Sequence[GroupElement] | None = None,
    budget: int = 5_000_000,
) -> SearchResult:
    """Find ``b`` with ``c2(e,a) = b(sigma^e a) * c1(e,a) * b(a)^-1`` on admissible data.

    Each constraint pins ``b`` on the shifted block given ``b`` on the unshifted
    one, so ``b`` is determined on a connected component of the constraint graph
    by its value at one block.  Roots range over the group (finite groups) or
    over ``candidates``; every propagated value must also lie in ``candidates``.
    """
    G = rule1.group
    if rule2.group != G or rule1.D != rule2.D:
        raise SpecMismatch("rules over different groups")
    if candidates is None:
        if not G.is_finite():
            raise InvalidGroup("infinite group: supply a finite candidate set")
        candidates = G.elements()
        relative = False
    else:
        relative = True
    cand_set = {c.payload for c in candidates}
    D = rule1.D
    work = 0
    for rho in range(max_radius + 1):
        ball = list(_ball(D, rho))
        edges: dict[tuple, list[tuple[tuple, GroupElement, GroupElement]]] = {}
        nodes: set[tuple] = {tuple(b.tolist()) for b in admissible_blocks(spec, rho)}
        for i in range(D):
            e = unit(D, i)
            offs = sorted(set(ball) | {add(e, o) for o in ball} | set(rule1.support(i, 1)) | set(rule2.support(i, 1)))
            pos = {o: k for k, o in enumerate(offs)}
            here = [pos[o] for o in ball]
            there = [pos[add(e, o)] for o in ball]
            pats = enumerate_patches(spec, offs, limit=budget + 1)
            work += len(pats)
            if work > budget:
                raise BudgetExceeded("cohomologous search exceeded its budget", work=work)
            for p in pats:
                a = tuple(p[here].tolist())
                a2 = tuple(p[there].tolist())
                c1 = _value_on(rule1, i, 1, offs, p, (0,) * D)
                c2 = _value_on(rule2, i, 1, offs, p, (0,) * D)
                nodes.add(a)
                nodes.add(a2)
                # b(a2) = c2 * b(a) * c1^-1 and b(a) = c2^-1 * b(a2) * c1
                edges.setdefault(a, []).append((a2, c2, c1.inverse()))
                edges.setdefault(a2, []).append((a, c2.inverse(), c1))
        assignment: dict[tuple, GroupElement] = {}
        ok_all = True
        for root in sorted(nodes):
            if root in assignment:
                continue
            solved = None
            for g0 in candidates:
                trial = {root: g0}
                queue = deque([root])
                good = True
                while queue and good:
                    u = queue.popleft()
                    for v, left, right in edges.get(u, ()):
                        work += 1
                        val = left * trial[u] * right
                        if v in trial:
                            if trial[v].payload != val.payload:
                                good = False
                                break
                        else:
                            if val.payload not in cand_set:
                                good = False
                                break
                            trial[v] = val
                            queue.append(v)
                if work > budget:
                    raise BudgetExceeded("cohomologous search exceeded its budget", work=work)
                if good:
                    solved = trial
                    break
            if solved is None:
                ok_all = False
                break
            assignment.update(solved)
        if ok_all:
            side = 2 * rho + 1
            tf = TransferFunction(G, D, rho, table=dict(assignment))
            return SearchResult(tf, rho, True, relative)
    return SearchResult(None, None, True, relative)
