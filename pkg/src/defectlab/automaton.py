"""Cellular automata on windowed configurations and block-level SFT invariance.

Expression rules use a small total language over neighbour symbols::

    expr := int | a[dx, dy, ...] | expr OP expr | -expr | (expr)
          | expr CMP expr | (expr if expr else expr) | min(e, e, ...) | max(...) | abs(e)
    OP   := + - * // %          (division and modulo by zero give 0)
    CMP  := == != < <= > >=     (1 for true, 0 for false)

The result is reduced modulo the alphabet size, so every rule is total.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import SchemaError, SpecMismatch, WindowTooSmall
from .lattice import Site, linf
from .symbolic import Configuration, SftSpec, block_ok, defect_field


@dataclass(frozen=True)
class CaRule:
    """``Phi(a)_z = phi(a_{z+H})``.

    kinds: ``identity``; ``shift`` (``Phi(a)_z = a_{z+v}``); ``symbol-map``
    (radius 0); ``table`` (``table[code]`` for the base-``n`` code of the
    neighbourhood read in ``H`` order); ``expression``.
    """

    D: int
    n: int
    kind: str
    neighbourhood: tuple[Site, ...] = ()
    shift: Site = ()
    mapping: tuple[int, ...] = ()
    table: tuple[int, ...] = ()
    expression: str = ""
    name: str = ""

    def __post_init__(self):
        if self.kind == "identity":
            object.__setattr__(self, "neighbourhood", ((0,) * self.D,))
        elif self.kind == "shift":
            v = tuple(int(x) for x in self.shift)
            if len(v) != self.D:
                raise SpecMismatch("shift vector dimension")
            object.__setattr__(self, "shift", v)
            object.__setattr__(self, "neighbourhood", (v,))
        elif self.kind == "symbol-map":
            if len(self.mapping) != self.n or any(not 0 <= m < self.n for m in self.mapping):
                raise SchemaError("symbol map must be total on the alphabet")
            object.__setattr__(self, "neighbourhood", ((0,) * self.D,))
        elif self.kind == "table":
            H = tuple(tuple(int(x) for x in h) for h in self.neighbourhood)
            object.__setattr__(self, "neighbourhood", H)
            if len(self.table) != self.n ** len(H) or any(not 0 <= t < self.n for t in self.table):
                raise SchemaError(f"table must list {self.n ** len(H)} images in range")
        elif self.kind == "expression":
            tree = _parse_expression(self.expression, self.D)
            offs = sorted({o for o in _offsets_in(tree)})
            object.__setattr__(self, "neighbourhood", tuple(offs) if offs else ((0,) * self.D,))
        else:
            raise SchemaError(f"unknown CA kind {self.kind}")

    @property
    def radius(self) -> int:
        return max((linf(h) for h in self.neighbourhood), default=0)

    def apply_block(self, arr: np.ndarray) -> np.ndarray:
        """Image on the interior: output shape is the input shape minus ``2q`` per axis."""
        q = self.radius
        if any(s <= 2 * q for s in arr.shape):
            raise WindowTooSmall(f"window {arr.shape} too small for radius {q}")
        out_shape = tuple(s - 2 * q for s in arr.shape)

        def shifted(h):
            return arr[tuple(slice(q + d, q + d + m) for d, m in zip(h, out_shape))]

        if self.kind in ("identity", "shift"):
            return shifted(self.neighbourhood[0]).copy()
        if self.kind == "symbol-map":
            return np.asarray(self.mapping, dtype=np.int64)[arr]
        if self.kind == "table":
            code = np.zeros(out_shape, dtype=np.int64)
            for h in self.neighbourhood:
                code = code * self.n + shifted(h)
            return np.asarray(self.table, dtype=np.int64)[code]
        tree = _parse_expression(self.expression, self.D)
        val = _eval(tree.body, shifted, out_shape)
        return np.mod(np.broadcast_to(val, out_shape), self.n).astype(np.int64)

    def local(self, neighbours: Sequence[int]) -> int:
        """``phi`` on one neighbourhood pattern (read in ``H`` order)."""
        H = self.neighbourhood
        q = self.radius
        arr = np.zeros((2 * q + 1,) * self.D, dtype=np.int64)
        for h, s in zip(H, neighbours):
            arr[tuple(q + x for x in h)] = s
        return int(self.apply_block(arr).ravel()[0])


def identity_ca(D: int, n: int) -> CaRule:
    return CaRule(D, n, "identity", name="identity")


def shift_ca(D: int, n: int, v: Sequence[int]) -> CaRule:
    return CaRule(D, n, "shift", shift=tuple(v), name=f"shift{tuple(v)}")


def symbol_map_ca(D: int, mapping: Sequence[int], name: str = "") -> CaRule:
    return CaRule(D, len(mapping), "symbol-map", mapping=tuple(int(m) for m in mapping), name=name)


def apply(ca: CaRule, cfg: Configuration) -> Configuration:
    """Image window: shrinks by ``q`` per side, or keeps its size when periodic."""
    if ca.D != cfg.D:
        raise SpecMismatch("CA and configuration dimensions differ")
    q = ca.radius
    if cfg.periodic:
        padded = np.pad(cfg.cells, q, mode="wrap")
        return Configuration(ca.apply_block(padded), cfg.origin, True)
    out = ca.apply_block(cfg.cells)
    return Configuration(out, tuple(o + q for o in cfg.origin), False)


def iterate(ca: CaRule, cfg: Configuration, steps: int) -> list[Configuration]:
    out = [cfg]
    for _ in range(steps):
        out.append(apply(ca, out[-1]))
    return out


# ---------------------------------------------------------------------------
# expression language


_ALLOWED_BIN = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply}
_CMP = {ast.Eq: np.equal, ast.NotEq: np.not_equal, ast.Lt: np.less, ast.LtE: np.less_equal, ast.Gt: np.greater, ast.GtE: np.greater_equal}


def _parse_expression(text: str, D: int) -> ast.Expression:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as e:
        raise SchemaError(f"bad expression: {e}") from None
    for node in ast.walk(tree):
        ok = isinstance(
            node,
            (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Subscript, ast.Name, ast.Tuple, ast.Load,
             ast.Compare, ast.IfExp, ast.Call, ast.USub, ast.UAdd, ast.Mod, ast.FloorDiv, *_ALLOWED_BIN, *_CMP),
        )
        if not ok:
            raise SchemaError(f"construct {type(node).__name__} not allowed in expressions")
        if isinstance(node, ast.Constant) and not isinstance(node.value, int):
            raise SchemaError("only integer constants")
        if isinstance(node, ast.Name) and node.id not in ("a", "min", "max", "abs"):
            raise SchemaError(f"unknown name {node.id}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in ("min", "max", "abs")):
            raise SchemaError("only min, max, abs may be called")
        if isinstance(node, ast.Subscript):
            if not (isinstance(node.value, ast.Name) and node.value.id == "a"):
                raise SchemaError("only a[...] may be indexed")
            off = _offset_of(node)
            if len(off) != D:
                raise SchemaError(f"a[...] needs {D} offsets")
    return tree


def _offset_of(node: ast.Subscript) -> Site:
    sl = node.slice
    elts = sl.elts if isinstance(sl, ast.Tuple) else [sl]
    out = []
    for e in elts:
        try:
            v = ast.literal_eval(e)
        except ValueError:
            raise SchemaError("offsets must be integer literals") from None
        if not isinstance(v, int):
            raise SchemaError("offsets must be integer literals")
        out.append(v)
    return tuple(out)


def _offsets_in(tree) -> list[Site]:
    return [_offset_of(n) for n in ast.walk(tree) if isinstance(n, ast.Subscript)]


def _eval(node, shifted, shape) -> Any:
    if isinstance(node, ast.Constant):
        return np.int64(node.value)
    if isinstance(node, ast.Subscript):
        return shifted(_offset_of(node)).astype(np.int64)
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, shifted, shape)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a = _eval(node.left, shifted, shape)
        b = _eval(node.right, shifted, shape)
        if isinstance(node.op, (ast.Mod, ast.FloorDiv)):
            a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
            safe = np.where(b == 0, 1, b)
            res = np.mod(a, safe) if isinstance(node.op, ast.Mod) else np.floor_divide(a, safe)
            return np.where(b == 0, 0, res)
        return _ALLOWED_BIN[type(node.op)](a, b)
    if isinstance(node, ast.Compare):
        left = _eval(node.left, shifted, shape)
        acc = None
        for op, comp in zip(node.ops, node.comparators):
            right = _eval(comp, shifted, shape)
            r = _CMP[type(op)](left, right)
            acc = r if acc is None else (acc & r)
            left = right
        return acc.astype(np.int64)
    if isinstance(node, ast.IfExp):
        return np.where(_eval(node.test, shifted, shape) != 0, _eval(node.body, shifted, shape), _eval(node.orelse, shifted, shape))
    if isinstance(node, ast.Call):
        args = [np.broadcast_to(_eval(a, shifted, shape), shape) for a in node.args]
        if node.func.id == "abs":
            return np.abs(args[0])
        f = np.minimum if node.func.id == "min" else np.maximum
        acc = args[0]
        for a in args[1:]:
            acc = f(acc, a)
        return acc
    raise SchemaError(f"unsupported node {type(node).__name__}")


# ---------------------------------------------------------------------------
# invariance and the defect-field drop


@dataclass(frozen=True)
class InvarianceResult:
    verdict: str  # proved-on-blocks | counterexample | inconclusive
    counterexample: np.ndarray | None = None
    checked: int = 0

    @property
    def proved(self) -> bool:
        return self.verdict == "proved-on-blocks"


def check_invariance(ca: CaRule, spec: SftSpec, budget: int = 200_000) -> InvarianceResult:
    """Is the image of every admissible ``(R+q)``-block an admissible ``R``-block?"""
    if ca.D != spec.D or ca.n != spec.n:
        raise SpecMismatch("CA alphabet or dimension differs from the SFT")
    if ca.kind in ("identity", "shift"):
        return InvarianceResult("proved-on-blocks")
    R, q = spec.radius, ca.radius
    if ca.kind == "symbol-map" and spec.kind == "pairs":
        m = ca.mapping
        for a in range(spec.n):
            if spec.allowed_mask[a] and not spec.allowed_mask[m[a]]:
                return InvarianceResult("counterexample", np.array([a]))
        for i, rel in enumerate(spec.pairs):
            for a, b in rel:
                if spec.allowed_mask[a] and spec.allowed_mask[b] and (m[a], m[b]) not in rel:
                    blk = np.array([a, b], dtype=np.int64).reshape([2 if k == i else 1 for k in range(spec.D)])
                    return InvarianceResult("counterexample", blk)
        return InvarianceResult("proved-on-blocks")
    from .symbolic import box_offsets, enumerate_patches

    r = R + q
    pats = enumerate_patches(spec, box_offsets(spec.D, (-r,) * spec.D, (r,) * spec.D), limit=budget + 1)
    if len(pats) > budget:
        return InvarianceResult("inconclusive", None, budget)
    side = 2 * r + 1
    for p in pats:
        blk = p.reshape((side,) * spec.D)
        img = ca.apply_block(blk)
        if not block_ok(spec, img):
            return InvarianceResult("counterexample", blk, 0)
    return InvarianceResult("proved-on-blocks", None, len(pats))


@dataclass(frozen=True)
class DropCheck:
    ok: bool
    worst_site: Site | None
    worst_margin: int
    inclusion_ok: bool


def energy_drop_check(ca: CaRule, spec: SftSpec, cfg: Configuration) -> DropCheck:
    """``F_{Phi(a)}(z) >= F_a(z) - q`` on the image window, and ``G_{R+q}(a)`` inside ``G_R(Phi(a))``."""
    q, R = ca.radius, spec.radius
    img = apply(ca, cfg)
    f0 = defect_field(cfg, spec)
    f1 = defect_field(img, spec)
    off = tuple(a - b for a, b in zip(img.origin, cfg.origin))
    sl = tuple(slice(o, o + s) for o, s in zip(off, img.shape))
    v0 = f0.values[sl]
    margin = f1.values - (v0 - q)
    worst = np.unravel_index(int(np.argmin(margin)), margin.shape)
    # window-bound values are lower bounds: a failed inclusion needs a certain member on the left
    G0 = v0 >= R + q
    G1 = f1.unflawed_mask(R)
    inclusion = bool((~G0 | G1).all())
    m = int(margin[worst])
    return DropCheck(m >= 0 and inclusion, tuple(o + int(i) for o, i in zip(img.origin, worst)), m, inclusion)
