"""Defect invariants: loop residues, shell values of equivariant cochains, cross-boundary gaps, tilt, persistence."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .automaton import CaRule, apply, check_invariance, energy_drop_check
from .cocycles import (
    CocycleRule,
    EquivariantCochainRule,
    eval_equivariant,
    evaluate_trail,
    export_to_integer,
    pullback,
)
from .errors import (
    AmbiguousPath,
    DefectLabError,
    DefectNotEnclosable,
    DegreeUnsupported,
    NoBoundary,
    NoEnclosingRing,
    NoNontrivialPseudonorm,
    OutOfWindow,
    TrailExitsWindow,
    UnsupportedDimension,
    WindowExhausted,
    WindowTooSmall,
)
from .groups import FgAbelian, FreeGroup, FreeProductZ2Z2, GroupElement
from .lattice import Site, Trail, add, boundary, box_chain, enclosing_rings, l1, rectangle_ring, unit
from .symbolic import Classification, Configuration, SftSpec, classify_defect, patch_ok, defect_field


def _element_json(g: GroupElement) -> dict:
    from .io import element_to_json

    return element_to_json(g)


# ---------------------------------------------------------------------------
# residues


@dataclass(frozen=True)
class Residue:
    component: int
    loop: Trail
    value: GroupElement
    check_loop: Trail | None
    check_value: GroupElement | None

    @property
    def consistent(self) -> bool:
        return self.check_value is None or self.check_value.payload == self.value.payload

    @property
    def verdict(self) -> str:
        # a trivial residue proves nothing
        return "inconclusive" if self.value.is_identity() else "essential"

    def to_json(self) -> dict:
        return {
            "component": self.component,
            "loop_corners": [list(self.loop.sites[0]), list(self.loop.sites[len(self.loop) // 2])],
            "loop_length": len(self.loop) - 1,
            "value": _element_json(self.value),
            "text": repr(self.value),
            "consistent": self.consistent,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class DefectReport:
    classification: Classification
    residues: tuple[Residue, ...] = ()
    tilts: tuple["GapAnalysis", ...] = ()
    r: int = 1
    R: int = 1
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "classification": self.classification.to_json(),
            "residues": [x.to_json() for x in self.residues],
            "tilt": [t.to_json() for t in self.tilts],
            "r": self.r,
            "R": self.R,
            "notes": list(self.notes),
        }


def _rings(hole, region) -> list[tuple[int, int, int, int]]:
    rings = enclosing_rings(hole, region)
    if not rings:
        raise NoEnclosingRing("no rectangular ring in G_r separates this hole", size=len(hole))
    return rings


def _disjoint_ring(rings, first) -> tuple[int, int, int, int] | None:
    """A second enclosing ring sharing no site with the first."""
    a = set(rectangle_ring(*first).sites)
    for rg in rings[1:]:
        if not a & set(rectangle_ring(*rg).sites):
            return rg
    return rings[1] if len(rings) > 1 else None


def residue_report(cfg: Configuration, spec: SftSpec, rule: CocycleRule, r: int | None = None) -> DefectReport:
    """Residue of ``rule`` on the smallest counterclockwise ring around each hole of ``G_r``.

    Each residue is re-evaluated on a second enclosing ring; equality is
    recorded as ``consistent``.
    """
    if cfg.D != 2:
        raise UnsupportedDimension("loop residues are planar; use d_pole_search in higher dimensions")
    r = spec.radius if r is None else r
    fld = defect_field(cfg, spec)
    cl = classify_defect(cfg, spec, r, fld)
    region = fld.site_set(fld.unflawed_mask(r))
    out = []
    for k, hole in enumerate(cl.holes):
        rings = _rings(hole, region)
        loop = rectangle_ring(*rings[0])
        val = evaluate_trail(rule, cfg, loop)
        second = _disjoint_ring(rings, rings[0])
        chk_loop = rectangle_ring(*second) if second else None
        chk = evaluate_trail(rule, cfg, chk_loop) if chk_loop else None
        out.append(Residue(k, loop, val, chk_loop, chk))
    return DefectReport(cl, tuple(out), (), r, spec.radius)


def residue(cfg: Configuration, spec: SftSpec, rule: CocycleRule, r: int | None = None) -> list[GroupElement]:
    return [x.value for x in residue_report(cfg, spec, rule, r).residues]


# ---------------------------------------------------------------------------
# d-poles


@dataclass(frozen=True)
class Shell:
    lo: Site
    hi: Site  # exclusive
    value: GroupElement

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "size": self.hi[0] - self.lo[0], "value": _element_json(self.value)}


@dataclass(frozen=True)
class DPole:
    component: frozenset
    shells: tuple[Shell, ...]

    @property
    def value(self) -> GroupElement:
        return self.shells[0].value

    @property
    def consistent(self) -> bool:
        return all(s.value.payload == self.value.payload for s in self.shells)

    @property
    def is_pole(self) -> bool:
        return not self.value.is_identity()

    def to_json(self) -> dict:
        return {"component_size": len(self.component), "shells": [s.to_json() for s in self.shells],
                "consistent": self.consistent, "pole": self.is_pole}


def _shell_ok(cfg: Configuration, spec: SftSpec, eq: EquivariantCochainRule, lo: Site, hi: Site) -> bool:
    """Every face of the box boundary reads an admissible, fully windowed face block."""
    rho = eq.radius
    chain = boundary(box_chain(lo, hi))
    for cell in chain.terms:
        blo = tuple(b - rho for b in cell.base)
        bhi = tuple(b + (rho if a in cell.axes else rho - 1) for a, b in enumerate(cell.base))
        try:
            fb = cfg.box(blo, bhi)
        except OutOfWindow:
            return False
        if not patch_ok(spec, fb):
            return False
    return True


def d_pole_search(cfg: Configuration, spec: SftSpec, eq: EquivariantCochainRule, r: int | None = None,
                  shells: int = 2, max_size: int | None = None) -> list[DPole]:
    """Evaluate a degree ``D-1`` cochain on nested cubical shells around each defect component.

    Components are ``3^D``-connected pieces of the complement of ``G_r``.  Boxes
    are centred on the component and grow by 2; a shell is used when all its
    face blocks are admissible and its interior meets no other component.
    """
    D, d = cfg.D, eq.degree
    if d != D - 1:
        raise DegreeUnsupported("shell search needs a cochain of degree D-1")
    r = spec.radius if r is None else r
    fld = defect_field(cfg, spec)
    bad = ~fld.unflawed_mask(r)
    lab, n = ndimage.label(bad, structure=np.ones((3,) * D, bool))
    comps = [fld.site_set(lab == k) for k in range(1, n + 1)]
    comps.sort(key=min)
    max_size = max_size or max(cfg.shape)
    out = []
    for comp in comps:
        mins = [min(z[i] for z in comp) for i in range(D)]
        maxs = [max(z[i] for z in comp) for i in range(D)]
        s = max(b - a + 1 for a, b in zip(mins, maxs))
        others = set().union(*(c for c in comps if c is not comp)) if len(comps) > 1 else set()
        found: list[Shell] = []
        while s <= max_size and len(found) < shells:
            lo = tuple(math.ceil((a + b) / 2) - (s - 1) // 2 for a, b in zip(mins, maxs))
            hi = tuple(x + s for x in lo)
            inside_other = any(all(l <= z[i] < h for i, (l, h) in enumerate(zip(lo, hi))) for z in others)
            contains = all(all(l <= z[i] < h for i, (l, h) in enumerate(zip(lo, hi))) for z in comp)
            if contains and not inside_other and _shell_ok(cfg, spec, eq, lo, hi):
                found.append(Shell(lo, hi, eval_equivariant(eq, cfg, boundary(box_chain(lo, hi)))))
            s += 1 if not found else 2
        if not found:
            raise DefectNotEnclosable("no admissible shell around a defect component", size=len(comp))
        out.append(DPole(comp, tuple(found)))
    return out


# ---------------------------------------------------------------------------
# heights and gaps


def _vector(g: GroupElement) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(free part, torsion orders) of an abelian image of ``g``."""
    G = g.group
    if isinstance(G, FgAbelian):
        return g.payload, G.torsion
    if isinstance(G, FreeGroup):
        return G.abelianize(g), ()
    if isinstance(G, FreeProductZ2Z2):
        return (export_to_integer(g),), ()
    raise NoNontrivialPseudonorm(f"no abelian image for {G}")


@dataclass(frozen=True)
class HeightMap:
    """``h(y) = C(trail ref -> y)`` on one simply connected component."""

    component: frozenset
    ref: Site
    heights: dict

    def __call__(self, y: Sequence[int]) -> GroupElement:
        try:
            return self.heights[tuple(y)]
        except KeyError:
            raise OutOfWindow(f"{tuple(y)} not in the component of {self.ref}") from None


def _has_holes(comp: frozenset, cfg: Configuration) -> bool:
    D = cfg.D
    lo = [min(z[i] for z in comp) for i in range(D)]
    hi = [max(z[i] for z in comp) for i in range(D)]
    mask = np.ones(tuple(h - l + 3 for l, h in zip(lo, hi)), dtype=bool)
    for z in comp:
        mask[tuple(c - l + 1 for c, l in zip(z, lo))] = False
    _, n = ndimage.label(mask, structure=np.ones((3,) * D, bool))
    return n > 1


def height_map(cfg: Configuration, rule: CocycleRule, component: Sequence[Sequence[int]], ref: Sequence[int],
               check_holes: bool = True) -> HeightMap:
    comp = frozenset(tuple(z) for z in component)
    ref = tuple(ref)
    if ref not in comp:
        raise OutOfWindow(f"reference {ref} not in component")
    if check_holes and _has_holes(comp, cfg):
        raise AmbiguousPath("component has holes; heights depend on the path")
    D = cfg.D
    h: dict[Site, GroupElement] = {ref: rule.group.identity()}
    queue = deque([ref])
    while queue:
        z = queue.popleft()
        for i in range(D):
            for s in (1, -1):
                y = add(z, unit(D, i, s))
                if y not in comp:
                    continue
                try:
                    v = rule.value_at(cfg, z, i, s) * h[z]
                except TrailExitsWindow:
                    continue
                if y in h:
                    if h[y].payload != v.payload:
                        raise AmbiguousPath("step values disagree around a loop in the component", site=y)
                else:
                    h[y] = v
                    queue.append(y)
    return HeightMap(comp, ref, h)


def cgap(cfg: Configuration, rule: CocycleRule, y: Sequence[int], z: Sequence[int],
         refs: Sequence[Sequence[int]], spec: SftSpec | None = None, r: int | None = None,
         components: Sequence[frozenset] | None = None) -> GroupElement:
    """``cgap(y, z) = cgap(y, y*) * cgap(z*, z)`` with ``y*, z*`` the references of their components.

    Within one component this is the trail value from ``z`` to ``y``.
    Components default to those of ``G_r`` for ``spec``.
    """
    y, z = tuple(y), tuple(z)
    if y == z:
        return rule.group.identity()
    if components is None:
        if spec is None:
            raise NoBoundary("give the SFT or the components")
        r = spec.radius if r is None else r
        components = classify_defect(cfg, spec, r).components
    maps = {}
    for ref in refs:
        ref = tuple(ref)
        for c in components:
            if ref in c:
                maps[c] = height_map(cfg, rule, c, ref)
    def hm(p):
        for c, m in maps.items():
            if p in c:
                return m
        raise OutOfWindow(f"{p} lies in no referenced component")
    return hm(y)(y) * hm(z)(z).inverse()


@dataclass(frozen=True)
class GapAnalysis:
    components: tuple[frozenset, ...]
    refs: tuple[Site, ...]
    schedule: tuple[int, ...]
    samples: tuple[float, ...]  # s(L)
    same_component_max: float
    fit_slope: float
    scale: float
    verdict: str  # bounded | diverging(window-limited) | inconclusive
    sharpness: str
    anchor: Site
    seed: int

    @property
    def lipschitz_ok(self) -> bool:
        return self.same_component_max <= 1 + 1e-9

    def to_json(self) -> dict:
        return {
            "components": len(self.components),
            "refs": [list(x) for x in self.refs],
            "schedule": list(self.schedule),
            "samples": [round(x, 6) for x in self.samples],
            "same_component_max": round(self.same_component_max, 6),
            "fit_slope": round(self.fit_slope, 6),
            "scale": self.scale,
            "verdict": self.verdict,
            "sharpness": self.sharpness,
            "anchor": list(self.anchor),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TiltConfig:
    slope_threshold: float = 0.1
    max_multiple: float = 4.0
    pairs_per_radius: int = 40_000
    seed: int = 0


def _norm_rows(V: np.ndarray, torsion: tuple[int, ...]) -> np.ndarray:
    k = V.shape[1] - len(torsion)
    out = np.abs(V[:, :k]).sum(axis=1).astype(float)
    for j, n in enumerate(torsion):
        t = np.mod(V[:, k + j], n)
        out += np.minimum(t, n - t)
    return out


def _sharpness(fld_mask: np.ndarray, R: int) -> str:
    """'sharp' when the defect set sits in a slab of thickness at most 2R+1 across some axis."""
    idx = np.argwhere(fld_mask)
    if len(idx) == 0:
        return "unknown"
    for i in range(idx.shape[1]):
        if idx[:, i].max() - idx[:, i].min() + 1 <= 2 * R + 1:
            return "sharp"
    return "unknown"


def tilt_estimate(cfg: Configuration, spec: SftSpec, rule: CocycleRule, r: int | None = None,
                  schedule: Sequence[int] | None = None, refs: Sequence[Sequence[int]] | None = None,
                  config: TiltConfig = TiltConfig()) -> GapAnalysis:
    """Window-limited tilt: ``s(L)`` is the largest ``|cgap(y, z)| / |y - z|_1`` over pairs in the box of radius ``L``.

    Pairs are drawn from every pair of components (including a component with
    itself) inside the box around the anchor (centre of the defect set).  Norms
    are divided by ``scale``, the largest step norm seen, so unit-Lipschitz
    behaviour reads as ``s <= 1``.
    """
    r = spec.radius if r is None else r
    fld = defect_field(cfg, spec)
    cl = classify_defect(cfg, spec, r, fld)
    if cl.kind == "none":
        comps = [frozenset(cfg.sites())]
    else:
        comps = [c for c in cl.components if len(c) > 1]
    if not comps:
        raise NoBoundary("no unflawed component to sample")
    X = fld.violations
    if X.any():
        anchor = tuple(int(round(float(np.mean(c)))) + o for c, o in zip(np.nonzero(X), cfg.origin))
    else:
        anchor = tuple(o + s // 2 for o, s in zip(cfg.origin, cfg.shape))
    if refs is None:
        refs = [min(c, key=lambda z: (l1(z, anchor), z)) for c in comps]
    refs = [tuple(x) for x in refs]
    maps = []
    for c in comps:
        ref = next((x for x in refs if x in c), None)
        if ref is None:
            raise NoBoundary("a component has no reference site")
        maps.append(height_map(cfg, rule, c, ref))
    # abelian image, vectorized
    torsion: tuple[int, ...] | None = None
    sites, vecs, labels = [], [], []
    for k, m in enumerate(maps):
        for z, g in m.heights.items():
            v, t = _vector(g)
            torsion = t
            sites.append(z)
            vecs.append(v)
            labels.append(k)
    S = np.asarray(sites, dtype=np.int64)
    V = np.asarray(vecs, dtype=np.int64)
    Lab = np.asarray(labels)
    scale = 1.0
    for m in maps:
        for z, g in m.heights.items():
            for i in range(cfg.D):
                y = add(z, unit(cfg.D, i))
                if y in m.heights:
                    dv = np.asarray(_vector(m.heights[y])[0]) - np.asarray(_vector(g)[0])
                    scale = max(scale, float(_norm_rows(dv[None, :], torsion)[0]))
    rng = np.random.default_rng(config.seed)
    Lmax = max(1, min(max(abs(a - o), abs(o + s - 1 - a)) for a, o, s in zip(anchor, cfg.origin, cfg.shape)))
    if schedule is None:
        schedule = sorted({max(2, int(round(Lmax * f))) for f in (0.25, 0.4, 0.55, 0.7, 0.85, 1.0)})
    samples, same_max = [], 0.0
    A = np.asarray(anchor)
    for L in schedule:
        inside = np.nonzero(np.abs(S - A).max(axis=1) <= L)[0]
        if len(inside) < 2:
            samples.append(0.0)
            continue
        total = len(inside) * (len(inside) - 1) // 2
        if total <= config.pairs_per_radius:
            i, j = np.triu_indices(len(inside), 1)
        else:
            i = rng.integers(0, len(inside), config.pairs_per_radius)
            j = rng.integers(0, len(inside), config.pairs_per_radius)
            keep = i != j
            i, j = i[keep], j[keep]
        a, b = inside[i], inside[j]
        sep = np.abs(S[a] - S[b]).sum(axis=1)
        ratio = _norm_rows(V[a] - V[b], torsion) / scale / sep
        samples.append(float(ratio.max()))
        same = Lab[a] == Lab[b]
        if same.any():
            same_max = max(same_max, float(ratio[same].max()))
    Ls = np.asarray(schedule, dtype=float)
    sv = np.asarray(samples)
    slope = float(np.polyfit(Ls, sv, 1)[0]) if len(Ls) >= 2 else 0.0
    if len(comps) >= 2 and slope > config.slope_threshold and sv.max() > config.max_multiple:
        verdict = "diverging(window-limited)"
    elif slope <= config.slope_threshold and sv.max() <= config.max_multiple:
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    sharp = _sharpness(X, spec.radius) if len(comps) >= 2 else "unknown"
    return GapAnalysis(tuple(comps), tuple(refs), tuple(int(x) for x in schedule), tuple(samples), same_max, slope,
                       scale, verdict, sharp, anchor, config.seed)


# ---------------------------------------------------------------------------
# full analysis


def analyze(cfg: Configuration, spec: SftSpec, rule: CocycleRule | None = None, r: int | None = None,
            tilt: TiltConfig | None = None) -> DefectReport:
    """Classification, then residues (planar holes) and tilt (domain boundaries) where the rule allows."""
    r = spec.radius if r is None else r
    cl = classify_defect(cfg, spec, r)
    notes: list[str] = []
    residues: tuple[Residue, ...] = ()
    tilts: tuple[GapAnalysis, ...] = ()
    if rule is not None and cfg.D == 2 and cl.holes:
        try:
            residues = residue_report(cfg, spec, rule, r).residues
        except DefectLabError as e:
            notes.append(f"residues skipped: {e.code}: {e}")
    if rule is not None and cl.kind in ("domain-boundary", "mixed"):
        try:
            tilts = (tilt_estimate(cfg, spec, rule, r, config=tilt or TiltConfig()),)
        except DefectLabError as e:
            notes.append(f"tilt skipped: {e.code}: {e}")
    return DefectReport(cl, residues, tilts, r, spec.radius, tuple(notes))


# ---------------------------------------------------------------------------
# persistence


@dataclass(frozen=True)
class PersistenceStep:
    t: int
    classification: Classification
    residues: tuple[GroupElement, ...]
    pullback_ok: bool | None  # Res_{Phi(a)} C == Res_a(Phi_* C) on this step's loops
    drop_ok: bool | None
    tilt_verdict: str | None

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "kind": self.classification.kind,
            "holes": len(self.classification.holes),
            "residues": [_element_json(g) for g in self.residues],
            "pullback_ok": self.pullback_ok,
            "drop_ok": self.drop_ok,
            "tilt": self.tilt_verdict,
        }


@dataclass(frozen=True)
class PersistenceReport:
    ca_name: str
    invariance: str
    steps: tuple[PersistenceStep, ...]

    @property
    def residues_constant(self) -> bool:
        first = [g.payload for g in self.steps[0].residues]
        return all([g.payload for g in s.residues] == first for s in self.steps)

    @property
    def identities_ok(self) -> bool:
        return all(s.pullback_ok is not False and s.drop_ok is not False for s in self.steps)

    def to_json(self) -> dict:
        return {"ca": self.ca_name, "invariance": self.invariance, "steps": [s.to_json() for s in self.steps],
                "residues_constant": self.residues_constant, "identities_ok": self.identities_ok}


def persistence_experiment(cfg: Configuration, spec: SftSpec, rule: CocycleRule | None, ca: CaRule, steps: int,
                           r: int | None = None, tilt: bool = False) -> PersistenceReport:
    """Iterate ``ca`` and re-analyze each image.

    At every step ``t >= 1`` the residue of ``rule`` on each loop around a hole of
    ``Phi(a)`` is compared with the pulled-back rule evaluated on ``a`` along the
    same loop, and the defect-field drop bound is checked.
    """
    r = spec.radius if r is None else r
    inv = check_invariance(ca, spec).verdict
    pulled = pullback(rule, ca) if rule is not None else None
    out: list[PersistenceStep] = []
    prev: Configuration | None = None
    cur = cfg
    for t in range(steps + 1):
        if t > 0:
            try:
                cur = apply(ca, prev)
            except WindowTooSmall as e:
                raise WindowExhausted(f"window exhausted at step {t}", step=t) from e
        try:
            fld = defect_field(cur, spec)
        except WindowTooSmall as e:
            raise WindowExhausted(f"window exhausted at step {t}", step=t) from e
        cl = classify_defect(cur, spec, r, fld) if cur.D in (2, 3) else Classification("other", (), (), (), r)
        res: list[GroupElement] = []
        pb_ok: bool | None = None
        if rule is not None and cur.D == 2 and cl.holes:
            region = fld.site_set(fld.unflawed_mask(r))
            pb_ok = True if prev is not None else None
            for hole in cl.holes:
                try:
                    loop = rectangle_ring(*_rings(hole, region)[0])
                except NoEnclosingRing as e:
                    raise WindowExhausted(f"hole not enclosable at step {t}", step=t) from e
                val = evaluate_trail(rule, cur, loop)
                res.append(val)
                if prev is not None:
                    try:
                        back = evaluate_trail(pulled, prev, loop)
                        pb_ok = pb_ok and back.payload == val.payload
                    except TrailExitsWindow:
                        pb_ok = False
        drop = energy_drop_check(ca, spec, prev).ok if prev is not None else None
        tv = None
        if tilt and rule is not None and cl.kind in ("domain-boundary", "mixed"):
            try:
                tv = tilt_estimate(cur, spec, rule, r).verdict
            except DefectLabError:
                tv = "unavailable"
        out.append(PersistenceStep(t, cl, tuple(res), pb_ok, drop, tv))
        prev = cur
    return PersistenceReport(ca.name or ca.kind, inv, tuple(out))
