"""Command-line front end.

Inputs come either from a bundled fixture (``--fixture NAME``) or from a
project file (``--project FILE`` with ``--config``/``--cocycle``/``--ca`` names).
Results go to stdout (text, or JSON with ``--json``).  Errors go to stderr as
JSON with exit code 2.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from . import complexes, fixtures
from .automaton import CaRule, identity_ca, shift_ca, symbol_map_ca
from .cocycles import (
    CocycleRule,
    EquivariantCochainRule,
    TileRule,
    check_cocycle_conditions,
    check_equivariant_cocycle,
    cohomologous_search,
    pullback,
)
from .defects import TiltConfig, analyze, persistence_experiment, residue_report, tilt_estimate
from .errors import DefectLabError, SchemaError, SpecMismatch
from .groups import FgAbelian, Z, ext_group
from .io import Project, dumps, load_project, save_project
from .symbolic import Configuration, SftSpec, WangTileSet, defect_field, render_ascii


def threads() -> int:
    """Worker cap from ``DEFECTLAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("DEFECTLAB_THREADS", "1")))
    except ValueError:
        raise SchemaError("DEFECTLAB_THREADS must be an integer") from None


@dataclass
class Inputs:
    spec: SftSpec
    tiles: WangTileSet | None
    config: Configuration | None
    rule: CocycleRule | None
    eqrule: EquivariantCochainRule | None
    cas: dict[str, CaRule]
    meta: dict
    project: Project | None


def fixture_project(fx: fixtures.Fixture) -> Project:
    p = Project(fx.name, fx.spec, fx.tiles)
    if fx.config is not None:
        p.configurations["main"] = fx.config
    if isinstance(fx.rule, TileRule):
        p.cocycles["main"] = fx.rule
    if fx.eqrule is not None:
        p.equivariant["main"] = fx.eqrule
    p.analysis = json.loads(json.dumps(fx.meta))
    return p


def _pick(d: dict, name: str | None, what: str):
    if not d:
        return None
    if name is None:
        return d.get("main", next(iter(d.values())))
    if name not in d:
        raise SchemaError(f"no {what} named {name!r}", available=sorted(d))
    return d[name]


def resolve(args) -> Inputs:
    if getattr(args, "fixture", None):
        fx = fixtures.fixture(args.fixture)
        return Inputs(fx.spec, fx.tiles, fx.config, fx.rule, fx.eqrule, {}, dict(fx.meta), None)
    if getattr(args, "project", None):
        p = load_project(args.project)
        return Inputs(p.spec, p.tiles, _pick(p.configurations, args.config, "configuration"),
                      _pick(p.cocycles, args.cocycle, "cocycle"), _pick(p.equivariant, None, "cochain"),
                      dict(p.cas), dict(p.analysis), p)
    raise SchemaError("give --fixture NAME or --project FILE")


def parse_ca(text: str, inp: Inputs) -> CaRule:
    """``identity``, ``shift:1,0``, ``reversal`` (ice arrow reversal) or a project CA name."""
    D, n = inp.spec.D, inp.spec.n
    if text in inp.cas:
        return inp.cas[text]
    if text == "identity":
        return identity_ca(D, n)
    if text.startswith("shift:"):
        v = tuple(int(x) for x in text[6:].split(","))
        if len(v) != D:
            raise SpecMismatch(f"shift vector needs {D} entries")
        return shift_ca(D, n, v)
    if text == "reversal":
        if inp.spec.name != fixtures.ice_spec().name:
            raise SpecMismatch("arrow reversal is defined for the ice SFT")
        return symbol_map_ca(D, fixtures.ice_reversal_map(), "reversal")
    raise SchemaError(f"unknown CA {text!r}")


def _need(x, what: str):
    if x is None:
        raise SchemaError(f"input has no {what}")
    return x


def _fmt(g) -> str:
    fmt = getattr(g.group, "format", None)
    return fmt(g) if fmt else repr(g)


def _emit(args, payload: dict, text: str) -> None:
    print(dumps(payload) if args.json else text)


# ---------------------------------------------------------------------------
# commands


def cmd_fixtures(args) -> int:
    if args.action == "list":
        for name in fixtures.names():
            fx = fixtures.fixture(name)
            print(f"{name}\t{fx.description}")
        return 0
    if not args.name:
        raise SchemaError("fixtures emit needs a name")
    p = fixture_project(fixtures.fixture(args.name))
    if args.output:
        save_project(p, args.output)
    else:
        print(json.dumps(p.to_json(), indent=1, sort_keys=True))
    return 0


def cmd_analyze(args) -> int:
    inp = resolve(args)
    cfg = _need(inp.config, "configuration")
    rep = analyze(cfg, inp.spec, inp.rule, args.radius, TiltConfig(seed=args.seed))
    out = rep.to_json()
    ascii_map = render_ascii(defect_field(cfg, inp.spec)) if cfg.D == 2 else ""
    if args.json:
        out["map"] = ascii_map
        print(dumps(out))
    else:
        print(json.dumps(out, indent=1, sort_keys=True))
        if ascii_map:
            print(ascii_map)
    return 0


def cmd_residue(args) -> int:
    inp = resolve(args)
    rep = residue_report(_need(inp.config, "configuration"), inp.spec, _need(inp.rule, "cocycle"), args.radius)
    lines = [_fmt(x.value) for x in rep.residues]
    _emit(args, {"residues": [x.to_json() for x in rep.residues], "kind": rep.classification.kind}, "\n".join(lines))
    return 0


def cmd_tilt(args) -> int:
    inp = resolve(args)
    refs = None
    if "x_ref" in inp.meta and "y_ref" in inp.meta:
        refs = (tuple(inp.meta["x_ref"]), tuple(inp.meta["y_ref"]))
    ga = tilt_estimate(_need(inp.config, "configuration"), inp.spec, _need(inp.rule, "cocycle"), args.radius,
                       refs=refs, config=TiltConfig(seed=args.seed))
    out = ga.to_json()
    _emit(args, out, f"{out['verdict']}")
    return 0


def cmd_evolve(args) -> int:
    inp = resolve(args)
    ca = parse_ca(args.ca, inp)
    rep = persistence_experiment(_need(inp.config, "configuration"), inp.spec, inp.rule, ca, args.steps, args.radius)
    out = rep.to_json()
    text = "\n".join(f"t={s.t} kind={s.classification.kind} residues=[{', '.join(_fmt(g) for g in s.residues)}]"
                     for s in rep.steps)
    _emit(args, out, text)
    return 0


def _homology_rows(args, inp: Inputs) -> list[dict]:
    G = FgAbelian.parse(args.coeff) if args.coeff else None
    if args.kind == "conway-lagarias":
        cl = complexes.conway_lagarias_abelianized(_need(inp.tiles, "tile set"))
        return [{"group": str(cl.group)}]
    if args.kind == "tile":
        tc = complexes.build_tile_complex(_need(inp.tiles, "tile set"))
        degrees = range(tc.D + 1) if args.degree is None else [args.degree]
        with ThreadPoolExecutor(threads()) as ex:
            groups = list(ex.map(lambda d: complexes.tile_homology(tc, d, G), degrees))
        return [{"degree": d, "group": str(g), "cells": tc.counts()[d]} for d, g in zip(degrees, groups)]
    r = inp.spec.radius if args.radius is None else args.radius
    D = inp.spec.D
    degrees = range(D + 1) if args.degree is None else [args.degree]
    rc = complexes.radius_complex(inp.spec, r)
    with ThreadPoolExecutor(threads()) as ex:
        groups = list(ex.map(lambda d: complexes.tile_cohomology(rc.complex, d, G or Z()), degrees))
    return [{"degree": d, "radius": r, "group": str(g)} for d, g in zip(degrees, groups)]


def cmd_homology(args) -> int:
    rows = _homology_rows(args, resolve(args))
    text = "\n".join((f"{row['degree']}: " if "degree" in row else "") + row["group"] for row in rows)
    _emit(args, {"kind": args.kind, "rows": rows}, text)
    return 0


def cmd_check_cocycle(args) -> int:
    inp = resolve(args)
    if inp.rule is not None:
        res = check_cocycle_conditions(inp.rule, inp.spec)
    else:
        res = check_equivariant_cocycle(_need(inp.eqrule, "cocycle"), inp.spec)
    out = {"ok": res.ok, "condition": res.condition, "checked": res.checked,
           "counterexample": res.counterexample}
    _emit(args, json.loads(json.dumps(out, default=str)), "ok" if res.ok else f"fail: {res.condition}")
    return 0


def _candidates(G, bound: int):
    if not isinstance(G, FgAbelian) or G.is_finite():
        return None
    ranges = [range(-bound, bound + 1)] * G.rank + [range(n) for n in G.torsion]
    return [G.element(p) for p in itertools.product(*ranges)]


def cmd_cohomologous(args) -> int:
    inp = resolve(args)
    r1 = _need(inp.rule, "cocycle")
    if args.other.startswith("shift:") or args.other in ("identity", "reversal"):
        r2 = pullback(r1, parse_ca(args.other, inp))
    else:
        if inp.project is None or args.other not in inp.project.cocycles:
            raise SchemaError(f"no cocycle named {args.other!r}")
        r2 = inp.project.cocycles[args.other]
    res = cohomologous_search(r1, r2, inp.spec, args.max_radius, _candidates(r1.group, args.bound))
    out = {"found": res.found, "radius": res.radius, "exhaustive": res.exhaustive,
           "relative_to_candidates": res.relative_to_candidates}
    _emit(args, out, ("cohomologous" if res.found else "not found") + (f" (radius {res.radius})" if res.found else ""))
    return 0


def cmd_ext(args) -> int:
    g = ext_group(FgAbelian.parse(args.H), FgAbelian.parse(args.G)).canonical()
    _emit(args, {"group": str(g)}, str(g))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="defectlab", description="Defects, cocycles and tile complexes of lattice SFTs.")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_input(p, rule=True):
        p.add_argument("--fixture")
        p.add_argument("--project")
        p.add_argument("--config")
        if rule:
            p.add_argument("--cocycle")
        p.add_argument("--radius", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        return p

    p = sub.add_parser("fixtures")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fixtures)

    with_input(sub.add_parser("analyze")).set_defaults(func=cmd_analyze)
    with_input(sub.add_parser("residue")).set_defaults(func=cmd_residue)
    with_input(sub.add_parser("tilt")).set_defaults(func=cmd_tilt)

    p = with_input(sub.add_parser("evolve"))
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--ca", default="identity")
    p.set_defaults(func=cmd_evolve)

    p = with_input(sub.add_parser("homology"))
    p.add_argument("--kind", choices=("tile", "invariant", "conway-lagarias"), default="tile")
    p.add_argument("--coeff")
    p.add_argument("--degree", type=int)
    p.set_defaults(func=cmd_homology)

    with_input(sub.add_parser("check-cocycle")).set_defaults(func=cmd_check_cocycle)

    p = with_input(sub.add_parser("cohomologous"))
    p.add_argument("--other", default="shift:1,0")
    p.add_argument("--max-radius", type=int, default=1)
    p.add_argument("--bound", type=int, default=4, help="free-coordinate range for transfer values")
    p.set_defaults(func=cmd_cohomologous)

    p = sub.add_parser("ext")
    p.add_argument("H")
    p.add_argument("G")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_ext)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DefectLabError as e:
        print(dumps(e.to_json()), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
