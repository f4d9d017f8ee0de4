"""JSON interchange: groups, elements, tile sets, SFTs, configurations, CAs, rules and project files.

Group elements encode as ``{"z": [...], "t": [...]}`` (free and torsion
coordinates of a finitely generated abelian group) or ``{"word": "vhv"}``.
Free-group words use ``a, b, ...`` for generators and capitals for inverses.
Configurations are row-major (C order) symbol-index arrays with an explicit origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .automaton import CaRule
from .cocycles import CocycleRule, ConstantRule, EquivariantCochainRule, TileRule
from .errors import SchemaError
from .groups import FgAbelian, FiniteTable, FreeGroup, FreeProductZ2Z2, Group, GroupElement
from .symbolic import Configuration, SftSpec, WangTileSet

SCHEMA = "defectlab/1"


# ---------------------------------------------------------------------------
# groups and elements


def group_to_json(G: Group) -> dict:
    if isinstance(G, FgAbelian):
        return {"kind": "abelian", "rank": G.rank, "torsion": list(G.torsion)}
    if isinstance(G, FreeProductZ2Z2):
        return {"kind": "z2*z2"}
    if isinstance(G, FreeGroup):
        return {"kind": "free", "generators": G.n}
    if isinstance(G, FiniteTable):
        return {"kind": "table", "table": [list(r) for r in G.table]}
    raise SchemaError(f"cannot encode group {G}")


def group_from_json(d: Mapping) -> Group:
    kind = d.get("kind")
    if kind == "abelian":
        return FgAbelian(int(d.get("rank", 0)), tuple(d.get("torsion", ())))
    if kind == "z2*z2":
        return FreeProductZ2Z2()
    if kind == "free":
        return FreeGroup(int(d["generators"]))
    if kind == "table":
        return FiniteTable(tuple(tuple(r) for r in d["table"]))
    raise SchemaError(f"unknown group kind {kind!r}")


def _free_word(payload: tuple[int, ...]) -> str:
    return "".join(chr(ord("a") + i - 1) if i > 0 else chr(ord("A") - i - 1) for i in payload)


def _parse_free_word(w: str) -> tuple[int, ...]:
    out = []
    for ch in w:
        if "a" <= ch <= "z":
            out.append(ord(ch) - ord("a") + 1)
        elif "A" <= ch <= "Z":
            out.append(-(ord(ch) - ord("A") + 1))
        else:
            raise SchemaError(f"bad letter {ch!r} in free word")
    return tuple(out)


def element_to_json(g: GroupElement) -> dict:
    G = g.group
    if isinstance(G, FgAbelian):
        return {"z": list(g.payload[: G.rank]), "t": list(g.payload[G.rank :])}
    if isinstance(G, FreeProductZ2Z2):
        return {"word": g.payload}
    if isinstance(G, FreeGroup):
        return {"word": _free_word(g.payload)}
    if isinstance(G, FiniteTable):
        return {"index": int(g.payload)}
    raise SchemaError(f"cannot encode element of {G}")


def element_from_json(G: Group, d: Mapping) -> GroupElement:
    if isinstance(G, FgAbelian):
        return G.from_ints(d.get("z", ()), d.get("t", ()))
    if isinstance(G, FreeProductZ2Z2):
        return G.element(d["word"])
    if isinstance(G, FreeGroup):
        return G.element(_parse_free_word(d["word"]))
    if isinstance(G, FiniteTable):
        return G.element(int(d["index"]))
    raise SchemaError(f"cannot decode element of {G}")


# ---------------------------------------------------------------------------
# tiles, SFTs, configurations


def tiles_to_json(w: WangTileSet) -> dict:
    return {"D": w.D, "tiles": list(w.tiles), "match": [sorted(map(list, rel)) for rel in w.match]}


def tiles_from_json(d: Mapping) -> WangTileSet:
    try:
        return WangTileSet(int(d["D"]), tuple(d["tiles"]), tuple(frozenset(tuple(p) for p in rel) for rel in d["match"]))
    except KeyError as e:
        raise SchemaError(f"tile set missing field {e}") from None


def spec_to_json(s: SftSpec) -> dict:
    out: dict[str, Any] = {"D": s.D, "alphabet": list(s.alphabet), "radius": s.radius, "kind": s.kind, "name": s.name}
    if s.kind == "pairs":
        out["allowed"] = sorted(s.allowed)
        out["pairs"] = [sorted(map(list, rel)) for rel in s.pairs]
    else:
        out["blocks"] = sorted(map(list, s.blocks))
    return out


def spec_from_json(d: Mapping) -> SftSpec:
    try:
        kind = d["kind"]
        if kind == "pairs":
            return SftSpec(int(d["D"]), tuple(d["alphabet"]), int(d["radius"]), "pairs", frozenset(d["allowed"]),
                           tuple(frozenset(tuple(p) for p in rel) for rel in d["pairs"]), name=d.get("name", ""))
        if kind == "blocks":
            return SftSpec(int(d["D"]), tuple(d["alphabet"]), int(d["radius"]), "blocks",
                           blocks=frozenset(tuple(b) for b in d["blocks"]), name=d.get("name", ""))
    except KeyError as e:
        raise SchemaError(f"SFT missing field {e}") from None
    raise SchemaError(f"unknown SFT kind {d.get('kind')!r}")


def config_to_json(c: Configuration) -> dict:
    return {"origin": list(c.origin), "shape": list(c.shape), "cells": c.cells.ravel().tolist(), "periodic": c.periodic}


def config_from_json(d: Mapping) -> Configuration:
    try:
        cells = np.asarray(d["cells"], dtype=np.int64)
        shape = tuple(int(s) for s in d["shape"])
        if cells.size != int(np.prod(shape)):
            raise SchemaError("cell count does not match shape")
        return Configuration(cells.reshape(shape), tuple(int(o) for o in d["origin"]), bool(d.get("periodic", False)))
    except KeyError as e:
        raise SchemaError(f"configuration missing field {e}") from None


# ---------------------------------------------------------------------------
# cellular automata and rules


def ca_to_json(ca: CaRule) -> dict:
    out: dict[str, Any] = {"D": ca.D, "n": ca.n, "kind": ca.kind, "label": ca.name}
    if ca.kind == "shift":
        out["shift"] = list(ca.shift)
    elif ca.kind == "symbol-map":
        out["mapping"] = list(ca.mapping)
    elif ca.kind == "table":
        out["neighbourhood"] = [list(h) for h in ca.neighbourhood]
        out["table"] = list(ca.table)
    elif ca.kind == "expression":
        out["expression"] = ca.expression
    return out


def ca_from_json(d: Mapping) -> CaRule:
    try:
        return CaRule(
            int(d["D"]), int(d["n"]), d["kind"],
            neighbourhood=tuple(tuple(h) for h in d.get("neighbourhood", ())),
            shift=tuple(d.get("shift", ())),
            mapping=tuple(d.get("mapping", ())),
            table=tuple(d.get("table", ())),
            expression=d.get("expression", ""),
            name=d.get("label", ""),
        )
    except KeyError as e:
        raise SchemaError(f"CA missing field {e}") from None


def rule_to_json(rule: CocycleRule) -> dict:
    """Tile rules and constant rules serialize by value; other rules are not portable."""
    if isinstance(rule, TileRule):
        return {"kind": "tile", "group": group_to_json(rule.group), "D": rule.D, "label": rule.name,
                "gens": [[element_to_json(g) for g in axis] for axis in rule.gens]}
    if isinstance(rule, ConstantRule):
        return {"kind": "constant", "group": group_to_json(rule.group), "D": rule.D,
                "gens": [element_to_json(g) for g in rule.gens]}
    raise SchemaError(f"rule {type(rule).__name__} has no JSON form")


def rule_from_json(d: Mapping) -> CocycleRule:
    G = group_from_json(d["group"])
    if d["kind"] == "tile":
        gens = tuple(tuple(element_from_json(G, g) for g in axis) for axis in d["gens"])
        return TileRule(G, int(d["D"]), gens, d.get("label", ""))
    if d["kind"] == "constant":
        return ConstantRule(G, int(d["D"]), tuple(element_from_json(G, g) for g in d["gens"]))
    raise SchemaError(f"unknown rule kind {d['kind']!r}")


# ---------------------------------------------------------------------------
# project files


@dataclass
class Project:
    name: str
    spec: SftSpec
    tiles: WangTileSet | None = None
    configurations: dict[str, Configuration] = field(default_factory=dict)
    cocycles: dict[str, CocycleRule] = field(default_factory=dict)
    equivariant: dict[str, EquivariantCochainRule] = field(default_factory=dict)
    cas: dict[str, CaRule] = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"schema": SCHEMA, "name": self.name, "sft": spec_to_json(self.spec)}
        if self.tiles is not None:
            out["tiles"] = tiles_to_json(self.tiles)
        out["configurations"] = [{"name": k, **config_to_json(v)} for k, v in self.configurations.items()]
        out["cocycles"] = [{**rule_to_json(v), "name": k} for k, v in self.cocycles.items()]
        # equivariant cochains are Python callables: they travel by builtin name
        out["cocycles"] += [{"name": k, "kind": "builtin-equivariant", "builtin": v.name} for k, v in self.equivariant.items()]
        out["cas"] = [{**ca_to_json(v), "name": k} for k, v in self.cas.items()]
        out["analysis"] = dict(self.analysis)
        return out


_BUILTIN_EQUIVARIANT = {}


def _builtin_equivariant(name: str) -> EquivariantCochainRule:
    if not _BUILTIN_EQUIVARIANT:
        from .fixtures import pin_cocycle

        _BUILTIN_EQUIVARIANT["pin"] = pin_cocycle
    if name not in _BUILTIN_EQUIVARIANT:
        raise SchemaError(f"unknown builtin cochain {name!r}")
    return _BUILTIN_EQUIVARIANT[name]()


def project_from_json(d: Mapping) -> Project:
    if d.get("schema") != SCHEMA:
        raise SchemaError(f"expected schema {SCHEMA!r}, got {d.get('schema')!r}")
    if "sft" not in d:
        raise SchemaError("project needs an 'sft' section")
    tiles = tiles_from_json(d["tiles"]) if "tiles" in d else None
    p = Project(d.get("name", ""), spec_from_json(d["sft"]), tiles, analysis=dict(d.get("analysis", {})))
    for c in d.get("configurations", []):
        p.configurations[c["name"]] = config_from_json(c)
    for c in d.get("cocycles", []):
        if c.get("kind") == "builtin-equivariant":
            p.equivariant[c["name"]] = _builtin_equivariant(c["builtin"])
        else:
            p.cocycles[c["name"]] = rule_from_json(c)
    for c in d.get("cas", []):
        p.cas[c["name"]] = ca_from_json(c)
    for cfg in p.configurations.values():
        if cfg.D != p.spec.D:
            raise SchemaError("configuration dimension differs from the SFT")
    return p


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def load_project(path: str) -> Project:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from None
    return project_from_json(doc)


def save_project(p: Project, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(p.to_json(), fh, indent=1, sort_keys=True)
