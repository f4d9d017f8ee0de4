import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from defectlab import fixtures as F
from defectlab.automaton import CaRule, shift_ca, symbol_map_ca
from defectlab.cli import fixture_project
from defectlab.cocycles import ConstantRule, rules_agree
from defectlab.errors import SchemaError
from defectlab.groups import FgAbelian, FreeGroup, FreeProductZ2Z2, cyclic_table
from defectlab.io import (
    ca_from_json,
    ca_to_json,
    element_from_json,
    element_to_json,
    group_from_json,
    group_to_json,
    load_project,
    project_from_json,
    rule_from_json,
    rule_to_json,
    save_project,
)
from defectlab.symbolic import Configuration


@pytest.mark.parametrize("name", F.names())
def test_emit_round_trip(name, tmp_path):
    p = fixture_project(F.fixture(name))
    p.cas["flip"] = shift_ca(p.spec.D, p.spec.n, (1,) * p.spec.D)
    path = tmp_path / f"{name}.json"
    save_project(p, str(path))
    q = load_project(str(path))
    assert q.to_json() == p.to_json()
    assert q.spec == p.spec
    for k, cfg in p.configurations.items():
        assert q.configurations[k] == cfg and q.configurations[k].origin == cfg.origin
    for k, rule in p.cocycles.items():
        assert rules_agree(q.cocycles[k], rule, p.spec)[0]
    assert q.cas["flip"] == p.cas["flip"]


@pytest.mark.parametrize("name,count", [("ice", 6), ("ice-cubes-3d", 20), ("paths", 21), ("dominoes", 4)])
def test_emitted_tile_counts(name, count):
    doc = fixture_project(F.fixture(name)).to_json()
    assert len(doc["tiles"]["tiles"]) == count


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=2), st.integers(0, 5))
def test_abelian_elements_round_trip(z, t):
    G = FgAbelian(2, (6,))
    g = G.from_ints(z, [t])
    H = group_from_json(json.loads(json.dumps(group_to_json(G))))
    assert element_from_json(H, element_to_json(g)).payload == g.payload
    assert set(element_to_json(g)) == {"z", "t"}


@given(st.lists(st.sampled_from([1, 2, -1, -2]), max_size=8))
def test_free_words_round_trip(word):
    G = FreeGroup(2)
    g = G.element(tuple(word))
    back = element_from_json(group_from_json(group_to_json(G)), element_to_json(g))
    assert back == g


def test_z2_free_product_words():
    G = FreeProductZ2Z2()
    v, h = G.generators()
    g = v * h * v
    d = element_to_json(g)
    assert d == {"word": "vhv"}
    assert element_from_json(G, d) == g


def test_finite_table_group():
    G = cyclic_table(5)
    H = group_from_json(group_to_json(G))
    assert element_from_json(H, element_to_json(G.element(3))).payload == 3


@pytest.mark.parametrize(
    "ca",
    [
        shift_ca(2, 3, (1, -1)),
        symbol_map_ca(1, (1, 0, 2)),
        CaRule(1, 2, "table", neighbourhood=((-1,), (1,)), table=(0, 1, 1, 0)),
        CaRule(2, 4, "expression", expression="max(a[0,0], a[1,0]) % 3"),
    ],
)
def test_ca_round_trip(ca):
    back = ca_from_json(json.loads(json.dumps(ca_to_json(ca))))
    assert back == ca
    arr = np.random.default_rng(0).integers(0, ca.n, (7,) * ca.D)
    assert np.array_equal(back.apply_block(arr), ca.apply_block(arr))


def test_rule_round_trip_and_limits():
    G = FgAbelian(1, (2,))
    rule = ConstantRule(G, 2, (G.from_ints([1], [0]), G.from_ints([0], [1])))
    back = rule_from_json(rule_to_json(rule))
    assert rules_agree(back, rule, F.ice_spec())[0]
    from defectlab.cocycles import coboundary_rule, constant_transfer

    with pytest.raises(SchemaError):
        rule_to_json(coboundary_rule(constant_transfer(G, 2)))


def test_schema_errors(tmp_path):
    with pytest.raises(SchemaError):
        project_from_json({"schema": "other"})
    with pytest.raises(SchemaError):
        project_from_json({"schema": "defectlab/1"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_project(str(bad))
    doc = fixture_project(F.fixture("ice-pole")).to_json()
    doc["configurations"][0]["cells"] = [[[0]]]
    doc["configurations"][0]["origin"] = [0, 0, 0]
    with pytest.raises(SchemaError):
        project_from_json(doc)


def test_configuration_layout_is_row_major():
    cfg = Configuration(np.arange(6).reshape(2, 3) % 2, (4, -1))
    p = fixture_project(F.fixture("golden-mean"))
    from defectlab.io import config_from_json, config_to_json

    d = config_to_json(cfg)
    assert d["origin"] == [4, -1]
    assert config_from_json(json.loads(json.dumps(d))) == cfg
    assert p.spec.D == 1
