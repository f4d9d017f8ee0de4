import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from defectlab import fixtures as F
from defectlab.automaton import identity_ca, shift_ca, symbol_map_ca
from defectlab.complexes import (
    betti_numbers,
    build_tile_complex,
    ca_chain_map,
    ca_induced_map,
    cohomology_basis,
    cohomology_by_uct,
    connecting_map,
    conway_lagarias_abelianized,
    identity_map,
    induced_map_on_cohomology,
    induced_map_report,
    invariant_cohomology,
    ladder_check,
    radius_complex,
    rank_mod,
    stabilization_scan,
    tile_cohomology,
    tile_homology,
)
from defectlab.errors import BudgetExceeded, DisconnectedColourGraph
from defectlab.groups import FgAbelian, Z, ZMod
from defectlab.symbolic import WangTileSet, admissible_blocks

SINGLE = WangTileSet(2, ("a",), (frozenset({(0, 0)}), frozenset({(0, 0)})))


def _tiles(name):
    return SINGLE if name == "torus" else F.fixture(name).tiles


@pytest.mark.parametrize(
    "name,counts,homology",
    [
        ("torus", [1, 2, 1], ["Z", "Z^2", "Z"]),
        ("dominoes", [1, 4, 4], ["Z", "Z^2", "Z^2"]),
        ("ice", [1, 4, 6], ["Z", "Z^3", "Z^5"]),
        ("paths", [1, 6, 21], ["Z", "Z^2 + Z/2 + Z/2", "Z^17"]),
    ],
)
def test_tile_complex_homology(name, counts, homology):
    tc = build_tile_complex(_tiles(name))
    assert tc.counts() == counts
    assert tc.check_boundary_squared()
    assert [str(tile_homology(tc, d)) for d in range(3)] == homology
    assert tc.euler_characteristic() == sum((-1) ** d * b for d, b in enumerate(betti_numbers(tc)))


@pytest.mark.parametrize("name", ["torus", "dominoes", "ice", "paths"])
@pytest.mark.parametrize("coeff", ["Z", "Z/2", "Z/3", "Z/4", "Z + Z/2"])
def test_cohomology_two_routes(name, coeff):
    tc = build_tile_complex(_tiles(name))
    G = FgAbelian.parse(coeff)
    for d in range(3):
        assert tile_cohomology(tc, d, G).isomorphic(cohomology_by_uct(tc, d, G))


@pytest.mark.parametrize("name", ["dominoes", "ice", "paths"])
def test_boundary_matrices_compose_to_zero(name):
    tc = build_tile_complex(_tiles(name))
    d1, d2 = tc.boundary(1).toarray(), tc.boundary(2).toarray()
    assert not np.any(d1 @ d2)


def _random_wang(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    colours = int(rng.integers(1, 4))
    sides = rng.integers(0, colours, (k, 4))  # n e s w
    h = frozenset((a, b) for a in range(k) for b in range(k) if sides[a][1] == sides[b][3])
    v = frozenset((a, b) for a in range(k) for b in range(k) if sides[a][0] == sides[b][2])
    return (h, v, k)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_random_tile_sets_are_complexes(seed):
    h, v, k = _random_wang(seed)
    assume(h and v)
    tc = build_tile_complex(WangTileSet(2, tuple(f"t{i}" for i in range(k)), (h, v)))
    assert tc.check_boundary_squared()
    assert tc.euler_characteristic() == sum((-1) ** d * b for d, b in enumerate(betti_numbers(tc)))
    for d in range(3):
        assert tile_cohomology(tc, d, ZMod(2)).isomorphic(cohomology_by_uct(tc, d, ZMod(2)))


# ---------------------------------------------------------------------------
# Conway-Lagarias


def test_conway_lagarias_ice():
    cl = conway_lagarias_abelianized(F.fixture("ice").tiles)
    assert str(cl.group) == "Z"
    h0, h1 = cl.horizontal[:2]
    assert abs(int(cl.class_of({("h", h0): 1, ("h", h1): -1}).payload[0])) == 1


@pytest.mark.parametrize("name,group", [("dominoes", "0"), ("paths", "Z/2 + Z/2"), ("torus", "0")])
def test_conway_lagarias_other_sets(name, group):
    assert str(conway_lagarias_abelianized(_tiles(name)).group) == group


def test_conway_lagarias_needs_connected_colours():
    w = WangTileSet(2, ("a", "b"), (frozenset({(0, 0), (1, 1)}), frozenset({(0, 0), (1, 1)})))
    with pytest.raises(DisconnectedColourGraph):
        conway_lagarias_abelianized(w)


# ---------------------------------------------------------------------------
# invariant cohomology against exhaustive dynamical cohomology


def _dynamical_h1_golden(r):
    """Radius-r Z/2 cocycles on the golden mean modulo coboundaries of radius-r transfers, by enumeration."""
    words = [tuple(w) for w in admissible_blocks(F.golden_mean_spec(), r).tolist()]
    idx = {w: i for i, w in enumerate(words)}
    longer = [w for w in itertools.product((0, 1), repeat=2 * r + 2) if not any(a & b for a, b in zip(w, w[1:]))]
    cobs = set()
    for b in itertools.product((0, 1), repeat=len(words)):
        vals = {}
        ok = True
        for w in longer:
            src = w[:-1]
            v = (b[idx[w[1:]]] - b[idx[src]]) % 2
            if vals.setdefault(src, v) != v:
                ok = False
                break
        if ok:
            cobs.add(tuple(vals.get(w, 0) for w in words))
    n_cocycles = 2 ** len(words)
    quotient = n_cocycles // len(cobs)
    k = quotient.bit_length() - 1
    assert 2 ** k == quotient
    return k


@pytest.mark.parametrize("r,k", [(0, 2), (1, 3), (2, 6)])
def test_golden_mean_invariant_cohomology(r, k):
    assert _dynamical_h1_golden(r) == k
    assert invariant_cohomology(F.golden_mean_spec(), r, 1, ZMod(2)).isomorphic(ZMod(*([2] * k)))


def test_golden_mean_scan():
    rows = stabilization_scan(F.golden_mean_spec(), 1, ZMod(2), 0, 4)
    assert [r.status for r in rows] == ["ok"] * 5
    assert [r.group.order() for r in rows] == [2 ** k for k in (2, 3, 6, 14, 35)]
    assert [r.map_rank for r in rows[1:]] == [2, 3, 6, 14]


def test_ice_scan_regression():
    rows = stabilization_scan(F.ice_spec(), 1, ZMod(2), 0, 1)
    assert [str(r.group) for r in rows] == ["Z/2 + Z/2 + Z/2"] * 2
    assert rows[1].map_rank == 3 and rows[1].isomorphism


def test_radius_complex_budget():
    with pytest.raises(BudgetExceeded):
        radius_complex(F.ice_spec(), 2, budget=1000)


# ---------------------------------------------------------------------------
# chain maps and ladders


@pytest.mark.parametrize("r", [0, 1, 2])
def test_golden_mean_chain_maps(r):
    gm = F.golden_mean_spec()
    zeta = connecting_map(gm, r)
    assert zeta.is_chain_map()
    shift = ca_chain_map(gm, shift_ca(1, 2, (1,)), r)
    assert shift.is_chain_map()
    a = induced_map_on_cohomology(shift, 1, ZMod(2)) % 2
    b = induced_map_on_cohomology(zeta, 1, ZMod(2)) % 2
    assert np.array_equal(a, b)
    ident = induced_map_report(ca_chain_map(gm, identity_ca(1, 2), r), 1, ZMod(2))
    assert np.array_equal(ident.matrix % 2, np.eye(ident.matrix.shape[0], dtype=np.int64))
    assert ident.injective and ident.surjective
    assert identity_map(gm, r).equals(ca_chain_map(gm, identity_ca(1, 2), r))


def test_connecting_maps_compose():
    gm = F.golden_mean_spec()
    two = connecting_map(gm, 1).compose(connecting_map(gm, 2))
    assert two.is_chain_map()


@pytest.mark.parametrize(
    "spec,ca,r",
    [
        (F.golden_mean_spec(), shift_ca(1, 2, (1,)), 1),
        (F.golden_mean_spec(), identity_ca(1, 2), 2),
        (F.ice_spec(), identity_ca(2, 6), 0),
        (F.ice_spec(), symbol_map_ca(2, F.ice_reversal_map(), "reversal"), 0),
    ],
    ids=["gm-shift", "gm-identity", "ice-identity", "ice-reversal"],
)
def test_ladders_commute(spec, ca, r):
    res = ladder_check(spec, ca, r, 1, ZMod(2))
    assert res.chain_maps_ok and res.chain_identity and res.cohomology_identity


def test_ice_shift_ladder_needs_a_larger_complex():
    with pytest.raises(BudgetExceeded):
        ladder_check(F.ice_spec(), shift_ca(2, 6, (1, 0)), 0, 1, ZMod(2))


def test_cohomology_basis_and_rank():
    tc = radius_complex(F.golden_mean_spec(), 1).complex
    basis = cohomology_basis(tc, 1, 2)
    assert basis.dim == 3
    assert rank_mod(np.array([[1, 1], [1, 1]]), 2) == 1
    m = ca_induced_map(F.golden_mean_spec(), identity_ca(1, 2), 1, 1, ZMod(2))
    assert rank_mod(m, 2) == 3
