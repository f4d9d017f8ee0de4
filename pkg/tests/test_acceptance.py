"""Acceptance criteria 1-11.

Each test times its body and prints one ``PASS``/``FAIL`` line with the limit.
A body that finishes over its limit is a failure.
"""

import time
from contextlib import contextmanager

import numpy as np

import test_cocycles as cocycle_suite
import test_complexes as complex_suite
import test_symbolic as symbolic_suite
from defectlab import fixtures as F
from defectlab.automaton import identity_ca, shift_ca, symbol_map_ca
from defectlab.cocycles import evaluate_trail, export_to_integer, recode_block
from defectlab.complexes import (
    build_tile_complex,
    ca_chain_map,
    connecting_map,
    conway_lagarias_abelianized,
    invariant_cohomology,
    ladder_check,
    radius_complex,
)
from defectlab.defects import cgap, d_pole_search, persistence_experiment, residue, residue_report, tilt_estimate
from defectlab.errors import BudgetExceeded
from defectlab.groups import FgAbelian, Z, ZMod, ext_group
from defectlab.lattice import Trail, add, concat, rectangle_ring, trails_homotopic
from defectlab.symbolic import classify_defect, defect_field, defect_region, recode_config

from oracles import abelian_groups_up_to, order_profile, quotient_profile


@contextmanager
def criterion(n: int, limit: float, capsys):
    t0 = time.perf_counter()
    err = None
    try:
        yield
    except Exception as exc:  # reported, then re-raised
        err = exc
    took = time.perf_counter() - t0
    slow = took >= limit
    verdict = "PASS" if err is None and not slow else "FAIL"
    note = "" if err is None else f": {type(err).__name__}: {str(err).splitlines()[0] if str(err) else ''}"
    if slow and err is None:
        note = ": over time limit"
    with capsys.disabled():
        print(f"\n{verdict} criterion {n} (limit {limit:g}s, took {took:.2f}s){note}")
    if err is not None:
        raise err
    assert not slow, f"criterion {n} took {took:.2f}s, limit {limit}s"


def test_criterion_01_ice_pole_residue(capsys):
    with criterion(1, 1.0, capsys):
        fx = F.fixture("ice-pole")
        (res,) = residue_report(fx.config, fx.spec, fx.rule).residues
        assert export_to_integer(res.value) == 8
        for n in range(1, 5):
            assert export_to_integer(evaluate_trail(fx.rule, fx.config, res.loop.repeat(n))) == 8 * n
        G, _ = defect_region(fx.config, fx.spec, 1)
        base = rectangle_ring(-5, -5, 5, 5)
        loops = [base] + [
            concat(concat(Trail.manhattan(base.start, t.start), t), Trail.manhattan(t.start, base.start))
            for t in (rectangle_ring(-3, -3, 3, 3), rectangle_ring(-7, -7, 7, 7), rectangle_ring(-4, -6, 6, 3))
        ]
        assert all(trails_homotopic(loops[0], t, G.sites) for t in loops[1:])
        assert {export_to_integer(evaluate_trail(fx.rule, fx.config, t)) for t in loops} == {8}


def test_criterion_02_path_residues(capsys):
    with criterion(2, 1.0, capsys):
        fx = F.fixture("paths-three-defects")
        vals = residue(fx.config, fx.spec, fx.rule)
        assert sorted(tuple(int(x) for x in g.payload) for g in vals) == [(0, 1), (1, 0), (1, 1)]
        lo, hi = fx.config.lo, fx.config.hi
        big = rectangle_ring(lo[0] + 1, lo[1] + 1, hi[0] - 1, hi[1] - 1)
        assert tuple(int(x) for x in evaluate_trail(fx.rule, fx.config, big).payload) == (0, 0)


def test_criterion_03_ice_gap(capsys):
    with criterion(3, 5.0, capsys):
        fx = F.fixture("ice-gap")
        m = fx.meta
        refs = (m["x_ref"], m["y_ref"])
        comps = classify_defect(fx.config, fx.spec, 1).components
        step = m.get("step", (1, 0))
        for n in range(1, 11):
            xn = add(m["x_ref"], tuple(n * s for s in step))
            yn = add(m["y_ref"], tuple(n * s for s in step))
            assert export_to_integer(cgap(fx.config, fx.rule, xn, yn, refs, components=comps)) == 2 * n
        assert fx.config.shape == (41, 41)
        assert tilt_estimate(fx.config, fx.spec, fx.rule).verdict == "diverging(window-limited)"


def test_criterion_04_domino_gap(capsys):
    with criterion(4, 5.0, capsys):
        for name, per_step, count in (("domino-gap-b", 2, 8), ("domino-gap-c", -4, 8)):
            fx, cfg, rule, spec, comps = _gap_setup(name)
            m = fx.meta
            refs = (m["x_ref"], m["y_ref"])
            step = m.get("step", (1, 0))
            v, h = rule.group.generators()
            for n in range(1, count + 1):
                xn = add(m["x_ref"], tuple(n * s for s in step))
                yn = add(m["y_ref"], tuple(n * s for s in step))
                g = cgap(cfg, rule, xn, yn, refs, components=comps)
                assert export_to_integer(g) == per_step * n
                if per_step > 0:
                    assert g == (v * h * v * h) ** n


def _gap_setup(name):
    fx = F.fixture(name)
    cfg, rule, spec = fx.config, fx.rule, fx.spec
    k = fx.meta.get("recode", 1)
    if k > 1:
        rule, spec = recode_block(rule, spec, k)
        cfg = recode_config(cfg, fx.spec, k)
    return fx, cfg, rule, spec, classify_defect(cfg, spec, 1).components


def test_criterion_05_cube_pole(capsys):
    with criterion(5, 5.0, capsys):
        fx = F.fixture("ice-cubes-pole")
        (pole,) = d_pole_search(fx.config, fx.spec, fx.eqrule)
        shells = {s.hi[0] - s.lo[0]: int(s.value.payload[0]) for s in pole.shells}
        assert shells[3] == 6 and shells[5] == 6


def test_criterion_06_conway_lagarias(capsys):
    with criterion(6, 1.0, capsys):
        cl = conway_lagarias_abelianized(F.fixture("ice").tiles)
        assert str(cl.group) == "Z"
        a, v = cl.horizontal
        assert abs(int(cl.class_of({("h", a): 1, ("h", v): -1}).payload[0])) == 1


def test_criterion_07_ext(capsys):
    with criterion(7, 10.0, capsys):
        groups = abelian_groups_up_to(36)
        for orders in groups:
            G = ZMod(*orders) if orders else FgAbelian()
            for R in range(4):
                assert ext_group(Z(R), G).order() == 1
            for n in range(2, 37):
                assert order_profile(ext_group(ZMod(n), G).torsion) == quotient_profile(orders, n)


def test_criterion_08_cocycle_suite(capsys):
    with criterion(8, 60.0, capsys):
        assert cocycle_suite.CASES >= 1000
        for name in cocycle_suite.TILE_RULES:
            cocycle_suite.test_cocycle_equation_fuzz(name)
            cocycle_suite.test_trail_value_depends_only_on_endpoints(name)
        cocycle_suite.test_homotopic_loops_around_a_pole_agree()
        for group, draw in ((cocycle_suite.FreeGroup(2), cocycle_suite._free_draw),
                            (cocycle_suite.FgAbelian(2, (3,)), cocycle_suite._abelian_draw)):
            for radius in (0, 1):
                cocycle_suite.test_coboundary_trails_telescope(group, draw, radius)
        cocycle_suite.test_pullback_identity_fuzz()
        for name in ("ice", "paths"):
            cocycle_suite.test_round_trip_on_tile_rules(name)
        for label, spec, rule in cocycle_suite._abelian_rules():
            cocycle_suite.test_round_trip_on_random_abelian_rules(label, spec, rule)


def test_criterion_09_defect_field_suite(capsys):
    with criterion(9, 30.0, capsys):
        spec = F.ice_arrow_spec()
        R = spec.radius
        rng = np.random.default_rng(909)
        literal_misses = 0
        for _ in range(60):
            cfg = symbolic_suite.damaged_ice(int(rng.integers(10**6)), int(rng.integers(1, 7)), 11, False)
            fld = defect_field(cfg, spec)
            v, wb = fld.values, fld.window_bound
            for i in range(2):
                a, b = np.take(v, range(v.shape[i] - 1), axis=i), np.take(v, range(1, v.shape[i]), axis=i)
                ok = ~(np.take(wb, range(v.shape[i] - 1), axis=i) | np.take(wb, range(1, v.shape[i]), axis=i))
                assert (np.abs(a - b)[ok] <= 1).all()
            # literal F = R + d(z, X) at every site whose value is exact
            d = symbolic_suite.chebyshev_to(fld.violations)
            exact = ~wb
            literal_misses += int(np.count_nonzero(v[exact] != (R + d)[exact]))
        for name, ca, steps in F.trajectories():
            fx = F.fixture(name)
            rep = persistence_experiment(fx.config, fx.spec, fx.rule, ca, steps)
            assert all(s.drop_ok for s in rep.steps[1:]), (name, ca.name)
        assert literal_misses == 0, f"F = R + d(z, X) fails at {literal_misses} exact sites"


def test_criterion_10_invariant_vs_dynamical(capsys):
    with criterion(10, 60.0, capsys):
        k = complex_suite._dynamical_h1_golden(1)
        assert invariant_cohomology(F.golden_mean_spec(), 1, 1, ZMod(2)).isomorphic(ZMod(*([2] * k)))


def _ladder_pairs():
    seen: dict[str, object] = {}
    for name in F.names():
        spec = F.fixture(name).spec
        seen.setdefault(spec.name, spec)
    for spec in seen.values():
        yield spec, identity_ca(spec.D, spec.n)
        yield spec, shift_ca(spec.D, spec.n, (1,) + (0,) * (spec.D - 1))
        if spec.name == "ice":
            yield spec, symbol_map_ca(2, F.ice_reversal_map(), "reversal")


def test_criterion_11_chain_maps(capsys):
    with criterion(11, 30.0, capsys):
        for name in ("dominoes", "ice", "paths"):
            assert build_tile_complex(F.fixture(name).tiles).check_boundary_squared()
        gm = F.golden_mean_spec()
        for r in range(3):
            assert radius_complex(gm, r).complex.check_boundary_squared()
            assert connecting_map(gm, r).is_chain_map()
            assert ca_chain_map(gm, shift_ca(1, 2, (1,)), r).is_chain_map()
        beyond = []
        for spec, ca in _ladder_pairs():
            try:
                res = ladder_check(spec, ca, 0)
            except BudgetExceeded:
                beyond.append(f"{spec.name}/{ca.name}")
                continue
            assert res.chain_maps_ok and res.chain_identity, (spec.name, ca.name)
        assert not beyond, "ladder complexes beyond the block budget: " + ", ".join(beyond)
