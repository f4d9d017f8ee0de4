from collections import deque

import pytest

from defectlab import fixtures as F
from defectlab.cocycles import (
    ProductRule,
    TransferFunction,
    coboundary_rule,
    evaluate_trail,
    export_to_integer,
    recode_block,
)
from defectlab.defects import (
    TiltConfig,
    analyze,
    cgap,
    d_pole_search,
    height_map,
    persistence_experiment,
    residue,
    residue_report,
    tilt_estimate,
)
from defectlab.errors import AmbiguousPath, DefectNotEnclosable, DegreeUnsupported, UnsupportedDimension
from defectlab.lattice import add, concat, rectangle_ring
from defectlab.symbolic import classify_defect, defect_region, recode_config


def _ints(values):
    return [tuple(int(x) for x in g.payload) for g in values]


# ---------------------------------------------------------------------------
# residues


def test_ice_pole_residue_and_powers():
    fx = F.fixture("ice-pole")
    rep = residue_report(fx.config, fx.spec, fx.rule)
    (res,) = rep.residues
    assert export_to_integer(res.value) == 8 and res.consistent and res.verdict == "essential"
    for n in range(1, 5):
        assert export_to_integer(evaluate_trail(fx.rule, fx.config, res.loop.repeat(n))) == 8 * n


@pytest.mark.parametrize("half", [2, 3, 5, 7, 9])
def test_ice_pole_residue_on_nested_rings(half):
    fx = F.fixture("ice-pole")
    ring = rectangle_ring(-half, -half, half, half)
    assert export_to_integer(evaluate_trail(fx.rule, fx.config, ring)) == 8


def test_path_residues_and_additivity():
    fx = F.fixture("paths-three-defects")
    vals = residue(fx.config, fx.spec, fx.rule)
    assert sorted(_ints(vals)) == [(0, 1), (1, 0), (1, 1)]
    G, _ = defect_region(fx.config, fx.spec, 1)
    lo, hi = fx.config.lo, fx.config.hi
    big = rectangle_ring(lo[0] + 1, lo[1] + 1, hi[0] - 1, hi[1] - 1)
    assert all(z in G.sites for z in big.sites)
    total = evaluate_trail(fx.rule, fx.config, big)
    assert total.is_identity()
    acc = fx.rule.group.identity()
    for g in vals:
        acc = acc * g
    assert acc.payload == total.payload


def test_residue_is_multiplicative_on_concatenation():
    fx = F.fixture("ice-pole")
    a = rectangle_ring(-4, -4, 4, 4)
    b = rectangle_ring(-4, -4, 6, 3)
    va, vb = (evaluate_trail(fx.rule, fx.config, t) for t in (a, b))
    assert evaluate_trail(fx.rule, fx.config, concat(a, b)) == vb * va


def test_defect_free_loop_is_trivial():
    fx = F.fixture("ice-pole")
    assert evaluate_trail(fx.rule, fx.config, rectangle_ring(3, 3, 8, 8)).is_identity()
    fx = F.fixture("ice")
    assert residue_report(fx.config, fx.spec, fx.rule).residues == ()


def test_zero_residue_is_inconclusive():
    fx = F.fixture("ice-pole")
    b = TransferFunction(fx.rule.group, 2, 0, fn=lambda blk: fx.rule.group.element([int(blk.ravel()[0])]))
    (res,) = residue_report(fx.config, fx.spec, coboundary_rule(b)).residues
    assert res.value.is_identity() and res.verdict == "inconclusive"


def test_residue_needs_the_plane():
    fx = F.fixture("ice-cubes-pole")
    with pytest.raises(UnsupportedDimension):
        residue_report(fx.config, fx.spec, fx.rule or F.ice_height_rule())


# ---------------------------------------------------------------------------
# shells in three dimensions


def test_cube_pole_shells():
    fx = F.fixture("ice-cubes-pole")
    (pole,) = d_pole_search(fx.config, fx.spec, fx.eqrule)
    sizes = [s.hi[0] - s.lo[0] for s in pole.shells]
    assert sizes == [3, 5]
    assert [int(s.value.payload[0]) for s in pole.shells] == [6, 6]
    assert pole.consistent and pole.is_pole


def test_admissible_cubes_have_no_components():
    fx = F.fixture("ice-cubes-3d")
    assert d_pole_search(fx.config, fx.spec, fx.eqrule) == []


def test_reversed_column_spans_the_window():
    # a column crossing the window has no enclosing shell; its flux through boxes is 0
    fx = F.fixture("ice-cubes-line")
    with pytest.raises(DefectNotEnclosable):
        d_pole_search(fx.config, fx.spec, fx.eqrule)


def test_shell_degree_guard():
    fx = F.fixture("ice-cubes-pole")
    from defectlab.cocycles import to_equivariant
    from defectlab.cocycles import ConstantRule
    from defectlab.groups import Z

    eq1 = to_equivariant(ConstantRule(Z(), 3, (Z().element([1]),) * 3))
    with pytest.raises(DegreeUnsupported):
        d_pole_search(fx.config, fx.spec, eq1)


# ---------------------------------------------------------------------------
# gaps and tilt


def _gap_setup(name):
    fx = F.fixture(name)
    m = fx.meta
    cfg, rule, spec = fx.config, fx.rule, fx.spec
    k = m.get("recode", 1)
    if k > 1:
        rule, spec = recode_block(rule, spec, k)
        cfg = recode_config(cfg, fx.spec, k)
    comps = classify_defect(cfg, spec, 1).components
    return fx, cfg, rule, spec, comps


@pytest.mark.parametrize("name,count,per_step", [("ice-gap", 10, 2), ("domino-gap-b", 8, 2), ("domino-gap-c", 8, -4)])
def test_cgap_grows_linearly(name, count, per_step):
    fx, cfg, rule, spec, comps = _gap_setup(name)
    m = fx.meta
    step = m.get("step", (1, 0))
    refs = (m["x_ref"], m["y_ref"])
    for n in range(1, count + 1):
        xn = add(m["x_ref"], tuple(n * s for s in step))
        yn = add(m["y_ref"], tuple(n * s for s in step))
        assert export_to_integer(cgap(cfg, rule, xn, yn, refs, components=comps)) == per_step * n


def test_domino_gap_words():
    fx, cfg, rule, spec, comps = _gap_setup("domino-gap-b")
    m = fx.meta
    v, h = rule.group.generators()
    for n in range(1, 4):
        g = cgap(cfg, rule, add(m["x_ref"], (n, 0)), add(m["y_ref"], (n, 0)), (m["x_ref"], m["y_ref"]), components=comps)
        assert g == (v * h * v * h) ** n


def test_cgap_identity_and_component_lipschitz():
    fx = F.fixture("ice-gap")
    comps = classify_defect(fx.config, fx.spec, 1).components
    refs = (fx.meta["x_ref"], fx.meta["y_ref"])
    assert cgap(fx.config, fx.rule, (3, 4), (3, 4), refs, components=comps).is_identity()
    # |cgap(y, z)| is at most the graph distance inside the component
    comp = next(c for c in comps if tuple(fx.meta["x_ref"]) in c)
    src = tuple(fx.meta["x_ref"])
    dist = {src: 0}
    queue = deque([src])
    while queue:
        z = queue.popleft()
        for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            y = add(z, d)
            if y in comp and y not in dist:
                dist[y] = dist[z] + 1
                queue.append(y)
    hm = height_map(fx.config, fx.rule, comp, src)
    for y, dy in dist.items():
        assert abs(export_to_integer(hm(y))) <= dy


def test_height_map_refuses_holes():
    fx = F.fixture("ice-pole")
    G, _ = defect_region(fx.config, fx.spec, 1)
    with pytest.raises(AmbiguousPath):
        height_map(fx.config, fx.rule, G.sites, (-5, -5))


def test_ice_gap_tilt_diverges():
    fx = F.fixture("ice-gap")
    assert fx.config.shape == (41, 41)
    g = tilt_estimate(fx.config, fx.spec, fx.rule)
    assert g.verdict == "diverging(window-limited)" and g.sharpness == "sharp" and g.lipschitz_ok
    assert g.samples == tuple(sorted(g.samples))


def test_tilt_verdict_survives_new_references():
    fx = F.fixture("ice-gap")
    base = tilt_estimate(fx.config, fx.spec, fx.rule)
    moved = [add(r, (5, 0)) for r in base.refs]
    other = tilt_estimate(fx.config, fx.spec, fx.rule, refs=moved, config=TiltConfig(seed=7))
    assert other.verdict == base.verdict


def test_path_boundary_tilt_is_bounded():
    fx = F.fixture("paths-boundary")
    g = tilt_estimate(fx.config, fx.spec, fx.rule)
    assert g.verdict == "bounded" and max(g.samples) <= 2


def test_single_component_tilt_is_bounded():
    fx = F.fixture("ice")
    g = tilt_estimate(fx.config, fx.spec, fx.rule)
    assert g.verdict == "bounded" and max(g.samples) <= 1


def test_coboundary_twist_keeps_residue_and_bounds_tilt():
    fx = F.fixture("ice-gap")
    G = fx.rule.group
    b = TransferFunction(G, 2, 0, fn=lambda blk: G.element([int(blk.ravel()[0]) % 3]))
    cob = coboundary_rule(b)
    g = tilt_estimate(fx.config, fx.spec, cob)
    assert g.verdict == "bounded"
    pole = F.fixture("ice-pole")
    twisted = ProductRule(pole.rule, cob)
    assert export_to_integer(residue(pole.config, pole.spec, twisted)[0]) == 8


def test_analyze_report():
    fx = F.fixture("ice-gap")
    rep = analyze(fx.config, fx.spec, fx.rule).to_json()
    assert rep["classification"]["kind"] == "domain-boundary"
    assert rep["tilt"][0]["verdict"] == "diverging(window-limited)"
    rep = analyze(F.fixture("ice-pole").config, fx.spec, fx.rule).to_json()
    assert rep["residues"][0]["value"] == {"z": [8], "t": []}


# ---------------------------------------------------------------------------
# persistence


@pytest.mark.parametrize("name,ca,steps", F.trajectories(), ids=lambda x: getattr(x, "name", str(x)))
def test_bundled_trajectories(name, ca, steps):
    fx = F.fixture(name)
    rep = persistence_experiment(fx.config, fx.spec, fx.rule, ca, steps)
    assert all(s.drop_ok for s in rep.steps[1:])
    assert rep.identities_ok
    if ca.kind in ("identity", "shift"):
        assert rep.residues_constant


def test_reversal_negates_the_pole():
    fx = F.fixture("ice-pole")
    ca = [c for c in F.trajectory_cas("ice-pole") if c.name == "reversal"][0]
    rep = persistence_experiment(fx.config, fx.spec, fx.rule, ca, 2)
    assert [export_to_integer(s.residues[0]) for s in rep.steps] == [8, -8, 8]
    assert all(s.pullback_ok for s in rep.steps[1:])


def test_window_exhaustion():
    from defectlab.automaton import shift_ca
    from defectlab.errors import WindowExhausted

    fx = F.fixture("ice-pole")
    with pytest.raises(WindowExhausted):
        persistence_experiment(fx.config, fx.spec, fx.rule, shift_ca(2, 6, (1, 0)), 12)
