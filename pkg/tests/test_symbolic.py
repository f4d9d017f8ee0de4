import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from defectlab import fixtures as F
from defectlab.errors import BudgetExceeded, RadiusTooSmall, WindowTooSmall
from defectlab.symbolic import (
    Configuration,
    admissible_blocks,
    blocks_sft,
    classify_defect,
    decode_symbol,
    defect_field,
    defect_region,
    enumerate_patches,
    box_offsets,
    full_shift,
    mismatch_sites,
    recode_config,
    recode_spec,
    render_ascii,
    wang_representation,
)

from oracles import box_ok, brute_field


def damaged_ice(seed: int, n: int, size: int, all_symbols: bool) -> Configuration:
    rng = np.random.default_rng(seed)
    base = F.ice_uniform_config((0, 0), (size - 1, size - 1), periodic=False).cells.copy()
    for _ in range(n):
        x, y = rng.integers(0, size, 2)
        base[x, y] = rng.integers(0, 16 if all_symbols else 6)
    return Configuration(base, (0, 0))


def chebyshev_to(mask: np.ndarray) -> np.ndarray:
    pts = np.argwhere(mask)
    out = np.full(mask.shape, 10**6, dtype=np.int64)
    for idx in itertools.product(*[range(s) for s in mask.shape]):
        if len(pts):
            out[idx] = int(np.abs(pts - np.array(idx)).max(axis=1).min())
    return out


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.integers(0, 6), st.integers(5, 12), st.booleans())
def test_defect_field_matches_brute_force(seed, n, size, all_symbols):
    spec = F.ice_arrow_spec()
    cfg = damaged_ice(seed, n, size, all_symbols)
    fld = defect_field(cfg, spec)
    assert np.array_equal(fld.values, brute_field(spec, cfg))


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(7, 12))
def test_defect_field_equals_distance_formula(seed, n, size):
    # F = R - 1 + d(z, X), X = sites whose (window-clipped) R-ball is inadmissible, capped by the window;
    # damage uses allowed symbols only, so every (R-1)-block is admissible
    spec = F.ice_arrow_spec()
    cfg = damaged_ice(seed, n, size, False)
    R = spec.radius
    X = np.zeros(cfg.shape, dtype=bool)
    rfit = np.zeros(cfg.shape, dtype=np.int64)
    for idx in itertools.product(*[range(s) for s in cfg.shape]):
        X[idx] = not box_ok(spec, cfg.cells[tuple(slice(max(i - R, 0), i + R + 1) for i in idx)])
        rfit[idx] = min(min(i, s - 1 - i) for i, s in zip(idx, cfg.shape))
    fld = defect_field(cfg, spec)
    assert np.array_equal(fld.violations, X)
    assert np.array_equal(fld.values, np.minimum(R - 1 + chebyshev_to(X), rfit))


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.integers(0, 8), st.integers(5, 14))
def test_defect_field_lipschitz(seed, n, size):
    spec = F.ice_arrow_spec()
    fld = defect_field(damaged_ice(seed, n, size, True), spec)
    v, wb = fld.values, fld.window_bound
    for i in range(2):
        a = np.take(v, range(v.shape[i] - 1), axis=i)
        b = np.take(v, range(1, v.shape[i]), axis=i)
        ok = ~(np.take(wb, range(v.shape[i] - 1), axis=i) | np.take(wb, range(1, v.shape[i]), axis=i))
        assert (np.abs(a - b)[ok] <= 1).all()


@given(st.integers(0, 10**6), st.integers(0, 8))
def test_unflawed_sets_are_nested(seed, n):
    fld = defect_field(damaged_ice(seed, n, 11, True), F.ice_arrow_spec())
    for r in range(0, 5):
        assert (fld.unflawed_mask(r + 1) <= fld.unflawed_mask(r)).all()


def test_admissible_window_is_window_bound_everywhere():
    fx = F.fixture("ice")
    cfg = F.ice_uniform_config((0, 0), (9, 9), periodic=False)
    fld = defect_field(cfg, fx.spec)
    assert fld.window_bound.all() and not fld.violations.any()
    assert classify_defect(cfg, fx.spec, 1).kind == "none"


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        defect_field(Configuration(np.zeros((2, 2), dtype=np.int64), (0, 0)), F.ice_spec())


def test_flipped_edge_violations_are_the_two_endpoints():
    fx = F.fixture("ice-flip")
    assert mismatch_sites(fx.config, fx.spec) == {(0, 0), (1, 0)}
    _, D = defect_region(fx.config, fx.spec, 1)
    assert {(0, 0), (1, 0)} <= D.sites


@pytest.mark.parametrize(
    "name,kind,extra",
    [
        ("ice-gap", "domain-boundary", 2),
        ("ice-pole", "codimension-2", 1),
        ("paths-three-defects", "codimension-2", 3),
        ("paths-boundary", "domain-boundary", 2),
    ],
)
def test_classification(name, kind, extra):
    fx = F.fixture(name)
    cl = classify_defect(fx.config, fx.spec, 1)
    assert cl.kind == kind
    if kind == "domain-boundary":
        assert cl.n_projective == extra
    else:
        assert len(cl.holes) == extra


def test_ascii_map_marks_defects():
    fx = F.fixture("ice-pole")
    txt = render_ascii(defect_field(fx.config, fx.spec))
    assert "#" in txt and len(txt.splitlines()) == fx.config.shape[1]


# ---------------------------------------------------------------------------
# enumeration, recoding, Wang representation


@pytest.mark.parametrize("k", [1, 2])
def test_ice_block_counts(k):
    # every k x k ice patch extends a 2-in/2-out orientation; count by brute force over arrows
    spec = F.ice_spec()
    pats = enumerate_patches(spec, box_offsets(2, (0, 0), (k - 1, k - 1)))
    flags = F.ICE_FLAGS
    count = 0
    for combo in itertools.product(range(6), repeat=k * k):
        grid = np.array(combo).reshape(k, k)
        ok = all(flags[grid[x, y]][1] != flags[grid[x + 1, y]][3] for x in range(k - 1) for y in range(k))
        ok = ok and all(flags[grid[x, y]][0] != flags[grid[x, y + 1]][2] for x in range(k) for y in range(k - 1))
        count += ok
    assert len(pats) == count


def test_full_shift_wang_representation():
    spec = full_shift(2, 2)
    w, blocks = wang_representation(spec, 0)
    assert len(w.tiles) == 2
    assert all(len(rel) == 4 for rel in w.match)


def test_golden_mean_wang_tiles():
    spec = F.golden_mean_spec()
    w, blocks = wang_representation(spec, 1)
    words = sorted("".join(map(str, b)) for b in blocks)
    assert words == ["000", "001", "010", "100", "101"]
    # a matches b when a's last two symbols are b's first two
    for a, b in w.match[0]:
        assert list(blocks[a][1:]) == list(blocks[b][:2])
    assert len(w.match[0]) == 8


def test_wang_representation_guards():
    with pytest.raises(RadiusTooSmall):
        wang_representation(blocks_sft(1, ("0", "1"), 1, [(0, 0, 0)]), 0)
    with pytest.raises(BudgetExceeded):
        wang_representation(F.ice_spec(), 2, budget=1000)


def test_blocks_spec_sub_blocks():
    spec = blocks_sft(1, ("0", "1"), 1, [(0, 0, 1), (0, 1, 0), (1, 0, 0), (0, 0, 0)])
    assert len(admissible_blocks(spec, 0)) == 2
    assert len(admissible_blocks(spec, 1)) == 4


@pytest.mark.parametrize("k", [2])
def test_recoding_round_trip(k):
    fx = F.fixture("domino-gap-b")
    rs = recode_spec(fx.spec, k)
    rc = recode_config(fx.config, fx.spec, k)
    for w in rc.sites()[:50]:
        blk = decode_symbol(fx.spec, k, rc[w])
        for off in itertools.product(range(k), repeat=2):
            z = tuple(k * a + b for a, b in zip(w, off))
            assert blk[off] == fx.config[z]
    assert len(rs.allowed) == len(enumerate_patches(fx.spec, box_offsets(2, (0, 0), (k - 1, k - 1))))
