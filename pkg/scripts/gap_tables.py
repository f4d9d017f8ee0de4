"""Tables of cgap(x_n, y_n) on the gap fixtures and tilt verdicts for all planar fixtures."""

import argparse

from defectlab import fixtures as F
from defectlab.cocycles import export_to_integer, recode_block
from defectlab.defects import TiltConfig, cgap, tilt_estimate
from defectlab.errors import DefectLabError
from defectlab.lattice import add
from defectlab.symbolic import classify_defect, recode_config

GAP_FIXTURES = ("ice-gap", "domino-gap-b", "domino-gap-c")


def recoded(fx):
    cfg, rule, spec = fx.config, fx.rule, fx.spec
    k = fx.meta.get("recode", 1)
    if k > 1:
        rule, spec = recode_block(rule, spec, k)
        cfg = recode_config(cfg, fx.spec, k)
    return cfg, rule, spec


def gap_rows(name: str, count: int):
    fx = F.fixture(name)
    cfg, rule, spec = recoded(fx)
    comps = classify_defect(cfg, spec, 1).components
    x0, y0 = fx.meta["x_ref"], fx.meta["y_ref"]
    step = fx.meta.get("step", (1, 0))
    for n in range(1, count + 1):
        d = tuple(n * s for s in step)
        g = cgap(cfg, rule, add(x0, d), add(y0, d), (x0, y0), components=comps)
        yield n, g, export_to_integer(g)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    for name in GAP_FIXTURES:
        print(f"## {name}")
        for n, g, v in gap_rows(name, a.count):
            print(f"{n:>4} {v:>6}  {g}")
    print("## tilt")
    for name in F.names():
        fx = F.fixture(name)
        if fx.rule is None or fx.config.D != 2:
            continue
        try:
            cfg, rule, spec = recoded(fx)
            g = tilt_estimate(cfg, spec, rule, config=TiltConfig(seed=a.seed))
            row = f"{g.verdict:<26} {g.sharpness:<10} max s={max(g.samples, default=0):.3f} slope={g.fit_slope:.3f}"
        except DefectLabError as exc:
            row = f"{type(exc).__name__}: {exc}"
        print(f"{name:<22} {row}")


if __name__ == "__main__":
    main()
