"""Scan H^d(X_r; G) over a range of radii and report ranks of the connecting maps.

    python3 scripts/stabilization_scan.py --fixture golden-mean --coeff Z/2 --r-max 4
"""

import argparse
import json
import time

from defectlab import fixtures as F
from defectlab.complexes import stabilization_scan
from defectlab.groups import FgAbelian


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", default="golden-mean")
    ap.add_argument("--coeff", default="Z/2")
    ap.add_argument("--degree", type=int, default=1)
    ap.add_argument("--r-min", type=int, default=0)
    ap.add_argument("--r-max", type=int, default=3)
    ap.add_argument("--budget", type=int, default=200_000)
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args()
    spec = F.fixture(a.fixture).spec
    t0 = time.perf_counter()
    rows = stabilization_scan(spec, a.degree, FgAbelian.parse(a.coeff), a.r_min, a.r_max, a.budget)
    if a.json:
        print(json.dumps([r.to_json() for r in rows], indent=2))
        return
    print(f"{'r':>3}  {'status':<7} {'rank':>5} {'iso':<5} group")
    for r in rows:
        rank = "" if r.map_rank is None else str(r.map_rank)
        iso = "" if r.isomorphism is None else str(r.isomorphism)
        print(f"{r.r:>3}  {r.status:<7} {rank:>5} {iso:<5} {r.group if r.group is not None else '-'}")
    print(f"# {a.fixture}, H^{a.degree}(.; {a.coeff}), {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
