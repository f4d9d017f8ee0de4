"""Run every bundled persistence trajectory and tabulate residues and identity checks."""

import argparse
import json

from defectlab import fixtures as F
from defectlab.cocycles import export_to_integer
from defectlab.defects import persistence_experiment
from defectlab.errors import ValueEscapesSubgroup


def _show(g) -> str:
    try:
        return str(export_to_integer(g))
    except ValueEscapesSubgroup:
        return str(g)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=3)
    ap.add_argument("--tilt", action="store_true", help="also re-estimate tilt at every step (slow)")
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args()
    out = []
    for name, ca, steps in F.trajectories(a.steps):
        fx = F.fixture(name)
        rep = persistence_experiment(fx.config, fx.spec, fx.rule, ca, steps, tilt=a.tilt)
        out.append({"fixture": name, **rep.to_json()})
        if not a.json:
            res = " | ".join(",".join(_show(g) for g in s.residues) or "-" for s in rep.steps)
            kinds = ",".join(s.classification.kind for s in rep.steps)
            print(f"{name:<20} {ca.name:<12} {rep.invariance:<14} ok={rep.identities_ok!s:<5} "
                  f"const={rep.residues_constant!s:<5} residues=[{res}] kinds={kinds}")
    if a.json:
        print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
