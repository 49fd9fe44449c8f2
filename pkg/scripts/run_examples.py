#!/usr/bin/env python3
"""Run every shipped fixture through the driver it was built for.

Prints one line per fixture: verdict kind, settling order, headline number
(shift amount or atom count), wall time, and whether the offline checker
accepts the emitted record.  Exits nonzero if any outcome or verification
deviates from the expected column.
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from tmoment import verify
from tmoment.instances import load_instance
from tmoment.pipeline import check_membership, find_measure, poly_to_json

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"

# (file, driver, driver kwargs, expected verdict kind)
RUNS = [
    ("ball_quartic_deg6.json", "check", {}, "NoMeasure"),
    ("circle_10atoms_deg6.json", "check", {}, "MeasureFound"),
    ("plusminus_ones_deg4.json", "check", {}, "MeasureFound"),
    ("quartic_1d_no_measure.json", "search", {"objective": "trace"}, "Infeasible"),
    ("simplex_ball_deg2.json", "search", {"objective": "ones"}, "MeasureFound"),
    ("rn_deg4_trace.json", "search", {"objective": "trace"}, "MeasureFound"),
]


def run_one(name: str, driver: str, kwargs: dict, expect: str) -> bool:
    inst = load_instance(FIXTURES / name)
    t0 = time.perf_counter()
    if driver == "check":
        result = check_membership(inst.y, inst.K, xi=inst.reference, **kwargs)
    else:
        result = find_measure(inst.y, inst.K, **kwargs)
    dt = time.perf_counter() - t0

    gens = None if inst.K is None else [poly_to_json(g) for g in inst.K.generators]
    radius = None if inst.K is None else inst.K.radius
    report = verify.verify_verdict(result.to_json(), inst.n, inst.d, inst.y.values,
                                   generators=gens, radius=radius)

    if result.kind == "MeasureFound":
        headline = f"{len(result.measure.weights)} atoms, resid {result.measure.residual:.1e}"
    elif result.kind == "NoMeasure":
        headline = f"lambda_{result.k} = {result.lam:.4f}"
    else:
        headline = result.kind.lower()
    ok = result.kind == expect and report.passed
    print(f"{'ok' if ok else 'FAIL':4} {name:28} {driver:6} k={result.k}  "
          f"{headline:32} {dt:6.1f}s  verify={'pass' if report.passed else 'FAIL'}")
    if not report.passed:
        print(f"     {report.message}")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", help="run just the fixtures whose name contains this substring")
    args = parser.parse_args()

    failures = 0
    for name, driver, kwargs, expect in RUNS:
        if args.only and args.only not in name:
            continue
        if not run_one(name, driver, kwargs, expect):
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
