"""Command-line front end.

Commands
    check         decide membership for an instance file (lambda hierarchy)
    extend        flat-extension search for an explicit atomic measure
    bench         seeded random-instance sweep, CSV summary on stdout
    certify-file  re-verify a saved verdict against its instance, offline

Exit codes are the machine contract: 0 = MeasureFound (certify: pass),
1 = NoMeasure / Infeasible (certify: fail), 2 = Inconclusive / Exhausted,
10 = bad input, 11 = internal error, 12 = usage error.

The environment variable TMOMENT_SDP_TOL overrides the interior-point
gap/feasibility tolerance; every flag (and that variable, when set) is
echoed into the JSON output so records are self-describing.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import verify as _verify
from .instances import (
    Instance,
    ParseError,
    dumps_canonical,
    format_polynomial,
    load_instance,
)
from .moments import Tms
from .monomials import monomial_count
from .pipeline import (
    EXHAUSTED,
    INCONCLUSIVE,
    INFEASIBLE,
    MEASURE_FOUND,
    NO_MEASURE,
    PipelineOptions,
    check_membership,
    find_measure,
    poly_to_json,
    random_benchmark,
)
from .refmeasures import ReferenceSpec
from .sdp import SdpOptions

EXIT_FOUND = 0
EXIT_NEGATIVE = 1
EXIT_OPEN = 2
EXIT_INPUT = 10
EXIT_INTERNAL = 11
EXIT_USAGE = 12

_KIND_EXIT = {
    MEASURE_FOUND: EXIT_FOUND,
    NO_MEASURE: EXIT_NEGATIVE,
    INFEASIBLE: EXIT_NEGATIVE,
    INCONCLUSIVE: EXIT_OPEN,
    EXHAUSTED: EXIT_OPEN,
}


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors, which collides with Inconclusive."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _options_from_env() -> tuple[PipelineOptions, dict]:
    env = {}
    opts = PipelineOptions()
    raw = os.environ.get("TMOMENT_SDP_TOL")
    if raw is not None:
        try:
            tol = float(raw)
        except ValueError:
            raise ParseError(f"TMOMENT_SDP_TOL is not a number: {raw!r}") from None
        if not 0 < tol < 1:
            raise ParseError(f"TMOMENT_SDP_TOL must be in (0, 1), got {tol}")
        opts.sdp = SdpOptions(tol_gap=tol, tol_feas=tol)
        env["TMOMENT_SDP_TOL"] = tol
    return opts, env


def _resolve_reference(inst: Instance, xi_flag: str | None, xi_file: str | None):
    """Reference measure: the --xi flag wins, else the instance's own field."""
    if xi_flag is None:
        return inst.reference
    if xi_flag == "ball":
        if inst.K.interior_witness is not None:
            c, r = inst.K.interior_witness
            return ReferenceSpec("ball", {"center": [float(v) for v in c], "radius": float(r)})
        return ReferenceSpec("ball")
    if xi_flag == "box":
        return ReferenceSpec("box")
    if xi_flag == "mc":
        return ReferenceSpec("monte_carlo", {"samples": 1_000_000, "seed": 0})
    if xi_flag == "file":
        if xi_file is None:
            raise ParseError("--xi file needs --xi-file PATH")
        try:
            obj = json.loads(Path(xi_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read reference moments: {exc}") from None
        n, d = int(obj["n"]), int(obj["d"])
        want = monomial_count(n, d)
        if len(obj["moments"]) != want:
            raise ParseError(f"reference moments need {want} entries, got {len(obj['moments'])}")
        return Tms(n, d, np.asarray(obj["moments"], dtype=float))
    raise ParseError(f"unknown --xi {xi_flag!r}")


def _emit(record: dict, args, summary: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(dumps_canonical(record))
    if getattr(args, "json", False):
        sys.stdout.write(dumps_canonical(record))
    else:
        print(summary)


def _echo(record: dict, command: str, args_dict: dict, env: dict) -> dict:
    record["cli"] = {"command": command, "flags": args_dict, "env": env}
    return record


def _atoms_lines(measure: dict) -> list[str]:
    lines = []
    for u, a in zip(measure["points"], measure["weights"]):
        coords = ", ".join(f"{v: .6f}" for v in u)
        lines.append(f"  weight {a:.6f}  at ({coords})")
    return lines


# -- check ---------------------------------------------------------------------


def _cmd_check(args) -> int:
    opts, env = _options_from_env()
    inst = load_instance(args.instance)
    xi = _resolve_reference(inst, args.xi, args.xi_file)
    verdict = check_membership(inst.y, inst.K, xi=xi, mode=args.mode,
                               k_max=args.kmax, options=opts)
    record = _echo(verdict.to_json(), "check",
                   {"mode": args.mode, "kmax": args.kmax, "xi": args.xi,
                    "xi_file": args.xi_file, "instance": str(args.instance)}, env)

    lines = [f"verdict: {verdict.kind}"]
    lam_bits = [f"k={h['k']} {h['lambda']:.6g}" for h in verdict.history if "lambda" in h]
    if lam_bits:
        lines.append("multiplier history: " + ", ".join(lam_bits))
    if verdict.kind == MEASURE_FOUND:
        lines[0] += f" at k = {verdict.k} (flat truncation at degree {verdict.t})"
        lines.append(f"shift multiplier lambda = {verdict.lam:.6g}")
        lines.extend(_atoms_lines(verdict.measure.to_json()))
    elif verdict.kind == NO_MEASURE:
        lines[0] += f" at k = {verdict.k} ({verdict.mode})"
        cert = verdict.certificate
        lines.append(f"certificate: <p, y> = {cert.value:.6g} "
                     f"({cert.normalization} normalization, "
                     f"identity residual {cert.identity_residual:.2e})")
        lines.append("p = " + format_polynomial(cert.p))
    else:
        lines[0] += f" after k_max = {verdict.k_max}"
        lines.append(f"trend: {verdict.trend}")
    for note in verdict.notes:
        lines.append(f"note: {note}")
    _emit(record, args, "\n".join(lines))
    return _KIND_EXIT[verdict.kind]


# -- extend ---------------------------------------------------------------------


def _cmd_extend(args) -> int:
    opts, env = _options_from_env()
    inst = load_instance(args.instance)
    K = None if args.rn else inst.K
    result = find_measure(inst.y, K, objective=args.objective, seed=args.seed,
                          k_start=args.kstart, k_max=args.kmax, options=opts)
    record = _echo(result.to_json(), "extend",
                   {"objective": args.objective, "seed": args.seed,
                    "kstart": args.kstart, "kmax": args.kmax, "rn": args.rn,
                    "instance": str(args.instance)}, env)

    lines = [f"result: {result.kind}"]
    if result.kind == MEASURE_FOUND:
        lines[0] += f" at k = {result.k} (flat truncation at degree {result.t})"
        lines.append(f"objective: {result.objective}")
        lines.extend(_atoms_lines(result.measure.to_json()))
    elif result.kind == INFEASIBLE:
        lines[0] += f" at k = {result.k} (relaxation certified infeasible)"
        if result.certificate is not None:
            lines.append("certificate: p = " + format_polynomial(result.certificate.p))
    else:
        lines[0] += f" after k_max = {result.k_max}"
        for prof in result.profiles:
            ranks = ", ".join(f"t={p['t']}: {p['rank_low']}/{p['rank_high']}"
                              for p in prof["profile"])
            lines.append(f"k={prof['k']} ranks {ranks}")
    for note in result.notes:
        lines.append(f"note: {note}")
    _emit(record, args, "\n".join(lines))
    return _KIND_EXIT[result.kind]


# -- bench ---------------------------------------------------------------------


def _cmd_bench(args) -> int:
    opts, _ = _options_from_env()
    kind = {"box": "box", "rn": "gaussian_rn"}[args.kind]
    rows = random_benchmark(args.n, args.d, kind=kind, instances=args.count,
                            seed=args.seed, k_max=args.kmax, options=opts)
    fields = ["instance", "kind", "n", "d", "success", "k", "atoms", "result", "runtime_s"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    sys.stdout.write(buf.getvalue())
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    return EXIT_FOUND


# -- certify-file -----------------------------------------------------------------


def _cmd_certify(args) -> int:
    try:
        verdict = json.loads(Path(args.verdict).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read verdict file: {exc}") from None
    if not isinstance(verdict, dict):
        raise ParseError("verdict file must hold a JSON object")
    inst = load_instance(args.instance)
    report = _verify.verify_verdict(
        verdict, inst.n, inst.d, inst.y.values,
        generators=[poly_to_json(g) for g in inst.K.generators],
        radius=inst.K.radius,
    )
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: {report.message}")
    for key, val in sorted(report.checks.items()):
        print(f"  {key}: {val}")
    return EXIT_FOUND if report.passed else EXIT_NEGATIVE


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="tmoment",
                             description="truncated moment sequences: decide "
                                         "representability, extract measures, "
                                         "certify nonexistence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[], help="membership hierarchy on an instance file")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--mode", choices=["qm", "pre"], default="qm",
                   help="localizing family: quadratic module or preordering")
    p.add_argument("--kmax", type=int, default=None, help="largest relaxation order")
    p.add_argument("--xi", choices=["ball", "box", "mc", "file"], default=None,
                   help="reference measure (default: instance's, else automatic)")
    p.add_argument("--xi-file", default=None, help="moments JSON for --xi file")
    p.add_argument("--out", default=None, help="write the verdict JSON here")
    p.add_argument("--json", action="store_true", help="print JSON instead of a summary")
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("extend", help="flat-extension search on an instance file")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--objective", choices=["seeded", "ones", "trace"], default="seeded")
    p.add_argument("--seed", type=int, default=0, help="seed for the seeded objective")
    p.add_argument("--kstart", type=int, default=None, help="first relaxation order")
    p.add_argument("--kmax", type=int, default=None, help="largest relaxation order")
    p.add_argument("--rn", action="store_true",
                   help="ignore the instance's set and search over all of R^n")
    p.add_argument("--out", default=None, help="write the result JSON here")
    p.add_argument("--json", action="store_true", help="print JSON instead of a summary")
    p.set_defaults(run=_cmd_extend)

    p = sub.add_parser("bench", help="seeded random instances, CSV summary")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--kind", choices=["box", "rn"], default="box")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--out", default=None, help="also write the CSV here")
    p.set_defaults(run=_cmd_bench)

    p = sub.add_parser("certify-file", help="re-verify a saved verdict offline")
    p.add_argument("verdict", help="verdict JSON file")
    p.add_argument("instance", help="instance JSON file it was computed from")
    p.set_defaults(run=_cmd_certify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
