"""Command-line front end: weight constants, maximal functions, CZ/sparse
decompositions, lemma suites, and the two-sided verification harness.

Exit codes: 0 all verdicts pass, 1 usage or parse error, 2 verification
failure.  Output is deterministic for a fixed (flags, seed) pair: reports
carry no timestamps and JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import czsparse, harness, weights
from .grid import StepFunction
from .operators import KINDS, MaximalQuery, dyadic_maximal
from .weights import PowerWeight, weight_from_dict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here reserves 2 for
    # verification failures, so usage errors must exit 1.
    def error(self, message):
        raise CliError(message)


def _load_weight(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read weight file {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"weight file {path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    try:
        return weight_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"weight file {path}: {exc}")


def _require_step(w, flag="--weight"):
    if not isinstance(w, StepFunction):
        raise CliError(f"{flag} must hold a tabulated step function for this command")
    return w


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _to_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _flat_witness(d: dict | None) -> tuple:
    if not d:
        return ("", "")
    return (d["level"], " ".join(str(i) for i in d["index"]))


def build_parser() -> _Parser:
    parser = _Parser(prog="weakmax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, q_default=None):
        sp.add_argument("--weight", required=True, help="weight/function spec JSON file")
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--q", type=float, default=q_default)
        sp.add_argument("--alpha", type=float, default=0.0)
        sp.add_argument("--depth", type=int, default=None,
                        help="lattice depth (required for power weights)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", default=None, help="output path (default stdout)")

    common(sub.add_parser("constants", help="all weight-class constants"))
    sub.choices["constants"].add_argument("--r", type=float, default=2.0,
                                          help="reverse-Hoelder exponent")

    mx = sub.add_parser("maximal", help="evaluate a dyadic maximal operator")
    common(mx)
    mx.add_argument("--kind", choices=KINDS, default="plain")
    mx.add_argument("--with-weight", default=None,
                    help="weight file for the weighted kinds")

    cz = sub.add_parser("cz", help="CZ decomposition and sparse family")
    common(cz)
    cz.add_argument("--a", type=float, default=None, help="level-set base (default 2^(n+1-alpha))")

    common(sub.add_parser("lemmas", help="reverse-Hoelder lemma suites"))

    vf = sub.add_parser("verify", help="necessity + sufficiency sandwich")
    common(vf)
    vf.add_argument("--c-desk", type=float, default=8.0,
                    help="absolute-constant allowance for the sufficiency verdict")
    vf.add_argument("--n-random", type=int, default=200)

    common(sub.add_parser("necessity", help="test-function lower bound"))
    return parser


def _exponents(args, n: int):
    if args.alpha > 0:
        if args.q is None:
            raise CliError("--alpha > 0 requires --q with 1/p - 1/q = alpha/n")
        if abs(1.0 / args.p - 1.0 / args.q - args.alpha / n) > 1e-12:
            raise CliError(
                f"exponent relation violated: 1/p - 1/q = {1 / args.p - 1 / args.q:g} "
                f"but alpha/n = {args.alpha / n:g}")
        return args.q
    return args.q


def cmd_constants(args) -> int:
    w = _load_weight(args.weight)
    p, q, r = args.p, args.q if args.q is not None else 2.0 * args.p, args.r
    depth = args.depth
    out = [
        weights.ap_constant(w, p, depth=depth).to_dict(),
        weights.a1_constant(w, depth=depth).to_dict(),
        weights.apq_constant(w, p, q, depth=depth).to_dict(),
        weights.a1q_constant(w, q, depth=depth).to_dict(),
        weights.rh_constant(w, r, depth=depth).to_dict(),
        weights.ap_star_constant(w, p, depth=depth).to_dict(),
        weights.apq_star_constant(w, p, q, depth=depth).to_dict(),
    ]
    c_plain, rh_plain = weights.sigma_rh_constant(w, p, depth=depth)
    out.append({"class": "sigma_rh", "p": p, "q": None, "r": None,
                "value": rh_plain, "witness": None, "c": c_plain})
    c_frac, rh_frac = weights.sigma_rh_constant(w, p, q, depth=depth)
    out.append({"class": "sigma_rh_fractional", "p": p, "q": q, "r": None,
                "value": rh_frac, "witness": None, "c": c_frac})
    if args.format == "csv":
        rows = []
        for d in out:
            lev, idx = _flat_witness(d.get("witness"))
            rows.append({"class": d["class"], "p": d["p"], "q": d["q"], "r": d["r"],
                         "value": d["value"], "witness_level": lev, "witness_index": idx})
        _emit(_to_csv(rows), args.output)
    else:
        _emit(_to_json(out), args.output)
    return EXIT_OK


def cmd_maximal(args) -> int:
    if args.format == "csv":
        raise CliError("maximal emits step-function JSON only")
    f = _require_step(_load_weight(args.weight))
    weight = None
    if args.kind in ("weighted", "fractional-weighted"):
        if not args.with_weight:
            raise CliError(f"--kind {args.kind} requires --with-weight")
        weight = _require_step(_load_weight(args.with_weight), "--with-weight")
    query = MaximalQuery(kind=args.kind, alpha=args.alpha, weight=weight)
    result = dyadic_maximal(f, query)
    _emit(_to_json(result.to_dict()), args.output)
    return EXIT_OK


def cmd_cz(args) -> int:
    f = _require_step(_load_weight(args.weight))
    dec = czsparse.cz_decompose(f, a=args.a, alpha=args.alpha)
    family = czsparse.build_sparse(dec)
    payload = {
        "a": dec.a,
        "alpha": dec.alpha,
        "k_min": dec.k_min,
        "k_max": dec.k_max,
        "omega_measure": {str(k): dec.omega_measure(k)
                          for k in range(dec.k_min, dec.k_max + 1)},
        "entries": family.to_json_list(),
    }
    if args.format == "csv":
        rows = []
        for e in payload["entries"]:
            lev, idx = _flat_witness(e["Q"])
            rows.append({"k": e["k"], "j": e["j"], "Q_level": lev, "Q_index": idx,
                         "E_cells": " ".join(str(c) for c in e["E_cells"])})
        _emit(_to_csv(rows), args.output)
    else:
        _emit(_to_json(payload), args.output)
    return EXIT_OK


def cmd_lemmas(args) -> int:
    if args.format == "csv":
        raise CliError("lemmas emits a JSON report only")
    w = _load_weight(args.weight)
    report = harness.lemma_suite(w, args.p, args.q, seed=args.seed, depth=args.depth)
    _emit(_to_json(report.to_dict()), args.output)
    return EXIT_OK if report.verdict else EXIT_VERIFICATION


def cmd_verify(args) -> int:
    w = _load_weight(args.weight)
    n = 1 if isinstance(w, PowerWeight) else w.grid.n
    result = harness.verify_weight(w, args.p, args.alpha, _exponents(args, n),
                                   c_desk=args.c_desk, seed=args.seed,
                                   n_random=args.n_random, depth=args.depth)
    if args.format == "csv":
        suf, nec = result["sufficiency"], result["necessity"]
        row = {
            "p": args.p, "q": args.q, "alpha": args.alpha,
            "depth": suf["context"]["depth"], "seed": args.seed,
            "necessity_measured": nec["measured_ratio"],
            "necessity_bound": nec["theoretical_bound"],
            "sufficiency_measured": suf["measured_ratio"],
            "sufficiency_bound": suf["theoretical_bound"],
            "normalized": suf["normalized"], "c_desk": args.c_desk,
            "verdict": result["verdict"],
        }
        _emit(_to_csv([row]), args.output)
    else:
        _emit(_to_json(result), args.output)
    return EXIT_OK if result["verdict"] else EXIT_VERIFICATION


def cmd_necessity(args) -> int:
    w = _load_weight(args.weight)
    n = 1 if isinstance(w, PowerWeight) else w.grid.n
    report = harness.necessity_check(w, args.p, args.alpha, _exponents(args, n),
                                     depth=args.depth)
    if args.format == "csv":
        rows = [{"level": r["level"],
                 "index": " ".join(str(i) for i in r["index"]),
                 "ratio": r["ratio"]} for r in report.per_cube]
        _emit(_to_csv(rows), args.output)
    else:
        _emit(_to_json(report.to_dict()), args.output)
    return EXIT_OK if report.verdict else EXIT_VERIFICATION


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "constants": cmd_constants,
            "maximal": cmd_maximal,
            "cz": cmd_cz,
            "lemmas": cmd_lemmas,
            "verify": cmd_verify,
            "necessity": cmd_necessity,
        }[args.command]
        return handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except czsparse.SparsityError as exc:
        # a failed certificate is a verification failure, not a usage error
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
