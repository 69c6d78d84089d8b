"""Command-line front end: ``belyi enumerate | stats | pointed | verify | series``.

Exit codes: 0 success, 1 verification or refinement failure, 2 usage,
capacity or input errors.  Machine-readable output always goes to the JSONL
file given with ``--out``; stdout carries a short human summary.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings

import mpmath

from . import __version__

log = logging.getLogger("belyi")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def parse_degrees(text: str) -> list[int]:
    """``"7"`` or ``"1-9"``."""
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad degree range {text!r}") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad degree range {text!r}")
    return list(range(lo, hi + 1))


def parse_lambda(text: str) -> tuple:
    """``"5^1, 4^1 1^1, 4^1 1^1"`` or ``"5;4,1;4,1"`` to three partitions."""
    from .perm import Partition
    if ";" in text:
        parts = [tuple(int(x) for x in p.split(",") if x.strip()) for p in text.split(";")]
    else:
        parts = [tuple(Partition.from_exponent_str(p.strip())) for p in text.split(",")]
    if len(parts) != 3:
        raise UsageError(f"expected three partitions in {text!r}")
    return tuple(tuple(sorted(p, reverse=True)) for p in parts)


def _require_file(path):
    if path is not None and not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")


def _check_out(path):
    if path is None:
        return
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d):
        raise UsageError(f"output directory does not exist: {d}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output file (JSONL for passports, JSON for series tools)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--digits", type=int, default=50, help="working precision in decimal digits")
    p.add_argument("-v", "--verbose", action="store_true")


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------

class _LamFilter:
    """Picklable filter keeping triples whose cycle types match ``lam`` up to order."""

    def __init__(self, lam):
        self.target = sorted(lam)

    def __call__(self, lam) -> bool:
        return sorted(tuple(p) for p in lam) == self.target


def _load_group(path):
    from .perm import PermGroup, Permutation
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        data = {"generators": data}
    deg = data.get("degree")
    perms = [Permutation.from_cycles(g, deg) if isinstance(g, str) else Permutation(g)
             for g in data.get("generators", [])]
    if not perms:
        raise UsageError("group file lists no generators")
    return PermGroup(deg or perms[0].degree, perms)


def _enumerate_records(args) -> list:
    from .database import PassportRecord
    from .passports import assemble_passports, enumerate_degree, enumerate_group, s3_canonicalize
    lam_filter = _LamFilter(parse_lambda(args.lam)) if args.lam else None
    genera = set(args.genus) if args.genus else None
    passports = []
    if args.group_file:
        G = _load_group(args.group_file)
        triples = enumerate_group(G, allow_large=args.allow_large)
        for p in assemble_passports(triples):
            p = s3_canonicalize(p)
            if (genera is None or p.genus in genera) and (lam_filter is None or lam_filter(p.lam)):
                passports.append(p)
    else:
        if args.degree is None:
            raise UsageError("--degree or --group-file is required")
        for d in parse_degrees(args.degree):
            passports += enumerate_degree(d, genera=genera, lam_filter=lam_filter,
                                          jobs=args.jobs, allow_large=args.allow_large)
    return [PassportRecord.from_passport(p) for p in passports]


def cmd_enumerate(args) -> int:
    from .database import counts_table, write_jsonl
    _check_out(args.out)
    _require_file(args.group_file)
    records = _enumerate_records(args)
    table = counts_table(records)
    if args.out:
        write_jsonl(args.out, records)
    degrees = table.degrees
    if not args.group_file and args.degree:
        degrees = parse_degrees(args.degree)
    for d in degrees:
        print(table.summary_line(d) if table.row(d) else f"d={d}: (total 0)")
    if len(degrees) > 1:
        print(f"all degrees: total {table.total}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------

def cmd_stats(args) -> int:
    from .database import format_beta, read_jsonl, read_orbits, stats
    for path in args.input:
        _require_file(path)
    _require_file(args.orbits)
    records = []
    for path in args.input:
        records += read_jsonl(path)
    if args.degree:
        keep = set(parse_degrees(args.degree))
        records = [r for r in records if r.degree in keep]
    orbits = read_orbits(args.orbits) if args.orbits else []
    table = stats(records, orbits)
    for line in table.lines():
        print(line)
    if args.out:
        _check_out(args.out)
        out = {"counts": {f"{d},{g}": n for (d, g), n in table.counts.items()},
               "max_sizes": {str(d): n for d, n in table.max_sizes.items()},
               "beta": {str(d): format_beta(b) for d, b in table.betas.items()}}
        _atomic_json(args.out, out)
    return EXIT_OK


def _atomic_json(path, obj):
    tmp = f"{path}.tmp-{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=1, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


# ---------------------------------------------------------------------------
# pointed
# ---------------------------------------------------------------------------

def _record_to_passport(rec):
    from .passports import assemble_passports
    ps = assemble_passports(rec.triple_objects())
    if len(ps) != 1:
        raise UsageError(f"{rec.key}: stored triples do not form a single passport")
    return ps[0]


def describe_descent(rec) -> str:
    w = next((pp for pp in rec.pointed or () if pp.get("witness")), None)
    if rec.descends_guaranteed and w:
        return f"descends: yes (s={w['s']}, e={w['e']}, a={w['a']})"
    return "descends by pointed criterion: no"


def cmd_pointed(args) -> int:
    from .database import read_jsonl, write_jsonl
    from .pointed import descent_witness, pointed_classes
    _check_out(args.out)
    if args.input:
        _require_file(args.input)
        records = read_jsonl(args.input)
    elif args.degree:
        records = _enumerate_records(args)
    else:
        raise UsageError("an input file or --degree is required")
    if args.lam:
        flt = _LamFilter(parse_lambda(args.lam))
        records = [r for r in records if flt(r.lam)]
    for rec in records:
        p = _record_to_passport(rec)
        pointed = pointed_classes(p)
        w = descent_witness(p, pointed)
        rec.set_pointed(pointed, w is not None)
        if w is not None:
            for entry, pp in zip(rec.pointed, pointed):
                if pp is w:
                    entry["witness"] = True
        print(f"{rec.key} size={rec.size}: {describe_descent(rec)}")
    if args.out:
        write_jsonl(args.out, records)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import load_map_fixture, verify_ramification
    _require_file(args.fixture)
    phi, lam, relabel = load_map_fixture(args.fixture)
    if args.lam:
        lam = parse_lambda(args.lam)
    if lam is None:
        raise UsageError("the fixture has no lambda; pass --lambda")
    report = verify_ramification(phi, lam, digits=args.digits, relabel=relabel or args.relabel,
                                 tol=args.tol)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# series tools
# ---------------------------------------------------------------------------

def _load_model(path):
    from .curves import EllipticModel, HyperellipticModel
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    data = data.get("model", data)
    if "c4" in data:
        return EllipticModel(data["c4"], data["c6"])
    return HyperellipticModel(data.get("u", []), data["v"])


def cmd_laurent_tail(args) -> int:
    from .curves import EllipticModel, laurent_tail
    from .series import format_scalar, poly_to_str
    _require_file(args.model)
    m = _load_model(args.model)
    if isinstance(m, EllipticModel):
        m = m.as_hyperelliptic()
    with mpmath.workdps(args.digits):
        P = laurent_tail(m, args.j)
        print(f"P_{args.j} = {poly_to_str(P)}")
        if args.out:
            _atomic_json(args.out, {"j": args.j, "tail": [format_scalar(c) for c in P]})
    return EXIT_OK


def cmd_rr_basis(args) -> int:
    from .curves import EllipticModel, rr_basis
    _require_file(args.model)
    m = _load_model(args.model)
    if isinstance(m, EllipticModel):
        m = m.as_hyperelliptic()
    with mpmath.workdps(args.digits):
        basis = rr_basis(m, args.m)
        print(f"dim L({args.m} inf) = {len(basis)}")
        for f in basis:
            print(f"  pole order {f.pole_order}: {f!r}")
        if args.out:
            _atomic_json(args.out, {"m": args.m, "basis": [
                {"pole_order": f.pole_order, "label": repr(f)} for f in basis]})
    return EXIT_OK


def load_newton_problem(path):
    """``(system, initial assignment)`` from a JSON description.

    Keys: ``model`` (``{"c4", "c6"}``), ``phi0`` / ``phi_inf`` (pole order ->
    coefficient), ``u``, ``lambda``, ``infinity_length``, ``normalizations``
    and ``initial`` (values for the remaining unknowns).
    """
    from .curves import EllipticModel
    from .newton import BelyiMapAnsatz, RamificationData, build_newton_system
    from .series import parse_scalar
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    E = EllipticModel(data["model"]["c4"], data["model"]["c6"], check=False)
    phi0 = {int(k): parse_scalar(v) for k, v in data["phi0"].items()}
    phi_inf = {int(k): parse_scalar(v) for k, v in data["phi_inf"].items()}
    ansatz = BelyiMapAnsatz(E, phi0, phi_inf, parse_scalar(data.get("u", "1")))
    ram = RamificationData(tuple(tuple(l) for l in data["lambda"]), int(data["infinity_length"]))
    system = build_newton_system(ansatz, ram, [tuple(n) for n in data.get("normalizations", [])])
    initial = {"c4": E.c4, "c6": E.c6, "u": ansatz.u}
    initial.update({f"a{k}": c for k, c in phi0.items()})
    initial.update({f"b{k}": c for k, c in phi_inf.items()})
    initial.update({k: parse_scalar(v) for k, v in data.get("initial", {}).items()})
    return system, initial


def cmd_newton_refine(args) -> int:
    from .newton import NewtonError, newton_solve
    from .series import format_scalar
    _require_file(args.system)
    _check_out(args.out)
    system, initial = load_newton_problem(args.system)
    target = args.target_digits
    if args.tol is not None:
        target = int(round(-mpmath.log10(mpmath.mpf(args.tol))))
    try:
        res = newton_solve(system, initial, target_digits=target,
                           digits=max(args.digits, target + 10), max_iter=args.max_iter)
    except NewtonError as exc:
        print(f"newton failed: {exc}")
        return EXIT_FAIL
    print(f"{system.size[0]} equations in {system.size[1]} unknowns; "
          f"converged in {res.iterations} iterations, residual {mpmath.nstr(res.residual, 5)}")
    print("correct digits: " + " ".join(f"{h:.1f}" for h in res.digits_history()))
    with mpmath.workdps(args.digits):
        values = {name: format_scalar(v, args.digits)
                  for name, v in zip(system.variables, res.values)}
    for name, v in values.items():
        print(f"  {name} = {v[0]} + {v[1]}*i")
    if args.out:
        _atomic_json(args.out, {"values": values, "iterations": res.iterations,
                                "residual": mpmath.nstr(res.residual, 10),
                                "digits_history": res.digits_history()})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="belyi", description="Belyi map passports and tools")
    parser.add_argument("--version", action="version", version=f"belyi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate passports by degree or group")
    _common(p)
    p.add_argument("--degree", help="degree N or range A-B")
    p.add_argument("--genus", type=int, action="append", help="keep only this genus (repeatable)")
    p.add_argument("--lambda", dest="lam", help='cycle types, e.g. "5^1, 4^1 1^1, 4^1 1^1"')
    p.add_argument("--group-file", help="JSON file with generators of a transitive group")
    p.add_argument("--allow-large", action="store_true", help="allow degrees 10 and 11")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("stats", help="count tables, maximal sizes and beta")
    _common(p)
    p.add_argument("input", nargs="+", help="passport JSONL files")
    p.add_argument("--orbits", help="Galois orbit JSONL file")
    p.add_argument("--degree", help="restrict to degree N or range A-B")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pointed", help="pointed passports and the descent criterion")
    _common(p)
    p.add_argument("input", nargs="?", help="passport JSONL file")
    p.add_argument("--degree", help="enumerate this degree instead of reading a file")
    p.add_argument("--genus", type=int, action="append")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--group-file")
    p.add_argument("--allow-large", action="store_true")
    p.set_defaults(func=cmd_pointed)

    p = sub.add_parser("verify", help="check the ramification of a map")
    _common(p)
    p.add_argument("fixture", help="JSON file with model, numerator, denominator, lambda")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--tol", type=float, help="root clustering tolerance")
    p.add_argument("--relabel", action="store_true",
                   help="accept the partitions in any order of the branch values")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("series", help="series tools")
    tools = p.add_subparsers(dest="tool", required=True)
    t = tools.add_parser("laurent-tail", help="polynomial tail P_j on an even model")
    _common(t)
    t.add_argument("--model", required=True)
    t.add_argument("--j", type=int, default=0)
    t.set_defaults(func=cmd_laurent_tail)
    t = tools.add_parser("rr-basis", help="basis of L(m inf)")
    _common(t)
    t.add_argument("--model", required=True)
    t.add_argument("--m", type=int, required=True)
    t.set_defaults(func=cmd_rr_basis)
    t = tools.add_parser("newton-refine", help="refine a Belyi map by Newton iteration")
    _common(t)
    t.add_argument("system", help="JSON description of ansatz, ramification and start values")
    t.add_argument("--target-digits", type=int, default=30)
    t.add_argument("--tol", type=float, help="target residual (overrides --target-digits)")
    t.add_argument("--max-iter", type=int, default=50)
    t.set_defaults(func=cmd_newton_refine)
    return parser


def main(argv=None) -> int:
    from .perm import CapacityError
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    out = getattr(args, "out", None)
    existed = out is not None and os.path.exists(out)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            with mpmath.workdps(getattr(args, "digits", 50)):
                return args.func(args)
    except (UsageError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if out is not None and not existed and os.path.exists(out):
            os.unlink(out)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
