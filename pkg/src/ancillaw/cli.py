"""Command-line entry point.

    ancillaw prob --variant ancilla --stats fermion --n 7
    ancillaw table --n-min 2 --n-max 10
    ancillaw run schemes/ancilla-separate_boson_n2.scheme --format json
    ancillaw sample --variant ancilla-separate --stats boson --n 2 --shots 100000 --seed 7
    ancillaw verify schemes/ancilla-common_fermion_n3.scheme

Exit codes: 0 success, 1 usage, 2 parse/compile, 3 physics, 4 resource cap.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .algebra import Statistics
from .dsl import SchemeParseError, Verify, parse, scheme_source
from .measurement import NotFactorizableError
from .runner import VerificationError, execute
from .schemes import (
    PauliForbiddenError,
    ProbabilityTable,
    SchemeVariant,
    closed_form_prob,
    fmt,
    selector_for,
    simulate,
)

log = logging.getLogger("ancillaw")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PHYSICS, EXIT_RESOURCE = 0, 1, 2, 3, 4

VARIANTS = ("ancilla", "ancilla-separate", "ancilla-common", "extraction")


@dataclass
class BruteForceCaps:
    boson: int = 12
    fermion: int = 16

    def limit(self, stats: Statistics) -> int:
        return self.boson if stats is Statistics.BOSON else self.fermion


class UsageError(Exception):
    pass


class ResourceCapError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_variant(name: str, stats: Statistics) -> SchemeVariant:
    """``ancilla`` is the recommended route: separate C_i for bosons, common C for fermions."""
    if name == "ancilla":
        return SchemeVariant.ANCILLA_COMMON if stats is Statistics.FERMION else SchemeVariant.ANCILLA_SEPARATE
    return SchemeVariant(name)


def cmd_prob(args, out):
    stats = Statistics.parse(args.stats)
    variant = resolve_variant(args.variant, stats)
    selector = selector_for(variant, stats)
    if args.mode == "exact":
        p = closed_form_prob(selector, args.n)
    else:
        caps = BruteForceCaps(args.cap_boson, args.cap_fermion)
        if args.n > caps.limit(stats):
            raise ResourceCapError(f"n = {args.n} exceeds the brute-force cap {caps.limit(stats)} for {stats.name.lower()}s")
        p = simulate(args.n, variant, stats).probability
    out.write(fmt(p) + "\n")


def cmd_table(args, out):
    try:
        table = ProbabilityTable.compute(args.n_min, args.n_max)
    except ValueError as exc:
        raise UsageError(str(exc))
    out.write(table.to_csv() if args.format == "csv" else table.to_json())


def _load(args, require_verify=False):
    if args.file is not None:
        if any(v is not None for v in (args.variant, args.stats, args.n)):
            raise UsageError("give either a scheme file or --variant/--stats/--n, not both")
        path = Path(args.file)
        ast = parse(path.read_text(encoding="utf-8"))
        name = path.stem
    else:
        if None in (args.variant, args.stats, args.n):
            raise UsageError("without a scheme file, --variant, --stats and --n are required")
        stats = Statistics.parse(args.stats)
        variant = resolve_variant(args.variant, stats)
        if args.n < 2:
            raise UsageError("n must be >= 2")
        ast = parse(scheme_source(args.n, variant, stats))
        name = f"{variant.value}"
    if require_verify and not any(isinstance(s, Verify) for s in ast.steps):
        ast.steps = ast.steps + (Verify(),)
    for w in ast.warnings:
        log.warning("%s", w)
    return ast, name


def _rounded(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_rounded(v) for v in obj]
    return obj


def _emit(report, fmt_name, out):
    if fmt_name == "json":
        out.write(json.dumps(_rounded(report.as_dict()), indent=2) + "\n")
        return
    out.write(f"scheme: {report.scheme}\nstatistics: {report.statistics}\nn: {report.n}\n")
    for s in report.steps:
        out.write(f"{s['kind']}: probability {fmt(s['probability'])}\n")
    if report.fidelity is not None:
        out.write(f"fidelity: {fmt(report.fidelity)}\n")
    if report.eta is not None:
        out.write(f"eta: {report.eta:+d}\n")
    if report.sampling:
        s = report.sampling
        out.write(
            f"sampling: {s['shots']} shots, seed {s['seed']}, {s['generator']}, "
            f"success frequency {fmt(s['success_frequency'])}\n"
        )


def cmd_run(args, out, require_verify=False):
    ast, name = _load(args, require_verify)
    try:
        report = execute(ast, name, shots=args.shots, seed=args.seed)
    except (NotFactorizableError, VerificationError) as exc:
        _emit(exc.report, args.format, out)
        raise
    _emit(report, args.format, out)


def build_parser():
    p = _Parser(prog="ancillaw", description="Ancilla-mode W-state generation with identical particles.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("prob", help="success probability of one scheme")
    pr.add_argument("--variant", choices=VARIANTS, required=True)
    pr.add_argument("--stats", choices=("boson", "fermion"), required=True)
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--mode", choices=("exact", "brute-force"), default="exact")
    pr.add_argument("--cap-boson", type=int, default=BruteForceCaps.boson)
    pr.add_argument("--cap-fermion", type=int, default=BruteForceCaps.fermion)

    tb = sub.add_parser("table", help="closed-form success probabilities for a range of n")
    tb.add_argument("--n-min", type=int, default=2)
    tb.add_argument("--n-max", type=int, default=10)
    tb.add_argument("--format", choices=("csv", "json"), default="csv")

    for name, help_ in (
        ("run", "execute a scheme file or built-in scheme"),
        ("sample", "run with Monte Carlo sampling of the postselection"),
        ("verify", "run and check the output against the W state"),
    ):
        r = sub.add_parser(name, help=help_)
        r.add_argument("file", nargs="?")
        r.add_argument("--variant", choices=VARIANTS)
        r.add_argument("--stats", choices=("boson", "fermion"))
        r.add_argument("--n", type=int)
        r.add_argument("--format", choices=("text", "json"), default="text")
        r.add_argument("--shots", type=int, required=name == "sample")
        r.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "prob":
            if args.n < 2:
                raise UsageError("n must be >= 2")
            cmd_prob(args, out)
        elif args.command == "table":
            cmd_table(args, out)
        else:
            if args.shots is not None and args.shots < 1:
                raise UsageError("--shots must be >= 1")
            cmd_run(args, out, require_verify=args.command == "verify")
    except UsageError as exc:
        print(f"ancillaw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemeParseError, OSError) as exc:
        print(f"ancillaw: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PauliForbiddenError, NotFactorizableError, VerificationError) as exc:
        print(f"ancillaw: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ResourceCapError as exc:
        print(f"ancillaw: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
