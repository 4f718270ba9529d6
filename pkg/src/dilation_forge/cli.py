"""Command-line front end.

Exit codes: 0 success / in class / all identities pass; 1 input or IO error;
2 well-formed but not in the dilatable class (or unsupported multiplicity),
also used for verification failure; 3 infeasible finite padding;
4 construction identity residual exceeded.

``DILATION_FORGE_THREADS`` is honored as a hint only: computations are
deterministic and single-threaded apart from BLAS internals.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .builder import BuildConfig, assemble_model
from .errors import (DilationForgeError, GenerationFailed, IdentityResidualExceeded,
                     InfeasibleFinitePadding, MalformedSpec, NotInClass,
                     UnsupportedMultiplicity)
from .generators import STYLES, random_tuple, scalar_triple
from .io import (class_report_doc, dump_json, load_model, load_tuple, model_to_dict,
                 tuple_to_dict, verification_report_doc)
from .tuples import classify
from .verifier import full_report

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_IN_CLASS = 2
EXIT_INFEASIBLE = 3
EXIT_IDENTITY = 4


def _print_report_text(doc: dict):
    for key in sorted(doc.get("residuals", {})):
        verdict = doc["verdicts"].get(key)
        mark = "pass" if verdict else ("FAIL" if verdict is not None else "    ")
        print(f"  {key:24s} {doc['residuals'][key]:12.3e}  {mark}")


def cmd_classify(args) -> int:
    try:
        spec = load_tuple(args.input)
        report = classify(spec, tol=args.tol)
    except MalformedSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc = class_report_doc(report)
    if args.output:
        dump_json(doc, args.output)
    if args.format == "json":
        print(dump_json(doc, None))
    else:
        print(f"in dilatable class: {report.in_T1n}")
        if not report.in_T1n:
            for reason in report.failing_conditions():
                print(f"  failing: {reason}")
        print(f"  szego_hat1 min eig: {report.szego_hat1.min_eig:.6g}")
        print(f"  szego_hatn min eig: {report.szego_hatn.min_eig:.6g}")
        print(f"  purity radii: {[round(r, 6) for r in report.purity_radii]}")
    return EXIT_OK if report.in_T1n else EXIT_NOT_IN_CLASS


def cmd_dilate(args) -> int:
    try:
        spec = load_tuple(args.input)
    except MalformedSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    config = BuildConfig(aux_pad=args.aux_pad, completion_seed=args.seed,
                         identity_gate=args.tol)
    try:
        model = assemble_model(spec, N=args.degree, config=config)
    except UnsupportedMultiplicity as exc:
        print(f"error: UnsupportedMultiplicity: {exc}", file=sys.stderr)
        return EXIT_NOT_IN_CLASS
    except NotInClass as exc:
        print(f"error: not in the dilatable class: {exc}", file=sys.stderr)
        return EXIT_NOT_IN_CLASS
    except InfeasibleFinitePadding as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except IdentityResidualExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    doc = model_to_dict(model)
    if args.output:
        dump_json(doc, args.output)
        print(f"model written to {args.output} "
              f"({model.fock.cell_count} cells x {model.fock.coeff_dim} coefficients)")
    else:
        print(dump_json(doc, None))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        if args.model:
            model = load_model(args.model)
        else:
            spec = load_tuple(args.input)
            model = assemble_model(spec, N=args.degree,
                                   config=BuildConfig(aux_pad=args.aux_pad,
                                                      completion_seed=args.seed))
    except MalformedSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotInClass, UnsupportedMultiplicity) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_IN_CLASS
    except InfeasibleFinitePadding as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except IdentityResidualExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    tolerances = {"linear": args.tol} if args.tol != 1e-10 else None
    report = full_report(model, tolerances)
    doc = verification_report_doc(report)
    if args.output:
        dump_json(doc, args.output)
    if args.format == "json":
        print(dump_json(doc, None))
    else:
        _print_report_text(doc)
        print(f"overall: {'pass' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_NOT_IN_CLASS


def cmd_random(args) -> int:
    try:
        spec = random_tuple(args.style, args.n, args.dimH, args.seed)
    except GenerationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc = tuple_to_dict(spec)
    if args.output:
        dump_json(doc, args.output)
        print(f"tuple written to {args.output}")
    else:
        print(dump_json(doc, None))
    return EXIT_OK


def cmd_demo(args) -> int:
    spec = scalar_triple()
    print("scalar triple (0.5, 0.4, 0.3), truncation degree "
          f"N={args.degree}")
    model = assemble_model(spec, N=args.degree)
    print("construction self-check residuals:")
    for name, value in sorted(model.transfer.residuals.items()):
        print(f"  {name:24s} {value:12.3e}")
    report = full_report(model)
    print("verification residuals:")
    _print_report_text(verification_report_doc(report))
    print(f"max truncation tail: {max(report.tail_bounds):.3e}")
    print(f"overall: {'pass' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_NOT_IN_CLASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dilation-forge",
        description="Classify tuples of (u-)commuting contractions and construct/verify "
                    "their isometric dilations on a truncated Fock space.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", "-i", required=True, help="tuple JSON file")
        p.add_argument("--output", "-o", help="write result JSON here")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--tol", type=float, default=1e-10, help="base tolerance")

    p = sub.add_parser("classify", help="test membership in the dilatable class")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("dilate", help="construct the dilation model "
                       "(cost grows like C(n-1+N, n-1) * dim D)")
    common(p)
    p.add_argument("--degree", type=int, default=4, help="Fock truncation degree N")
    p.add_argument("--aux-pad", type=int, default=0, help="extra auxiliary padding")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for an alternative (still valid) unitary completion")
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("verify", help="run the full identity verifier")
    common(p, needs_input=False)
    p.add_argument("--input", "-i", help="tuple JSON file (build then verify)")
    p.add_argument("--model", "-m", help="previously written model JSON file")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--aux-pad", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", help="generate a seeded example tuple")
    p.add_argument("--style", choices=STYLES, default="jointly-nilpotent")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--dimH", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help="write tuple JSON here")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("demo", help="run the worked scalar-triple example")
    p.add_argument("--degree", type=int, default=4)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    os.environ.setdefault("DILATION_FORGE_THREADS", "")
    args = build_parser().parse_args(argv)
    if args.command == "verify" and not (args.input or args.model):
        print("error: verify needs --input or --model", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DilationForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
