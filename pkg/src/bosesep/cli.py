"""Command-line interface.

Exit codes::

    0  success / Separable
    2  bad arguments, invalid input, refused precondition
    3  I/O error
    4  EntangledNPT
    5  Undetermined
    6  certificate extraction failed
    7  candidate verification failed
"""

import argparse
import json
import sys

import numpy as np

from . import states
from .bosonic import bosonic_dim
from .errors import (
    BoseSepError,
    ExtractionFailed,
    ParseError,
    PreconditionFailed,
    Unsupported,
)
from .formats import dump_state, load_state, report_to_dict, state_to_dict
from .hunt import DETECTORS, HuntConfig, run_hunt, verify_candidate
from .linalg import SystemShape, partial_transpose
from .separability import Verdict, bound_window, classify, extract_certificate
from .states import StateRecord

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NPT = 4
EXIT_UNDETERMINED = 5
EXIT_EXTRACTION = 6
EXIT_VERIFY = 7

VERDICT_EXIT = {
    Verdict.SEPARABLE: EXIT_OK,
    Verdict.ENTANGLED_NPT: EXIT_NPT,
    Verdict.UNDETERMINED: EXIT_UNDETERMINED,
    Verdict.INVALID_INPUT: EXIT_USAGE,
}

KINDS = ("product", "ghz", "dicke", "random-pure", "random-separable", "random-rank")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc


def _write(path, text):
    try:
        if path is None or path == "-":
            sys.stdout.write(text)
            return
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _load_state(path) -> StateRecord:
    try:
        return load_state(_read(path))
    except ParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_USAGE) from exc


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _complex_list(text):
    try:
        return [complex(x.replace(" ", "")) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}") from exc


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def cmd_dim(args):
    print(bosonic_dim(args.n, args.k))
    return EXIT_OK


def cmd_gen(args):
    shape = SystemShape(args.n, args.k)
    basis = None if args.basis == "auto" else args.basis
    kind = args.kind
    if kind == "product":
        f = np.zeros(args.n, dtype=complex)
        if args.vector is None:
            f[0] = 1.0
        else:
            if len(args.vector) != args.n:
                raise CliError(f"--vector needs {args.n} entries", EXIT_USAGE)
            f = np.array(args.vector, dtype=complex)
            f = f / np.linalg.norm(f)
        state = states.product_power(f, args.k, basis)
    elif kind == "ghz":
        state = states.ghz_like(args.n, args.k, basis)
    elif kind == "dicke":
        if args.occ is None:
            raise CliError("--occ is required for --kind dicke", EXIT_USAGE)
        state = states.dicke_state(args.occ, shape, basis)
    elif kind == "random-pure":
        state = states.random_symmetric_pure(shape, args.seed, basis)
    else:
        if args.rank is None:
            raise CliError(f"--rank is required for --kind {kind}", EXIT_USAGE)
        if kind == "random-separable":
            state = states.random_separable_mixture(shape, args.rank, args.seed, basis)
        else:
            state = states.random_rank_r_symmetric(shape, args.rank, args.seed, basis)
    _write(args.out, dump_state(state))
    return EXIT_OK


def cmd_classify(args):
    state = _load_state(args.input)
    report = classify(state)
    line = report.verdict.value
    if report.verdict is Verdict.SEPARABLE:
        line += f" ({report.rule_fired.value})"
    elif report.verdict is Verdict.UNDETERMINED and report.window is not None:
        line += f", window [{report.window.lo},{report.window.hi}]"
    elif report.verdict is Verdict.INVALID_INPUT:
        line += f": {report.notes}"
    print(line)
    if args.report:
        _write(args.report, json.dumps(report_to_dict(report, window=_window(state)), indent=2) + "\n")
    return VERDICT_EXIT[report.verdict]


def _window(state):
    try:
        return bound_window(state.shape)
    except Unsupported:
        return None


def cmd_decompose(args):
    state = _load_state(args.input)
    try:
        cert = extract_certificate(state, seed=args.seed, force=args.force, restarts=args.restarts)
    except PreconditionFailed as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    except ExtractionFailed as exc:
        print(f"ExtractionFailed: {exc}", file=sys.stderr)
        return EXIT_EXTRACTION
    report = classify(state)
    _write(args.out, json.dumps(report_to_dict(report, cert, window=_window(state)), indent=2) + "\n")
    print(f"certificate with {len(cert)} terms, trace distance {cert.trace_distance:.3e}")
    return EXIT_OK


def cmd_pt(args):
    state = _load_state(args.input)
    try:
        matrix = partial_transpose(state.full_matrix(), state.shape, args.parties)
    except IndexError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    provenance = f"partial_transpose(parties={sorted(set(args.parties))}) of [{state.provenance}]"
    out = StateRecord(state.shape, "full", matrix, provenance)
    _write(args.out, json.dumps(state_to_dict(out)) + "\n")
    return EXIT_OK


def cmd_hunt(args):
    shape = SystemShape(args.n, args.k)
    window = bound_window(shape)
    if args.rank not in window:
        raise CliError(
            f"rank {args.rank} lies outside the bound-entanglement window [{window.lo},{window.hi}]",
            EXIT_USAGE,
        )
    config = HuntConfig(shape, args.rank, args.trials, args.seed, args.iters, args.detector)
    try:
        if args.out in (None, "-"):
            summary, _ = run_hunt(config, sys.stdout, workers=args.workers)
            print(summary.line(), file=sys.stderr)
            return EXIT_OK
        with open(args.out, "w", encoding="utf-8") as sink:
            summary, _ = run_hunt(config, sink, workers=args.workers)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
    print(summary.line())
    return EXIT_OK


def cmd_verify(args):
    lines = [line for line in _read(args.input).splitlines() if line.strip()]
    failed = 0
    for number, line in enumerate(lines, 1):
        try:
            result = verify_candidate(line)
        except ParseError as exc:
            raise CliError(f"line {number}: {exc}", EXIT_USAGE) from exc
        if not result.passed:
            failed += 1
            print(f"line {number}: FAIL: " + "; ".join(result.mismatches))
    print(f"verified {len(lines)} records, {failed} failed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="bosesep", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", help="print the symmetric-subspace dimension")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("gen", help="write a state file")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--occ", type=_int_list)
    p.add_argument("--vector", type=_complex_list, help="local vector for --kind product, e.g. 1,1j,0")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--basis", choices=("auto", "full", "symmetric"), default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("classify", help="classify a state file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("decompose", help="extract a separable certificate")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--force", action="store_true", help="also try states not classified Separable")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("pt", help="partial transpose of a state file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--parties", type=int, nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser("hunt", help="search the bound-entanglement rank window")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--out")
    p.add_argument("--detector", choices=DETECTORS, default="ccnr")
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_hunt)

    p = sub.add_parser("verify", help="re-verify hunt records")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (BoseSepError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
