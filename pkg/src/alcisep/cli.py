"""Command-line front end.

Exit status: 0 separable, 1 inseparable, 2 unknown, 64 usage error,
65 input error.  ``emit-fo`` without ``--prove`` and ``show`` exit 0.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .concepts import format_concept
from .kb import LabeledKB
from .parser import KBSemanticError, KBSyntaxError, parse_kb

EXIT = {"Separable": 0, "Inseparable": 1, "Unknown": 2}
EX_USAGE, EX_DATAERR = 64, 65


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="alcisep", description="Separability of labeled ALCI knowledge bases.")
    p.add_argument("--verify-certificate", metavar="REPORT",
                   help="re-check the certificate in a JSON report and exit")
    p.add_argument("--prover", help="prover command template with {file} and {timeout} slots")
    p.add_argument("--timeout", type=_positive, default=30, help="prover timeout in seconds")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--kb", required=True, help="labeled KB file")
        sp.add_argument("--json", action="store_true", help="print a JSON report")
        sp.add_argument("--seed", type=int, default=0)

    w = sub.add_parser("check-weak", help="weak separability (semi-decision)")
    common(w)
    w.add_argument("--projective", action="store_true", help="allow fresh helper concept names")
    w.add_argument("--max-size", type=_positive, default=8)
    w.add_argument("--helpers", type=_nonneg, default=1)
    w.add_argument("--depth", type=_nonneg, default=2)
    w.add_argument("--outdegree", type=_positive, default=2)
    w.add_argument("--max-candidates", type=_positive, default=200)

    s = sub.add_parser("check-strong", help="strong separability (exact)")
    common(s)
    s.add_argument("--synthesize", dest="synthesize", action="store_true", default=True)
    s.add_argument("--no-synthesize", dest="synthesize", action="store_false")
    s.add_argument("--max-size", type=_positive, default=8)
    s.add_argument("--phi-cap", type=_positive, default=None)

    f = sub.add_parser("find-separator", help="enumerate separators only")
    common(f)
    f.add_argument("--strong", action="store_true")
    f.add_argument("--projective", action="store_true")
    f.add_argument("--max-size", type=_positive, default=8)
    f.add_argument("--helpers", type=_nonneg, default=0)

    e = sub.add_parser("emit-fo", help="emit the first-order instance in TPTP")
    common(e)
    e.add_argument("--dialect", choices=["fo", "gf", "gnf"], default="fo")
    e.add_argument("--mode", choices=["validity", "interpolation-comment"], default="validity")
    e.add_argument("--positive", help="positive example (default: first)")
    e.add_argument("--negative", help="negative example (default: first)")
    e.add_argument("--out", help="write the TPTP problem here instead of stdout")
    e.add_argument("--prove", action="store_true", help="run the prover on every (a, b) pair")
    e.add_argument("--prover", dest="sub_prover", help="same as the global --prover")
    e.add_argument("--timeout", dest="sub_timeout", type=_positive, help="same as the global --timeout")

    sh = sub.add_parser("show", help="inspect a KB")
    common(sh)
    sh.add_argument("--types", action="store_true", help="print the realizable type table")
    sh.add_argument("--bisim", action="store_true",
                    help="print the maximal Σ-bisimulation on the database structure")
    return p


def _load(path: str) -> tuple[LabeledKB, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            lkb = parse_kb(text)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (KBSyntaxError, KBSemanticError) as e:
        raise InputError(f"{path}: {e}") from e
    return lkb, text


def _emit(args, report: dict, human: list[str]) -> int:
    from .report import dumps
    if args.json:
        sys.stdout.write(dumps(report))
    else:
        print("\n".join(human))
    return EXIT[report["status"]]


def cmd_check_weak(args) -> int:
    from .report import weak_report
    from .weak import WeakBudget, weak_separable
    lkb, text = _load(args.kb)
    budget = WeakBudget(args.max_size, args.helpers, args.depth, args.outdegree, args.max_candidates)
    v = weak_separable(lkb, budget, args.projective, args.seed)
    rep = weak_report(lkb, text, v, args.projective)
    lines = [f"status: {rep['status']}"]
    if v.note:
        lines.append(f"note: {v.note}")
    cert = rep["certificate"]
    if cert:
        for b, item in cert["perNegative"].items():
            if "separator" in item:
                lines.append(f"  {b}: separator {item['separator']}")
            else:
                lines.append(f"  {b}: forest model witness with {len(item['model']['domain'])} elements")
        if cert["separator"]:
            lines.append(f"separator: {cert['separator']}")
    return _emit(args, rep, lines)


def cmd_check_strong(args) -> int:
    from .report import strong_report
    from .strong import strong_separable
    lkb, text = _load(args.kb)
    v = strong_separable(lkb, args.phi_cap, args.synthesize, args.max_size, args.seed)
    rep = strong_report(lkb, text, v)
    lines = [f"status: {rep['status']}"]
    if v.note:
        lines.append(f"note: {v.note}")
    cert = rep["certificate"]
    if cert and cert["kind"] == "psi":
        for pair in cert["pairs"]:
            lines.append(f"Ψ witness for ({pair['positive']}, {pair['negative']}):")
            for c, item in pair["psi"].items():
                lines.append(f"  {c}: t = {{{', '.join(item['type'])}}}, |Φ| = {len(item['phi'])}")
    elif cert and cert["kind"] == "strong-separator":
        lines.append(f"separator: {cert['separator']}")
    return _emit(args, rep, lines)


def cmd_find_separator(args) -> int:
    from .enumeration import SeparatorSearch, helper_names
    from .report import separator_report
    lkb, text = _load(args.kb)
    if args.helpers and not args.projective:
        raise UsageError("--helpers requires --projective")
    if args.strong and args.projective:
        raise UsageError("--strong and --projective are exclusive")
    helpers = tuple(helper_names(lkb, args.helpers))
    search = SeparatorSearch(lkb, strong=args.strong, seed=args.seed)
    found, report = search.search(lkb.sigma_concepts, lkb.sigma_roles, args.max_size, helpers)
    rep = separator_report(lkb, text, found, args.strong, args.projective, report.to_json())
    lines = [f"status: {rep['status']}"]
    lines.append(f"separator: {format_concept(found)}" if found else
                 f"no separator up to size {args.max_size}")
    return _emit(args, rep, lines)


def cmd_emit_fo(args, prover: str | None, timeout: int) -> int:
    from .fo import emit_tptp, fo_strong_check, interpolation_instance
    from .report import dumps, fo_report
    lkb, text = _load(args.kb)
    a = args.positive or lkb.positives[0]
    b = args.negative or lkb.negatives[0]
    if a not in lkb.kb.constants or b not in lkb.kb.constants:
        raise InputError("unknown example constant")
    problem = emit_tptp(interpolation_instance(lkb, a, b, args.dialect), args.mode)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(problem)
    elif not args.json:
        sys.stdout.write(problem)
    if not args.prove:
        if args.json:
            sys.stdout.write(json.dumps({"tptp": problem}, indent=2) + "\n")
        return 0
    results = {(p, n): fo_strong_check(lkb, p, n, prover, timeout, args.dialect)
               for p in lkb.positives for n in lkb.negatives}
    rep = fo_report(lkb, text, results, args.dialect)
    if args.json:
        sys.stdout.write(dumps(rep))
    else:
        for (p, n), r in sorted(results.items()):
            extra = f" ({r.diagnostic})" if r.diagnostic else ""
            print(f"% ({p}, {n}): SZS {r.szs} -> {r.status}{extra}", file=sys.stderr)
        print(f"% status: {rep['status']}", file=sys.stderr)
    return EXIT[rep["status"]]


def cmd_show(args) -> int:
    from .bisim import max_bisimulation
    from .parser import format_kb
    from .structures import FiniteStructure
    from .typeengine import table_for
    lkb, _ = _load(args.kb)
    out: dict = {}
    lines: list[str] = []
    if not (args.types or args.bisim):
        lines.append(format_kb(lkb).rstrip())
        out["kb"] = format_kb(lkb)
    if args.types:
        table = table_for(lkb.kb)
        rows = [table.describe(i) for i in range(table.n)]
        out["types"] = rows
        lines.append(f"{table.n} realizable types")
        lines.extend(f"  t{i}: {{{', '.join(r)}}}" for i, r in enumerate(rows))
    if args.bisim:
        s = FiniteStructure.from_database(lkb.kb.database)
        pairs = sorted(max_bisimulation(s, s, lkb.sigma))
        out["bisimulation"] = [list(p) for p in pairs]
        lines.append(f"maximal bisimulation over {{{', '.join(sorted(lkb.sigma))}}}: {len(pairs)} pairs")
        lines.extend(f"  {d} ~ {e}" for d, e in pairs)
    if args.json:
        sys.stdout.write(json.dumps(out, indent=2, ensure_ascii=False, sort_keys=True) + "\n")
    else:
        print("\n".join(lines))
    return 0


def cmd_verify(path: str, prover: str | None, timeout: int) -> int:
    from .report import CertificateError, verify_report
    try:
        with open(path, encoding="utf-8") as fh:
            rep = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read report {path}: {e}") from e
    try:
        ok, msg = verify_report(rep, prover, timeout)
    except (CertificateError, KeyError, TypeError, KBSyntaxError, KBSemanticError, ValueError) as e:
        raise InputError(f"malformed report: {e}") from e
    print(f"{'VALID' if ok else 'INVALID'}: {msg}")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    from .typeengine import ReasoningLimitError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verify_certificate:
            return cmd_verify(args.verify_certificate, args.prover, args.timeout)
        if args.command is None:
            raise UsageError("alcisep: a subcommand is required")
        handlers = {
            "check-weak": cmd_check_weak,
            "check-strong": cmd_check_strong,
            "find-separator": cmd_find_separator,
            "show": cmd_show,
        }
        if args.command == "emit-fo":
            return cmd_emit_fo(args, args.sub_prover or args.prover, args.sub_timeout or args.timeout)
        return handlers[args.command](args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EX_USAGE
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EX_DATAERR
    except ReasoningLimitError as e:
        print(f"error: input exceeds reasoning limits: {e}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
