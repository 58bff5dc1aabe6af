"""Command-line interface.

Substitutions are selected with ``--subst tm``, ``--subst pq:P,Q`` for the
generalised Thue-Morse rule, or ``--subst spec:FILE`` for a JSON rule file.
Scan memory may be capped globally through the APWORD_MAX_PREFIX environment
variable.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from typing import Optional

from . import bijective, blocks, language, suites
from .fixedpoint import FixedPointWord
from .progressions import (Progression, diagonal_witness, estimate_longest,
                           expected_length_for, letter_maxima, scan_range)
from .substitution import (Substitution, SubstitutionError, format_word,
                           generalized_thue_morse, gtm_parameters,
                           load_substitution, parse_word, thue_morse)

SCHEMA_VERSION = suites.SCHEMA_VERSION


def resolve_substitution(spec: str) -> tuple[Substitution, Optional[int]]:
    if spec == "tm":
        return thue_morse(), None
    if spec.startswith("pq:"):
        try:
            p, q = (int(x) for x in spec[3:].split(","))
        except ValueError:
            raise SubstitutionError(f"malformed pq spec {spec!r}; "
                                    "expected pq:P,Q") from None
        return generalized_thue_morse(p, q), None
    if spec.startswith("spec:"):
        return load_substitution(spec[5:])
    raise SubstitutionError(
        f"unknown substitution {spec!r}; use tm, pq:P,Q or spec:FILE")


def _resolve_seed(sub: Substitution, file_seed: Optional[int],
                  requested: Optional[str]) -> int:
    if requested is not None:
        try:
            return sub.letter_index(requested)
        except SubstitutionError:
            return int(requested)
    if file_seed is not None:
        return file_seed
    starters = sub.self_starting_letters()
    if not starters:
        raise SubstitutionError("rule has no self-starting letter; "
                                "pick a different rule or seed")
    return starters[0]


def _word_source(args) -> FixedPointWord:
    sub, file_seed = resolve_substitution(args.subst)
    return FixedPointWord(sub, _resolve_seed(sub, file_seed, args.seed))


@contextmanager
def _open_out(path: Optional[str], binary: bool = False):
    if path is None or path == "-":
        yield sys.stdout.buffer if binary else sys.stdout
    else:
        with open(path, "wb" if binary else "w",
                  encoding=None if binary else "utf-8", newline="") as fh:
            yield fh


def _emit_json(payload: dict, out) -> None:
    json.dump(payload, out, indent=2, sort_keys=True)
    out.write("\n")


def _progression_payload(prog: Progression) -> dict:
    return {"start": prog.start, "difference": prog.difference,
            "length": prog.length, "letter": prog.letter}


def _add_source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subst", default="tm",
                   help="tm | pq:P,Q | spec:FILE (default tm)")
    p.add_argument("--seed", default=None,
                   help="seed letter name (default: rule file seed or the "
                        "first self-starting letter)")


def _closed_form_kind(sub: Substitution, d: int):
    """(n, kind) when d = Q**n +- 1 falls under a known value or bound."""
    params = gtm_parameters(sub)
    if params is None:
        return None
    q = sub.length
    n = 2
    while q**n - 1 <= d:
        if d == q**n + 1:
            return n, "plus"
        if d == q**n - 1:
            try:
                expected_length_for(sub, n, "minus")
            except ValueError:
                return None
            return n, "minus"
        n += 1
    return None


# ---------------------------------------------------------------------------
# subcommands


def _cmd_word(args) -> int:
    word = _word_source(args)
    sub = word.substitution
    if args.format == "raw":
        with _open_out(args.out, binary=True) as out:
            for chunk in word.chunks(args.count):
                out.write(chunk.tobytes())
        return 0
    joiner = "" if all(len(n) == 1 for n in sub.alphabet) else " "
    with _open_out(args.out) as out:
        first = True
        for chunk in word.chunks(args.count):
            text = joiner.join(sub.alphabet[b] for b in chunk.tolist())
            if joiner and not first:
                out.write(joiner)
            out.write(text)
            first = False
        out.write("\n")
    return 0


def _cmd_letter(args) -> int:
    word = _word_source(args)
    with _open_out(args.out) as out:
        for i in args.positions:
            out.write(word.substitution.alphabet[word.letter_at(i)] + "\n")
    return 0


def _cmd_ap(args) -> int:
    word = _word_source(args)
    if args.prefix is not None:
        from .progressions import longest_progression
        prog = longest_progression(word, args.difference, args.prefix)
        payload = {"schema_version": SCHEMA_VERSION, "d": args.difference,
                   "prefix_scanned": args.prefix, "stable": None,
                   **_progression_payload(prog)}
        stable = None
        length = prog.length
    else:
        rep = estimate_longest(word, args.difference,
                               max_prefix=args.max_prefix)
        payload = {"schema_version": SCHEMA_VERSION, "d": args.difference,
                   "prefix_scanned": rep.prefix_scanned, "stable": rep.stable,
                   **_progression_payload(rep.witness)}
        stable = rep.stable
        length = rep.length
    if args.per_letter:
        per = letter_maxima(word, args.difference,
                            args.prefix or payload["prefix_scanned"])
        payload["per_letter"] = [
            None if p is None else _progression_payload(p) for p in per]
    status = 0
    if args.check:
        form = _closed_form_kind(word.substitution, args.difference)
        if form is None:
            payload["check"] = "no closed form for this difference"
        else:
            n, kind = form
            expect = expected_length_for(word.substitution, n, kind)
            ok = (length == expect.value if expect.exact
                  else length <= expect.value)
            ok = ok and (stable is not False)
            payload["check"] = {"expected": expect.value,
                                "exact": expect.exact, "pass": ok}
            status = 0 if ok else 1
    with _open_out(args.out) as out:
        _emit_json(payload, out)
    return status


def _scan_with_expected(word: FixedPointWord, d_max: int, args):
    reports = scan_range(word, d_max, reduce=args.reduce,
                         max_prefix=args.max_prefix, workers=args.workers)
    expected: dict[int, str] = {}
    outcomes: dict[int, bool] = {}
    for rep in reports:
        form = _closed_form_kind(word.substitution, rep.difference)
        if form is None:
            continue
        n, kind = form
        value = expected_length_for(word.substitution, n, kind)
        if value.exact:
            expected[rep.difference] = str(value.value)
            outcomes[rep.difference] = (rep.length == value.value
                                        and rep.stable)
        else:
            expected[rep.difference] = f"<={value.value}"
            outcomes[rep.difference] = rep.length <= value.value
    return reports, expected, outcomes


def _cmd_scan(args) -> int:
    word = _word_source(args)
    reports = scan_range(word, args.d_max, reduce=args.reduce,
                         max_prefix=args.max_prefix, workers=args.workers)
    rows = suites.report_rows(reports)
    with _open_out(args.out) as out:
        suites.emit_table(rows, args.format, out)
    return 0


def _cmd_table(args) -> int:
    word = _word_source(args)
    reports, expected, outcomes = _scan_with_expected(word, args.d_max, args)
    rows = suites.report_rows(reports, expected, outcomes)
    with _open_out(args.out) as out:
        suites.emit_table(rows, args.format, out)
    if args.check and not all(outcomes.values()):
        return 1
    return 0


def _cmd_witness(args) -> int:
    sub, file_seed = resolve_substitution(args.subst)
    seed = _resolve_seed(sub, file_seed, args.seed)
    prog = diagonal_witness(sub, args.level, args.kind, seed)
    payload = {"schema_version": SCHEMA_VERSION, "level": args.level,
               "kind": args.kind, **_progression_payload(prog)}
    status = 0
    if args.check:
        expect = expected_length_for(sub, args.level, args.kind)
        ok = (prog.length == expect.value if expect.exact
              else prog.length <= expect.value)
        payload["check"] = {"expected": expect.value, "exact": expect.exact,
                            "pass": ok}
        status = 0 if ok else 1
    with _open_out(args.out) as out:
        _emit_json(payload, out)
    return status


def _cmd_block(args) -> int:
    sub, _ = resolve_substitution(args.subst)
    block = blocks.block_iterate(sub, args.letter, args.level)
    if args.format == "json":
        payload = {"schema_version": SCHEMA_VERSION, "side": block.side,
                   "letter": args.letter, "level": args.level,
                   "rows": [format_word(block.cells[r].tobytes(), sub)
                            for r in range(block.side)]}
        with _open_out(args.out) as out:
            _emit_json(payload, out)
        return 0
    data = blocks.render(block, args.format)
    with _open_out(args.out, binary=True) as out:
        out.write(data)
    return 0


def _cmd_factors(args) -> int:
    sub, file_seed = resolve_substitution(args.subst)
    seed = _resolve_seed(sub, file_seed, args.seed)
    if args.contains is not None:
        word = parse_word(args.contains, sub)
        ok = language.contains_factor(sub, seed, word)
        with _open_out(args.out) as out:
            out.write(("true" if ok else "false") + "\n")
        return 0
    factors = language.factor_set(sub, seed, args.length)
    with _open_out(args.out) as out:
        for word in factors.sorted():
            out.write(format_word(word, sub) + "\n")
    return 0


def _cmd_powerfree(args) -> int:
    word = _word_source(args)
    rep = language.power_free_check(word, args.prefix,
                                    exponent=args.exponent,
                                    overlap=args.overlap)
    payload = {"schema_version": SCHEMA_VERSION, "free": rep.free,
               "prefix_scanned": rep.prefix_scanned,
               "mode": "overlap" if args.overlap else f"power-{args.exponent}",
               "witness": None}
    if rep.witness is not None:
        payload["witness"] = {
            "period": rep.witness.period, "start": rep.witness.start,
            "word": format_word(rep.witness.word, word.substitution)}
    with _open_out(args.out) as out:
        _emit_json(payload, out)
    return 0


def _cmd_bij(args) -> int:
    sub, file_seed = resolve_substitution(args.subst)
    payload: dict = {"schema_version": SCHEMA_VERSION, "check": args.check}
    status = 0
    if args.check == "diagonal":
        results = {}
        for letter in range(sub.size):
            results[sub.alphabet[letter]] = bijective.diagonal_progression_check(
                sub, letter, args.level)
        payload.update({"level": args.level, "results": results,
                        "ok": all(results.values())})
        status = 0 if payload["ok"] else 1
    elif args.check == "recurrence":
        word = FixedPointWord(sub, _resolve_seed(sub, file_seed, args.seed))
        k = args.k if args.k is not None else language.max_run(sub, word.seed)
        if args.difference is not None:
            est = bijective.recurrence_count(word, args.difference,
                                             args.letter, k, args.prefix)
            payload.update({"k": k, "difference": est.difference,
                            "letter": est.letter, "count": est.count,
                            "prefix": est.prefix_length,
                            "frequency": est.frequency})
        else:
            found = bijective.find_recurrent_difference(word, k, args.d_max,
                                                        args.prefix)
            payload.update({"k": k, "d_max": args.d_max,
                            "found": None if found is None else
                            {"difference": found[0], "letter": found[1]}})
    elif args.check == "absence":
        word = FixedPointWord(sub, _resolve_seed(sub, file_seed, args.seed))
        absent = bijective.absence_check(word, args.difference, args.length,
                                         args.prefix)
        payload.update({"difference": args.difference, "length": args.length,
                        "prefix": args.prefix, "absent": absent})
    with _open_out(args.out) as out:
        _emit_json(payload, out)
    return status


def _cmd_verify(args) -> int:
    names = args.suite or list(suites.SUITE_NAMES)
    overrides: dict = {"max_prefix": args.max_prefix, "workers": args.workers}
    if args.n_max is not None:
        overrides_tm = {"n_max": args.n_max}
    else:
        overrides_tm = {}
    results = []
    ok = True
    for name in names:
        kwargs = dict(overrides)
        if name in ("tm-minus", "tm-plus"):
            kwargs.update(overrides_tm)
        if name == "bounds" and args.d_max is not None:
            kwargs["d_max"] = args.d_max
        res = suites.run_suite(name, max_seconds=args.max_seconds, **kwargs)
        results.append(res)
        passed, failed, skipped = res.counts()
        tag = "PASS" if res.ok else "FAIL"
        line = (f"{tag} suite {name}: {passed} passed, {failed} failed, "
                f"{skipped} skipped ({res.runtime:.1f}s)")
        print(line)
        for case in res.cases:
            if case.passed is False:
                print(f"     FAIL {case.params}: expected {case.expected}, "
                      f"observed {case.observed}")
            elif case.downgraded:
                print(f"     downgraded {case.params} -> {case.mode}")
        ok = ok and res.ok
    if args.out:
        payload = suites.cases_payload(results)
        with _open_out(args.out) as out:
            if args.format == "json":
                _emit_json(payload, out)
            else:
                rows = [
                    {"d": f"{res.name}:{c.params}", "length": c.observed,
                     "start": c.mode, "letter": "", "stable": c.downgraded,
                     "expected": c.expected, "pass": c.passed}
                    for res in results for c in res.cases]
                suites.emit_table(rows, "csv", out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apword",
        description="Arithmetic progressions and factor languages in "
                    "substitution fixed points")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("word", help="emit a prefix of the fixed point")
    _add_source_args(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--format", choices=("text", "raw"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_word)

    p = sub.add_parser("letter", help="letters at given positions")
    _add_source_args(p)
    p.add_argument("positions", type=int, nargs="+")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_letter)

    p = sub.add_parser("ap", help="longest progression for one difference")
    _add_source_args(p)
    p.add_argument("-d", "--difference", type=int, required=True)
    p.add_argument("--prefix", type=int, default=None,
                   help="scan exactly this prefix instead of auto-doubling")
    p.add_argument("--max-prefix", type=int, default=None)
    p.add_argument("--per-letter", action="store_true")
    p.add_argument("--check", action="store_true",
                   help="compare against the known exact value; exit 1 on "
                        "mismatch")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_ap)

    p = sub.add_parser("scan", help="scan all differences up to a bound")
    _add_source_args(p)
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--reduce", action="store_true",
                   help="scan reduced differences and lift the witnesses")
    p.add_argument("--max-prefix", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("table",
                       help="scan table with expected values where known")
    _add_source_args(p)
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--reduce", action="store_true")
    p.add_argument("--max-prefix", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--check", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("witness",
                       help="constructive progression at d = Q**n +- 1")
    _add_source_args(p)
    p.add_argument("--level", "-n", type=int, required=True)
    p.add_argument("--kind", choices=("plus", "minus"), required=True)
    p.add_argument("--check", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("block", help="render the 2-D block picture")
    _add_source_args(p)
    p.add_argument("--letter", type=int, default=0)
    p.add_argument("--level", "--iters", type=int, required=True)
    p.add_argument("--format", choices=("ascii", "pbm", "json"),
                   default="ascii")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_block)

    p = sub.add_parser("factors", help="exact factors of one length")
    _add_source_args(p)
    p.add_argument("--length", type=int, default=1)
    p.add_argument("--contains", default=None,
                   help="check membership of a word instead of listing")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_factors)

    p = sub.add_parser("powerfree", help="scan a prefix for repetitions")
    _add_source_args(p)
    p.add_argument("--prefix", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exponent", type=int, default=None)
    group.add_argument("--overlap", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_powerfree)

    p = sub.add_parser("bij", help="checks for general bijective rules")
    _add_source_args(p)
    p.add_argument("--check", choices=("diagonal", "recurrence", "absence"),
                   required=True)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("-d", "--difference", type=int, default=None)
    p.add_argument("--letter", type=int, default=0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--d-max", type=int, default=20)
    p.add_argument("--prefix", type=int, default=10**5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bij)

    p = sub.add_parser("verify", help="run the reproduction suites")
    p.add_argument("--suite", action="append", choices=suites.SUITE_NAMES,
                   help="run only the named suite (repeatable; default all)")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--max-prefix", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SubstitutionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
