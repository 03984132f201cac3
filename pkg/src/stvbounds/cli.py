"""Command-line front end.

Exit statuses: 0 success, 1 the oracle found a counterexample, 2 usage error
or unreadable file, 3 unparseable input, 4 semantic error, 5 the oracle
refused an enumeration beyond its limits.
"""

from __future__ import annotations

import argparse
import sys
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction

from . import io as sio
from .bounds import analyze, events_from_log
from .engine import tabulate
from .errors import StvError
from .oracle import DEFAULT_MAX_COMPLETIONS, CompletionSpace, verify_guarantees
from .pattern import DEFAULT_MIN_RUN, render_pattern


def format_value(x: Fraction, digits: int = 3) -> str:
    """Round to ``digits`` significant figures and drop trailing zeros (310/410 -> 0.756, 1/101 -> 0.0099)."""
    x = Fraction(x)
    if x == 0:
        return "0"
    d = Decimal(x.numerator) / Decimal(x.denominator)
    d = Context(prec=digits, rounding=ROUND_HALF_EVEN).plus(d)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def _emit(args, text: str) -> None:
    if args.out:
        sio.write_text(args.out, text)


def _count_table(log, contest, digits: int) -> str:
    header = ["Cand."] + [f"Round {e.round}" for e in log.events]
    labels = {"elect": "elected", "eliminate": "eliminated", "seat": "seated"}
    rows = [header, [""] + [f"{e.candidate} {labels[e.kind.value]}" for e in log.events]]
    if any(e.transfer_value is not None for e in log.events):
        rows.append([""] + [
            "" if e.transfer_value is None else f"tv={format_value(e.transfer_value, digits)}" for e in log.events
        ])
    for c in contest.candidates:
        rows.append([c] + [str(e.tallies[c]) if c in e.tallies else "-" for e in log.events])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows)


def cmd_tabulate(args) -> int:
    contest = sio.load_contest(args.contest)
    ballots = sio.load_ballots(args.ballots, contest)
    log = tabulate(contest, ballots, record_piles=args.record_piles)
    print(f"{contest.name}: {contest.seats} seats, {log.total_papers} papers, quota {log.quota}")
    print(_count_table(log, contest, args.precision))
    for e in log.events:
        if e.transfer_value is not None:
            tv = e.transfer_value
            print(f"round {e.round}: transfer value {tv.numerator}/{tv.denominator} = {format_value(tv, args.precision)}")
    for v in log.value_increases:
        print(f"round {v.round}: {v.papers} papers of ballot {v.ballot + 1} rose from "
              f"{format_value(v.old_value, args.precision)} to {format_value(v.new_value, args.precision)}")
    print("seated: " + " ".join(log.seated))
    print("pattern: " + str(render_pattern(log, min_run=args.min_run)))
    _emit(args, sio.write_log(log))
    return 0


def _events(args):
    if args.events:
        return sio.load_events(args.events)
    return events_from_log(sio.load_log(args.log))


def cmd_analyze(args) -> int:
    contest = sio.load_contest(args.contest)
    summary = sio.load_summary(args.summary, contest)
    report = analyze(summary, _events(args), contest, literal_elimination_papers=args.literal_elimination_papers)
    print(f"quota {report.quota}")
    for br, ok in zip(report.trace, report.flags):
        ev = br.event
        t = br.bounds[ev.candidate].tally
        mark = "guaranteed" if ok else ""
        print(f"round {br.round}: {ev.kind} {ev.candidate}  tally in [{format_value(t.lo, args.precision)}, "
              f"{format_value(t.hi, args.precision)}]  {mark}".rstrip())
    names = ", ".join(report.guaranteed)
    print(f"guaranteed prefix: {report.prefix_length}" + (f" ({names})" if names else ""))
    _emit(args, sio.write_report(report))
    return 0


def cmd_pattern(args) -> int:
    log = sio.load_log(args.log)
    report = sio.load_report(args.report) if args.report else None
    pattern = render_pattern(log, report, min_run=args.min_run)
    text = pattern.annotated() if report is not None else str(pattern)
    print(text)
    _emit(args, text + "\n")
    return 0


def cmd_verify(args) -> int:
    contest = sio.load_contest(args.contest)
    summary = sio.load_summary(args.summary, contest)
    report = analyze(summary, _events(args), contest, literal_elimination_papers=args.literal_elimination_papers)
    space = CompletionSpace(contest, summary, max_completions=args.max_completions)
    verdict = verify_guarantees(space, report, brute_force=args.brute_force)
    print(f"guaranteed: {' '.join(verdict.guaranteed) or '(none)'}")
    print(verdict)
    if verdict.counterexample is not None:
        print(sio.write_ballots(verdict.counterexample), end="")
    _emit(args, sio.write_verdict(verdict))
    return 0 if verdict.confirmed else 1


def cmd_summarize(args) -> int:
    contest = sio.load_contest(args.contest)
    summary = sio.summarize(sio.load_ballots(args.ballots, contest), contest)
    text = sio.write_summary(summary)
    print(text, end="")
    _emit(args, text)
    return 0


def cmd_ingest(args) -> int:
    contest = sio.load_contest(args.contest)
    ballots, informal = sio.read_aec_preferences(args.preferences, contest, btl_minimum=args.btl_minimum)
    print(f"{sum(b.multiplicity for b in ballots)} formal papers in {len(ballots)} ballot classes; "
          f"{informal} rows skipped as informal")
    print(f"rule: a BTL ranking of at least {args.btl_minimum} boxes takes precedence over ATL marks")
    if args.out:
        sio.write_text(args.out, sio.write_ballots(ballots))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stvbounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, precision=True):
        p.add_argument("--out", help="write the machine-readable result here")
        if precision:
            p.add_argument("--precision", type=int, default=3, help="significant digits for displayed values")

    p = sub.add_parser("tabulate", help="count ballots and print the round log")
    p.add_argument("--contest", required=True)
    p.add_argument("--ballots", required=True)
    p.add_argument("--record-piles", action="store_true", help="store ATL/BTL pile splits in the log")
    p.add_argument("--min-run", type=int, default=DEFAULT_MIN_RUN)
    common(p)
    p.set_defaults(func=cmd_tabulate)

    for name, func, text in (
        ("analyze", cmd_analyze, "bound tallies from first preferences and flag guaranteed seatings"),
        ("verify", cmd_verify, "check guaranteed seatings against every preference completion"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--contest", required=True)
        p.add_argument("--summary", required=True)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--events", help="event sequence document")
        src.add_argument("--log", help="count log to take the event sequence from")
        p.add_argument("--literal-elimination-papers", action="store_true",
                       help="grow BTL paper bounds by ATL papers on elimination (unsound, for comparison)")
        if name == "verify":
            p.add_argument("--max-completions", type=int, default=DEFAULT_MAX_COMPLETIONS)
            p.add_argument("--brute-force", action="store_true", help="count every completion separately")
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("pattern", help="render the seating pattern of a count log")
    p.add_argument("--log", required=True)
    p.add_argument("--report", help="guarantee report; brackets the guaranteed prefix")
    p.add_argument("--min-run", type=int, default=DEFAULT_MIN_RUN)
    common(p, precision=False)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("summarize", help="first-preference ATL/BTL counts from a ballot file")
    p.add_argument("--contest", required=True)
    p.add_argument("--ballots", required=True)
    common(p, precision=False)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("ingest", help="convert a commission formal-preferences CSV to a ballot file")
    p.add_argument("--contest", required=True)
    p.add_argument("--preferences", required=True)
    p.add_argument("--btl-minimum", type=int, default=6)
    common(p, precision=False)
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
