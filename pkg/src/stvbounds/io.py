"""Reading and writing contests, ballots, summaries, events, logs and reports.

Structured documents are JSON objects tagged with ``format`` and ``version``.
Rationals are always written as ``[numerator, denominator]`` integer pairs.

Ballot files are CSV with the header ``kind,multiplicity,preferences``;
``kind`` is ``ATL`` or ``BTL`` and ``preferences`` lists ids in preference
order separated by single spaces. Ids may contain letters, digits and
``_ . - :`` only. Summary files are CSV with the header
``candidate,atl_papers,btl_papers``. Files ending in ``.gz`` are read and
written through gzip.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .bounds import (
    BoundsRound,
    CandidateBounds,
    Event,
    FirstPrefSummary,
    GuaranteeReport,
    Interval,
)
from .engine import CountLog, EventKind, PileSummary, RoundEvent, ValueIncrease
from .errors import ContestError, ParseError, SchemaError
from .model import Ballot, BallotKind, Contest, Group, validate_ballot

ID_RE = re.compile(r"^[A-Za-z0-9_.:\-]+$")

CONTEST_FORMAT = "stv-contest"
EVENTS_FORMAT = "stv-events"
LOG_FORMAT = "stv-count-log"
REPORT_FORMAT = "stv-guarantee-report"
VERDICT_FORMAT = "stv-oracle-verdict"
VERSION = 1

BALLOT_HEADER = ["kind", "multiplicity", "preferences"]
SUMMARY_HEADER = ["candidate", "atl_papers", "btl_papers"]


# -- plumbing -----------------------------------------------------------------


def read_text(path) -> str:
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        with gzip.open(path, "rt", encoding="utf-8", newline="") as fh:
            return fh.read()
    return path.read_text(encoding="utf-8")


def write_text(path, text: str) -> None:
    path = Path(path)
    if path.suffix == ".gz":
        # fixed mtime and no stored name keep the bytes a function of the text alone
        with open(path, "wb") as raw, gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as gz:
            gz.write(text.encode("utf-8"))
    else:
        path.write_text(text, encoding="utf-8")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _load(text: str, fmt: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"expected a JSON object for {fmt}")
    if doc.get("format") != fmt:
        raise SchemaError(f"expected format {fmt!r}, found {doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise SchemaError(f"unsupported {fmt} version {doc.get('version')!r}, expected {VERSION}")
    return doc


def _frac(x: Fraction) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def _unfrac(v) -> Fraction:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(i, int) and not isinstance(i, bool) for i in v)):
        raise SchemaError(f"expected a [numerator, denominator] pair, got {v!r}")
    if v[1] <= 0:
        raise SchemaError(f"non-positive denominator in {v!r}")
    return Fraction(v[0], v[1])


def _interval(iv: Interval) -> list[list[int]]:
    return [_frac(iv.lo), _frac(iv.hi)]


def _uninterval(v) -> Interval:
    if not (isinstance(v, list) and len(v) == 2):
        raise SchemaError(f"expected an interval, got {v!r}")
    return Interval(_unfrac(v[0]), _unfrac(v[1]))


def _field(doc: dict, key: str, kind):
    try:
        value = doc[key]
    except (KeyError, TypeError):
        raise SchemaError(f"missing field {key!r}") from None
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(f"field {key!r} has the wrong type")
    return value


# -- contests -----------------------------------------------------------------


def contest_to_dict(contest: Contest) -> dict:
    return {
        "format": CONTEST_FORMAT,
        "version": VERSION,
        "name": contest.name,
        "seats": contest.seats,
        "candidates": list(contest.candidates),
        "groups": [{"id": g.id, "members": list(g.members)} for g in contest.groups],
    }


def write_contest(contest: Contest) -> str:
    return _dump(contest_to_dict(contest))


def parse_contest(text: str) -> Contest:
    """Build a contest from its JSON document.

    Structural problems raise :class:`ContestError` with a distinct ``code``.
    """
    doc = _load(text, CONTEST_FORMAT)
    candidates = _field(doc, "candidates", list)
    groups = doc.get("groups", [])
    if not isinstance(groups, list):
        raise SchemaError("field 'groups' has the wrong type")
    for c in candidates:
        if not isinstance(c, str) or not ID_RE.match(c):
            raise ContestError("bad-identifier", f"invalid candidate id {c!r}")
    parsed = []
    for g in groups:
        gid = _field(g, "id", str)
        if not ID_RE.match(gid):
            raise ContestError("bad-identifier", f"invalid group id {gid!r}")
        parsed.append(Group(gid, tuple(_field(g, "members", list))))
    return Contest(
        name=_field(doc, "name", str),
        seats=_field(doc, "seats", int),
        candidates=tuple(candidates),
        groups=tuple(parsed),
    )


# -- ballots ------------------------------------------------------------------


def aggregate(ballots: Iterable[Ballot]) -> list[Ballot]:
    """Merge identical ballots, keeping first-appearance order."""
    counts: dict[tuple, int] = {}
    for b in ballots:
        key = (b.kind, b.prefs)
        counts[key] = counts.get(key, 0) + b.multiplicity
    return [Ballot(k, p, n) for (k, p), n in counts.items()]


def write_ballots(ballots: Iterable[Ballot]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BALLOT_HEADER)
    for b in ballots:
        w.writerow([b.kind.value, b.multiplicity, " ".join(b.prefs)])
    return buf.getvalue()


def parse_ballots(text: str, contest: Contest) -> list[Ballot]:
    """Read a ballot CSV, aggregating identical records.

    All problems are collected and raised together with their line numbers.
    """
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != BALLOT_HEADER:
        raise ParseError(f"ballot file must start with the header {','.join(BALLOT_HEADER)}")
    ballots, problems = [], []
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 3:
            problems.append((lineno, f"expected 3 fields, found {len(row)}"))
            continue
        kind, mult, prefs = (f.strip() for f in row)
        if kind not in ("ATL", "BTL"):
            problems.append((lineno, f"kind must be ATL or BTL, got {kind!r}"))
            continue
        try:
            n = int(mult)
        except ValueError:
            problems.append((lineno, f"multiplicity {mult!r} is not an integer"))
            continue
        ballot = Ballot(BallotKind(kind), tuple(prefs.split()), n)
        bad = validate_ballot(ballot, contest)
        if bad:
            problems.extend((lineno, msg) for msg in bad)
            continue
        ballots.append(ballot)
    if problems:
        raise ParseError(f"{len(problems)} problem(s) in ballot file", problems)
    return aggregate(ballots)


# -- first-preference summaries ----------------------------------------------


def summarize(ballots: Iterable[Ballot], contest: Contest) -> FirstPrefSummary:
    """Count first preferences per candidate, split into ATL and BTL papers.

    An ATL ballot counts for the top member of the first group it ranks.
    """
    counts = {c: [0, 0] for c in contest.candidates}
    for b in ballots:
        if b.kind is BallotKind.ATL:
            counts[contest.group(b.prefs[0]).members[0]][0] += b.multiplicity
        else:
            counts[b.prefs[0]][1] += b.multiplicity
    return FirstPrefSummary({c: tuple(v) for c, v in counts.items()})


def write_summary(summary: FirstPrefSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for c, (atl, btl) in summary.counts.items():
        w.writerow([c, atl, btl])
    return buf.getvalue()


def parse_summary(text: str, contest: Contest | None = None) -> FirstPrefSummary:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or [h.strip() for h in header] != SUMMARY_HEADER:
        raise ParseError(f"summary file must start with the header {','.join(SUMMARY_HEADER)}")
    counts, problems = {}, []
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 3:
            problems.append((lineno, f"expected 3 fields, found {len(row)}"))
            continue
        c = row[0].strip()
        if contest is not None and not contest.has_candidate(c):
            problems.append((lineno, f"unknown candidate {c!r}"))
            continue
        if c in counts:
            problems.append((lineno, f"candidate {c!r} listed twice"))
            continue
        try:
            atl, btl = int(row[1]), int(row[2])
        except ValueError:
            problems.append((lineno, "paper counts must be integers"))
            continue
        if atl < 0 or btl < 0:
            problems.append((lineno, "paper counts must be non-negative"))
            continue
        counts[c] = (atl, btl)
    if problems:
        raise ParseError(f"{len(problems)} problem(s) in summary file", problems)
    if contest is not None:
        counts = {c: counts.get(c, (0, 0)) for c in contest.candidates}
    return FirstPrefSummary(counts)


# -- event sequences ------------------------------------------------------------


def write_events(events: Sequence[Event]) -> str:
    return _dump({
        "format": EVENTS_FORMAT,
        "version": VERSION,
        "events": [{"kind": e.kind, "candidate": e.candidate} for e in events],
    })


def parse_events(text: str) -> tuple[Event, ...]:
    doc = _load(text, EVENTS_FORMAT)
    out = []
    for item in _field(doc, "events", list):
        kind = _field(item, "kind", str)
        if kind not in ("elect", "eliminate"):
            raise SchemaError(f"unknown event kind {kind!r}")
        out.append(Event(kind, _field(item, "candidate", str)))
    return tuple(out)


# -- count logs -----------------------------------------------------------------


def _pile_to_dict(p: PileSummary) -> dict:
    return {
        "atl_value": _frac(p.atl_value),
        "btl_value": _frac(p.btl_value),
        "atl_papers": p.atl_papers,
        "btl_papers": p.btl_papers,
    }


def log_to_dict(log: CountLog) -> dict:
    rounds = []
    for ev in log.events:
        item = {
            "round": ev.round,
            "kind": ev.kind.value,
            "candidate": ev.candidate,
            "has_quota": ev.has_quota,
            "transfer_value": None if ev.transfer_value is None else _frac(ev.transfer_value),
            "exhausted": _frac(ev.exhausted),
            "rounding_loss": _frac(ev.rounding_loss),
            "tallies": dict(ev.tallies),
            "values": {c: _frac(v) for c, v in ev.values.items()},
        }
        if ev.piles is not None:
            item["piles"] = {c: _pile_to_dict(p) for c, p in ev.piles.items()}
        rounds.append(item)
    return {
        "format": LOG_FORMAT,
        "version": VERSION,
        "contest": log.contest,
        "seats": log.seats,
        "total_papers": log.total_papers,
        "quota": log.quota,
        "rounds": rounds,
        "seated": list(log.seated),
        "value_increases": [
            {
                "ballot": v.ballot,
                "round": v.round,
                "old_value": _frac(v.old_value),
                "new_value": _frac(v.new_value),
                "papers": v.papers,
            }
            for v in log.value_increases
        ],
    }


def write_log(log: CountLog) -> str:
    return _dump(log_to_dict(log))


def parse_log(text: str) -> CountLog:
    doc = _load(text, LOG_FORMAT)
    try:
        events = []
        for r in _field(doc, "rounds", list):
            piles = None
            if "piles" in r:
                piles = {
                    c: PileSummary(_unfrac(p["atl_value"]), _unfrac(p["btl_value"]), p["atl_papers"], p["btl_papers"])
                    for c, p in r["piles"].items()
                }
            tv = r["transfer_value"]
            events.append(RoundEvent(
                round=r["round"],
                kind=EventKind(r["kind"]),
                candidate=r["candidate"],
                tallies=dict(r["tallies"]),
                values={c: _unfrac(v) for c, v in r["values"].items()},
                transfer_value=None if tv is None else _unfrac(tv),
                has_quota=r["has_quota"],
                exhausted=_unfrac(r["exhausted"]),
                rounding_loss=_unfrac(r["rounding_loss"]),
                piles=piles,
            ))
        increases = tuple(
            ValueIncrease(v["ballot"], v["round"], _unfrac(v["old_value"]), _unfrac(v["new_value"]), v["papers"])
            for v in doc.get("value_increases", [])
        )
        return CountLog(
            contest=_field(doc, "contest", str),
            seats=_field(doc, "seats", int),
            total_papers=_field(doc, "total_papers", int),
            quota=_field(doc, "quota", int),
            events=tuple(events),
            seated=tuple(_field(doc, "seated", list)),
            value_increases=increases,
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed count log: {exc!r}") from exc


# -- guarantee reports ----------------------------------------------------------


def _bounds_to_dict(b: CandidateBounds) -> dict:
    return {
        "atl_value": _interval(b.atl_value),
        "btl_value": _interval(b.btl_value),
        "atl_papers": _interval(b.atl_papers),
        "btl_papers": _interval(b.btl_papers),
    }


def report_to_dict(report: GuaranteeReport) -> dict:
    rounds = []
    for br in report.trace:
        rounds.append({
            "round": br.round,
            "event": None if br.event is None else {"kind": br.event.kind, "candidate": br.event.candidate},
            "surplus": None if br.surplus is None else _interval(br.surplus),
            "transfer_value": None if br.transfer_value is None else _interval(br.transfer_value),
            "total_papers": br.total_papers,
            "total_atl_papers": br.total_atl_papers,
            "bounds": {c: _bounds_to_dict(b) for c, b in br.bounds.items()},
        })
    return {
        "format": REPORT_FORMAT,
        "version": VERSION,
        "quota": report.quota,
        "literal_elimination_papers": report.literal_elimination_papers,
        "events": [{"kind": e.kind, "candidate": e.candidate, "guaranteed": f}
                   for e, f in zip(report.events, report.flags)],
        "guaranteed_prefix": report.prefix_length,
        "guaranteed_candidates": list(report.guaranteed),
        "rounds": rounds,
    }


def write_report(report: GuaranteeReport) -> str:
    return _dump(report_to_dict(report))


def parse_report(text: str) -> GuaranteeReport:
    doc = _load(text, REPORT_FORMAT)
    try:
        quota = _field(doc, "quota", int)
        events = tuple(Event(e["kind"], e["candidate"]) for e in doc["events"])
        flags = tuple(bool(e["guaranteed"]) for e in doc["events"])
        trace = []
        for r in doc["rounds"]:
            ev = r["event"]
            trace.append(BoundsRound(
                round=r["round"],
                bounds={
                    c: CandidateBounds(*(_uninterval(b[k]) for k in ("atl_value", "btl_value", "atl_papers", "btl_papers")))
                    for c, b in r["bounds"].items()
                },
                quota=quota,
                total_papers=r["total_papers"],
                total_atl_papers=r["total_atl_papers"],
                event=None if ev is None else Event(ev["kind"], ev["candidate"]),
                surplus=None if r["surplus"] is None else _uninterval(r["surplus"]),
                transfer_value=None if r["transfer_value"] is None else _uninterval(r["transfer_value"]),
            ))
        return GuaranteeReport(
            quota=quota,
            events=events,
            flags=flags,
            prefix_length=_field(doc, "guaranteed_prefix", int),
            trace=tuple(trace),
            literal_elimination_papers=bool(doc.get("literal_elimination_papers", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed guarantee report: {exc!r}") from exc


# -- electoral commission formal-preference files ----------------------------------

# Leading metadata columns of the commission's formal preference CSVs.
AEC_2016_HEADER = ["ElectorateNm", "VoteCollectionPointNm", "VoteCollectionPointId", "BatchNo", "PaperNo", "Preferences"]
AEC_2019_HEADER = ["State", "Division", "Vote Collection Point Name", "Vote Collection Point ID", "Batch No", "Paper No"]

_MARK_AS_ONE = {"*", "/", "X", "x"}


def _mark(cell: str) -> int | None:
    cell = cell.strip()
    if not cell:
        return None
    if cell in _MARK_AS_ONE:
        return 1
    if cell.isdigit() and int(cell) > 0:
        return int(cell)
    return None


def _ordered_run(marks: Sequence[int | None], ids: Sequence[str]) -> list[str]:
    """Ids in preference order, stopping at the first missing or repeated number."""
    by_rank: dict[int, list[str]] = {}
    for rank, ident in zip(marks, ids):
        if rank is not None:
            by_rank.setdefault(rank, []).append(ident)
    out = []
    k = 1
    while len(by_rank.get(k, ())) == 1:
        out.append(by_rank[k][0])
        k += 1
    return out


def classify_row(cells: Sequence[str], contest: Contest, *, btl_minimum: int = 6) -> Ballot | None:
    """Turn one row of ATL-then-BTL box markings into a ballot.

    ``cells`` holds one entry per declared group followed by one per
    candidate, in ballot-paper order. A BTL ranking counts when at least
    ``min(btl_minimum, number of candidates)`` boxes are numbered 1, 2, ...
    without gaps or repeats; it takes precedence over any ATL marks. Otherwise
    an ATL ranking counts when box 1 is marked exactly once. Rows meeting
    neither rule return ``None``.
    """
    ng, nc = len(contest.groups), len(contest.candidates)
    if len(cells) < ng + nc:
        cells = list(cells) + [""] * (ng + nc - len(cells))
    atl_marks = [_mark(c) for c in cells[:ng]]
    btl_marks = [_mark(c) for c in cells[ng:ng + nc]]
    btl = _ordered_run(btl_marks, contest.candidates)
    if len(btl) >= min(btl_minimum, nc):
        return Ballot(BallotKind.BTL, tuple(btl))
    atl = _ordered_run(atl_marks, [g.id for g in contest.groups])
    if atl:
        return Ballot(BallotKind.ATL, tuple(atl))
    return None


def ingest_external_preferences(rows: Iterable[Sequence[str]], contest: Contest, *, btl_minimum: int = 6):
    """Classify raw preference rows and aggregate them into ballots.

    Returns ``(ballots, informal)`` where ``informal`` counts skipped rows.
    """
    kept, informal = [], 0
    for cells in rows:
        b = classify_row(cells, contest, btl_minimum=btl_minimum)
        if b is None:
            informal += 1
        else:
            kept.append(b)
    return aggregate(kept), informal


def read_aec_preferences(path, contest: Contest, *, btl_minimum: int = 6):
    """Read a commission formal-preferences CSV (2016 or 2019+ layout).

    The 2016 layout carries one comma-joined ``Preferences`` column after a
    dashed separator row; the 2019+ layout has one column per box after six
    metadata columns. Box order must match the contest's group and candidate
    order. Returns ``(ballots, informal)``.
    """
    text = read_text(path)
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader, [])]
    if header == AEC_2016_HEADER:
        first = next(reader, None)
        if first is not None and not all(set(f) <= {"-"} for f in first):
            raise ParseError("2016 layout: expected a dashed separator row under the header")
        rows = (row[5].split(",") for row in reader if row)
    elif header[: len(AEC_2019_HEADER)] == AEC_2019_HEADER:
        width = len(contest.groups) + len(contest.candidates)
        if len(header) - len(AEC_2019_HEADER) != width:
            raise ParseError(
                f"2019 layout: expected {width} box columns for this contest, found {len(header) - len(AEC_2019_HEADER)}"
            )
        rows = (row[len(AEC_2019_HEADER):] for row in reader if row)
    else:
        raise ParseError(f"unrecognised preference file header: {header[:6]}")
    return ingest_external_preferences(rows, contest, btl_minimum=btl_minimum)


def load_contest(path) -> Contest:
    return parse_contest(read_text(path))


def load_ballots(path, contest: Contest) -> list[Ballot]:
    return parse_ballots(read_text(path), contest)


def load_summary(path, contest: Contest | None = None) -> FirstPrefSummary:
    return parse_summary(read_text(path), contest)


def load_events(path) -> tuple[Event, ...]:
    return parse_events(read_text(path))


def load_log(path) -> CountLog:
    return parse_log(read_text(path))


def load_report(path) -> GuaranteeReport:
    return parse_report(read_text(path))


# -- oracle verdicts --------------------------------------------------------------


def write_verdict(verdict) -> str:
    return _dump({
        "format": VERDICT_FORMAT,
        "version": VERSION,
        "confirmed": verdict.confirmed,
        "completions": verdict.completions,
        "counts_run": verdict.leaves,
        "guaranteed": list(verdict.guaranteed),
        "unseated": list(verdict.unseated),
        # counterexample ballots use the ballot CSV format
        "counterexample": None if verdict.counterexample is None else write_ballots(verdict.counterexample),
    })


def parse_verdict(text: str):
    from .oracle import Verdict

    doc = _load(text, VERDICT_FORMAT)
    try:
        cx = doc["counterexample"]
        ballots = None
        if cx is not None:
            ballots = tuple(
                Ballot(BallotKind(r[0]), tuple(r[2].split()), int(r[1]))
                for r in list(csv.reader(io.StringIO(cx)))[1:] if r
            )
        return Verdict(
            confirmed=bool(doc["confirmed"]),
            completions=doc["completions"],
            guaranteed=tuple(doc["guaranteed"]),
            counterexample=ballots,
            unseated=tuple(doc["unseated"]),
            leaves=doc["counts_run"],
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed verdict: {exc!r}") from exc
