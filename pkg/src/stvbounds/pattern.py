"""Compact seating/elimination patterns such as ``q q q q e … q e … s``.

``q`` is a seat won with a quota, ``s`` a seat won without one, ``e`` an
elimination. A long run of eliminations collapses to ``e …`` and a trailing
``…`` marks candidates still standing when the last seat was filled.

The annotated form wraps the guaranteed prefix in square brackets, e.g.
``[q q q] q e … q``. Tokens are separated by single spaces and the ellipsis
is U+2026; parsing also accepts ``...`` and ``\\ldots``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

ELLIPSIS = "…"
# shortest elimination run that collapses; runs of up to four are written out
# in full
DEFAULT_MIN_RUN = 5
_ALIASES = {"...": ELLIPSIS, "\\ldots": ELLIPSIS, ELLIPSIS: ELLIPSIS, "q": "q", "s": "s", "e": "e"}


@dataclass(frozen=True)
class PatternString:
    tokens: tuple[str, ...]
    bold_prefix: int = 0

    def __post_init__(self):
        lead = 0
        for t in self.tokens:
            if t != "q":
                break
            lead += 1
        if not 0 <= self.bold_prefix <= lead:
            raise ValueError(f"bold prefix {self.bold_prefix} exceeds the {lead} leading q tokens")

    @property
    def trailing_standing(self) -> bool:
        return bool(self.tokens) and self.tokens[-1] == ELLIPSIS and self.tokens[-2:-1] != ("e",)

    def __str__(self) -> str:
        return " ".join(self.tokens)

    def annotated(self) -> str:
        if not self.bold_prefix:
            return str(self)
        head = " ".join(self.tokens[: self.bold_prefix])
        tail = " ".join(self.tokens[self.bold_prefix:])
        return f"[{head}]" + (f" {tail}" if tail else "")


def raw_tokens(log) -> list[str]:
    """One token per event, before any compression."""
    out = []
    for ev in log.events:
        kind = ev.kind.value
        if kind == "eliminate":
            out.append("e")
        elif kind == "elect" or ev.has_quota:
            out.append("q")
        else:
            out.append("s")
    return out


def compress(tokens, min_run: int = DEFAULT_MIN_RUN) -> list[str]:
    out = []
    i = 0
    while i < len(tokens):
        if tokens[i] != "e":
            out.append(tokens[i])
            i += 1
            continue
        j = i
        while j < len(tokens) and tokens[j] == "e":
            j += 1
        if j - i >= min_run:
            out.extend(["e", ELLIPSIS])
        else:
            out.extend(["e"] * (j - i))
        i = j
    return out


def render_pattern(log, report=None, *, min_run: int = DEFAULT_MIN_RUN) -> PatternString:
    """Pattern for a completed count, with the guaranteed prefix from ``report`` if given."""
    tokens = compress(raw_tokens(log), min_run)
    if log.events:
        last = log.events[-1]
        if len(last.tallies) > 1:
            tokens.append(ELLIPSIS)
    bold = report.prefix_length if report is not None else 0
    return PatternString(tuple(tokens), bold)


def parse_pattern(text: str) -> PatternString:
    """Parse plain or bracket-annotated pattern text."""
    bold = 0
    body = text.strip()
    if body.startswith("["):
        close = body.find("]")
        if close < 0:
            raise ParseError(f"unbalanced bracket in pattern {text!r}")
        head = body[1:close].split()
        if any(t != "q" for t in head):
            raise ParseError(f"bracketed prefix may only hold q tokens: {text!r}")
        bold = len(head)
        body = body[1:close] + " " + body[close + 1:]
    tokens = []
    for raw in body.split():
        if raw not in _ALIASES:
            raise ParseError(f"unknown pattern token {raw!r} in {text!r}")
        tokens.append(_ALIASES[raw])
    return PatternString(tuple(tokens), bold)


@dataclass(frozen=True)
class PatternDiff:
    position: int  # 1-based token index of the first difference
    expected: str | None
    actual: str | None

    def __str__(self):
        return f"token {self.position}: expected {self.expected or '<end>'}, got {self.actual or '<end>'}"


def compare_pattern(rendered: PatternString, expected: str) -> PatternDiff | None:
    """``None`` when the token sequences agree, else the first differing token."""
    want = parse_pattern(expected).tokens
    got = rendered.tokens
    for i in range(max(len(want), len(got))):
        w = want[i] if i < len(want) else None
        g = got[i] if i < len(got) else None
        if w != g:
            return PatternDiff(i + 1, w, g)
    return None
