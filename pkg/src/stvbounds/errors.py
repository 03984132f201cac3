"""Exception hierarchy shared by the library and the command line.

Every error carries an ``exit_code`` so the CLI can map failures onto
distinct process statuses without inspecting messages.
"""


class StvError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 4


class ContestError(StvError):
    """A contest definition violates a structural invariant.

    ``code`` is a stable, machine-readable identifier such as
    ``"duplicate-candidate"`` or ``"seats-out-of-range"``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class BallotError(StvError):
    """A ballot is inconsistent with the contest it is counted in."""


class ParseError(StvError):
    """An input document could not be parsed."""

    exit_code = 3

    def __init__(self, message: str, problems: list[tuple[int, str]] | None = None):
        super().__init__(message)
        # (line number, description) pairs collected while reading a file
        self.problems = problems or []

    def __str__(self) -> str:
        text = super().__str__()
        if self.problems:
            text += "".join(f"\n  line {n}: {msg}" for n, msg in self.problems)
        return text


class SchemaError(ParseError):
    """A structured document has the wrong format tag, version or shape."""


class EnumerationLimitError(StvError):
    """The oracle refused to enumerate a completion space beyond its limits."""

    exit_code = 5
