"""Per player-season run values, the hand-off between evaluation and the model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

from armvalue.events import ParseError

LEDGER_HEADER = ("player_id", "season", "n_opportunities", "run_value")
# catcher ledgers carry attempts so reports can show attempt rates
LEDGER_HEADER_ATTEMPTS = LEDGER_HEADER + ("n_attempts",)


@dataclass(frozen=True)
class RunValue:
    player_id: str
    season: int
    n_opportunities: int
    run_value: float
    n_attempts: Optional[int] = None


def sort_ledger(entries: Iterable[RunValue]) -> list[RunValue]:
    return sorted(entries, key=lambda e: (e.player_id, e.season))


def write_ledger(entries: Sequence[RunValue], out: TextIO) -> None:
    with_attempts = bool(entries) and all(e.n_attempts is not None for e in entries)
    header = LEDGER_HEADER_ATTEMPTS if with_attempts else LEDGER_HEADER
    out.write(",".join(header) + "\n")
    for e in entries:
        cells = [e.player_id, str(e.season), str(e.n_opportunities), repr(float(e.run_value))]
        if with_attempts:
            cells.append(str(e.n_attempts))
        out.write(",".join(cells) + "\n")


def read_ledger(source: TextIO | Iterable[str]) -> list[RunValue]:
    entries: list[RunValue] = []
    header: tuple[str, ...] | None = None
    seen: set[tuple[str, int]] = set()
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = tuple(cells)
            if header not in (LEDGER_HEADER, LEDGER_HEADER_ATTEMPTS):
                raise ParseError(f"bad ledger header {line!r}", lineno)
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        row = dict(zip(header, cells))
        try:
            season = int(row["season"])
        except ValueError:
            raise ParseError("not an integer", lineno, "season") from None
        try:
            n = int(row["n_opportunities"])
        except ValueError:
            raise ParseError("not an integer", lineno, "n_opportunities") from None
        try:
            value = float(row["run_value"])
        except ValueError:
            raise ParseError("not a number", lineno, "run_value") from None
        attempts = None
        if "n_attempts" in row:
            try:
                attempts = int(row["n_attempts"])
            except ValueError:
                raise ParseError("not an integer", lineno, "n_attempts") from None
        if n < 0:
            raise ParseError("negative opportunity count", lineno, "n_opportunities")
        key = (row["player_id"], season)
        if key in seen:
            raise ParseError(f"duplicate player-season {key}", lineno)
        seen.add(key)
        entries.append(RunValue(row["player_id"], season, n, value, attempts))
    if header is None:
        raise ParseError("missing ledger header")
    return entries
