"""Game situations, opportunity records, and the opportunity CSV formats.

Each input row is one throwing opportunity. What counts as an opportunity
is decided by whoever produces the file; this module only checks that the
rows are well formed and eligible.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO, Union

CATCHER_HEADER = ("season", "catcher_id", "situation", "outs", "outcome")
OUTFIELD_HEADER = (
    "season",
    "fielder_id",
    "base_state",
    "outs",
    "hit",
    "bip_x",
    "bip_y",
    "outcome",
)


class ParseError(ValueError):
    """Raised for a malformed or ineligible row in an input file."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


@dataclass(frozen=True, order=True)
class BaseConfig:
    """Which bases are occupied. Serialized as ``"1-3"`` style codes."""

    runner_on_first: bool = False
    runner_on_second: bool = False
    runner_on_third: bool = False

    @classmethod
    def parse(cls, code: str) -> "BaseConfig":
        if len(code) != 3:
            raise ValueError(f"bad base code {code!r}")
        flags = []
        for ch, mark in zip(code, "123"):
            if ch == mark:
                flags.append(True)
            elif ch == "-":
                flags.append(False)
            else:
                raise ValueError(f"bad base code {code!r}")
        return cls(*flags)

    @property
    def code(self) -> str:
        return "".join(
            mark if occupied else "-"
            for mark, occupied in zip("123", self.occupied())
        )

    def occupied(self) -> tuple[bool, bool, bool]:
        return (self.runner_on_first, self.runner_on_second, self.runner_on_third)

    @property
    def n_runners(self) -> int:
        return sum(self.occupied())

    @classmethod
    def all(cls) -> list["BaseConfig"]:
        return [cls.parse(c) for c in ALL_BASE_CODES]

    def __str__(self) -> str:
        return self.code


ALL_BASE_CODES = ("---", "1--", "-2-", "--3", "12-", "1-3", "-23", "123")


@dataclass(frozen=True, order=True)
class GameState:
    """Base configuration plus outs. ``outs == 3`` is the inning-over state."""

    bases: BaseConfig
    outs: int

    @property
    def is_terminal(self) -> bool:
        return self.outs >= 3

    @classmethod
    def parse(cls, code: str, outs: int) -> "GameState":
        return cls(BaseConfig.parse(code), int(outs))

    @classmethod
    def all(cls) -> list["GameState"]:
        """The 24 non-terminal states."""
        return [cls(b, o) for b in BaseConfig.all() for o in range(3)]

    def __str__(self) -> str:
        return f"({self.bases.code},{self.outs})"


class StealCategory(enum.Enum):
    """Base-stealing configurations. The two first-and-second categories
    differ only in which runner's steal is being tracked."""

    R1 = "R1"
    R2 = "R2"
    R13 = "R13"
    R12L = "R12L"  # lead runner tracked
    R12T = "R12T"  # trailing runner tracked

    @property
    def bases(self) -> BaseConfig:
        return _CATEGORY_BASES[self]


_CATEGORY_BASES = {
    StealCategory.R1: BaseConfig(True, False, False),
    StealCategory.R2: BaseConfig(False, True, False),
    StealCategory.R13: BaseConfig(True, False, True),
    StealCategory.R12L: BaseConfig(True, True, False),
    StealCategory.R12T: BaseConfig(True, True, False),
}


@dataclass(frozen=True)
class StealSituation:
    category: StealCategory
    outs: int

    @property
    def state(self) -> GameState:
        return GameState(self.category.bases, self.outs)

    @classmethod
    def all(cls) -> list["StealSituation"]:
        return [cls(c, o) for c in StealCategory for o in range(3)]

    def __lt__(self, other: "StealSituation") -> bool:
        order = list(StealCategory)
        return (order.index(self.category), self.outs) < (
            order.index(other.category),
            other.outs,
        )

    def __str__(self) -> str:
        return f"({self.category.value},{self.outs})"


class CatcherOutcome(enum.Enum):
    NO_ATTEMPT = "NONE"
    STOLEN_BASE = "SB"
    CAUGHT_STEALING = "CS"


class OutfieldOutcome(enum.Enum):
    HOLD = "HOLD"
    THROWN_OUT = "THROWN_OUT"
    ADVANCED = "ADVANCED"


@dataclass(frozen=True)
class PlayerSeasonKey:
    player_id: str
    season: int


@dataclass(frozen=True)
class CatcherOpportunity:
    season: int
    catcher_id: str
    situation: StealSituation
    outcome: CatcherOutcome

    @property
    def player_id(self) -> str:
        return self.catcher_id


@dataclass(frozen=True)
class OutfieldOpportunity:
    """One ball in play to an outfielder with a possible extra-base advance.

    ``bip_x`` is lateral feet from home plate (negative toward left field),
    ``bip_y`` is depth in feet.
    """

    season: int
    fielder_id: str
    start_state: GameState
    hit: bool
    bip_x: float
    bip_y: float
    outcome: OutfieldOutcome

    @property
    def player_id(self) -> str:
        return self.fielder_id


Opportunity = Union[CatcherOpportunity, OutfieldOpportunity]


def outfield_eligible(state: GameState, hit: bool) -> bool:
    """Whether a ball in play from ``state`` can be a throwing opportunity.

    Hits need a runner on first or second (a runner on third is assumed to
    score). Outs need a runner on second or third and must not end the inning.
    """
    b = state.bases
    if hit:
        return b.runner_on_first or b.runner_on_second
    return (b.runner_on_second or b.runner_on_third) and state.outs < 2


def record_violations(record: Opportunity) -> list[str]:
    """All invariant violations of a single record (empty when valid)."""
    problems: list[str] = []
    if isinstance(record, CatcherOpportunity):
        if not 0 <= record.situation.outs <= 2:
            problems.append("outs out of range")
        if not isinstance(record.outcome, CatcherOutcome):
            problems.append("unknown outcome")
        return problems
    outs = record.start_state.outs
    if not 0 <= outs <= 2:
        problems.append("outs out of range")
    if not (math.isfinite(record.bip_x) and math.isfinite(record.bip_y)):
        problems.append("non-finite ball-in-play coordinate")
    elif record.bip_y < 0:
        problems.append("negative bip_y")
    if 0 <= outs <= 2 and not outfield_eligible(record.start_state, record.hit):
        problems.append("ineligible opportunity")
    return problems


# -- parsing -----------------------------------------------------------------


def _data_lines(source: TextIO | Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, [cell.strip() for cell in line.split(",")]


def _check_header(rows: Iterator[tuple[int, list[str]]], expected: Sequence[str]) -> None:
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError(f"missing header, expected {','.join(expected)}") from None
    if tuple(header) != tuple(expected):
        raise ParseError(
            f"bad header {','.join(header)!r}, expected {','.join(expected)!r}",
            line=lineno,
        )


def _field_int(value: str, lineno: int, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"not an integer: {value!r}", lineno, name) from None


def _field_float(value: str, lineno: int, name: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ParseError(f"not a number: {value!r}", lineno, name) from None
    if not math.isfinite(out):
        raise ParseError(f"non-finite value {value!r}", lineno, name)
    return out


def _outs(value: str, lineno: int) -> int:
    outs = _field_int(value, lineno, "outs")
    if not 0 <= outs <= 2:
        raise ParseError("outs out of range", lineno, "outs")
    return outs


def _split(cells: list[str], header: Sequence[str], lineno: int) -> dict[str, str]:
    if len(cells) != len(header):
        raise ParseError(
            f"expected {len(header)} fields, got {len(cells)}", lineno
        )
    return dict(zip(header, cells))


def parse_catcher_opportunities(source: TextIO | Iterable[str]) -> list[CatcherOpportunity]:
    """Read ``catcher_opportunities.csv`` rows, preserving order."""
    rows = _data_lines(source)
    _check_header(rows, CATCHER_HEADER)
    out = []
    for lineno, cells in rows:
        row = _split(cells, CATCHER_HEADER, lineno)
        season = _field_int(row["season"], lineno, "season")
        if not row["catcher_id"]:
            raise ParseError("empty player id", lineno, "catcher_id")
        try:
            category = StealCategory(row["situation"])
        except ValueError:
            raise ParseError(
                f"unknown situation code {row['situation']!r}", lineno, "situation"
            ) from None
        outs = _outs(row["outs"], lineno)
        try:
            outcome = CatcherOutcome(row["outcome"])
        except ValueError:
            raise ParseError(
                f"unknown outcome {row['outcome']!r}", lineno, "outcome"
            ) from None
        out.append(
            CatcherOpportunity(season, row["catcher_id"], StealSituation(category, outs), outcome)
        )
    return out


def parse_outfield_opportunities(source: TextIO | Iterable[str]) -> list[OutfieldOpportunity]:
    """Read ``outfield_opportunities.csv`` rows, preserving order.

    Rows that fail the hit/out eligibility rules are rejected.
    """
    rows = _data_lines(source)
    _check_header(rows, OUTFIELD_HEADER)
    out = []
    for lineno, cells in rows:
        row = _split(cells, OUTFIELD_HEADER, lineno)
        season = _field_int(row["season"], lineno, "season")
        if not row["fielder_id"]:
            raise ParseError("empty player id", lineno, "fielder_id")
        try:
            bases = BaseConfig.parse(row["base_state"])
        except ValueError:
            raise ParseError(
                f"unknown base state {row['base_state']!r}", lineno, "base_state"
            ) from None
        outs = _outs(row["outs"], lineno)
        if row["hit"] not in ("0", "1"):
            raise ParseError(f"hit must be 0 or 1, got {row['hit']!r}", lineno, "hit")
        hit = row["hit"] == "1"
        x = _field_float(row["bip_x"], lineno, "bip_x")
        y = _field_float(row["bip_y"], lineno, "bip_y")
        if y < 0:
            raise ParseError("bip_y must be >= 0", lineno, "bip_y")
        try:
            outcome = OutfieldOutcome(row["outcome"])
        except ValueError:
            raise ParseError(
                f"unknown outcome {row['outcome']!r}", lineno, "outcome"
            ) from None
        state = GameState(bases, outs)
        if not outfield_eligible(state, hit):
            raise ParseError("ineligible opportunity", lineno, "base_state")
        out.append(OutfieldOpportunity(season, row["fielder_id"], state, hit, x, y, outcome))
    return out


def _fmt_float(value: float) -> str:
    return repr(float(value))


def catcher_row(rec: CatcherOpportunity) -> str:
    return ",".join(
        [
            str(rec.season),
            rec.catcher_id,
            rec.situation.category.value,
            str(rec.situation.outs),
            rec.outcome.value,
        ]
    )


def outfield_row(rec: OutfieldOpportunity) -> str:
    return ",".join(
        [
            str(rec.season),
            rec.fielder_id,
            rec.start_state.bases.code,
            str(rec.start_state.outs),
            "1" if rec.hit else "0",
            _fmt_float(rec.bip_x),
            _fmt_float(rec.bip_y),
            rec.outcome.value,
        ]
    )


def write_catcher_opportunities(records: Iterable[CatcherOpportunity], out: TextIO) -> None:
    out.write(",".join(CATCHER_HEADER) + "\n")
    for rec in records:
        out.write(catcher_row(rec) + "\n")


def write_outfield_opportunities(records: Iterable[OutfieldOpportunity], out: TextIO) -> None:
    out.write(",".join(OUTFIELD_HEADER) + "\n")
    for rec in records:
        out.write(outfield_row(rec) + "\n")


# -- validation --------------------------------------------------------------


@dataclass
class ValidationReport:
    n_records: int = 0
    per_season: dict[int, int] = field(default_factory=dict)
    per_player: dict[str, int] = field(default_factory=dict)
    # (record index, message)
    violations: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [f"records: {self.n_records}"]
        for season in sorted(self.per_season):
            out.append(f"season {season}: {self.per_season[season]}")
        out.append(f"players: {len(self.per_player)}")
        out.append(f"violations: {len(self.violations)}")
        out.extend(f"  record {i}: {msg}" for i, msg in self.violations)
        return out


def validate_ledger(records: Sequence[Opportunity]) -> ValidationReport:
    """Count records by season and player and list every invariant violation.

    Duplicate rows are legal and never reported.
    """
    seasons: Counter[int] = Counter()
    players: Counter[str] = Counter()
    report = ValidationReport(n_records=len(records))
    for i, rec in enumerate(records):
        seasons[rec.season] += 1
        players[rec.player_id] += 1
        for msg in record_violations(rec):
            report.violations.append((i, msg))
    report.per_season = dict(sorted(seasons.items()))
    report.per_player = dict(sorted(players.items()))
    return report
