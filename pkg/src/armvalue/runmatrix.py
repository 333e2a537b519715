"""Expected runs by game state and the base-state transitions of throwing plays.

A fielder is credited ``R(start) - R(result)`` for each play, so throwing a
runner out is worth a positive amount and allowing an advance a negative one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, TextIO

from armvalue.events import (
    BaseConfig,
    CatcherOutcome,
    GameState,
    OutfieldOutcome,
    ParseError,
    StealCategory,
    StealSituation,
    outfield_eligible,
)

log = logging.getLogger(__name__)

MATRIX_HEADER = ("base_state", "outs", "expected_runs")
CATCHER_TRANSITION_HEADER = ("situation", "outcome", "result_base_state", "outs_delta")
OUTFIELD_TRANSITION_HEADER = ("base_state", "hit", "outcome", "result_base_state", "outs_delta")


def _rows(source: TextIO | Iterable[str], header: tuple[str, ...]):
    seen_header = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if not seen_header:
            if tuple(cells) != header:
                raise ParseError(f"bad header {line!r}, expected {','.join(header)!r}", lineno)
            seen_header = True
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        yield lineno, dict(zip(header, cells))
    if not seen_header:
        raise ParseError(f"missing header, expected {','.join(header)}")


@dataclass(frozen=True)
class ExpectedRunsMatrix:
    """Expected runs to the end of the inning for each of the 24 states."""

    values: Mapping[GameState, float]

    def __post_init__(self) -> None:
        missing = [s for s in GameState.all() if s not in self.values]
        if missing:
            raise ValueError(f"expected-runs matrix missing states: {', '.join(map(str, missing))}")
        for state, v in self.values.items():
            if v < 0:
                raise ValueError(f"negative expected runs at {state}")

    def __call__(self, state: GameState) -> float:
        if state.is_terminal:
            return 0.0
        return self.values[state]

    @classmethod
    def constant(cls, value: float) -> "ExpectedRunsMatrix":
        return cls({s: float(value) for s in GameState.all()})

    def monotonicity_warnings(self) -> list[str]:
        """States where expected runs rise with an extra out."""
        out = []
        for b in BaseConfig.all():
            for outs in (0, 1):
                lo, hi = self(GameState(b, outs)), self(GameState(b, outs + 1))
                if hi > lo:
                    out.append(f"{b.code}: {outs} outs {lo} < {outs + 1} outs {hi}")
        return out


def load_matrix(source: TextIO | Iterable[str]) -> ExpectedRunsMatrix:
    values: dict[GameState, float] = {}
    for lineno, row in _rows(source, MATRIX_HEADER):
        try:
            state = GameState.parse(row["base_state"], int(row["outs"]))
        except ValueError:
            raise ParseError(f"bad state {row['base_state']},{row['outs']}", lineno) from None
        if not 0 <= state.outs <= 2:
            raise ParseError("outs out of range", lineno, "outs")
        try:
            value = float(row["expected_runs"])
        except ValueError:
            raise ParseError("not a number", lineno, "expected_runs") from None
        if value < 0:
            raise ParseError("negative expected runs", lineno, "expected_runs")
        if state in values:
            raise ParseError(f"duplicate state {state}", lineno)
        values[state] = value
    missing = [str(s) for s in GameState.all() if s not in values]
    if missing:
        raise ParseError(f"missing states: {', '.join(missing)}")
    matrix = ExpectedRunsMatrix(values)
    for msg in matrix.monotonicity_warnings():
        log.warning("expected runs not monotone in outs: %s", msg)
    return matrix


def write_matrix(matrix: ExpectedRunsMatrix, out: TextIO) -> None:
    out.write(",".join(MATRIX_HEADER) + "\n")
    for state in GameState.all():
        out.write(f"{state.bases.code},{state.outs},{matrix(state):.2f}\n")


@dataclass(frozen=True)
class Transition:
    """Resulting bases and the number of outs the play adds."""

    bases: BaseConfig
    outs_delta: int

    def apply(self, outs: int) -> GameState:
        return GameState(self.bases, min(outs + self.outs_delta, 3))


_STEAL_OUTCOMES = (CatcherOutcome.STOLEN_BASE, CatcherOutcome.CAUGHT_STEALING)
_THROW_OUTCOMES = (OutfieldOutcome.THROWN_OUT, OutfieldOutcome.ADVANCED)


@dataclass(frozen=True)
class TransitionTable:
    """Steal transitions keyed by (category, outcome); outs carry through."""

    rules: Mapping[tuple[StealCategory, CatcherOutcome], Transition]

    def __post_init__(self) -> None:
        for cat in StealCategory:
            for outcome in _STEAL_OUTCOMES:
                rule = self.rules.get((cat, outcome))
                if rule is None:
                    raise ValueError(f"no transition for {cat.value} {outcome.value}")
                if outcome is CatcherOutcome.STOLEN_BASE and rule.outs_delta != 0:
                    raise ValueError(f"{cat.value} SB must not change outs")
                if outcome is CatcherOutcome.CAUGHT_STEALING:
                    if rule.outs_delta != 1:
                        raise ValueError(f"{cat.value} CS must add exactly one out")
                    if rule.bases.n_runners != cat.bases.n_runners - 1:
                        raise ValueError(f"{cat.value} CS must remove exactly one runner")

    def result(self, situation: StealSituation, outcome: CatcherOutcome) -> GameState:
        if outcome not in _STEAL_OUTCOMES:
            raise ValueError(f"no transition for outcome {outcome.value}")
        return self.rules[(situation.category, outcome)].apply(situation.outs)


def load_catcher_transitions(source: TextIO | Iterable[str]) -> TransitionTable:
    rules = {}
    for lineno, row in _rows(source, CATCHER_TRANSITION_HEADER):
        try:
            cat = StealCategory(row["situation"])
            outcome = CatcherOutcome(row["outcome"])
            rule = Transition(BaseConfig.parse(row["result_base_state"]), int(row["outs_delta"]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if outcome not in _STEAL_OUTCOMES:
            raise ParseError(f"outcome must be SB or CS, got {outcome.value}", lineno, "outcome")
        if (cat, outcome) in rules:
            raise ParseError(f"duplicate transition {cat.value} {outcome.value}", lineno)
        rules[(cat, outcome)] = rule
    try:
        return TransitionTable(rules)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


@dataclass(frozen=True)
class OutfieldTransitionTable:
    """Throw transitions keyed by (start bases, hit flag, outcome)."""

    rules: Mapping[tuple[BaseConfig, bool, OutfieldOutcome], Transition]

    def __post_init__(self) -> None:
        for bases, hit in eligible_outfield_keys():
            for outcome in _THROW_OUTCOMES:
                rule = self.rules.get((bases, hit, outcome))
                if rule is None:
                    raise ValueError(f"no transition for {bases.code} hit={int(hit)} {outcome.value}")
                want = 1 if outcome is OutfieldOutcome.THROWN_OUT else 0
                if rule.outs_delta != want:
                    raise ValueError(
                        f"{bases.code} hit={int(hit)} {outcome.value} must add {want} outs"
                    )

    def result(self, start: GameState, hit: bool, outcome: OutfieldOutcome) -> GameState:
        if outcome not in _THROW_OUTCOMES:
            raise ValueError(f"no transition for outcome {outcome.value}")
        return self.rules[(start.bases, hit, outcome)].apply(start.outs)


def eligible_outfield_keys() -> list[tuple[BaseConfig, bool]]:
    keys = []
    for hit in (True, False):
        for bases in BaseConfig.all():
            # outs=0 is eligible for both flags whenever any outs value is
            if outfield_eligible(GameState(bases, 0), hit):
                keys.append((bases, hit))
    return keys


def load_outfield_transitions(source: TextIO | Iterable[str]) -> OutfieldTransitionTable:
    rules = {}
    for lineno, row in _rows(source, OUTFIELD_TRANSITION_HEADER):
        try:
            bases = BaseConfig.parse(row["base_state"])
            outcome = OutfieldOutcome(row["outcome"])
            rule = Transition(BaseConfig.parse(row["result_base_state"]), int(row["outs_delta"]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if row["hit"] not in ("0", "1"):
            raise ParseError("hit must be 0 or 1", lineno, "hit")
        hit = row["hit"] == "1"
        if outcome not in _THROW_OUTCOMES:
            raise ParseError("outcome must be THROWN_OUT or ADVANCED", lineno, "outcome")
        key = (bases, hit, outcome)
        if key in rules:
            raise ParseError(f"duplicate transition {bases.code} {row['hit']} {outcome.value}", lineno)
        rules[key] = rule
    try:
        return OutfieldTransitionTable(rules)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def default_outfield_rule(bases: BaseConfig, hit: bool, outcome: OutfieldOutcome) -> Transition:
    """Built-in outfield transition.

    On a hit the batter reaches first, a runner on third scores and the lead
    runner from first/second either takes an extra base (ADVANCED) or is
    thrown out; other runners move up one base. On a caught ball the lead
    runner tags up one base or is thrown out; nobody else moves.
    """
    first, second, third = bases.occupied()
    if hit:
        lead = 2 if second else 1
        occupied = {1}
        for base in [b for b, on in ((1, first), (2, second)) if on]:
            if base != lead:
                occupied.add(base + 1)
            elif outcome is OutfieldOutcome.ADVANCED and base + 2 <= 3:
                occupied.add(base + 2)
    else:
        lead = 3 if third else 2
        occupied = {b for b, on in zip((1, 2, 3), (first, second, third)) if on}
        occupied.discard(lead)
        if outcome is OutfieldOutcome.ADVANCED and lead + 1 <= 3:
            occupied.add(lead + 1)
    delta = 1 if outcome is OutfieldOutcome.THROWN_OUT else 0
    return Transition(BaseConfig(1 in occupied, 2 in occupied, 3 in occupied), delta)


def write_outfield_transitions(table: OutfieldTransitionTable, out: TextIO) -> None:
    out.write(",".join(OUTFIELD_TRANSITION_HEADER) + "\n")
    for bases, hit in eligible_outfield_keys():
        for outcome in _THROW_OUTCOMES:
            rule = table.rules[(bases, hit, outcome)]
            out.write(f"{bases.code},{int(hit)},{outcome.value},{rule.bases.code},{rule.outs_delta}\n")


def _data(name: str):
    return resources.files("armvalue.data").joinpath(name).open("r", encoding="utf-8")


def reference_matrix() -> ExpectedRunsMatrix:
    """Illustrative matrix shipped with the package; replace with your own."""
    with _data("run_matrix.csv") as fh:
        return load_matrix(fh)


def default_catcher_transitions() -> TransitionTable:
    with _data("transitions_catcher.csv") as fh:
        return load_catcher_transitions(fh)


def default_outfield_transitions() -> OutfieldTransitionTable:
    with _data("transitions_outfield.csv") as fh:
        return load_outfield_transitions(fh)


def delta_runs_catcher(
    situation: StealSituation,
    outcome: CatcherOutcome,
    matrix: ExpectedRunsMatrix,
    table: TransitionTable,
) -> float:
    """Runs credited to the catcher for one SB or CS from ``situation``."""
    return matrix(situation.state) - matrix(table.result(situation, outcome))


def delta_runs_outfield(
    start: GameState,
    hit: bool,
    outcome: OutfieldOutcome,
    matrix: ExpectedRunsMatrix,
    table: OutfieldTransitionTable,
) -> float:
    """Runs credited to the outfielder for a throw-out or an extra-base advance."""
    if not 0 <= start.outs <= 2 or not outfield_eligible(start, hit):
        raise ValueError(f"{start} hit={int(hit)} is not a throwing opportunity")
    return matrix(start) - matrix(table.result(start, hit, outcome))
