"""Catcher steal-opportunity tabulation and run values.

For each catcher, season and steal situation the observed stolen bases and
caught stealings are compared with what a league-average catcher would have
allowed given the same number of opportunities, and the surplus is priced
with the expected-runs deltas of the two outcomes.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from armvalue.events import CatcherOpportunity, CatcherOutcome, StealSituation
from armvalue.ledger import RunValue
from armvalue.runmatrix import ExpectedRunsMatrix, TransitionTable, delta_runs_catcher

CELL_HEADER = ("player_id", "season", "situation", "outs", "N", "A", "S", "F")


@dataclass(frozen=True)
class CatcherCell:
    player_id: str
    season: int
    situation: StealSituation
    N: int = 0
    A: int = 0
    S: int = 0
    F: int = 0


@dataclass(frozen=True)
class LeagueCell:
    season: int
    situation: StealSituation
    N: int = 0
    A: int = 0
    S: int = 0
    F: int = 0


CellKey = tuple[str, int, StealSituation]
LeagueKey = tuple[int, StealSituation]


def _sort_key(key: CellKey):
    player, season, sit = key
    return (player, season, sit)


def tabulate(
    records: Iterable[CatcherOpportunity],
) -> tuple[dict[CellKey, CatcherCell], dict[LeagueKey, LeagueCell]]:
    """Count N, A, S, F per (catcher, season, situation) and league-wide."""
    counts: dict[CellKey, list[int]] = defaultdict(lambda: [0, 0, 0, 0])
    for rec in records:
        c = counts[(rec.catcher_id, rec.season, rec.situation)]
        c[0] += 1
        if rec.outcome is CatcherOutcome.STOLEN_BASE:
            c[1] += 1
            c[2] += 1
        elif rec.outcome is CatcherOutcome.CAUGHT_STEALING:
            c[1] += 1
            c[3] += 1

    league: dict[LeagueKey, list[int]] = defaultdict(lambda: [0, 0, 0, 0])
    cells = {}
    for key in sorted(counts, key=_sort_key):
        n, a, s, f = counts[key]
        cells[key] = CatcherCell(key[0], key[1], key[2], n, a, s, f)
        tot = league[(key[1], key[2])]
        for i, v in enumerate((n, a, s, f)):
            tot[i] += v
    leagues = {
        k: LeagueCell(k[0], k[1], *league[k]) for k in sorted(league)
    }
    return cells, leagues


def expected_counts(cell: CatcherCell, league: LeagueCell) -> tuple[float, float]:
    """League-rate expectations ``(E[S], E[F])`` for the cell's opportunities.

    The league totals include the catcher's own counts.
    """
    if cell.N == 0:
        return 0.0, 0.0
    if league.N <= 0:
        raise ValueError(f"no league opportunities in {league.season} {league.situation}")
    return cell.N * league.S / league.N, cell.N * league.F / league.N


@dataclass(frozen=True)
class SituationValue:
    """One catcher-season-situation term of the run-value sum."""

    cell: CatcherCell
    expected_S: float
    expected_F: float
    delta_cs: float
    delta_sb: float

    @property
    def run_value(self) -> float:
        return (self.cell.F - self.expected_F) * self.delta_cs + (
            self.cell.S - self.expected_S
        ) * self.delta_sb


def situation_values(
    cells: Mapping[CellKey, CatcherCell],
    leagues: Mapping[LeagueKey, LeagueCell],
    matrix: ExpectedRunsMatrix,
    table: TransitionTable,
) -> list[SituationValue]:
    out = []
    for key in sorted(cells, key=_sort_key):
        cell = cells[key]
        e_s, e_f = expected_counts(cell, leagues[(cell.season, cell.situation)])
        out.append(
            SituationValue(
                cell,
                e_s,
                e_f,
                delta_runs_catcher(cell.situation, CatcherOutcome.CAUGHT_STEALING, matrix, table),
                delta_runs_catcher(cell.situation, CatcherOutcome.STOLEN_BASE, matrix, table),
            )
        )
    return out


def catcher_run_value(
    cells: Mapping[CellKey, CatcherCell],
    leagues: Mapping[LeagueKey, LeagueCell],
    matrix: ExpectedRunsMatrix,
    table: TransitionTable,
) -> list[RunValue]:
    """Runs saved relative to the league per (catcher, season), summed over situations."""
    terms: dict[tuple[str, int], list[float]] = defaultdict(list)
    opps: dict[tuple[str, int], list[int]] = defaultdict(lambda: [0, 0])
    for sv in situation_values(cells, leagues, matrix, table):
        key = (sv.cell.player_id, sv.cell.season)
        terms[key].append(sv.run_value)
        opps[key][0] += sv.cell.N
        opps[key][1] += sv.cell.A
    return [
        RunValue(p, s, opps[(p, s)][0], math.fsum(terms[(p, s)]), opps[(p, s)][1])
        for p, s in sorted(terms)
        if opps[(p, s)][0] > 0
    ]


def evaluate(
    records: Iterable[CatcherOpportunity],
    matrix: ExpectedRunsMatrix,
    table: TransitionTable,
) -> list[RunValue]:
    cells, leagues = tabulate(records)
    return catcher_run_value(cells, leagues, matrix, table)


def write_cells(cells: Mapping[CellKey, CatcherCell], out) -> None:
    out.write(",".join(CELL_HEADER) + "\n")
    for key in sorted(cells, key=_sort_key):
        c = cells[key]
        out.write(
            f"{c.player_id},{c.season},{c.situation.category.value},{c.situation.outs},"
            f"{c.N},{c.A},{c.S},{c.F}\n"
        )


SITUATION_HEADER = CELL_HEADER + ("expected_S", "expected_F", "delta_cs", "delta_sb", "run_value")


def write_situation_values(values: Iterable[SituationValue], out) -> None:
    out.write(",".join(SITUATION_HEADER) + "\n")
    for sv in values:
        c = sv.cell
        out.write(
            f"{c.player_id},{c.season},{c.situation.category.value},{c.situation.outs},"
            f"{c.N},{c.A},{c.S},{c.F},{sv.expected_S!r},{sv.expected_F!r},"
            f"{sv.delta_cs!r},{sv.delta_sb!r},{sv.run_value!r}\n"
        )
