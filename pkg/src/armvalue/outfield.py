"""Outfielder throwing opportunities: zone grid, tabulation and run values.

Opportunities are grouped by where the ball was fielded (12 ft by 10 ft
zones), the starting game state and whether the ball in play was a hit.
Successes (S) are runners thrown out, failures (F) are extra-base advances;
holds only add to the opportunity count.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from armvalue.events import GameState, OutfieldOpportunity, OutfieldOutcome
from armvalue.ledger import RunValue
from armvalue.runmatrix import ExpectedRunsMatrix, OutfieldTransitionTable, delta_runs_outfield

ZONE_WIDTH_FT = 12.0
ZONE_DEPTH_FT = 10.0

CELL_HEADER = ("player_id", "season", "zone_x", "zone_y", "base_state", "outs", "hit", "N", "S", "F")


@dataclass(frozen=True, order=True)
class Zone:
    x_index: int
    y_index: int


def assign_zone(bip_x: float, bip_y: float) -> Zone:
    """Grid cell of a fielded ball; a boundary belongs to the higher cell."""
    if not (math.isfinite(bip_x) and math.isfinite(bip_y)):
        raise ValueError(f"non-finite coordinates ({bip_x}, {bip_y})")
    if bip_y < 0:
        raise ValueError(f"bip_y must be >= 0, got {bip_y}")
    return Zone(math.floor(bip_x / ZONE_WIDTH_FT), math.floor(bip_y / ZONE_DEPTH_FT))


@dataclass(frozen=True)
class OutfieldCell:
    player_id: str
    season: int
    zone: Zone
    state: GameState
    hit: bool
    N: int = 0
    S: int = 0
    F: int = 0


@dataclass(frozen=True)
class LeagueOutfieldCell:
    season: int
    zone: Zone
    state: GameState
    hit: bool
    N: int = 0
    S: int = 0
    F: int = 0


CellKey = tuple[str, int, Zone, GameState, bool]
LeagueKey = tuple[int, Zone, GameState, bool]


def tabulate_outfield(
    records: Iterable[OutfieldOpportunity],
) -> tuple[dict[CellKey, OutfieldCell], dict[LeagueKey, LeagueOutfieldCell]]:
    counts: dict[CellKey, list[int]] = defaultdict(lambda: [0, 0, 0])
    for rec in records:
        zone = assign_zone(rec.bip_x, rec.bip_y)
        c = counts[(rec.fielder_id, rec.season, zone, rec.start_state, rec.hit)]
        c[0] += 1
        if rec.outcome is OutfieldOutcome.THROWN_OUT:
            c[1] += 1
        elif rec.outcome is OutfieldOutcome.ADVANCED:
            c[2] += 1

    league: dict[LeagueKey, list[int]] = defaultdict(lambda: [0, 0, 0])
    cells = {}
    for key in sorted(counts):
        n, s, f = counts[key]
        cells[key] = OutfieldCell(*key, n, s, f)
        tot = league[key[1:]]
        tot[0] += n
        tot[1] += s
        tot[2] += f
    leagues = {k: LeagueOutfieldCell(*k, *league[k]) for k in sorted(league)}
    return cells, leagues


def expected_counts(cell: OutfieldCell, league: LeagueOutfieldCell) -> tuple[float, float]:
    if cell.N == 0:
        return 0.0, 0.0
    if league.N <= 0:
        raise ValueError("league cell has no opportunities")
    return cell.N * league.S / league.N, cell.N * league.F / league.N


def outfield_run_value(
    cells: Mapping[CellKey, OutfieldCell],
    leagues: Mapping[LeagueKey, LeagueOutfieldCell],
    matrix: ExpectedRunsMatrix,
    table: OutfieldTransitionTable,
) -> list[RunValue]:
    """Runs saved relative to the league per (fielder, season)."""
    terms: dict[tuple[str, int], list[float]] = defaultdict(list)
    opps: dict[tuple[str, int], int] = defaultdict(int)
    for key in sorted(cells):
        cell = cells[key]
        e_s, e_f = expected_counts(cell, leagues[key[1:]])
        d_s = delta_runs_outfield(cell.state, cell.hit, OutfieldOutcome.THROWN_OUT, matrix, table)
        d_f = delta_runs_outfield(cell.state, cell.hit, OutfieldOutcome.ADVANCED, matrix, table)
        terms[key[:2]].append((cell.S - e_s) * d_s + (cell.F - e_f) * d_f)
        opps[key[:2]] += cell.N
    return [
        RunValue(p, s, opps[(p, s)], math.fsum(terms[(p, s)]))
        for p, s in sorted(terms)
        if opps[(p, s)] > 0
    ]


def evaluate(
    records: Iterable[OutfieldOpportunity],
    matrix: ExpectedRunsMatrix,
    table: OutfieldTransitionTable,
) -> list[RunValue]:
    cells, leagues = tabulate_outfield(records)
    return outfield_run_value(cells, leagues, matrix, table)


def write_cells(cells: Mapping[CellKey, OutfieldCell], out) -> None:
    out.write(",".join(CELL_HEADER) + "\n")
    for key in sorted(cells):
        c = cells[key]
        out.write(
            f"{c.player_id},{c.season},{c.zone.x_index},{c.zone.y_index},"
            f"{c.state.bases.code},{c.state.outs},{int(c.hit)},{c.N},{c.S},{c.F}\n"
        )
