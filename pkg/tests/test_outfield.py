import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from armvalue.events import BaseConfig, GameState, OutfieldOpportunity, OutfieldOutcome, outfield_eligible
from armvalue.outfield import (
    Zone,
    assign_zone,
    evaluate,
    outfield_run_value,
    tabulate_outfield,
    write_cells,
)
from armvalue.runmatrix import ExpectedRunsMatrix, default_outfield_transitions, delta_runs_outfield

FIRST = GameState(BaseConfig(True, False, False), 0)


def rec(pid, outcome, x=5.0, y=205.0, state=FIRST, hit=True, season=2003):
    return OutfieldOpportunity(season, pid, state, hit, x, y, outcome)


@pytest.mark.parametrize(
    "x, y, zone",
    [(13.0, 95.0, (1, 9)), (0.0, 0.0, (0, 0)), (-0.5, 10.0, (-1, 1)), (12.0, 9.999, (1, 0)), (-12.0, 0, (-1, 0))],
)
def test_assign_zone_examples(x, y, zone):
    assert assign_zone(x, y) == Zone(*zone)


@pytest.mark.parametrize("x, y", [(math.nan, 1.0), (1.0, math.inf), (0.0, -0.1)])
def test_assign_zone_rejects(x, y):
    with pytest.raises(ValueError):
        assign_zone(x, y)


@given(st.floats(-1e4, 1e4), st.floats(0, 1e4))
def test_assign_zone_translation(x, y):
    base = assign_zone(x, y)
    shifted = assign_zone(x + 12.0, y)
    # float addition can cross a boundary only if x + 12 rounds exactly onto it
    if math.floor((x + 12.0) / 12.0) == math.floor(x / 12.0) + 1:
        assert shifted == Zone(base.x_index + 1, base.y_index)
    assert assign_zone(-0.0, y) == Zone(0, base.y_index)


def test_assign_zone_translation_on_grid():
    for k in range(-20, 20):
        for x in (0.0, 1.5, 6.0, 11.75):
            assert assign_zone(x + 12 * (k + 1), 33.0) == Zone(assign_zone(x + 12 * k, 33.0).x_index + 1, 3)


def test_single_record_cells():
    cells, leagues = tabulate_outfield([rec("a", OutfieldOutcome.THROWN_OUT)])
    (cell,) = cells.values()
    assert (cell.N, cell.S, cell.F) == (1, 1, 0)
    assert cell.zone == Zone(0, 20)
    cells, _ = tabulate_outfield([rec("a", OutfieldOutcome.HOLD)])
    (cell,) = cells.values()
    assert (cell.N, cell.S, cell.F) == (1, 0, 0)


def test_two_player_oracle():
    # R(1--,0) - R(1--,1) = +0.5 and R(1--,0) - R(1-3,0) = -0.3
    values = {s: 1.0 for s in GameState.all()}
    values[GameState(BaseConfig(True, False, False), 1)] = 0.5
    values[GameState(BaseConfig(True, False, True), 0)] = 1.3
    matrix = ExpectedRunsMatrix(values)
    table = default_outfield_transitions()
    assert delta_runs_outfield(FIRST, True, OutfieldOutcome.THROWN_OUT, matrix, table) == pytest.approx(0.5)
    assert delta_runs_outfield(FIRST, True, OutfieldOutcome.ADVANCED, matrix, table) == pytest.approx(-0.3)
    recs = [rec("A", OutfieldOutcome.THROWN_OUT)] * 2 + [rec("A", OutfieldOutcome.HOLD)] * 8
    recs += [rec("B", OutfieldOutcome.HOLD)] * 10
    out = {rv.player_id: rv for rv in evaluate(recs, matrix, table)}
    assert out["A"].run_value == pytest.approx(0.5, abs=1e-12)
    assert out["B"].run_value == pytest.approx(-0.5, abs=1e-12)
    assert out["A"].n_opportunities == 10
    assert out["A"].n_attempts is None


def test_single_player_league_is_zero(matrix, outfield_table):
    recs = [rec("solo", OutfieldOutcome.THROWN_OUT), rec("solo", OutfieldOutcome.ADVANCED, x=40.0)]
    recs.append(rec("solo", OutfieldOutcome.ADVANCED, state=GameState(BaseConfig(False, True, False), 1), hit=False))
    (rv,) = evaluate(recs, matrix, outfield_table)
    assert rv.run_value == 0.0 and rv.n_opportunities == 3


def test_league_average_player_is_zero(matrix, outfield_table):
    recs = [rec("a", OutfieldOutcome.THROWN_OUT)] + [rec("a", OutfieldOutcome.HOLD)] * 3
    recs += [rec("b", OutfieldOutcome.THROWN_OUT)] * 2 + [rec("b", OutfieldOutcome.HOLD)] * 6
    assert [rv.run_value for rv in evaluate(recs, matrix, outfield_table)] == pytest.approx([0.0, 0.0], abs=1e-12)


def test_write_cells():
    cells, _ = tabulate_outfield([rec("a", OutfieldOutcome.ADVANCED, x=-13.0, y=95.0)])
    buf = io.StringIO()
    write_cells(cells, buf)
    assert buf.getvalue().splitlines() == [
        "player_id,season,zone_x,zone_y,base_state,outs,hit,N,S,F",
        "a,2003,-2,9,1--,0,1,1,0,1",
    ]


eligible = [(s, h) for h in (True, False) for s in GameState.all() if outfield_eligible(s, h)]


@st.composite
def outfield_records(draw):
    state, hit = draw(st.sampled_from(eligible))
    return OutfieldOpportunity(
        draw(st.sampled_from([2003, 2004])),
        draw(st.sampled_from(["a", "b", "c", "d"])),
        state,
        hit,
        draw(st.floats(-30, 30)),
        draw(st.floats(180, 215)),
        draw(st.sampled_from(list(OutfieldOutcome))),
    )


@settings(max_examples=60)
@given(recs=st.lists(outfield_records(), max_size=150))
def test_conservation_and_zero_sum(recs, matrix, outfield_table):
    cells, leagues = tabulate_outfield(recs)
    assert sum(c.N for c in cells.values()) == len(recs)
    for c in cells.values():
        assert c.N >= c.S + c.F >= 0
    for key, lg in leagues.items():
        members = [c for k, c in cells.items() if k[1:] == key]
        assert (lg.N, lg.S, lg.F) == tuple(sum(x) for x in zip(*[(c.N, c.S, c.F) for c in members]))
    ledger = outfield_run_value(cells, leagues, matrix, outfield_table)
    for season in {rv.season for rv in ledger}:
        vals = [rv.run_value for rv in ledger if rv.season == season]
        assert abs(math.fsum(vals)) <= 1e-9 * sum(abs(v) for v in vals) + 1e-12


@settings(max_examples=40)
@given(recs=st.lists(outfield_records(), max_size=80), level=st.floats(0.0, 3.0))
def test_constant_matrix_gives_zero(recs, level, outfield_table):
    flat = ExpectedRunsMatrix.constant(level)
    assert all(rv.run_value == 0.0 for rv in evaluate(recs, flat, outfield_table))
