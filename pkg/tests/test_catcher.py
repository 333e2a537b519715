import io
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from armvalue.catcher import (
    CatcherCell,
    LeagueCell,
    SituationValue,
    catcher_run_value,
    evaluate,
    expected_counts,
    situation_values,
    tabulate,
    write_cells,
    write_situation_values,
)
from armvalue.events import CatcherOpportunity, CatcherOutcome, StealSituation

from conftest import R1_NO_OUTS, _catcher_rows


def test_table1_counts(table1):
    cells, leagues = tabulate(table1)
    lopez = cells[("lopej001", 2002, R1_NO_OUTS)]
    assert (lopez.N, lopez.A, lopez.S, lopez.F) == (241, 25, 14, 11)
    league = leagues[(2002, R1_NO_OUTS)]
    assert (league.N, league.A, league.S, league.F) == (12361, 831, 519, 312)


def test_empty_and_single_record():
    assert tabulate([]) == ({}, {})
    rec = CatcherOpportunity(2002, "a", R1_NO_OUTS, CatcherOutcome.CAUGHT_STEALING)
    cells, _ = tabulate([rec])
    c = cells[("a", 2002, R1_NO_OUTS)]
    assert (c.N, c.A, c.S, c.F) == (1, 1, 0, 1)


def test_expected_counts_table1(table1):
    cells, leagues = tabulate(table1)
    e_s, e_f = expected_counts(cells[("lopej001", 2002, R1_NO_OUTS)], leagues[(2002, R1_NO_OUTS)])
    # oracle: exact rational arithmetic
    assert e_s == pytest.approx(float(Fraction(241 * 519, 12361)), rel=1e-15)
    assert e_f == pytest.approx(float(Fraction(241 * 312, 12361)), rel=1e-15)
    assert round(e_s, 2) == 10.12 and round(e_f, 2) == 6.08


def test_expected_counts_edge_cases():
    league = LeagueCell(2002, R1_NO_OUTS, 100, 10, 6, 4)
    assert expected_counts(CatcherCell("a", 2002, R1_NO_OUTS), league) == (0.0, 0.0)
    cell = CatcherCell("a", 2002, R1_NO_OUTS, 50, 5, 3, 2)
    e_s, e_f = expected_counts(cell, league)
    assert (cell.S - e_s, cell.F - e_f) == (0.0, 0.0)
    with pytest.raises(ValueError):
        expected_counts(cell, LeagueCell(2002, R1_NO_OUTS))


def test_table1_situation_value(table1, matrix, catcher_table):
    cells, leagues = tabulate(table1)
    values = {sv.cell.player_id: sv for sv in situation_values(cells, leagues, matrix, catcher_table)}
    lopez = values["lopej001"]
    assert lopez.cell.F - lopez.expected_F == pytest.approx(4.917, abs=1e-3)
    assert lopez.cell.S - lopez.expected_S == pytest.approx(3.881, abs=1e-3)
    assert lopez.run_value == pytest.approx(2.12, abs=0.005)


def test_stated_residuals_give_worked_example():
    cell = CatcherCell("lopej001", 2002, R1_NO_OUTS)
    sv = SituationValue(cell, expected_S=-3.92, expected_F=-4.93, delta_cs=0.62, delta_sb=-0.24)
    assert sv.run_value == pytest.approx(2.12, abs=0.005)


def test_league_average_player_is_zero(matrix, catcher_table):
    recs = []
    for sit in StealSituation.all():
        recs += _catcher_rows("avg", 2002, sit, 100, 6, 4)
        recs += _catcher_rows("big", 2002, sit, 300, 18, 12)
    ledger = {rv.player_id: rv for rv in evaluate(recs, matrix, catcher_table)}
    assert ledger["avg"].run_value == pytest.approx(0.0, abs=1e-12)
    assert ledger["big"].run_value == pytest.approx(0.0, abs=1e-12)
    assert ledger["avg"].n_opportunities == 1500
    assert ledger["avg"].n_attempts == 150


def test_symmetric_split_is_zero(matrix, catcher_table):
    recs = _catcher_rows("a", 2002, R1_NO_OUTS, 40, 3, 2) + _catcher_rows("b", 2002, R1_NO_OUTS, 40, 3, 2)
    assert [rv.run_value for rv in evaluate(recs, matrix, catcher_table)] == [0.0, 0.0]


def test_seasons_use_separate_baselines(matrix, catcher_table):
    # identical rates within each season, very different across seasons
    recs = _catcher_rows("a", 2002, R1_NO_OUTS, 10, 5, 0) + _catcher_rows("b", 2002, R1_NO_OUTS, 10, 5, 0)
    recs += _catcher_rows("a", 2003, R1_NO_OUTS, 10, 0, 5) + _catcher_rows("b", 2003, R1_NO_OUTS, 10, 0, 5)
    assert all(rv.run_value == 0.0 for rv in evaluate(recs, matrix, catcher_table))


@pytest.mark.parametrize("d_cs, d_sb", [(0.62, -0.24), (0.1, -0.9), (0.5, 0.0)])
def test_attempt_prevention_direction(d_cs, d_sb):
    # more opportunities at fixed S, F shifts CV by -(league net delta per opportunity)
    league = LeagueCell(2002, R1_NO_OUTS, 1000, 80, 50, 30)
    net = (league.F * d_cs + league.S * d_sb) / league.N
    values = []
    for n in (20, 40, 80):
        cell = CatcherCell("a", 2002, R1_NO_OUTS, n, 5, 3, 2)
        e_s, e_f = expected_counts(cell, league)
        assert (e_s / n, e_f / n) == pytest.approx((league.S / league.N, league.F / league.N))
        values.append(SituationValue(cell, e_s, e_f, d_cs, d_sb).run_value)
    assert values[1] - values[0] == pytest.approx(-20 * net)
    if net < 0:
        assert values[0] < values[1] < values[2]
    else:
        assert values[0] > values[1] > values[2]


def test_cell_writers(table1, matrix, catcher_table):
    cells, leagues = tabulate(table1)
    buf = io.StringIO()
    write_cells(cells, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "player_id,season,situation,outs,N,A,S,F"
    assert lines[1] == "lopej001,2002,R1,0,241,25,14,11"
    buf = io.StringIO()
    write_situation_values(situation_values(cells, leagues, matrix, catcher_table), buf)
    row = buf.getvalue().splitlines()[1].split(",")
    assert float(row[-1]) == pytest.approx(2.117, abs=1e-3)


situations = st.sampled_from(StealSituation.all())
records = st.builds(
    CatcherOpportunity,
    st.sampled_from([2002, 2003]),
    st.sampled_from(["a", "b", "c", "d", "e"]),
    situations,
    st.sampled_from(list(CatcherOutcome)),
)


@settings(max_examples=75)
@given(st.lists(records, max_size=120))
def test_tabulation_properties(recs):
    cells, leagues = tabulate(recs)
    assert sum(c.N for c in cells.values()) == len(recs)
    for c in cells.values():
        assert c.N >= c.A == c.S + c.F >= 0
    for (season, sit), lg in leagues.items():
        members = [c for c in cells.values() if c.season == season and c.situation == sit]
        assert lg.N == sum(c.N for c in members)
        assert lg.S == sum(c.S for c in members)
        assert lg.F == sum(c.F for c in members)


@settings(max_examples=75)
@given(recs=st.lists(records, max_size=120))
def test_zero_sum_per_season(recs, matrix, catcher_table):
    cells, leagues = tabulate(recs)
    ledger = catcher_run_value(cells, leagues, matrix, catcher_table)
    for season in {rv.season for rv in ledger}:
        vals = [rv.run_value for rv in ledger if rv.season == season]
        scale = sum(abs(v) for v in vals)
        assert abs(math.fsum(vals)) <= 1e-9 * scale + 1e-12
