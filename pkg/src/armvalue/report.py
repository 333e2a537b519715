"""Posterior summaries, rankings and plot-data export.

Scaled contributions are on the league-average opportunity scale. Individual
contributions multiply them by the player's own average opportunities over
``n_bar``, which puts them back on the scale of that player's season totals.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from armvalue.ledger import RunValue
from armvalue.model import PosteriorDraws

SUMMARY_HEADER = (
    "player_id",
    "mean_scaled",
    "lo_scaled",
    "hi_scaled",
    "avg_opps",
    "mean_individual",
    "lo_individual",
    "hi_individual",
    "significant",
    "attempt_pct",
)
PLOT_HEADER = ("rank", "player_id", "mean", "lower", "upper")


@dataclass(frozen=True)
class PosteriorSummary:
    player_id: str
    mean_scaled: float
    lo_scaled: float
    hi_scaled: float
    avg_opportunities: float
    mean_individual: float
    lo_individual: float
    hi_individual: float
    significant: bool
    attempt_pct: Optional[float] = None


def excludes_zero(lo: float, hi: float) -> bool:
    """Closed-interval test: an endpoint at exactly zero still contains zero."""
    return lo > 0 or hi < 0


def interval(samples: np.ndarray, level: float = 0.95) -> tuple[float, float]:
    tail = (100.0 - 100.0 * level) / 2.0
    lo, hi = np.percentile(samples, [tail, 100.0 - tail], method="linear")
    return float(lo), float(hi)


def summarize(
    draws: PosteriorDraws, ledger: Sequence[RunValue], level: float = 0.95
) -> list[PosteriorSummary]:
    """One summary per player in the ledger, sorted by player id."""
    if draws.n_draws == 0:
        raise ValueError("no posterior draws")
    if not ledger:
        return []
    n_bar = sum(e.n_opportunities for e in ledger) / len(ledger)
    opps: dict[str, list[int]] = defaultdict(list)
    attempts: dict[str, list[Optional[int]]] = defaultdict(list)
    for e in ledger:
        opps[e.player_id].append(e.n_opportunities)
        attempts[e.player_id].append(e.n_attempts)

    out = []
    for pid in sorted(opps):
        col = draws.mu[:, draws.column(pid)]
        mean = float(np.mean(col))
        lo, hi = interval(col, level)
        avg = sum(opps[pid]) / len(opps[pid])
        factor = avg / n_bar
        pct = None
        if all(a is not None for a in attempts[pid]):
            pct = 100.0 * sum(attempts[pid]) / sum(opps[pid])
        out.append(
            PosteriorSummary(
                pid,
                mean,
                lo,
                hi,
                avg,
                mean * factor,
                lo * factor,
                hi * factor,
                excludes_zero(lo, hi),
                pct,
            )
        )
    return out


def rank(
    summaries: Sequence[PosteriorSummary], k: int, direction: str = "best"
) -> list[PosteriorSummary]:
    """Top ``k`` by individual contribution; ties go to the smaller player id."""
    if k > len(summaries):
        raise ValueError(f"k={k} exceeds {len(summaries)} players")
    if direction == "best":
        key = lambda s: (-s.mean_individual, s.player_id)  # noqa: E731
    elif direction == "worst":
        key = lambda s: (s.mean_individual, s.player_id)  # noqa: E731
    else:
        raise ValueError("direction must be 'best' or 'worst'")
    return sorted(summaries, key=key)[:k]


def significance_count(summaries: Iterable[PosteriorSummary]) -> int:
    return sum(1 for s in summaries if excludes_zero(s.lo_scaled, s.hi_scaled))


def _num(v: float) -> str:
    return repr(float(v))


def write_summary(summaries: Iterable[PosteriorSummary], out: TextIO) -> None:
    out.write(",".join(SUMMARY_HEADER) + "\n")
    for s in summaries:
        cells = [
            s.player_id,
            _num(s.mean_scaled),
            _num(s.lo_scaled),
            _num(s.hi_scaled),
            _num(s.avg_opportunities),
            _num(s.mean_individual),
            _num(s.lo_individual),
            _num(s.hi_individual),
            "1" if s.significant else "0",
            "" if s.attempt_pct is None else _num(s.attempt_pct),
        ]
        out.write(",".join(cells) + "\n")


def read_summary(source: TextIO | Iterable[str]) -> list[PosteriorSummary]:
    lines = [ln.strip() for ln in source if ln.strip()]
    if not lines or tuple(lines[0].split(",")) != SUMMARY_HEADER:
        raise ValueError("bad summary header")
    out = []
    for ln in lines[1:]:
        c = ln.split(",")
        out.append(
            PosteriorSummary(
                c[0],
                *(float(v) for v in c[1:8]),
                c[8] == "1",
                float(c[9]) if c[9] else None,
            )
        )
    return out


def export_interval_plot_data(
    summaries: Iterable[PosteriorSummary], out: TextIO, scale: str = "individual"
) -> None:
    """Intervals sorted by ascending posterior mean, one row per player."""
    if scale not in ("individual", "scaled"):
        raise ValueError("scale must be 'individual' or 'scaled'")

    def fields(s: PosteriorSummary) -> tuple[float, float, float]:
        if scale == "individual":
            return s.mean_individual, s.lo_individual, s.hi_individual
        return s.mean_scaled, s.lo_scaled, s.hi_scaled

    rows = sorted(summaries, key=lambda s: (fields(s)[0], s.player_id))
    out.write(",".join(PLOT_HEADER) + "\n")
    for i, s in enumerate(rows, start=1):
        mean, lo, hi = fields(s)
        out.write(f"{i},{s.player_id},{_num(mean)},{_num(lo)},{_num(hi)}\n")


RANKING_HEADER = ("rank", "player_id", "mean_individual", "lo_individual", "hi_individual")


def write_ranking(ranked: Iterable[PosteriorSummary], out: TextIO) -> None:
    out.write(",".join(RANKING_HEADER) + "\n")
    for i, s in enumerate(ranked, start=1):
        out.write(
            f"{i},{s.player_id},{_num(s.mean_individual)},"
            f"{_num(s.lo_individual)},{_num(s.hi_individual)}\n"
        )
