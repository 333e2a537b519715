"""Synthetic opportunity ledgers with known truth, plus brute-force oracles.

Two generators cover the two halves of the pipeline: event-level ledgers
(attempts and outcomes drawn per opportunity) exercise tabulation and run
values; model-level ledgers (season run values drawn straight from the
hierarchical model) exercise the sampler.
"""

from __future__ import annotations

import bisect
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from armvalue.events import (
    BaseConfig,
    CatcherOpportunity,
    CatcherOutcome,
    GameState,
    OutfieldOpportunity,
    OutfieldOutcome,
    StealSituation,
    outfield_eligible,
)
from armvalue.ledger import RunValue
from armvalue.runmatrix import ExpectedRunsMatrix, OutfieldTransitionTable, TransitionTable

SITUATIONS = StealSituation.all()
OUTFIELD_STATES = [
    (s, hit) for hit in (True, False) for s in GameState.all() if outfield_eligible(s, hit)
]


@dataclass(frozen=True)
class PlayerTruth:
    """Ground truth for one player.

    ``attempt_prob`` may be a single rate or a per-situation mapping.
    ``success_prob`` is the runner's success rate given an attempt (stolen
    base for catchers, extra base taken for outfielders).
    """

    player_id: str
    attempt_prob: Union[float, Mapping[StealSituation, float]] = 0.05
    success_prob: float = 0.7
    mu: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        probs = (
            self.attempt_prob.values()
            if isinstance(self.attempt_prob, Mapping)
            else [self.attempt_prob]
        )
        for p in [*probs, self.success_prob]:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of range for {self.player_id}: {p}")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")

    def attempt_in(self, situation: StealSituation) -> float:
        if isinstance(self.attempt_prob, Mapping):
            return self.attempt_prob[situation]
        return self.attempt_prob


@dataclass(frozen=True)
class TruthSpec:
    players: Sequence[PlayerTruth]
    seasons: Sequence[int]
    # opportunity count per (player_id, season); missing keys mean zero
    opportunities: Mapping[tuple[str, int], int]
    seed: int = 0
    situation_weights: Optional[Sequence[float]] = None
    # outfield ball-in-play box: (x_min, x_max, y_min, y_max) in feet
    field_box: tuple[float, float, float, float] = (-36.0, 36.0, 200.0, 260.0)

    def __post_init__(self) -> None:
        for key, n in self.opportunities.items():
            if n < 0:
                raise ValueError(f"negative opportunity count for {key}")
        if self.situation_weights is not None:
            if len(self.situation_weights) != len(SITUATIONS):
                raise ValueError("situation_weights needs one weight per steal situation")

    def player_seasons(self):
        for player in self.players:
            for season in self.seasons:
                n = self.opportunities.get((player.player_id, season), 0)
                if n > 0:
                    yield player, season, n


def random_truth(
    n_players: int,
    seasons: Sequence[int],
    seed: int,
    opportunities: tuple[int, int] = (200, 800),
    attempt_prob: tuple[float, float] = (0.03, 0.08),
    success_prob: tuple[float, float] = (0.55, 0.85),
    mu0: float = 0.0,
    tau2: float = 4.0,
    sigma2: tuple[float, float] = (10.0, 40.0),
) -> TruthSpec:
    """Draw per-player truths uniformly from the given ranges."""
    rng = np.random.default_rng(seed)
    width = len(str(max(n_players - 1, 0)))
    players = []
    opps = {}
    for i in range(n_players):
        pid = f"p{i:0{width}d}"
        players.append(
            PlayerTruth(
                pid,
                float(rng.uniform(*attempt_prob)),
                float(rng.uniform(*success_prob)),
                float(rng.normal(mu0, math.sqrt(tau2))),
                float(rng.uniform(*sigma2)),
            )
        )
        for season in seasons:
            opps[(pid, season)] = int(rng.integers(opportunities[0], opportunities[1] + 1))
    return TruthSpec(players, list(seasons), opps, seed=seed)


def _stream(spec: TruthSpec, salt: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, salt])


def generate_catcher_ledger(spec: TruthSpec) -> list[CatcherOpportunity]:
    """Attempt then outcome per opportunity, all from one seeded stream."""
    rng = _stream(spec, 1)
    weights = np.ones(len(SITUATIONS)) if spec.situation_weights is None else np.asarray(spec.situation_weights, float)
    weights = weights / weights.sum()
    out: list[CatcherOpportunity] = []
    for player, season, n in spec.player_seasons():
        sit_idx = rng.choice(len(SITUATIONS), size=n, p=weights)
        u_attempt = rng.random(n)
        u_success = rng.random(n)
        for k in range(n):
            sit = SITUATIONS[sit_idx[k]]
            if u_attempt[k] >= player.attempt_in(sit):
                outcome = CatcherOutcome.NO_ATTEMPT
            elif u_success[k] < player.success_prob:
                outcome = CatcherOutcome.STOLEN_BASE
            else:
                outcome = CatcherOutcome.CAUGHT_STEALING
            out.append(CatcherOpportunity(season, player.player_id, sit, outcome))
    return out


def generate_outfield_ledger(spec: TruthSpec) -> list[OutfieldOpportunity]:
    """Uniform eligible states and locations; runner tries for the extra
    base with the attempt rate and makes it with the success rate."""
    rng = _stream(spec, 2)
    x0, x1, y0, y1 = spec.field_box
    out: list[OutfieldOpportunity] = []
    for player, season, n in spec.player_seasons():
        idx = rng.integers(0, len(OUTFIELD_STATES), size=n)
        xs = rng.uniform(x0, x1, size=n)
        ys = rng.uniform(y0, y1, size=n)
        u_attempt = rng.random(n)
        u_success = rng.random(n)
        rate = player.attempt_prob if not isinstance(player.attempt_prob, Mapping) else float(
            np.mean(list(player.attempt_prob.values()))
        )
        for k in range(n):
            state, hit = OUTFIELD_STATES[idx[k]]
            if u_attempt[k] >= rate:
                outcome = OutfieldOutcome.HOLD
            elif u_success[k] < player.success_prob:
                outcome = OutfieldOutcome.ADVANCED
            else:
                outcome = OutfieldOutcome.THROWN_OUT
            out.append(
                OutfieldOpportunity(
                    season, player.player_id, state, hit, float(xs[k]), float(ys[k]), outcome
                )
            )
    return out


def generate_model_observations(spec: TruthSpec) -> list[RunValue]:
    """Season run values drawn from the hierarchical model itself.

    ``Y ~ Normal(mu_i, sigma2_i / n*)`` is converted back to a raw season
    total ``X = Y * n / n_bar``.
    """
    rng = _stream(spec, 3)
    cells = list(spec.player_seasons())
    if not cells:
        return []
    n_bar = sum(n for _, _, n in cells) / len(cells)
    noise = rng.standard_normal(len(cells))
    out = []
    for (player, season, n), z in zip(cells, noise):
        n_star = n / n_bar
        y = player.mu + math.sqrt(player.sigma2 / n_star) * z
        out.append(RunValue(player.player_id, season, n, y * n / n_bar))
    return sorted(out, key=lambda e: (e.player_id, e.season))


def write_truth(spec: TruthSpec, out: TextIO) -> None:
    out.write("player_id,attempt_prob,success_prob,mu,sigma2\n")
    for p in spec.players:
        rate = p.attempt_prob if not isinstance(p.attempt_prob, Mapping) else float(
            np.mean(list(p.attempt_prob.values()))
        )
        out.write(f"{p.player_id},{rate!r},{p.success_prob!r},{p.mu!r},{p.sigma2!r}\n")


# -- brute-force oracle ------------------------------------------------------


def brute_force_run_value(
    records: Sequence[Union[CatcherOpportunity, OutfieldOpportunity]],
    matrix: ExpectedRunsMatrix,
    catcher_table: Optional[TransitionTable] = None,
    outfield_table: Optional[OutfieldTransitionTable] = None,
) -> dict[tuple[str, int], float]:
    """Run values rebuilt one record at a time, with no per-player cells.

    Each record contributes ``(1[fail] - league fail rate) * fail delta +
    (1[success] - league success rate) * success delta``; summing over a
    player's records gives the same total as the cell formulas.
    """
    league: dict[tuple, list[int]] = defaultdict(lambda: [0, 0, 0])
    keyed = []
    for rec in records:
        if isinstance(rec, CatcherOpportunity):
            key = (rec.season, rec.situation.category, rec.situation.outs)
            good = rec.outcome is CatcherOutcome.CAUGHT_STEALING
            bad = rec.outcome is CatcherOutcome.STOLEN_BASE
        else:
            zone = (math.floor(rec.bip_x / 12.0), math.floor(rec.bip_y / 10.0))
            key = (rec.season, zone, rec.start_state.bases, rec.start_state.outs, rec.hit)
            good = rec.outcome is OutfieldOutcome.THROWN_OUT
            bad = rec.outcome is OutfieldOutcome.ADVANCED
        tot = league[key]
        tot[0] += 1
        tot[1] += good
        tot[2] += bad
        keyed.append((rec, key, good, bad))

    def runs(bases: BaseConfig, outs: int) -> float:
        return 0.0 if outs >= 3 else matrix.values[GameState(bases, outs)]

    terms: dict[tuple[str, int], list[float]] = defaultdict(list)
    for rec, key, good, bad in keyed:
        n, n_good, n_bad = league[key]
        if isinstance(rec, CatcherOpportunity):
            if catcher_table is None:
                raise ValueError("catcher records need a catcher transition table")
            start_bases, outs = rec.situation.category.bases, rec.situation.outs
            win = catcher_table.rules[(rec.situation.category, CatcherOutcome.CAUGHT_STEALING)]
            lose = catcher_table.rules[(rec.situation.category, CatcherOutcome.STOLEN_BASE)]
        else:
            if outfield_table is None:
                raise ValueError("outfield records need an outfield transition table")
            start_bases, outs = rec.start_state.bases, rec.start_state.outs
            win = outfield_table.rules[(start_bases, rec.hit, OutfieldOutcome.THROWN_OUT)]
            lose = outfield_table.rules[(start_bases, rec.hit, OutfieldOutcome.ADVANCED)]
        r0 = runs(start_bases, outs)
        d_win = r0 - runs(win.bases, outs + win.outs_delta)
        d_lose = r0 - runs(lose.bases, outs + lose.outs_delta)
        terms[(rec.player_id, rec.season)].append(
            (good - n_good / n) * d_win + (bad - n_bad / n) * d_lose
        )
    return {k: math.fsum(v) for k, v in sorted(terms.items())}


# -- illustrative run-expectancy matrix --------------------------------------

# Per plate appearance: out, walk, single, double, triple, home run.
DEFAULT_PA_PROBS = (0.662, 0.095, 0.162, 0.050, 0.005, 0.026)


@dataclass
class _Inning:
    rng: np.random.Generator
    cumulative: Sequence[float]
    bases: list[bool] = field(default_factory=lambda: [False, False, False])
    outs: int = 0
    runs: int = 0

    def _score(self, n: int) -> None:
        self.runs += n

    def plate_appearance(self) -> None:
        first, second, third = self.bases
        event = min(bisect.bisect_right(self.cumulative, self.rng.random()), 5)
        u = self.rng.random()
        if event == 0:
            if first and self.outs < 2 and u < 0.12:
                self.outs += 2  # double play, lead runners hold
                self.bases[0] = False
                if self.outs >= 3:
                    return
            else:
                self.outs += 1
            if self.outs < 3 and third and u > 0.55:
                self._score(1)  # sacrifice fly / productive out
                self.bases[2] = False
        elif event == 1:
            if first and second and third:
                self._score(1)
            elif first and second:
                self.bases[2] = True
            elif first:
                self.bases[1] = True
            self.bases[0] = True
        elif event == 2:
            scored = int(third)
            new = [True, False, False]
            if second:
                if u < 0.6:
                    scored += 1
                else:
                    new[2] = True
            if first:
                if not new[2] and u < 0.3:
                    new[2] = True
                else:
                    new[1] = True
            self._score(scored)
            self.bases = new
        elif event == 3:
            scored = int(third) + int(second)
            new = [False, True, False]
            if first:
                if u < 0.4:
                    scored += 1
                else:
                    new[2] = True
            self._score(scored)
            self.bases = new
        elif event == 4:
            self._score(int(first) + int(second) + int(third))
            self.bases = [False, False, True]
        else:
            self._score(1 + int(first) + int(second) + int(third))
            self.bases = [False, False, False]


def estimate_run_matrix(
    n_innings: int, seed: int, pa_probs: Sequence[float] = DEFAULT_PA_PROBS
) -> ExpectedRunsMatrix:
    """Expected runs by state from simulated innings (runs after the state,
    averaged over every visit)."""
    if len(pa_probs) != 6 or abs(sum(pa_probs) - 1.0) > 1e-9:
        raise ValueError("pa_probs needs six probabilities summing to 1")
    cumulative = list(itertools.accumulate(pa_probs))
    rng = np.random.default_rng(seed)
    totals: dict[GameState, float] = defaultdict(float)
    visits: dict[GameState, int] = defaultdict(int)
    for _ in range(n_innings):
        inning = _Inning(rng, cumulative)
        seen: list[tuple[GameState, int]] = []
        while inning.outs < 3:
            state = GameState(BaseConfig(*inning.bases), inning.outs)
            seen.append((state, inning.runs))
            inning.plate_appearance()
        for state, before in seen:
            totals[state] += inning.runs - before
            visits[state] += 1
    missing = [s for s in GameState.all() if visits[s] == 0]
    if missing:
        raise ValueError("too few innings to visit every state")
    return ExpectedRunsMatrix({s: totals[s] / visits[s] for s in GameState.all()})


# Entries of the shipped matrix that are fixed rather than simulated.
ANCHOR_ENTRIES = {
    GameState(BaseConfig(True, False, False), 0): 0.90,
    GameState(BaseConfig(False, False, False), 1): 0.28,
    GameState(BaseConfig(False, True, False), 0): 1.14,
}
REFERENCE_INNINGS = 300_000
REFERENCE_SEED = 20020405


def build_reference_matrix(
    n_innings: int = REFERENCE_INNINGS, seed: int = REFERENCE_SEED
) -> ExpectedRunsMatrix:
    """Simulated matrix rounded to 0.01 with the anchor entries pinned."""
    sim = estimate_run_matrix(n_innings, seed)
    values = {s: round(sim(s), 2) for s in GameState.all()}
    values.update(ANCHOR_ENTRIES)
    return ExpectedRunsMatrix(values)
