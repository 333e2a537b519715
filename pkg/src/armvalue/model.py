"""Hierarchical normal model for multi-season run values, fit by Gibbs sampling.

Season run values ``X_ij`` are put on a common opportunity scale,
``Y_ij = X_ij * n_bar / n_ij``, and modeled as

    Y_ij ~ Normal(mu_i, sigma2_i / n*_ij),   n*_ij = n_ij / n_bar
    mu_i ~ Normal(mu0, tau2),                sigma2_i ~ Inv-chi2(nu)
    mu0  ~ Normal(0, beta),                  tau2 ~ Inv-chi2(gamma)

Every full conditional is conjugate, so one sweep draws mu, sigma2, mu0 and
tau2 in turn from closed-form normal / inverse-gamma distributions.

The ``rng`` passed to the step functions only needs numpy's
``standard_normal(size)`` and ``standard_gamma(shape)`` methods. Normal draws
are ``mean + sd * z`` and inverse-gamma draws are ``scale / g``, so a stub
returning ``0`` and ``shape - 1`` lands every step on its conditional mean.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Collection, Iterable, Optional, Sequence, TextIO

import numpy as np

from armvalue.ledger import RunValue

log = logging.getLogger(__name__)

DRAWS_MAGIC = b"ARMDRAWS"
DRAWS_VERSION = 1
_HEADER = struct.Struct("<8sIIQ")


@dataclass(frozen=True)
class ScaledObservation:
    player_id: str
    season: int
    player_index: int
    season_index: int
    y: float
    n_star: float


@dataclass(frozen=True)
class HyperParams:
    """Prior settings. The defaults approximate nu -> 0, beta -> inf, gamma -> 0."""

    nu: float = 0.0
    beta: float = 1e12
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.nu < 0 or self.gamma < 0:
            raise ValueError("nu and gamma must be >= 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")


@dataclass(frozen=True)
class SamplerConfig:
    n_burnin: int = 2000
    n_draws: int = 20000
    thin: int = 1
    seed: int = 20020405

    def __post_init__(self) -> None:
        if self.n_burnin < 0 or self.n_draws < 1 or self.thin < 1:
            raise ValueError("need n_burnin >= 0, n_draws >= 1, thin >= 1")

    @property
    def n_keep(self) -> int:
        return self.n_draws // self.thin


def scale_observations(ledger: Sequence[RunValue]) -> list[ScaledObservation]:
    """Rescale season run values to the average opportunity count."""
    if not ledger:
        return []
    if any(e.n_opportunities <= 0 for e in ledger):
        raise ValueError("every player-season needs at least one opportunity")
    n_bar = sum(e.n_opportunities for e in ledger) / len(ledger)
    players = {p: i for i, p in enumerate(sorted({e.player_id for e in ledger}))}
    seasons = {s: i for i, s in enumerate(sorted({e.season for e in ledger}))}
    return [
        ScaledObservation(
            e.player_id,
            e.season,
            players[e.player_id],
            seasons[e.season],
            e.run_value * n_bar / e.n_opportunities,
            e.n_opportunities / n_bar,
        )
        for e in ledger
    ]


@dataclass
class ModelData:
    """Flat arrays of scaled observations with per-player sufficient sums."""

    player_ids: list[str]
    player: np.ndarray
    y: np.ndarray
    n_star: np.ndarray
    m: np.ndarray = field(init=False)
    sum_w: np.ndarray = field(init=False)
    sum_wy: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.player = np.asarray(self.player, dtype=np.intp)
        self.y = np.asarray(self.y, dtype=float)
        self.n_star = np.asarray(self.n_star, dtype=float)
        if np.any(self.n_star <= 0):
            raise ValueError("n_star must be positive")
        k = len(self.player_ids)
        self.m = np.bincount(self.player, minlength=k)
        if np.any(self.m == 0):
            raise ValueError("every player needs at least one observation")
        self.sum_w = np.bincount(self.player, weights=self.n_star, minlength=k)
        self.sum_wy = np.bincount(self.player, weights=self.n_star * self.y, minlength=k)

    @property
    def n_players(self) -> int:
        return len(self.player_ids)

    @classmethod
    def from_observations(cls, obs: Sequence[ScaledObservation]) -> "ModelData":
        ids: dict[int, str] = {}
        for o in obs:
            ids.setdefault(o.player_index, o.player_id)
        if sorted(ids) != list(range(len(ids))):
            raise ValueError("player indices must be contiguous from 0")
        return cls(
            [ids[i] for i in range(len(ids))],
            np.array([o.player_index for o in obs], dtype=np.intp),
            np.array([o.y for o in obs]),
            np.array([o.n_star for o in obs]),
        )

    @classmethod
    def from_ledger(cls, ledger: Sequence[RunValue]) -> "ModelData":
        return cls.from_observations(scale_observations(ledger))

    def weighted_means(self) -> np.ndarray:
        """Opportunity-weighted observed mean per player."""
        return self.sum_wy / self.sum_w

    def residual_ss(self, mu: np.ndarray) -> np.ndarray:
        r = self.y - mu[self.player]
        return np.bincount(self.player, weights=self.n_star * r * r, minlength=self.n_players)


@dataclass
class ModelState:
    mu: np.ndarray
    sigma2: np.ndarray
    mu0: float
    tau2: float

    def copy(self) -> "ModelState":
        return ModelState(self.mu.copy(), self.sigma2.copy(), float(self.mu0), float(self.tau2))


def shrinkage_estimate(ybar: float, m: float, sigma2: float, tau2: float, mu0: float) -> float:
    """Precision-weighted compromise between a group mean and the population mean."""
    data_prec = m / sigma2
    prior_prec = 1.0 / tau2
    return (data_prec * ybar + prior_prec * mu0) / (data_prec + prior_prec)


def _normal(rng, mean, var):
    return mean + np.sqrt(var) * rng.standard_normal(np.shape(mean))


def _inverse_gamma(rng, shape, scale):
    return scale / rng.standard_gamma(shape)


def mu_conditional(state: ModelState, data: ModelData) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of each mu_i given everything else."""
    prec = data.sum_w / state.sigma2 + 1.0 / state.tau2
    mean = (data.sum_wy / state.sigma2 + state.mu0 / state.tau2) / prec
    return mean, 1.0 / prec


def gibbs_step_mu(state: ModelState, data: ModelData, rng) -> np.ndarray:
    mean, var = mu_conditional(state, data)
    return np.asarray(_normal(rng, mean, var), dtype=float)


def sigma2_conditional(
    state: ModelState, data: ModelData, hyper: HyperParams
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-gamma (shape, scale) of each sigma2_i given everything else.

    The ``+ 1`` in the scale comes from the unit-scale inverse-chi-square prior.
    """
    shape = (data.m + hyper.nu) / 2.0
    scale = (data.residual_ss(state.mu) + 1.0) / 2.0
    return shape, scale


def gibbs_step_sigma2(state: ModelState, data: ModelData, hyper: HyperParams, rng) -> np.ndarray:
    shape, scale = sigma2_conditional(state, data, hyper)
    return np.asarray(_inverse_gamma(rng, shape, scale), dtype=float)


def mu0_conditional(state: ModelState, hyper: HyperParams) -> tuple[float, float]:
    n = len(state.mu)
    prec = n / state.tau2 + 1.0 / hyper.beta
    mean = (n / state.tau2) * float(np.mean(state.mu)) / prec
    return mean, 1.0 / prec


def gibbs_step_mu0(state: ModelState, hyper: HyperParams, rng) -> float:
    mean, var = mu0_conditional(state, hyper)
    return float(_normal(rng, mean, var))


def tau2_conditional(state: ModelState, hyper: HyperParams) -> tuple[float, float]:
    n = len(state.mu)
    d = state.mu - state.mu0
    return (n + hyper.gamma) / 2.0, (float(np.dot(d, d)) + 1.0) / 2.0


def gibbs_step_tau2(state: ModelState, hyper: HyperParams, rng) -> float:
    shape, scale = tau2_conditional(state, hyper)
    return float(_inverse_gamma(rng, shape, scale))


def gibbs_sweep(
    state: ModelState,
    data: ModelData,
    hyper: HyperParams,
    rng,
    fixed: Collection[str] = (),
) -> ModelState:
    """One sweep mu -> sigma2 -> mu0 -> tau2, updating ``state`` in place.

    Parameters named in ``fixed`` keep their current values.
    """
    if "mu" not in fixed:
        state.mu = gibbs_step_mu(state, data, rng)
    if "sigma2" not in fixed:
        state.sigma2 = gibbs_step_sigma2(state, data, hyper, rng)
    if "mu0" not in fixed:
        state.mu0 = gibbs_step_mu0(state, hyper, rng)
    if "tau2" not in fixed:
        state.tau2 = gibbs_step_tau2(state, hyper, rng)
    return state


def initial_state(data: ModelData) -> ModelState:
    """Warm start from the data: weighted player means and sample variances."""
    mu = data.weighted_means()
    sigma2 = np.ones(data.n_players)
    for i in range(data.n_players):
        if data.m[i] > 1:
            v = float(np.var(data.y[data.player == i], ddof=1))
            if v > 0:
                sigma2[i] = v
    tau2 = float(np.var(mu, ddof=1)) if data.n_players > 1 else 1.0
    if not tau2 > 0:
        tau2 = 1.0
    return ModelState(mu, sigma2, float(np.mean(mu)), tau2)


@dataclass
class PosteriorDraws:
    """Retained draws; ``mu`` and ``sigma2`` are (n_draws, n_players)."""

    player_ids: list[str]
    mu: np.ndarray
    sigma2: np.ndarray
    mu0: np.ndarray
    tau2: np.ndarray

    @property
    def n_draws(self) -> int:
        return self.mu.shape[0]

    def column(self, player_id: str) -> int:
        try:
            return self.player_ids.index(player_id)
        except ValueError:
            raise KeyError(f"player {player_id!r} not in draws") from None

    def matrix(self) -> np.ndarray:
        return np.hstack([self.mu, self.sigma2, self.mu0[:, None], self.tau2[:, None]])

    def equals(self, other: "PosteriorDraws") -> bool:
        return self.player_ids == other.player_ids and np.array_equal(
            self.matrix(), other.matrix()
        )


def run_gibbs(
    data: ModelData,
    hyper: HyperParams = HyperParams(),
    config: SamplerConfig = SamplerConfig(),
    init: Optional[ModelState] = None,
    fixed: Collection[str] = (),
    rng=None,
) -> PosteriorDraws:
    """Run one chain and keep every ``thin``-th draw after burn-in."""
    if data.n_players < 2 and "tau2" not in fixed:
        raise ValueError("need at least 2 players to estimate the between-player variance")
    if config.n_keep < 1000:
        log.warning("only %d retained draws; posterior intervals will be noisy", config.n_keep)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    state = (init or initial_state(data)).copy()
    k = config.n_keep
    p = data.n_players
    mu = np.empty((k, p))
    sigma2 = np.empty((k, p))
    mu0 = np.empty(k)
    tau2 = np.empty(k)

    for _ in range(config.n_burnin):
        gibbs_sweep(state, data, hyper, rng, fixed)
    kept = 0
    for t in range(config.n_draws):
        gibbs_sweep(state, data, hyper, rng, fixed)
        if (t + 1) % config.thin == 0 and kept < k:
            mu[kept] = state.mu
            sigma2[kept] = state.sigma2
            mu0[kept] = state.mu0
            tau2[kept] = state.tau2
            kept += 1
    return PosteriorDraws(list(data.player_ids), mu, sigma2, mu0, tau2)


def fit_ledger(
    ledger: Sequence[RunValue],
    hyper: HyperParams = HyperParams(),
    config: SamplerConfig = SamplerConfig(),
) -> PosteriorDraws:
    return run_gibbs(ModelData.from_ledger(ledger), hyper, config)


# -- persistence -------------------------------------------------------------
#
# Binary layout, all little-endian:
#   8 bytes  magic "ARMDRAWS"
#   uint32   format version (1)
#   uint32   number of players P
#   uint64   number of retained draws D
#   float64  D x (2P + 2) matrix, row-major; columns are
#            mu_0..mu_{P-1}, sigma2_0..sigma2_{P-1}, mu0, tau2
# The companion index CSV maps each column to its parameter and player.

INDEX_HEADER = ("parameter", "player_id", "column")


def write_draws(draws: PosteriorDraws, out: BinaryIO) -> None:
    p = len(draws.player_ids)
    out.write(_HEADER.pack(DRAWS_MAGIC, DRAWS_VERSION, p, draws.n_draws))
    out.write(np.ascontiguousarray(draws.matrix(), dtype="<f8").tobytes())


def write_index(draws: PosteriorDraws, out: TextIO) -> None:
    p = len(draws.player_ids)
    out.write(",".join(INDEX_HEADER) + "\n")
    for i, pid in enumerate(draws.player_ids):
        out.write(f"mu,{pid},{i}\n")
    for i, pid in enumerate(draws.player_ids):
        out.write(f"sigma2,{pid},{p + i}\n")
    out.write(f"mu0,,{2 * p}\n")
    out.write(f"tau2,,{2 * p + 1}\n")


def read_index(source: TextIO | Iterable[str]) -> list[str]:
    """Player ids in mu-column order."""
    lines = [ln.strip() for ln in source if ln.strip() and not ln.startswith("#")]
    if not lines or tuple(lines[0].split(",")) != INDEX_HEADER:
        raise ValueError("bad draws index header")
    mu_cols: dict[int, str] = {}
    for ln in lines[1:]:
        param, pid, col = ln.split(",")
        if param == "mu":
            mu_cols[int(col)] = pid
    if sorted(mu_cols) != list(range(len(mu_cols))):
        raise ValueError("draws index mu columns are not contiguous")
    return [mu_cols[i] for i in range(len(mu_cols))]


def read_draws(source: BinaryIO, player_ids: Sequence[str]) -> PosteriorDraws:
    head = source.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise ValueError("truncated draws file")
    magic, version, p, d = _HEADER.unpack(head)
    if magic != DRAWS_MAGIC or version != DRAWS_VERSION:
        raise ValueError("not an armvalue draws file")
    if p != len(player_ids):
        raise ValueError(f"draws hold {p} players but index lists {len(player_ids)}")
    body = source.read()
    width = 2 * p + 2
    if len(body) != 8 * d * width:
        raise ValueError("draws body has the wrong length")
    mat = np.frombuffer(body, dtype="<f8").reshape(d, width).astype(float)
    return PosteriorDraws(
        list(player_ids), mat[:, :p].copy(), mat[:, p : 2 * p].copy(), mat[:, 2 * p].copy(), mat[:, 2 * p + 1].copy()
    )


def write_trace(draws: PosteriorDraws, out: TextIO) -> None:
    """Per-draw hyper-parameter trace for external convergence checks."""
    out.write("draw,mu0,tau2\n")
    for t in range(draws.n_draws):
        out.write(f"{t},{draws.mu0[t]!r},{draws.tau2[t]!r}\n")

