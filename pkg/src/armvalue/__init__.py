"""Run-value evaluation of catcher and outfielder throwing ability.

Opportunity-grain event files are tabulated against league baselines,
converted to runs through an expected-runs table, and pooled across seasons
with a hierarchical normal model fit by Gibbs sampling.
"""

from armvalue.events import (
    BaseConfig,
    CatcherOpportunity,
    CatcherOutcome,
    GameState,
    OutfieldOpportunity,
    OutfieldOutcome,
    StealCategory,
    StealSituation,
)
from armvalue.ledger import RunValue

__version__ = "0.1.0"

__all__ = [
    "BaseConfig",
    "CatcherOpportunity",
    "CatcherOutcome",
    "GameState",
    "OutfieldOpportunity",
    "OutfieldOutcome",
    "RunValue",
    "StealCategory",
    "StealSituation",
]
