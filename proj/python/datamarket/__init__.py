"""Python front end to the marketplace simulator core."""

from ._core import (
    InvariantViolation,
    ScenarioError,
    apply_reputation,
    match_pairs,
    negotiate,
    run_scenario,
    run_scenario_file,
    validate_scenario,
    vote_broker_admission,
)

__all__ = [
    "InvariantViolation",
    "ScenarioError",
    "apply_reputation",
    "match_pairs",
    "negotiate",
    "run_scenario",
    "run_scenario_file",
    "validate_scenario",
    "vote_broker_admission",
]
