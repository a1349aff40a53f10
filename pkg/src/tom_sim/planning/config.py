"""
Planner settings.
"""

from dataclasses import dataclass
from typing import List, Optional

from dataclasses_json import dataclass_json

from ..utils.errors import ConfigError, InvalidHorizonError

OTHER_LOOKAHEAD_MODES = ('full', 'greedy')


def _threshold_violations(name: str, value: float) -> List[str]:
    if not 0.0 <= value < 1.0:
        return [f"{name}={value!r} must lie in [0, 1)"]
    return []


@dataclass_json
@dataclass
class PlannerConfig:
    """Configuration of the sophisticated-inference tree search."""

    # Depth; None plans to the model's own horizon
    horizon: Optional[int] = None

    # Pruning
    policy_prune_threshold: float = 1.0 / 16.0
    observation_prune_threshold: float = 1.0 / 64.0

    # Action posterior
    temperature: float = 1.0

    def violations(self) -> List[str]:
        problems: List[str] = []
        if self.horizon is not None and (isinstance(self.horizon, bool)
                                         or not isinstance(self.horizon, int)
                                         or self.horizon < 1):
            problems.append(f"horizon={self.horizon!r} must be an integer >= 1")
        problems += _threshold_violations('policy_prune_threshold', self.policy_prune_threshold)
        problems += _threshold_violations('observation_prune_threshold',
                                          self.observation_prune_threshold)
        if not self.temperature > 0:
            problems.append(f"temperature={self.temperature!r} must be positive")
        return problems

    def validate(self) -> "PlannerConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(type(self).__name__, problems)
        return self

    def resolve_horizon(self, model_horizon: int) -> int:
        """Horizon actually planned to; raises InvalidHorizonError below one."""
        horizon = model_horizon if self.horizon is None else self.horizon
        if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
            raise InvalidHorizonError(horizon)
        return horizon

    @classmethod
    def unpruned(cls, horizon: Optional[int] = None,
                 temperature: float = 1.0) -> "PlannerConfig":
        return cls(horizon=horizon, policy_prune_threshold=0.0,
                   observation_prune_threshold=0.0, temperature=temperature)


@dataclass_json
@dataclass
class ToMPlannerConfig(PlannerConfig):
    """Joint planner configuration; the other agent's branches prune separately."""

    other_policy_prune_threshold: float = 1.0 / 16.0
    other_observation_prune_threshold: float = 1.0 / 64.0
    # 'full' gives the other the remaining horizon, 'greedy' a single step
    other_lookahead: str = 'full'

    def violations(self) -> List[str]:
        problems = super().violations()
        problems += _threshold_violations('other_policy_prune_threshold',
                                          self.other_policy_prune_threshold)
        problems += _threshold_violations('other_observation_prune_threshold',
                                          self.other_observation_prune_threshold)
        if self.other_lookahead not in OTHER_LOOKAHEAD_MODES:
            problems.append(f"other_lookahead={self.other_lookahead!r} must be one of "
                            f"{OTHER_LOOKAHEAD_MODES}")
        return problems

    def for_other(self) -> PlannerConfig:
        """Settings the other agent is simulated with; depth is set per call."""
        return PlannerConfig(
            policy_prune_threshold=self.other_policy_prune_threshold,
            observation_prune_threshold=self.other_observation_prune_threshold,
            temperature=self.temperature,
        )

    @classmethod
    def unpruned(cls, horizon: Optional[int] = None,
                 temperature: float = 1.0) -> "ToMPlannerConfig":
        return cls(horizon=horizon, policy_prune_threshold=0.0,
                   observation_prune_threshold=0.0, temperature=temperature,
                   other_policy_prune_threshold=0.0, other_observation_prune_threshold=0.0)
