"""Observation visitation counting and reward composition.

The novelty bonus is the regulated difference of inverse accumulated counts,
gated on first-visit-this-episode. The default count order follows the
reference formula as printed; the swapped order is available behind a flag.
"""

from __future__ import annotations

import math

from ..kg import KGObservation, canonical_hash


class UnrecordedObservationError(KeyError):
    """bebold_reward needs both observations counted first."""


class VisitCounter:
    def __init__(self):
        self.accumulated: dict[int, int] = {}
        self.episodic: dict[int, int] = {}

    def reset_episode(self) -> None:
        self.episodic = {}

    def record_visit(self, obs: KGObservation) -> None:
        key = canonical_hash(obs)
        self.accumulated[key] = self.accumulated.get(key, 0) + 1
        self.episodic[key] = self.episodic.get(key, 0) + 1

    def acc_count(self, obs: KGObservation) -> int:
        return self.accumulated.get(canonical_hash(obs), 0)

    def epi_count(self, obs: KGObservation) -> int:
        return self.episodic.get(canonical_hash(obs), 0)


def bebold_reward(
    counter: VisitCounter,
    obs: KGObservation,
    next_obs: KGObservation,
    count_order: str = "printed",
) -> float:
    n_acc = counter.acc_count(obs)
    n_acc_next = counter.acc_count(next_obs)
    if n_acc < 1 or n_acc_next < 1:
        raise UnrecordedObservationError("record both observations before computing the bonus")
    if counter.epi_count(next_obs) != 1:
        return 0.0
    if count_order == "printed":
        difference = 1.0 / n_acc - 1.0 / n_acc_next
    elif count_order == "swapped":
        difference = 1.0 / n_acc_next - 1.0 / n_acc
    else:
        raise ValueError(f"count_order must be 'printed' or 'swapped', got {count_order!r}")
    return max(difference, 0.0)


def compose_sub_reward(r_goal: float, r_count: float, coefficient: float) -> float:
    if coefficient < 0:
        raise ValueError("coefficient must be non-negative")
    return r_goal + coefficient * r_count


def accumulate_meta_reward(env_rewards: list[float]) -> float:
    return math.fsum(env_rewards)
