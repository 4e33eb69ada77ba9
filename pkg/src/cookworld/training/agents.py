"""Greedy rollout agents used for validation, testing, and oracle checks."""

from __future__ import annotations

from typing import Optional, Protocol

import numpy as np

from ..engine.spec import GameSpec
from ..engine.state import admissible_actions, reset, step
from ..engine.walkthrough import walkthrough
from ..goals import Goal, generate_goal_set, goal_terminated
from ..kg import KGObservation
from ..neural.nets import PolicyNet


class Agent(Protocol):
    def start_episode(self, spec: GameSpec, obs: KGObservation) -> None: ...

    def act(self, obs: KGObservation, admissible: list[str]) -> str: ...


class FlatAgent:
    """Greedy action selection from the observation alone."""

    def __init__(self, net: PolicyNet):
        self.net = net

    def start_episode(self, spec: GameSpec, obs: KGObservation) -> None:
        pass

    def act(self, obs: KGObservation, admissible: list[str]) -> str:
        q = self.net.q_values(obs, None, admissible)
        return admissible[int(np.argmax(q))]


class HierarchicalAgent:
    """Greedy goal selection by the meta net, greedy goal-conditioned actions
    by the sub net. The goal persists until accomplished or the episode ends.
    A None meta net (or a provided rng) selects goals uniformly at random."""

    def __init__(self, sub_net: PolicyNet, meta_net: Optional[PolicyNet] = None,
                 goal_rng: Optional[np.random.Generator] = None):
        self.sub_net = sub_net
        self.meta_net = meta_net
        self.goal_rng = goal_rng
        self.goal: Optional[Goal] = None

    def start_episode(self, spec: GameSpec, obs: KGObservation) -> None:
        self.goal = None

    def _select_goal(self, obs: KGObservation) -> Goal:
        goal_set = generate_goal_set(obs)
        goals = list(goal_set)
        if self.meta_net is not None:
            q = self.meta_net.q_values(obs, None, [g.text for g in goals])
            return goals[int(np.argmax(q))]
        if self.goal_rng is not None:
            return goals[int(self.goal_rng.integers(0, len(goals)))]
        return goals[0]

    def observe(self, next_obs: KGObservation, done: bool) -> None:
        if self.goal is not None and goal_terminated(next_obs, self.goal, done, False):
            self.goal = None

    def act(self, obs: KGObservation, admissible: list[str]) -> str:
        if self.goal is None:
            self.goal = self._select_goal(obs)
        q = self.sub_net.q_values(obs, self.goal.text, admissible)
        return admissible[int(np.argmax(q))]


class WalkthroughAgent:
    """Replays the oracle solution for each game."""

    def __init__(self):
        self._actions: list[str] = []
        self._cursor = 0

    def start_episode(self, spec: GameSpec, obs: KGObservation) -> None:
        self._actions = walkthrough(spec, step_limit=10_000)
        self._cursor = 0

    def act(self, obs: KGObservation, admissible: list[str]) -> str:
        action = self._actions[self._cursor]
        self._cursor += 1
        return action


def rollout(agent: Agent, spec: GameSpec, step_limit: int) -> tuple[int, int]:
    """Greedy episode; returns (score, steps)."""
    state, obs = reset(spec, step_limit=step_limit)
    agent.start_episode(spec, obs)
    done = False
    while not done:
        action = agent.act(obs, admissible_actions(state))
        state, obs, _, done = step(state, action)
        observe = getattr(agent, "observe", None)
        if observe is not None:
            observe(obs, done)
    return state.score, state.steps


def normalized_rollout(agent: Agent, spec: GameSpec, step_limit: int) -> float:
    score, _ = rollout(agent, spec, step_limit)
    return score / spec.max_score
