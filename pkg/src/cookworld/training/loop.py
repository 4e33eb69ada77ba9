"""End-to-end training: scheduled level sampling, hierarchical episode
orchestration, cadenced Double DQN updates, cache gating, validation with
patience rollback, and variant/ablation wiring."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..engine.spec import GameSpec
from ..engine.state import admissible_actions, reset, step
from ..engine.vocab import Vocabulary, default_vocabulary
from ..goals import Goal, GoalSet, generate_goal_set, goal_reward, goal_terminated
from ..kg import KGObservation
from ..neural.nets import PolicyNet, save_checkpoint, load_checkpoint, sync_target
from ..neural.optim import AdamState
from ..rl.counts import VisitCounter, accumulate_meta_reward, bebold_reward, compose_sub_reward
from ..rl.dqn import td_update
from ..rl.replay import PrioritizedBuffer, gated_flush
from ..rl.transitions import MetaTransition, SubTransition
from .agents import FlatAgent, HierarchicalAgent, normalized_rollout
from .config import TrainConfig
from .metrics import MetricsWriter
from .scheduler import LevelScheduler


@dataclass
class GoalSpan:
    goal: str
    start: int
    end: int
    r_meta: float


@dataclass
class EpisodeRecord:
    episode: int
    level: str
    game_index: int
    steps: int
    score: int
    max_score: int
    done_by_limit: bool
    lost: bool
    env_rewards: list[float] = field(default_factory=list)
    goal_spans: list[GoalSpan] = field(default_factory=list)
    meta_cached: int = 0
    sub_cached: int = 0
    meta_accepted: bool = False
    sub_accepted: bool = False

    @property
    def normalized_score(self) -> float:
        return self.score / self.max_score


def _child_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence(entropy=(seed, stream)).generate_state(1)[0])


class Trainer:
    def __init__(
        self,
        cfg: TrainConfig,
        train_games: dict[str, list[GameSpec]],
        val_games: Optional[dict[str, list[GameSpec]]] = None,
        out_dir: Optional[str | Path] = None,
        vocab: Optional[Vocabulary] = None,
        resume: bool = False,
    ):
        cfg.validate()
        self.cfg = cfg
        self.train_games = train_games
        self.val_games = val_games or {}
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.vocab = vocab or default_vocabulary()

        missing = [lvl for lvl in cfg.levels if not train_games.get(lvl)]
        if missing:
            raise ValueError(f"no training games for levels: {missing}")

        self.uses_goals = cfg.variant != "GATA"
        self.has_meta_net = cfg.variant in ("H-KGA", "H-KGA-HalfJoint", "H-KGA-Ind")
        self.phase2_start = cfg.episodes // 2 + 1  # first episode of the second phase

        seed = cfg.seed
        self.rng_level = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0)))
        self.rng_game = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 1)))
        self.rng_meta = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 2)))
        self.rng_sub = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 3)))
        self.rng_buf_meta = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 4)))
        self.rng_buf_sub = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 5)))

        net_kwargs = dict(
            hidden_dim=cfg.hidden_dim,
            rgcn_layers=cfg.rgcn_layers,
            ff_dim=cfg.ff_dim,
            scorer_hidden=cfg.scorer_hidden,
        )
        sub_parts = 2 if self.uses_goals else 1
        self.sub_online = PolicyNet(self.vocab, state_parts=sub_parts, seed=_child_seed(seed, 11), **net_kwargs)
        self.sub_target = PolicyNet(self.vocab, state_parts=sub_parts, seed=_child_seed(seed, 11), **net_kwargs)
        sync_target(self.sub_online, self.sub_target)
        self.sub_adam = AdamState(self.sub_online)
        if self.has_meta_net:
            self.meta_online = PolicyNet(self.vocab, state_parts=1, seed=_child_seed(seed, 10), **net_kwargs)
            self.meta_target = PolicyNet(self.vocab, state_parts=1, seed=_child_seed(seed, 10), **net_kwargs)
            sync_target(self.meta_online, self.meta_target)
            self.meta_adam = AdamState(self.meta_online)
        else:
            self.meta_online = None
            self.meta_target = None
            self.meta_adam = None

        self.meta_buffer = PrioritizedBuffer(
            cfg.buffer_capacity_meta, cfg.per_alpha, cfg.per_beta_start, cfg.per_epsilon
        )
        self.sub_buffer = PrioritizedBuffer(
            cfg.buffer_capacity_sub, cfg.per_alpha, cfg.per_beta_start, cfg.per_epsilon
        )
        self.counter = VisitCounter()
        self.scheduler = LevelScheduler(cfg.levels, beta=cfg.beta_schedule, window=cfg.perf_window)

        self.episode = 0
        self.k = 0  # global interaction step counter
        self.updates_meta = 0
        self.updates_sub = 0
        self.best_val = 0.0
        self.patience_count = 0
        self.last_loss_meta: Optional[float] = None
        self.last_loss_sub: Optional[float] = None
        self._snap_meta: Optional[dict[str, np.ndarray]] = None
        self._snap_sub: Optional[dict[str, np.ndarray]] = None

        self.metrics: Optional[MetricsWriter] = None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            if resume:
                self._load_run_state()
            self.metrics = MetricsWriter(
                self.out_dir / "metrics.csv", cfg.levels, append=resume
            )

    # -- exploration schedule -------------------------------------------------

    def epsilon(self, episode: int) -> float:
        cfg = self.cfg
        anneal = max(1, int(cfg.episodes * cfg.eps_anneal_fraction))
        frac = min(1.0, max(0.0, (episode - 1) / anneal))
        return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac

    # -- variant phase wiring --------------------------------------------------

    def _random_goal_phase(self, episode: int) -> bool:
        if self.cfg.variant == "GC-GATA":
            return True
        if self.cfg.variant in ("H-KGA-HalfJoint", "H-KGA-Ind"):
            return episode < self.phase2_start
        return False

    def _trains_meta(self, episode: int) -> bool:
        if not self.has_meta_net:
            return False
        if self.cfg.variant == "H-KGA":
            return True
        return episode >= self.phase2_start

    def _trains_sub(self, episode: int) -> bool:
        if self.cfg.variant == "H-KGA-Ind":
            return episode < self.phase2_start
        return True

    # -- selection --------------------------------------------------------------

    def _select_goal(self, obs: KGObservation, goal_set: GoalSet, episode: int, eps: float) -> Goal:
        goals = list(goal_set)
        if self._random_goal_phase(episode) or self.meta_online is None:
            return goals[int(self.rng_meta.integers(0, len(goals)))]
        if float(self.rng_meta.random()) < eps:
            return goals[int(self.rng_meta.integers(0, len(goals)))]
        q = self.meta_online.q_values(obs, None, [g.text for g in goals])
        return goals[int(np.argmax(q))]

    def _select_action(
        self, obs: KGObservation, goal: Optional[Goal], admissible: list[str], eps: float
    ) -> str:
        if float(self.rng_sub.random()) < eps:
            return admissible[int(self.rng_sub.integers(0, len(admissible)))]
        cond = goal.text if goal is not None else None
        q = self.sub_online.q_values(obs, cond, admissible)
        return admissible[int(np.argmax(q))]

    # -- updates -----------------------------------------------------------------

    def _per_beta(self, episode: int) -> float:
        cfg = self.cfg
        frac = min(1.0, episode / max(1, cfg.episodes))
        return cfg.per_beta_start + (cfg.per_beta_end - cfg.per_beta_start) * frac

    def _maybe_update(self, episode: int) -> None:
        cfg = self.cfg
        if episode <= cfg.warmup_episodes:
            return
        if self.k % cfg.update_freq_meta == 0 and self._trains_meta(episode):
            if len(self.meta_buffer) >= cfg.batch_size:
                self.meta_buffer.beta = self._per_beta(episode)
                self.last_loss_meta = td_update(
                    self.meta_buffer,
                    self.meta_online,
                    self.meta_target,
                    cfg.batch_size,
                    cfg.gamma,
                    self.rng_buf_meta,
                    self.meta_adam,
                    lr=cfg.lr,
                    clip_norm=cfg.grad_clip,
                    weight_decay=cfg.weight_decay,
                )
                self.updates_meta += 1
                if self.updates_meta % cfg.target_sync_every == 0:
                    sync_target(self.meta_online, self.meta_target)
        if self.k % cfg.update_freq_sub == 0 and self._trains_sub(episode):
            if len(self.sub_buffer) >= cfg.batch_size:
                self.sub_buffer.beta = self._per_beta(episode)
                self.last_loss_sub = td_update(
                    self.sub_buffer,
                    self.sub_online,
                    self.sub_target,
                    cfg.batch_size,
                    cfg.gamma,
                    self.rng_buf_sub,
                    self.sub_adam,
                    lr=cfg.lr,
                    clip_norm=cfg.grad_clip,
                    weight_decay=cfg.weight_decay,
                )
                self.updates_sub += 1
                if self.updates_sub % cfg.target_sync_every == 0:
                    sync_target(self.sub_online, self.sub_target)

    # -- episodes -------------------------------------------------------------------

    def run_episode(self) -> EpisodeRecord:
        cfg = self.cfg
        self.episode += 1
        episode = self.episode
        eps = self.epsilon(episode)

        if cfg.scheduled_sampling and len(cfg.levels) > 1:
            level = self.scheduler.sample(self.rng_level)
        else:
            level = cfg.levels[int(self.rng_level.integers(0, len(cfg.levels)))]
        games = self.train_games[level]
        game_index = int(self.rng_game.integers(0, len(games)))
        spec = games[game_index]

        state, obs = reset(spec, step_limit=cfg.step_limit_train)
        self.counter.reset_episode()
        self.counter.record_visit(obs)
        cache_meta: list[MetaTransition] = []
        cache_sub: list[SubTransition] = []
        record = EpisodeRecord(
            episode=episode,
            level=level,
            game_index=game_index,
            steps=0,
            score=0,
            max_score=spec.max_score,
            done_by_limit=False,
            lost=False,
        )

        t = 0
        done = False
        while not done and t < cfg.step_limit_train:
            goal: Optional[Goal] = None
            if self.uses_goals:
                goal = self._select_goal(obs, generate_goal_set(obs), episode, eps)
            span_start = t
            r_meta_parts: list[float] = []
            goal_obs = obs
            while True:
                admissible = admissible_actions(state)
                action = self._select_action(obs, goal, admissible, eps)
                state, next_obs, r_env, done = step(state, action)
                self.counter.record_visit(next_obs)
                if goal is not None:
                    r_goal = goal_reward(next_obs, goal, cfg.r_min, cfg.r_max)
                else:
                    r_goal = float(r_env)
                r_count = 0.0
                if cfg.bebold:
                    r_count = bebold_reward(self.counter, obs, next_obs, cfg.bebold_count_order)
                r_sub = compose_sub_reward(r_goal, r_count, cfg.lambda_count)
                t += 1
                if goal is not None:
                    # the goal span is the sub-policy's episode: terminal when
                    # the goal is accomplished, the game ends, or time is up
                    span_over = goal_terminated(next_obs, goal, done, t >= cfg.step_limit_train)
                else:
                    span_over = done or t >= cfg.step_limit_train
                next_admissible = () if done else tuple(admissible_actions(state))
                cache_sub.append(
                    SubTransition(
                        obs=obs,
                        goal=goal,
                        action=action,
                        r_sub=r_sub,
                        r_goal=r_goal,
                        next_obs=next_obs,
                        next_admissible=next_admissible,
                        done=span_over,
                        level=level,
                    )
                )
                r_meta_parts.append(float(r_env))
                record.env_rewards.append(float(r_env))
                self.k += 1
                self._maybe_update(episode)
                obs = next_obs
                if span_over:
                    break
            if self.uses_goals and goal is not None:
                r_meta = accumulate_meta_reward(r_meta_parts)
                next_goal_set = GoalSet([]) if done else generate_goal_set(obs)
                cache_meta.append(
                    MetaTransition(
                        obs=goal_obs,
                        goal=goal,
                        r_meta=r_meta,
                        next_obs=obs,
                        next_goal_set=next_goal_set,
                        done=done,
                        level=level,
                    )
                )
                record.goal_spans.append(GoalSpan(goal.text, span_start, t, r_meta))

        record.steps = state.steps
        record.score = state.score
        record.lost = state.lost
        record.done_by_limit = state.done and not state.lost and "meal" not in state.consumed
        self.scheduler.update(level, record.normalized_score)

        record.meta_cached = len(cache_meta)
        record.sub_cached = len(cache_sub)
        if self.uses_goals:
            record.meta_accepted = gated_flush(
                self.meta_buffer, cache_meta, level, cfg.tau, cfg.level_aware_buffer
            )
        record.sub_accepted = gated_flush(
            self.sub_buffer, cache_sub, level, cfg.tau, cfg.level_aware_buffer
        )

        if self.metrics is not None:
            probs = dict(zip(self.scheduler.levels, self.scheduler.probabilities()))
            self.metrics.row(
                episode,
                "train",
                level,
                record.normalized_score,
                self.last_loss_meta,
                self.last_loss_sub,
                eps,
                probs,
            )
        return record

    # -- validation ------------------------------------------------------------------

    def _eval_agent(self, episode: int, stream: int):
        if not self.uses_goals:
            return FlatAgent(self.sub_online)
        if self._random_goal_phase(episode) or self.meta_online is None:
            rng = np.random.default_rng(np.random.SeedSequence(entropy=(self.cfg.seed, 6, stream, episode)))
            return HierarchicalAgent(self.sub_online, None, goal_rng=rng)
        return HierarchicalAgent(self.sub_online, self.meta_online)

    def validate(self) -> float:
        scores = []
        per_level: dict[str, float] = {}
        for level in sorted(self.val_games):
            level_scores = []
            for i, spec in enumerate(self.val_games[level]):
                agent = self._eval_agent(self.episode, stream=i)
                level_scores.append(
                    normalized_rollout(agent, spec, self.cfg.step_limit_eval)
                )
            per_level[level] = float(np.mean(level_scores))
            scores.extend(level_scores)
        v_val = float(np.mean(scores)) if scores else 0.0

        if self.metrics is not None:
            for level, value in per_level.items():
                self.metrics.row(self.episode, "val", level, value, None, None, 0.0, None)
            self.metrics.row(self.episode, "val", "all", v_val, None, None, 0.0, None)

        if v_val >= self.best_val:
            self.best_val = v_val
            self.patience_count = 0
            self._snap_sub = {k: p.data.copy() for k, p in self.sub_online.params.items()}
            if self.meta_online is not None:
                self._snap_meta = {k: p.data.copy() for k, p in self.meta_online.params.items()}
            if self.out_dir is not None:
                self._save_policies(self.out_dir / "best")
        else:
            self.patience_count += 1
            if self.patience_count > self.cfg.patience:
                self._restore_snapshots()
                self.patience_count = 0
        return v_val

    def _restore_snapshots(self) -> None:
        if self._snap_sub is not None:
            for name, values in self._snap_sub.items():
                np.copyto(self.sub_online.params[name].data, values)
            self.sub_online.bump_version()
            sync_target(self.sub_online, self.sub_target)
        if self._snap_meta is not None and self.meta_online is not None:
            for name, values in self._snap_meta.items():
                np.copyto(self.meta_online.params[name].data, values)
            self.meta_online.bump_version()
            sync_target(self.meta_online, self.meta_target)

    def restore_best(self) -> None:
        """Load the best-validation policies (what best/ holds) back into the
        online nets, e.g. before a final test evaluation."""
        self._restore_snapshots()

    # -- full run ------------------------------------------------------------------------

    def run(self, progress: bool = False) -> dict:
        cfg = self.cfg
        while self.episode < cfg.episodes:
            self.run_episode()
            if self.val_games and self.episode % cfg.val_freq == 0:
                v = self.validate()
                if progress:
                    print(
                        f"episode {self.episode}: val {v:.3f} (best {self.best_val:.3f}, "
                        f"patience {self.patience_count})",
                        flush=True,
                    )
            if self.out_dir is not None and self.episode % max(1, cfg.val_freq) == 0:
                self.save_latest()
        if self.out_dir is not None:
            self.save_latest()
        return {
            "episodes": self.episode,
            "steps": self.k,
            "updates_meta": self.updates_meta,
            "updates_sub": self.updates_sub,
            "best_val": self.best_val,
        }

    # -- persistence ------------------------------------------------------------------------

    def _save_policies(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        save_checkpoint(self.sub_online, directory / "sub.npz", self.sub_adam.as_dict())
        if self.meta_online is not None:
            save_checkpoint(self.meta_online, directory / "meta.npz", self.meta_adam.as_dict())
        (directory / "run_state.json").write_text(json.dumps(self._run_state_dict(), indent=2) + "\n")

    def save_latest(self) -> None:
        directory = self.out_dir / "latest"
        self._save_policies(directory)

    def _run_state_dict(self) -> dict:
        run_state = {
            "episode": self.episode,
            "k": self.k,
            "updates_meta": self.updates_meta,
            "updates_sub": self.updates_sub,
            "best_val": self.best_val,
            "patience_count": self.patience_count,
            "scheduler_history": {
                level: list(self.scheduler._history[level]) for level in self.scheduler.levels
            },
            "rng": {
                "level": self.rng_level.bit_generator.state,
                "game": self.rng_game.bit_generator.state,
                "meta": self.rng_meta.bit_generator.state,
                "sub": self.rng_sub.bit_generator.state,
                "buf_meta": self.rng_buf_meta.bit_generator.state,
                "buf_sub": self.rng_buf_sub.bit_generator.state,
            },
        }
        return run_state

    def _load_run_state(self) -> None:
        directory = self.out_dir / "latest"
        state_path = directory / "run_state.json"
        if not state_path.exists():
            return
        run_state = json.loads(state_path.read_text())
        self.episode = run_state["episode"]
        self.k = run_state["k"]
        self.updates_meta = run_state["updates_meta"]
        self.updates_sub = run_state["updates_sub"]
        self.best_val = run_state["best_val"]
        self.patience_count = run_state["patience_count"]
        for level, history in run_state["scheduler_history"].items():
            for value in history:
                self.scheduler.update(level, value)
        rng_states = run_state["rng"]
        self.rng_level.bit_generator.state = rng_states["level"]
        self.rng_game.bit_generator.state = rng_states["game"]
        self.rng_meta.bit_generator.state = rng_states["meta"]
        self.rng_sub.bit_generator.state = rng_states["sub"]
        self.rng_buf_meta.bit_generator.state = rng_states["buf_meta"]
        self.rng_buf_sub.bit_generator.state = rng_states["buf_sub"]

        sub_net, sub_adam = load_checkpoint(directory / "sub.npz", self.vocab)
        for name, p in self.sub_online.params.items():
            np.copyto(p.data, sub_net.params[name].data)
        self.sub_online.bump_version()
        sync_target(self.sub_online, self.sub_target)
        if sub_adam is not None:
            self.sub_adam = AdamState.from_dict(self.sub_online, sub_adam)
        if self.meta_online is not None and (directory / "meta.npz").exists():
            meta_net, meta_adam = load_checkpoint(directory / "meta.npz", self.vocab)
            for name, p in self.meta_online.params.items():
                np.copyto(p.data, meta_net.params[name].data)
            self.meta_online.bump_version()
            sync_target(self.meta_online, self.meta_target)
            if meta_adam is not None:
                self.meta_adam = AdamState.from_dict(self.meta_online, meta_adam)


# -- evaluation ---------------------------------------------------------------------

def evaluate_agent(agent_factory, games: dict[str, list[GameSpec]], step_limit: int = 100) -> dict:
    """Greedy rollouts per level; returns per-level means plus seen/unseen/all
    aggregates. agent_factory(level, index) builds a fresh agent per game."""
    if not games or all(not v for v in games.values()):
        raise ValueError("empty evaluation game set")
    per_level: dict[str, float] = {}
    for level in sorted(games):
        scores = [
            normalized_rollout(agent_factory(level, i), spec, step_limit)
            for i, spec in enumerate(games[level])
        ]
        per_level[level] = float(np.mean(scores))
    seen = [v for lvl, v in per_level.items() if not lvl.startswith("US")]
    unseen = [v for lvl, v in per_level.items() if lvl.startswith("US")]
    result = {"per_level": per_level}
    result["avg_seen"] = float(np.mean(seen)) if seen else None
    result["avg_unseen"] = float(np.mean(unseen)) if unseen else None
    result["avg_all"] = float(np.mean(list(per_level.values())))
    return result
