"""Double DQN targets and prioritized TD updates."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..kg import canonical_hash
from ..neural import autodiff as ad
from ..neural.nets import EmptyCandidatesError, PolicyNet
from ..neural.optim import AdamState, apply_update
from .replay import PrioritizedBuffer


def double_dqn_target(
    reward: float,
    done: bool,
    q_next_online: Optional[Sequence[float]],
    q_next_target: Optional[Sequence[float]],
    gamma: float,
) -> float:
    """y = r for terminal transitions, else r + gamma * Q_target(s', a*) with
    a* chosen by the online net (ties to the lowest index)."""
    if done:
        return float(reward)
    if q_next_online is None or len(q_next_online) == 0:
        raise EmptyCandidatesError("non-terminal transition needs next candidates")
    best = int(np.argmax(q_next_online))
    return float(reward) + gamma * float(q_next_target[best])


def td_update(
    buffer: PrioritizedBuffer,
    online: PolicyNet,
    target: PolicyNet,
    batch_size: int,
    gamma: float,
    rng: np.random.Generator,
    adam: AdamState,
    lr: float = 1e-3,
    clip_norm: float = 5.0,
    weight_decay: float = 0.0,
) -> float:
    """Sample, regress Q(s, a) onto the Double DQN target with importance
    weights, refresh sampled priorities, and apply one Adam step."""
    batch, indices, weights = buffer.sample(batch_size, rng)

    targets = np.empty(len(batch))
    for i, tr in enumerate(batch):
        if tr.done:
            targets[i] = tr.td_reward
        else:
            candidates = list(tr.next_candidates)
            q_on = online.q_values(tr.next_obs, tr.cond_text, candidates)
            q_tg = target.q_values(tr.next_obs, tr.cond_text, candidates)
            targets[i] = double_dqn_target(tr.td_reward, False, q_on, q_tg, gamma)

    online.zero_grad()
    # identical observations and texts within the batch share one tape node;
    # gradients accumulate through the shared subgraphs
    graph_memo: dict = {}
    text_memo: dict = {}

    def graph_node(obs):
        key = canonical_hash(obs)
        node = graph_memo.get(key)
        if node is None:
            node = graph_memo[key] = online.graph_tensor(obs)
        return node

    def text_node(text):
        node = text_memo.get(text)
        if node is None:
            node = text_memo[text] = online.text_tensor(text)
        return node

    def q_node(tr):
        state = graph_node(tr.obs)
        if online.state_parts == 2:
            state = ad.concat_cols([state, text_node(tr.cond_text)])
        return online.score_tensor(state, text_node(tr.chosen_text))

    q_rows = ad.concat_rows([q_node(tr) for tr in batch])
    errors = ad.sub(q_rows, ad.constant(targets[:, None]))
    weighted = ad.mul(ad.mul(errors, errors), ad.constant(weights[:, None]))
    loss = ad.scale(ad.sum_all(weighted), 1.0 / len(batch))
    loss_value = loss.item()
    loss.backward()
    apply_update(online, adam, lr=lr, clip_norm=clip_norm, weight_decay=weight_decay)

    td_errors = np.abs(q_rows.data[:, 0] - targets)
    buffer.update_priorities(indices, td_errors)
    return loss_value
