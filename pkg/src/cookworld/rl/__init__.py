from .counts import VisitCounter, accumulate_meta_reward, bebold_reward, compose_sub_reward
from .dqn import double_dqn_target, td_update
from .replay import PrioritizedBuffer, SumTree, UnderfullBufferError, gated_flush
from .transitions import MetaTransition, SubTransition

__all__ = [
    "VisitCounter",
    "accumulate_meta_reward",
    "bebold_reward",
    "compose_sub_reward",
    "double_dqn_target",
    "td_update",
    "PrioritizedBuffer",
    "SumTree",
    "UnderfullBufferError",
    "gated_flush",
    "MetaTransition",
    "SubTransition",
]
