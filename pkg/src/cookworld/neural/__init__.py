from .nets import (
    EmptyCandidatesError,
    EmptyTextError,
    Parameter,
    PolicyNet,
    encode_graph,
    encode_text,
    load_checkpoint,
    save_checkpoint,
    score_candidates,
    sync_target,
)
from .optim import AdamState, apply_update

__all__ = [
    "EmptyCandidatesError",
    "EmptyTextError",
    "Parameter",
    "PolicyNet",
    "encode_graph",
    "encode_text",
    "load_checkpoint",
    "save_checkpoint",
    "score_candidates",
    "sync_target",
    "AdamState",
    "apply_update",
]
