from .krat_encoder import (
    attention_scores,
    attention_weights,
    compose,
    encode,
    init_layer,
    init_tables,
    krat_layer_forward,
    message,
)

__all__ = [
    "attention_scores",
    "attention_weights",
    "compose",
    "encode",
    "init_layer",
    "init_tables",
    "krat_layer_forward",
    "message",
]
