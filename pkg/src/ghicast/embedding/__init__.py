from .alias import AliasTable, alias_build, alias_sample
from .skipgram import Embedding, TrainConfig, embed_graph, read_embedding, train_skipgram, write_embedding
from .walks import WalkConfig, generate_walks

__all__ = [
    "AliasTable",
    "Embedding",
    "TrainConfig",
    "WalkConfig",
    "alias_build",
    "alias_sample",
    "embed_graph",
    "generate_walks",
    "read_embedding",
    "train_skipgram",
    "write_embedding",
]
