from .conflict import batch_triples, conflict_ratio, sampled_conflict_ratio
from .gin import (
    GinLayer,
    GinModel,
    StarBatch,
    canonical_sum,
    embed_triples,
    gin_forward,
    init_label_features,
    load_model,
    save_model,
)
from .keys import (
    EmbeddingKey,
    GinEmbedder,
    StarEmbedder,
    WLEmbedder,
    embedding_key,
    make_embedder,
    quantize,
    wl_hash_key,
)
from .training import (
    LabelConfig,
    TrainConfig,
    TrainResult,
    assign_training_labels,
    compute_loss,
    loss_and_grad,
    train_model,
    training_stars,
)

__all__ = [
    "EmbeddingKey",
    "GinEmbedder",
    "GinLayer",
    "GinModel",
    "LabelConfig",
    "StarBatch",
    "StarEmbedder",
    "TrainConfig",
    "TrainResult",
    "WLEmbedder",
    "assign_training_labels",
    "batch_triples",
    "canonical_sum",
    "compute_loss",
    "conflict_ratio",
    "embed_triples",
    "embedding_key",
    "gin_forward",
    "init_label_features",
    "load_model",
    "loss_and_grad",
    "make_embedder",
    "quantize",
    "sampled_conflict_ratio",
    "save_model",
    "train_model",
    "training_stars",
    "wl_hash_key",
]
