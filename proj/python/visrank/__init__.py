"""Re-ranking of k-best word hypotheses with visual context evidence."""

from ._core import (
    EmbeddingTable,
    EvalRecord,
    Hypothesis,
    PairEmbeddings,
    RerankConfig,
    TdpTable,
    UnigramModel,
    VisualContext,
    __version__,
    cascade_names,
    evaluate,
    generate_bench,
    load_records,
    normalize_token,
    rerank,
    save_records,
    train_pair_embeddings,
)

__all__ = [
    "EmbeddingTable",
    "EvalRecord",
    "Hypothesis",
    "PairEmbeddings",
    "RerankConfig",
    "TdpTable",
    "UnigramModel",
    "VisualContext",
    "__version__",
    "cascade_names",
    "evaluate",
    "generate_bench",
    "load_records",
    "normalize_token",
    "rerank",
    "save_records",
    "train_pair_embeddings",
]
