"""Function-level C/C++ multi-vulnerability scanner.

A lexer turns raw function source into fixed-length integer token
sequences; a five-head 1D-convolutional network (built from scratch on
numpy, trained with Adam) scores each sequence for five CWE categories;
training, metrics and a small scan service round out the pipeline.
"""

from .checkpoint import load_model, save_model
from .dataset import CorpusRecord, ImbalanceStats, imbalance_stats, load_corpus, write_corpus
from .layers import Mode
from .metrics import (
    ConfusionCounts,
    HeadMetrics,
    MetricsReport,
    confusion,
    evaluate_heads,
    format_benchmark,
    format_report,
    prf1,
    roc_auc,
)
from .model import (
    HEAD_NAMES,
    Hyperparams,
    ModelParams,
    ScanResult,
    forward,
    init_model,
    loss_and_grads,
    predict,
)
from .optimizer import AdamState, adam_step
from .synthetic import toy_corpus
from .tokenizer import (
    EncodedSample,
    Token,
    TokenKind,
    Vocabulary,
    build_vocabulary,
    encode,
    lex,
)
from .training import (
    Partitions,
    SplitSpec,
    TrainConfig,
    TrainHistory,
    encode_corpus,
    evaluate_model,
    split,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ConfusionCounts",
    "CorpusRecord",
    "EncodedSample",
    "HEAD_NAMES",
    "HeadMetrics",
    "Hyperparams",
    "ImbalanceStats",
    "MetricsReport",
    "Mode",
    "ModelParams",
    "Partitions",
    "ScanResult",
    "SplitSpec",
    "Token",
    "TokenKind",
    "TrainConfig",
    "TrainHistory",
    "Vocabulary",
    "adam_step",
    "build_vocabulary",
    "confusion",
    "encode",
    "encode_corpus",
    "evaluate_heads",
    "evaluate_model",
    "format_benchmark",
    "format_report",
    "forward",
    "imbalance_stats",
    "init_model",
    "lex",
    "load_corpus",
    "load_model",
    "loss_and_grads",
    "predict",
    "prf1",
    "roc_auc",
    "save_model",
    "split",
    "toy_corpus",
    "train",
    "write_corpus",
]
