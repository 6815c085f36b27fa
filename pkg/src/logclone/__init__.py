"""Clone-based logging statement suggestion for Java code."""

from .clones import CloneIndex, ClonePair, CloneParams, brute_force_clone_pairs, build_index, classify_clone_type, find_clones, similarity
from .experiment import EvalReport, PipelineConfig, SplitSpec, run_pipeline, split_corpus
from .ingest import (
    Corpus,
    IngestConfig,
    LogPrintStatement,
    MethodDefinition,
    SourceFile,
    detect_and_parse_lps,
    extract_methods,
    read_corpus,
    scan_corpus,
    tokenize_method,
    write_corpus,
)
from .levels import predict_level, predict_variables
from .location import consistency_report, evaluate_location, predict_location
from .lsd import LsdLanguageModel, next_token_distribution, suggest_lsd_clone_only, suggest_lsd_hybrid, train_lsd_lm
from .metrics import bleu, rouge_l, rouge_n

__version__ = "0.1.0"
