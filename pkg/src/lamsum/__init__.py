"""Extractive summaries of large post collections via chunked LLM calls and voting."""

from .calibration import CalibrationConfig, CalibrationResult, check, edit_distance, extract_keywords
from .chunker import Chunk, ChunkPlan, plan_chunks
from .config import ConfigError, PipelineConfig
from .corpus import Corpus, ReferenceSummary, TextualUnit, load_corpus, load_references, save_corpus
from .estimator import ExtractiveSummarizer
from .evaluation import (
    EvalReport,
    RougeScore,
    category_entropy,
    evaluate,
    fleiss_kappa,
    rouge_lsum,
    rouge_n,
    score_summary,
    word_stats,
)
from .pipeline import LevelTrace, SummarySelection, level_sizes, run_level, summarize, summarize_vanilla
from .voting import ApprovalProfile, ElectionOutcome, RankedProfile, borda, pad_ranking, pav_exact, pav_sequential, plurality

__version__ = "0.1.0"
