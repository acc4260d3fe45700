"""Risk-aware retrieval-augmented QA with a distilled evidence critic."""

from .bm25 import BM25Retriever, Bm25Index, RankedCandidate, retrieve_top_m
from .corpus import Corpus, Document, ingest_corpus
from .critic import EvidenceCritic
from .distill import build_dataset, build_listwise_groups, label_robustness
from .evaluation import EvalRecord, EvalReport, accuracy, risk_coverage_curve, robustness_gap
from .generation import SycophantSim, judge_correct
from .inference import InferenceConfig, RiskAwareRAG, answer_pipeline, decide
from .perturbation import PType, QaExample, generate_perturbation_set, validate_perturbation

__version__ = "0.1.0"

__all__ = [
    "BM25Retriever", "Bm25Index", "RankedCandidate", "retrieve_top_m",
    "Corpus", "Document", "ingest_corpus",
    "EvidenceCritic",
    "build_dataset", "build_listwise_groups", "label_robustness",
    "EvalRecord", "EvalReport", "accuracy", "risk_coverage_curve", "robustness_gap",
    "SycophantSim", "judge_correct",
    "InferenceConfig", "RiskAwareRAG", "answer_pipeline", "decide",
    "PType", "QaExample", "generate_perturbation_set", "validate_perturbation",
]
