"""Risk-aware reranking, abstention and gated context construction."""

import enum
from dataclasses import dataclass

from .generation import GenerationRequest, SycophantSim
from .validation import check_scalar


class Status(str, enum.Enum):
    ANSWERED = "Answered"
    ABSTAINED = "Abstained"


ABSTAIN_MESSAGE = "Abstain: insufficient reliable evidence"


@dataclass(frozen=True)
class InferenceConfig:
    m: int = 100
    c: int = 3
    gamma: float = 0.0

    def __post_init__(self):
        check_scalar(self.c, "c", kind=int, min_val=1)
        check_scalar(self.m, "m", kind=int, min_val=self.c)
        check_scalar(self.gamma, "gamma", min_val=0.0, max_val=1.0)


@dataclass(frozen=True)
class ScoredCandidate:
    doc_id: str
    robustness: float
    retrieval_rank: int


@dataclass(frozen=True)
class InferenceOutcome:
    status: Status
    answer: str
    confidence: float
    context_ids: tuple
    ranked: tuple = ()

    @property
    def abstained(self):
        return self.status is Status.ABSTAINED

    def to_record(self, query_id, cfg):
        return {"query_id": query_id, "status": self.status.value, "answer": self.answer,
                "confidence": self.confidence, "context_ids": list(self.context_ids),
                "gamma": cfg.gamma, "c": cfg.c, "m": cfg.m}


def rerank(critic, query, candidates, corpus):
    """Score every candidate and sort by robustness; ties keep retrieval order."""
    if not candidates:
        raise ValueError("no candidates to rerank")
    probs = critic.predict_proba(query, [corpus[c.doc_id] for c in candidates])
    scored = [ScoredCandidate(c.doc_id, float(p), c.retrieval_rank) for c, p in zip(candidates, probs)]
    return sorted(scored, key=lambda s: (-s.robustness, s.retrieval_rank))


def decide(scored, cfg):
    """Doc ids admitted to the context; an empty list means abstain.

    ``scored`` must already be sorted by descending robustness. The first
    document below ``gamma`` stops admission, and at most ``cfg.c`` are kept.
    """
    if not scored:
        raise ValueError("no scored candidates")
    if scored[0].robustness < cfg.gamma:
        return []
    context = []
    for cand in scored[:cfg.c]:
        if cand.robustness < cfg.gamma:
            break
        context.append(cand.doc_id)
    return context


def answer_pipeline(query, index, critic, backend, cfg, corpus, gold_hint=None, bias_payload=None):
    """Retrieve top-M, rerank, gate by ``gamma`` and generate unless abstaining.

    ``gold_hint`` and ``bias_payload`` only reach the simulator backend.
    """
    candidates = index.retrieve(query, cfg.m)
    scored = rerank(critic, query, candidates, corpus)
    context = decide(scored, cfg)
    confidence = scored[0].robustness
    if not context:
        return InferenceOutcome(Status.ABSTAINED, None, confidence, (), tuple(scored))
    if isinstance(backend, SycophantSim):
        request = GenerationRequest(query, [corpus[d] for d in context], bias_payload, gold_hint or ())
    else:
        request = GenerationRequest(query, [corpus[d] for d in context])
    answer = backend.generate(request)
    return InferenceOutcome(Status.ANSWERED, answer, confidence, tuple(context), tuple(scored))


def baseline_answer(query, index, backend, cfg, corpus, gold_hint=None, bias_payload=None):
    """Lexical-order baseline: the first ``c`` BM25 hits, no gating."""
    candidates = index.retrieve(query, cfg.m)
    context = [c.doc_id for c in candidates[:cfg.c]]
    if isinstance(backend, SycophantSim):
        request = GenerationRequest(query, [corpus[d] for d in context], bias_payload, gold_hint or ())
    else:
        request = GenerationRequest(query, [corpus[d] for d in context])
    answer = backend.generate(request)
    scored = tuple(ScoredCandidate(c.doc_id, c.retrieval_score, c.retrieval_rank) for c in candidates)
    return InferenceOutcome(Status.ANSWERED, answer, candidates[0].retrieval_score, tuple(context), scored)


class RiskAwareRAG:
    """Bundles retriever, critic and generator behind one ``answer`` call."""

    def __init__(self, index, critic, backend, corpus, config=None):
        self.index = index
        self.critic = critic
        self.backend = backend
        self.corpus = corpus
        self.config = config or InferenceConfig()

    def answer(self, query, gold_hint=None, bias_payload=None):
        return answer_pipeline(query, self.index, self.critic, self.backend, self.config, self.corpus,
                               gold_hint=gold_hint, bias_payload=bias_payload)

    def predict(self, queries):
        return [self.answer(q) for q in queries]
