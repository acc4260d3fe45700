"""BM25 inverted index and top-M lexical retrieval."""

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .text import tokenize
from .validation import check_scalar

INDEX_MAGIC = "CORMIDX1"


class InvalidOrdinalError(IndexError):
    """Document ordinal outside the index."""


class EmptyIndexError(ValueError):
    """Retrieval was attempted over an index with no documents."""


@dataclass(frozen=True)
class RankedCandidate:
    doc_id: str
    retrieval_rank: int
    retrieval_score: float


class Bm25Index:
    """Immutable postings structure; build with :meth:`build`."""

    def __init__(self, doc_ids, postings, doc_lengths, k1=1.2, b=0.75):
        check_scalar(k1, "k1", min_val=0.0, include_min=False)
        check_scalar(b, "b", min_val=0.0, max_val=1.0)
        self.doc_ids = list(doc_ids)
        self.postings = postings
        self.doc_lengths = list(doc_lengths)
        self.k1 = float(k1)
        self.b = float(b)
        n = len(self.doc_lengths)
        self.avg_doc_length = sum(self.doc_lengths) / n if n else 0.0
        self._tf = [dict() for _ in range(n)]
        for term, plist in postings.items():
            for ordinal, tf in plist:
                if not 0 <= ordinal < n:
                    raise ValueError(f"posting for {term!r} points at ordinal {ordinal}")
                self._tf[ordinal][term] = tf

    @classmethod
    def build(cls, corpus, k1=1.2, b=0.75):
        postings = {}
        lengths = []
        for ordinal, doc in enumerate(corpus):
            tokens = tokenize(doc.full_text)
            lengths.append(len(tokens))
            for term, tf in Counter(tokens).items():
                postings.setdefault(term, []).append((ordinal, tf))
        return cls([d.id for d in corpus], postings, lengths, k1=k1, b=b)

    @property
    def doc_count(self):
        return len(self.doc_lengths)

    def df(self, term):
        return len(self.postings.get(term, ()))

    def idf(self, term):
        df = self.df(term)
        n = self.doc_count
        return math.log((n - df + 0.5) / (df + 0.5) + 1.0)

    def term_frequencies(self, ordinal):
        return self._tf[ordinal]

    def _term_weight(self, idf, tf, dl):
        norm = self.k1 * (1.0 - self.b + self.b * dl / self.avg_doc_length)
        return idf * tf * (self.k1 + 1.0) / (tf + norm)

    def score(self, query_tokens, ordinal):
        """BM25 score of one document; repeated query terms count repeatedly."""
        if not 0 <= ordinal < self.doc_count:
            raise InvalidOrdinalError(f"invalid document ordinal {ordinal}")
        tfs = self._tf[ordinal]
        dl = self.doc_lengths[ordinal]
        total = 0.0
        for term in query_tokens:
            tf = tfs.get(term)
            if tf:
                total += self._term_weight(self.idf(term), tf, dl)
        return total

    def score_all(self, query_tokens):
        """Scores for every document, accumulated term-at-a-time."""
        scores = [0.0] * self.doc_count
        for term in query_tokens:
            plist = self.postings.get(term)
            if not plist:
                continue
            idf = self.idf(term)
            for ordinal, tf in plist:
                scores[ordinal] += self._term_weight(idf, tf, self.doc_lengths[ordinal])
        return scores

    def retrieve(self, query, m):
        """Top-``m`` documents by score; ties go to the lower ordinal."""
        check_scalar(m, "m", kind=int, min_val=1)
        if self.doc_count == 0:
            raise EmptyIndexError("cannot retrieve from an empty index")
        scores = self.score_all(tokenize(query))
        order = sorted(range(self.doc_count), key=lambda i: (-scores[i], i))[:m]
        return [
            RankedCandidate(self.doc_ids[i], rank, scores[i])
            for rank, i in enumerate(order, start=1)
        ]

    # -- persistence ---------------------------------------------------------

    def to_dict(self):
        return {
            "k1": self.k1,
            "b": self.b,
            "doc_ids": self.doc_ids,
            "doc_lengths": self.doc_lengths,
            "postings": {t: [list(p) for p in self.postings[t]] for t in sorted(self.postings)},
        }

    def save(self, path):
        body = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        Path(path).write_text(f"{INDEX_MAGIC}\n{body}\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        raw = Path(path).read_text(encoding="utf-8")
        magic, _, body = raw.partition("\n")
        if magic != INDEX_MAGIC:
            raise ValueError(f"{path}: not an index file (expected {INDEX_MAGIC!r} header)")
        data = json.loads(body)
        postings = {t: [tuple(p) for p in plist] for t, plist in data["postings"].items()}
        return cls(data["doc_ids"], postings, data["doc_lengths"], k1=data["k1"], b=data["b"])


def bm25_score(index, query_tokens, doc):
    return index.score(query_tokens, doc)


def retrieve_top_m(index, query, m):
    return index.retrieve(query, m)


class BM25Retriever(BaseEstimator):
    """Estimator wrapper: ``fit`` builds the index from a :class:`Corpus`."""

    def __init__(self, k1=1.2, b=0.75):
        self.k1 = k1
        self.b = b

    def fit(self, corpus, y=None):
        check_scalar(self.k1, "k1", min_val=0.0, include_min=False)
        check_scalar(self.b, "b", min_val=0.0, max_val=1.0)
        self.index_ = Bm25Index.build(corpus, k1=self.k1, b=self.b)
        return self

    def retrieve(self, query, m):
        check_is_fitted(self, "index_")
        return self.index_.retrieve(query, m)

    def predict(self, queries, m=10):
        """Ranked doc ids for each query."""
        return [[c.doc_id for c in self.retrieve(q, m)] for q in queries]
