"""Query-document cross features for the linear critic."""

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.utils import murmurhash3_32

from ..text import content_tokens, tokenize

DENSE_FEATURES = (
    "bm25",
    "unigram_overlap",
    "idf_overlap",
    "bigram_overlap",
    "log_doc_length",
    "missing_content",
)
FEATURE_MAP_VERSION = "xfeat-1"


def feature_map_version(hash_bits):
    return f"{FEATURE_MAP_VERSION}/d{len(DENSE_FEATURES)}/h{hash_bits}"


@dataclass
class FeatureVector:
    dense: np.ndarray
    hashed: dict  # bucket -> signed count
    version: str

    def to_array(self):
        n_hash = 1 << int(self.version.rsplit("/h", 1)[1])
        out = np.zeros(len(self.dense) + n_hash)
        out[:len(self.dense)] = self.dense
        for j, v in self.hashed.items():
            out[len(self.dense) + j] += v
        return out


def _bigrams(tokens):
    return set(zip(tokens, tokens[1:]))


class FeatureMap:
    """Dense lexical features plus signed hashing of shared uni/bigrams.

    Corpus statistics (document frequencies and mean length) come from the
    corpus passed to :meth:`fit`; unseen terms get the maximal idf.
    """

    def __init__(self, hash_bits=14, k1=1.2, b=0.75):
        self.hash_bits = hash_bits
        self.k1 = k1
        self.b = b

    @property
    def n_features(self):
        return len(DENSE_FEATURES) + (1 << self.hash_bits)

    @property
    def version(self):
        return feature_map_version(self.hash_bits)

    def fit(self, corpus):
        df = Counter()
        total = 0
        self._doc_tokens = {}
        for doc in corpus:
            toks = tokenize(doc.full_text)
            self._doc_tokens[doc.id] = toks
            df.update(set(toks))
            total += len(toks)
        self.n_docs_ = len(corpus)
        self.df_ = dict(df)
        self.avgdl_ = total / self.n_docs_ if self.n_docs_ else 1.0
        return self

    def idf(self, term):
        df = self.df_.get(term, 0)
        return math.log((self.n_docs_ - df + 0.5) / (df + 0.5) + 1.0)

    def _doc(self, doc):
        toks = self._doc_tokens.get(doc.id)
        if toks is None:
            toks = self._doc_tokens[doc.id] = tokenize(doc.full_text)
        return toks

    def _hash(self, key):
        h = murmurhash3_32(key, seed=0)
        return abs(h) % (1 << self.hash_bits), (1.0 if h >= 0 else -1.0)

    def transform(self, query_text, doc):
        q = tokenize(query_text)
        d = self._doc(doc)
        q_set, d_set = set(q), set(d)
        d_tf = Counter(d)
        shared = q_set & d_set

        norm = self.k1 * (1.0 - self.b + self.b * len(d) / self.avgdl_)
        bm25 = 0.0
        for term in q:
            tf = d_tf.get(term)
            if tf:
                bm25 += self.idf(term) * tf * (self.k1 + 1.0) / (tf + norm)
        idf_total = math.fsum(self.idf(t) for t in sorted(q_set))
        q_bi, d_bi = _bigrams(q), _bigrams(d)
        shared_bi = q_bi & d_bi
        q_content = set(content_tokens(q))
        dense = np.array([
            bm25,
            len(shared) / len(q_set) if q_set else 0.0,
            math.fsum(self.idf(t) for t in sorted(shared)) / idf_total if idf_total > 0 else 0.0,
            len(shared_bi) / max(1, len(q_bi)),
            math.log1p(len(d)),
            len(q_content - d_set) / len(q_content) if q_content else 0.0,
        ])
        hashed = {}
        keys = [f"u:{t}" for t in sorted(shared)] + [f"b:{a} {b}" for a, b in sorted(shared_bi)]
        for key in keys:
            j, sign = self._hash(key)
            hashed[j] = hashed.get(j, 0.0) + sign
        hashed = {j: v for j, v in hashed.items() if v != 0.0}
        return FeatureVector(dense, hashed, self.version)

    def transform_many(self, query_text, docs):
        """Sparse ``len(docs) x n_features`` design matrix."""
        n_dense = len(DENSE_FEATURES)
        rows, cols, vals = [], [], []
        for i, doc in enumerate(docs):
            fv = self.transform(query_text, doc)
            for j, v in enumerate(fv.dense):
                if v != 0.0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(v)
            for j in sorted(fv.hashed):
                rows.append(i)
                cols.append(n_dense + j)
                vals.append(fv.hashed[j])
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(docs), self.n_features))
