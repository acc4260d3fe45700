"""Critic backed by a remote cross-encoder: ``POST {query, document} -> {logit}``."""

import numpy as np

from ..remote import MalformedResponseError, RemoteClient
from .losses import sigmoid
from .model import clip_open_unit

SCORE_PATH = "/score"


class RemoteCritic:
    """Drop-in replacement for a fitted :class:`EvidenceCritic` at inference."""

    def __init__(self, endpoint, client=None):
        self.endpoint = endpoint
        self.client = client or RemoteClient(endpoint)

    def _logit(self, pair):
        query, doc = pair
        data = self.client.post_json(SCORE_PATH, {"query": query, "document": doc.full_text})
        try:
            return float(data["logit"])
        except (KeyError, TypeError, ValueError):
            raise MalformedResponseError("score response lacks a numeric 'logit'") from None

    def decision_function(self, query_text, docs):
        return np.array(self.client.map(self._logit, [(query_text, d) for d in docs]), dtype=float)

    def predict_proba(self, query_text, docs):
        return clip_open_unit(sigmoid(self.decision_function(query_text, docs)))

    def predict_robustness(self, query_text, doc):
        return float(self.predict_proba(query_text, [doc])[0])
