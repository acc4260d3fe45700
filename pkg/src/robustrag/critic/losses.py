"""Listwise ranking and pointwise confidence losses with analytic gradients.

All functions work on one group: logits ``z`` and soft targets ``s`` over
the same documents. Gradients are with respect to ``z``.
"""

from dataclasses import dataclass

import numpy as np


class MaskedGroupError(ValueError):
    """A group whose targets sum to zero reached the ranking loss."""


@dataclass
class GroupLogits:
    z: np.ndarray
    targets: np.ndarray
    tau: float = 1.0

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.z.shape != self.targets.shape:
            raise ValueError("logits and targets differ in length")
        if self.tau <= 0:
            raise ValueError("tau must be > 0")


def log_softmax(x):
    shifted = x - np.max(x)
    return shifted - np.log(np.sum(np.exp(shifted)))


def log_sigmoid(z):
    # log(sigmoid(z)) = -log(1 + exp(-z)), evaluated without overflow
    return -np.logaddexp(0.0, -z)


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def rank_loss(g):
    """Cross-entropy from normalized targets to softmax(z / tau)."""
    total = g.targets.sum()
    if not total > 0:
        raise MaskedGroupError("targets sum to zero; mask the group before ranking")
    p = g.targets / total
    return float(-np.dot(p, log_softmax(g.z / g.tau)))


def rank_loss_grad(g):
    total = g.targets.sum()
    if not total > 0:
        raise MaskedGroupError("targets sum to zero; mask the group before ranking")
    p = g.targets / total
    q = np.exp(log_softmax(g.z / g.tau))
    return (q - p) / g.tau


def conf_loss(g):
    """Summed binary cross-entropy of sigmoid(z) against the soft targets."""
    s = g.targets
    return float(-np.sum(s * log_sigmoid(g.z) + (1.0 - s) * log_sigmoid(-g.z)))


def conf_loss_grad(g):
    return sigmoid(g.z) - g.targets
