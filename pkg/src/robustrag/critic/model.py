"""Linear evidence critic: scoring, hybrid objective, training loop."""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..validation import check_choice, check_scalar
from .features import DENSE_FEATURES, FeatureMap
from .losses import GroupLogits, conf_loss, conf_loss_grad, rank_loss, rank_loss_grad, sigmoid

log = logging.getLogger(__name__)

PARAMS_VERSION = "critic-params-1"


class TrainingError(RuntimeError):
    pass


class VersionMismatchError(ValueError):
    pass


@dataclass
class CriticParams:
    weights: np.ndarray
    bias: float
    version: str

    @classmethod
    def zeros(cls, feature_map):
        return cls(np.zeros(feature_map.n_features), 0.0, feature_map.version)

    def copy(self):
        return CriticParams(self.weights.copy(), float(self.bias), self.version)

    def __eq__(self, other):
        return (isinstance(other, CriticParams) and self.version == other.version
                and self.bias == other.bias and np.array_equal(self.weights, other.weights))

    def to_dict(self):
        hash_bits = int(self.version.rsplit("/h", 1)[1])
        return {"version": PARAMS_VERSION, "feature_map_version": self.version, "H": hash_bits,
                "weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != PARAMS_VERSION:
            raise VersionMismatchError(f"unsupported params version {d.get('version')!r}")
        weights = np.asarray(d["weights"], dtype=float)
        expected = len(DENSE_FEATURES) + (1 << int(d["H"]))
        if weights.shape != (expected,):
            raise VersionMismatchError(f"expected {expected} weights, found {weights.size}")
        if not np.all(np.isfinite(weights)) or not math.isfinite(d["bias"]):
            raise ValueError("params contain non-finite values")
        return cls(weights, float(d["bias"]), d["feature_map_version"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def score(params, fv):
    """Logit ``w . x + b`` for one feature vector."""
    if fv.version != params.version:
        raise VersionMismatchError(f"features {fv.version!r} vs params {params.version!r}")
    n = len(fv.dense)
    z = float(np.dot(params.weights[:n], fv.dense)) + params.bias
    for j, v in fv.hashed.items():
        z += params.weights[n + j] * v
    return z


_LO, _HI = np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0)


def clip_open_unit(p):
    # sigmoid saturates to exactly 0 or 1 in float64 for |z| > ~37
    return np.clip(p, _LO, _HI)


def predict_robustness(params, feature_map, query_text, doc):
    z = score(params, feature_map.transform(query_text, doc))
    return float(clip_open_unit(sigmoid(np.array([z])))[0])


@dataclass
class CompiledGroup:
    """A listwise group with its design matrix materialized."""
    X: object  # scipy CSR, rows follow the group's doc order
    targets: np.ndarray
    query_id: str = ""

    @property
    def masked(self):
        return not self.targets.sum() > 0


def compile_groups(groups, corpus, feature_map):
    return [
        CompiledGroup(feature_map.transform_many(g.perturbed_text, [corpus[d] for d in g.doc_ids]),
                      np.asarray(g.scores, dtype=float), g.query_id)
        for g in groups
    ]


def total_loss_and_grad(params, batch, tau=1.0, lam=1.0):
    """Mean of ``rank + lam * conf`` over unmasked groups, and its gradient.

    Returns ``(loss, grad_weights, grad_bias, parts)`` where ``parts`` holds
    the mean rank and confidence terms. Groups whose targets sum to zero
    contribute nothing.
    """
    if not batch:
        raise ValueError("empty batch")
    grad_w = np.zeros_like(params.weights)
    grad_b = 0.0
    sum_rank = sum_conf = 0.0
    used = 0
    for grp in batch:
        if grp.masked:
            continue
        z = grp.X @ params.weights + params.bias
        g = GroupLogits(z, grp.targets, tau)
        sum_rank += rank_loss(g)
        sum_conf += conf_loss(g)
        dz = rank_loss_grad(g) + lam * conf_loss_grad(g)
        grad_w += grp.X.T @ dz
        grad_b += float(dz.sum())
        used += 1
    if used == 0:
        raise ValueError("every group in the batch is masked")
    loss = (sum_rank + lam * sum_conf) / used
    return loss, grad_w / used, grad_b / used, {"rank": sum_rank / used, "conf": sum_conf / used, "groups": used}


class AdamW:
    """Adaptive moments with decoupled weight decay (bias is not decayed)."""

    def __init__(self, lr, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.wd, self.b1, self.b2, self.eps = lr, weight_decay, beta1, beta2, eps
        self.t = 0
        self.m = self.v = None
        self.mb = self.vb = 0.0

    def step(self, params, grad_w, grad_b):
        if self.m is None:
            self.m = np.zeros_like(params.weights)
            self.v = np.zeros_like(params.weights)
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * grad_w
        self.v = self.b2 * self.v + (1 - self.b2) * grad_w * grad_w
        self.mb = self.b1 * self.mb + (1 - self.b1) * grad_b
        self.vb = self.b2 * self.vb + (1 - self.b2) * grad_b * grad_b
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        params.weights -= self.lr * ((self.m / c1) / (np.sqrt(self.v / c2) + self.eps) + self.wd * params.weights)
        params.bias -= self.lr * (self.mb / c1) / (math.sqrt(self.vb / c2) + self.eps)


class SGD:
    def __init__(self, lr, weight_decay=0.0):
        self.lr, self.wd = lr, weight_decay

    def step(self, params, grad_w, grad_b):
        params.weights -= self.lr * (grad_w + self.wd * params.weights)
        params.bias -= self.lr * grad_b


@dataclass
class TrainConfig:
    epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 0.1
    tau: float = 1.0
    lam: float = 1.0
    weight_decay: float = 0.01
    seed: int = 42
    optimizer: str = "adamw"

    def validate(self):
        check_scalar(self.epochs, "epochs", kind=int, min_val=1)
        check_scalar(self.batch_size, "batch_size", kind=int, min_val=1)
        check_scalar(self.learning_rate, "learning_rate", min_val=0.0, include_min=False)
        check_scalar(self.tau, "tau", min_val=0.0, include_min=False)
        check_scalar(self.lam, "lam", min_val=0.0)
        check_scalar(self.weight_decay, "weight_decay", min_val=0.0)
        check_scalar(self.seed, "seed", kind=int)
        check_choice(self.optimizer, "optimizer", {"adamw", "sgd"})
        return self


@dataclass
class EpochLog:
    epoch: int
    mean_rank_loss: float
    mean_conf_loss: float
    mean_total: float


@dataclass
class TrainResult:
    params: CriticParams
    log: list = field(default_factory=list)


def train(compiled, init_params, cfg):
    """Seeded mini-batch training over compiled groups.

    Each epoch reshuffles group order with a generator seeded on
    ``(seed, epoch)``; the reported epoch losses are measured before each
    step, averaged over the epoch's unmasked groups.
    """
    cfg.validate()
    usable = [g for g in compiled if not g.masked]
    if not usable:
        raise TrainingError("no trainable groups (dataset empty or fully masked)")
    params = init_params.copy()
    opt = AdamW(cfg.learning_rate, cfg.weight_decay) if cfg.optimizer == "adamw" else SGD(cfg.learning_rate, cfg.weight_decay)
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = np.random.default_rng([cfg.seed, epoch]).permutation(len(usable))
        tot_r = tot_c = 0.0
        n = 0
        for start in range(0, len(order), cfg.batch_size):
            batch = [usable[i] for i in order[start:start + cfg.batch_size]]
            loss, gw, gb, parts = total_loss_and_grad(params, batch, cfg.tau, cfg.lam)
            if not (math.isfinite(loss) and np.all(np.isfinite(gw)) and math.isfinite(gb)):
                raise TrainingError(
                    f"non-finite loss/gradient at epoch {epoch}, batch offset {start}: loss={loss}, "
                    f"|w|max={np.max(np.abs(params.weights)):.3g}, bias={params.bias:.3g}"
                )
            opt.step(params, gw, gb)
            tot_r += parts["rank"] * parts["groups"]
            tot_c += parts["conf"] * parts["groups"]
            n += parts["groups"]
        entry = EpochLog(epoch, tot_r / n, tot_c / n, (tot_r + cfg.lam * tot_c) / n)
        log.info("epoch %d: rank=%.4f conf=%.4f total=%.4f", epoch, entry.mean_rank_loss,
                 entry.mean_conf_loss, entry.mean_total)
        history.append(entry)
    return TrainResult(params, history)


def write_training_log(history, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "mean_rank_loss", "mean_conf_loss", "mean_total"])
        for e in history:
            w.writerow([e.epoch, repr(e.mean_rank_loss), repr(e.mean_conf_loss), repr(e.mean_total)])


class EvidenceCritic(BaseEstimator):
    """Predicts how robust a document is for a (possibly biased) query.

    ``fit`` takes listwise groups and the corpus they reference; after fitting
    :meth:`predict_proba` returns sigmoid robustness scores in (0, 1).
    """

    def __init__(self, tau=1.0, lam=1.0, epochs=3, batch_size=32, learning_rate=0.1,
                 weight_decay=0.01, optimizer="adamw", hash_bits=14, seed=42):
        self.tau = tau
        self.lam = lam
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.optimizer = optimizer
        self.hash_bits = hash_bits
        self.seed = seed

    def _train_config(self):
        return TrainConfig(self.epochs, self.batch_size, self.learning_rate, self.tau, self.lam,
                           self.weight_decay, self.seed, self.optimizer)

    def fit(self, groups, corpus):
        check_scalar(self.hash_bits, "hash_bits", kind=int, min_val=1, max_val=24)
        if hasattr(groups, "groups"):
            groups = groups.groups
        if not groups:
            raise TrainingError("cannot fit on an empty dataset")
        self.feature_map_ = FeatureMap(self.hash_bits).fit(corpus)
        compiled = compile_groups(groups, corpus, self.feature_map_)
        result = train(compiled, CriticParams.zeros(self.feature_map_), self._train_config())
        self.params_ = result.params
        self.training_log_ = result.log
        return self

    @classmethod
    def from_params(cls, params, corpus, **kwargs):
        hash_bits = int(params.version.rsplit("/h", 1)[1])
        critic = cls(hash_bits=hash_bits, **kwargs)
        critic.feature_map_ = FeatureMap(hash_bits).fit(corpus)
        if critic.feature_map_.version != params.version:
            raise VersionMismatchError(f"params built for {params.version!r}")
        critic.params_ = params
        critic.training_log_ = []
        return critic

    def decision_function(self, query_text, docs):
        check_is_fitted(self, "params_")
        X = self.feature_map_.transform_many(query_text, docs)
        return X @ self.params_.weights + self.params_.bias

    def predict_proba(self, query_text, docs):
        return clip_open_unit(sigmoid(self.decision_function(query_text, docs)))

    def predict_robustness(self, query_text, doc):
        return float(self.predict_proba(query_text, [doc])[0])
