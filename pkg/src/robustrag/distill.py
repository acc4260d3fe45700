"""Counterfactual robustness labels and per-perturbation listwise groups."""

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .generation import GenerationRequest, judge_correct

DATASET_VERSION = "CORMDS1"


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CandidatePools:
    query_id: str
    clean_pool: tuple
    perturbed_pools: tuple
    perturbed_texts: tuple
    k_indices: tuple
    m: int

    @property
    def doc_ids(self):
        """Every pooled doc id, first appearance order."""
        seen = {}
        for pool in (self.clean_pool, *self.perturbed_pools):
            for c in pool:
                seen.setdefault(c.doc_id, None)
        return list(seen)


@dataclass(frozen=True)
class RobustnessLabel:
    query_id: str
    doc_id: str
    score: float
    per_perturbation: tuple

    @property
    def k(self):
        return len(self.per_perturbation)


@dataclass(frozen=True)
class ListwiseGroup:
    query_id: str
    k_index: int
    perturbed_text: str
    doc_ids: tuple
    scores: tuple
    anchor_index: int

    @property
    def anchor(self):
        return self.doc_ids[self.anchor_index], self.scores[self.anchor_index]

    @property
    def negatives(self):
        return [(d, s) for i, (d, s) in enumerate(zip(self.doc_ids, self.scores)) if i != self.anchor_index]

    def __len__(self):
        return len(self.doc_ids)


@dataclass
class DistillDataset:
    groups: list
    k: int
    n_neg: int
    seed: int
    provenance: dict = field(default_factory=dict)

    @property
    def config_hash(self):
        blob = json.dumps(self.provenance, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def build_candidate_pools(example, pset, index, m):
    """One retrieval for the clean question plus one per perturbed query."""
    clean = tuple(index.retrieve(example.question, m))
    perturbed = tuple(tuple(index.retrieve(p.text, m)) for p in pset.members)
    return CandidatePools(
        example.id, clean, perturbed,
        tuple(p.text for p in pset.members),
        tuple(p.perturbation_index for p in pset.members), m,
    )


def _teacher_requests(example, pset, doc):
    return [
        GenerationRequest(p.text, (doc,), p.bias_payload, example.gold_answers)
        for p in pset.members
    ]


def _make_label(example, doc_id, outcomes):
    outcomes = tuple(bool(o) for o in outcomes)
    return RobustnessLabel(example.id, doc_id, sum(outcomes) / len(outcomes), outcomes)


def label_robustness(example, pset, doc, backend):
    """Fraction of the K perturbed queries under which ``doc`` alone keeps the answer right."""
    if pset.k < 1:
        raise ValueError("robustness labels need at least one perturbation")
    try:
        answers = backend.generate_many(_teacher_requests(example, pset, doc))
    except Exception as exc:
        raise RuntimeError(f"teacher failed on query {example.id!r}, doc {doc.id!r}: {exc}") from exc
    return _make_label(example, doc.id, [judge_correct(a, example.gold_answers) for a in answers])


def label_pools(example, pset, pools, corpus, backend):
    """Labels for every pooled doc, issuing all teacher calls as one batch."""
    if pset.k < 1:
        return {}
    doc_ids = pools.doc_ids
    requests = []
    for doc_id in doc_ids:
        requests.extend(_teacher_requests(example, pset, corpus[doc_id]))
    try:
        answers = backend.generate_many(requests)
    except Exception as exc:
        raise RuntimeError(f"teacher failed on query {example.id!r}: {exc}") from exc
    labels = {}
    k = pset.k
    for i, doc_id in enumerate(doc_ids):
        chunk = answers[i * k:(i + 1) * k]
        labels[doc_id] = _make_label(example, doc_id, [judge_correct(a, example.gold_answers) for a in chunk])
    return labels


def build_listwise_groups(pools, labels, n_neg, seed):
    """One group per perturbation: a surviving clean-pool anchor plus zero-score negatives.

    Returns ``(groups, skipped)``; a perturbation is skipped when no clean-pool
    document has a positive score. Negatives are drawn without replacement, so
    a group shrinks when its perturbed pool has fewer than ``n_neg`` of them.
    """
    rng = random.Random(f"{seed}|{pools.query_id}")
    positives = [c.doc_id for c in pools.clean_pool if labels[c.doc_id].score > 0]
    groups = []
    skipped = 0
    for pool, text, k_index in zip(pools.perturbed_pools, pools.perturbed_texts, pools.k_indices):
        if not positives:
            skipped += 1
            continue
        anchor = rng.choice(positives)
        zero = [c.doc_id for c in pool if labels[c.doc_id].score == 0 and c.doc_id != anchor]
        negatives = rng.sample(zero, min(n_neg, len(zero)))
        members = [anchor] + negatives
        rng.shuffle(members)
        scores = tuple(labels[d].score for d in members)
        groups.append(ListwiseGroup(pools.query_id, k_index, text, tuple(members), scores, members.index(anchor)))
    return groups, skipped


def build_dataset(examples, psets, index, corpus, backend, m, n_neg, seed, provenance=None):
    """Pools, labels and groups for every example, in example order."""
    groups = []
    skipped = 0
    n_labels = 0
    k = 0
    for ex in examples:
        pset = psets[ex.id]
        k = max(k, pset.k)
        pools = build_candidate_pools(ex, pset, index, m)
        labels = label_pools(ex, pset, pools, corpus, backend)
        n_labels += len(labels)
        if not labels:
            continue
        g, s = build_listwise_groups(pools, labels, n_neg, seed)
        groups.extend(g)
        skipped += s
    prov = dict(provenance or {})
    prov.update({"m": m, "queries": len(examples), "labels": n_labels, "skipped_groups": skipped})
    return DistillDataset(groups, k, n_neg, seed, prov)


# -- persistence ---------------------------------------------------------------


def write_dataset(ds, path):
    header = {"version": DATASET_VERSION, "k": ds.k, "n_neg": ds.n_neg, "seed": ds.seed,
              "config_hash": ds.config_hash, "provenance": ds.provenance}
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for g in ds.groups:
            rec = {
                "query_id": g.query_id,
                "k_index": g.k_index,
                "perturbed_text": g.perturbed_text,
                "docs": [{"doc_id": d, "s": s} for d, s in zip(g.doc_ids, g.scores)],
                "anchor_index": g.anchor_index,
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_dataset(path):
    with Path(path).open(encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise DatasetFormatError(f"{path}: missing header line")
        header = json.loads(first)
        if header.get("version") != DATASET_VERSION:
            raise DatasetFormatError(
                f"{path}: unsupported dataset version {header.get('version')!r} (expected {DATASET_VERSION})"
            )
        groups = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                groups.append(ListwiseGroup(
                    rec["query_id"], int(rec["k_index"]), rec["perturbed_text"],
                    tuple(d["doc_id"] for d in rec["docs"]),
                    tuple(float(d["s"]) for d in rec["docs"]),
                    int(rec["anchor_index"]),
                ))
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetFormatError(f"{path}:{lineno}: bad group record ({exc})") from None
    return DistillDataset(groups, int(header["k"]), int(header["n_neg"]), int(header["seed"]),
                          header.get("provenance", {}))
